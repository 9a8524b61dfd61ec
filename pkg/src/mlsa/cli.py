"""Command-line front end: generate instances, run experiments, audit, report.

Usage examples:

    mlsa run   --task classification --seed 7 --out runs/c0
    mlsa run   --task logistic --seed 3 --out runs/l0 --set n=20 mc_samples=20000
    mlsa gen   --task density --seed 1 --out runs/gen0
    mlsa audit --task regression --seed 5 --out runs/a0
    mlsa sweep --config sweep.cfg --seed 11 --out runs/sweep0 --threads 4
    mlsa report runs/sweep0/results.csv --out summary.txt

Config files are plain text, one ``key = value`` per line, ``#`` comments.
In sweep configs a comma-separated value lists the points of a parameter grid
and the sweep runs the cartesian product.  Every run is a pure function of the
64-bit master seed: per-instance seeds are derived by hashing the component
path (task name, combo index, instance index) with SHA-256, so serial and
parallel executions produce identical results.  The flat CSV written next to
each report has the stable schema
``instance_id,n,d,loo,erm_per_n,bound,slack,rho_hat`` across all tasks;
task-specific detail lives in the structured report only.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import audit as audit_mod
from . import classification as cls_mod
from . import density as den_mod
from . import generators as gen_mod
from . import linear as lin_mod
from . import logistic as log_mod
from . import regression as reg_mod
from .core import ToleranceGrid, run_mlsa

__all__ = ["ExperimentConfig", "run_experiment", "derive_seed", "main"]

TASKS = ("classification", "regression", "density", "logistic", "vaw")
CSV_HEADER = "instance_id,n,d,loo,erm_per_n,bound,slack,rho_hat"


def derive_seed(master: int, *parts) -> int:
    """Stable 64-bit sub-seed for a named component of a run."""
    text = f"{master}/" + "/".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    seed: int
    n: int = 50
    d: int = 1
    class_size: int = 8
    space_size: int = 8
    loss: str = "squared"
    M: float = 1.0
    r: float = 1.0
    R: float = 1.0
    eps: float = 0.0  # density smoothing; 0 disables, -1 means 1/n
    noise: float = 0.0
    generator: str = ""  # classification descriptor; default picked from d
    k_intervals: int = 2
    mc_samples: int = 20_000
    min_accepted: int = 100
    svd_tol: float = 0.0  # 0 = numerical-rank default for the vaw task
    grid_levels: int = 0  # 0 = task default; otherwise overrides the level count
    instances: int = 1
    threads: int = 1
    out: str = "."

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; choose from {TASKS}")
        if self.instances < 1:
            raise ValueError("instances must be positive")

    @property
    def descriptor(self) -> str:
        if self.generator:
            return self.generator
        return {1: "thresholds-1d", 2: "intervals-1d", 4: "axis-rectangles-2d"}.get(
            self.d, "thresholds-1d"
        )


_INT_FIELDS = {
    "seed", "n", "d", "class_size", "space_size", "k_intervals",
    "mc_samples", "min_accepted", "grid_levels", "instances", "threads",
}
_FLOAT_FIELDS = {"M", "r", "R", "eps", "noise", "svd_tol"}


def _parse_scalar(key: str, raw: str):
    raw = raw.strip()
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        if raw == "1/n":
            return -1.0
        return float(raw)
    return raw


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; comma-separated values become lists."""
    known = {f.name for f in fields(ExperimentConfig)}
    out: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        if "," in raw and key not in ("out", "generator", "loss", "task"):
            out[key] = [_parse_scalar(key, v) for v in raw.split(",")]
        elif "," in raw:
            out[key] = [v.strip() for v in raw.split(",")]
        else:
            out[key] = _parse_scalar(key, raw)
    return out


@dataclass
class InstanceResult:
    instance_id: str
    n: int
    d: int
    loo: float
    erm_per_n: float
    bound: float
    slack: float
    rho_hat: Optional[float]
    certificates: list = field(default_factory=list)
    sections: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    def csv_row(self) -> str:
        rho = "" if self.rho_hat is None else repr(float(self.rho_hat))
        return ",".join(
            [
                self.instance_id,
                str(self.n),
                str(self.d),
                repr(float(self.loo)),
                repr(float(self.erm_per_n)),
                repr(float(self.bound)),
                repr(float(self.slack)),
                rho,
            ]
        )


def _grid_override(grid: ToleranceGrid, levels: int) -> ToleranceGrid:
    return ToleranceGrid(levels=grid.gap * np.arange(1, levels + 1, dtype=float), gap=grid.gap)


def _run_classification(config: ExperimentConfig, seed: int, instance_id: str, deep_audit: bool) -> InstanceResult:
    rng = np.random.default_rng(derive_seed(seed, "generate"))
    inst = gen_mod.make_classification_instance(
        config.descriptor, config.n, config.noise, rng, k=config.k_intervals
    )
    d = cls_mod.descriptor_vc_dimension(config.descriptor, config.k_intervals)
    loss = cls_mod.zero_one_loss()
    grid = cls_mod.classification_grid(d, config.n)
    overridden = config.grid_levels > 0
    if overridden:
        grid = _grid_override(grid, config.grid_levels)
    output = run_mlsa(inst.table, inst.sample, loss, grid, cls_mod.MAJORITY_VOTE)
    growth = audit_mod.grid_growth_audit(inst.table, inst.sample, loss, grid)
    erm = float(cls_mod.loss_matrix(inst.table, inst.sample, loss).sum(axis=0).min())
    certs = [audit_mod.verify_grid_majority_bound(output, growth, erm)]
    if not overridden:
        certs.append(
            cls_mod.verify_classification_bound(output, inst.table, inst.sample, d, config.n)
        )
    if deep_audit:
        agg = audit_mod.check_aggregation_stability(
            cls_mod.MAJORITY_VOTE, loss, inst.table, inst.sample,
            seed=derive_seed(seed, "agg-check"),
        )
        if not agg.passed:
            raise RuntimeError(f"aggregation check failed: {agg.first_violation}")
    headline = certs[-1]
    return InstanceResult(
        instance_id=instance_id,
        n=config.n,
        d=d,
        loo=output.loo_error,
        erm_per_n=erm / config.n,
        bound=headline.rhs,
        slack=headline.slack,
        rho_hat=growth.good_fraction,
        certificates=certs,
        sections={
            "instance": {
                "class_size": inst.table.n_hypotheses,
                "flip_fraction": inst.flip_fraction,
                "descriptor": config.descriptor,
            },
            "growth-audit": {
                "good_fraction": growth.good_fraction,
                "delta": growth.delta,
                "c_g": growth.c_g,
                "levels": len(growth.levels),
            },
        },
    )


def _run_regression(config: ExperimentConfig, seed: int, instance_id: str, deep_audit: bool) -> InstanceResult:
    rng = np.random.default_rng(derive_seed(seed, "generate"))
    inst = gen_mod.make_regression_instance(config.n, config.class_size, config.noise, rng)
    loss = reg_mod.scale_loss(config.loss, config.M)
    grid = reg_mod.regression_grid(config.M, config.class_size)
    overridden = config.grid_levels > 0
    if overridden:
        grid = _grid_override(grid, config.grid_levels)
    output = run_mlsa(inst.table, inst.sample, loss, grid, reg_mod.MEAN_AGGREGATE)
    growth = audit_mod.grid_growth_audit(inst.table, inst.sample, loss, grid)
    erm = float(cls_mod.loss_matrix(inst.table, inst.sample, loss).sum(axis=0).min())
    certs = [audit_mod.verify_grid_majority_bound(output, growth, erm)]
    if not overridden:
        certs.append(
            reg_mod.verify_regression_bound(output, inst.table, inst.sample, loss, config.M)
        )
    if deep_audit:
        agg = audit_mod.check_aggregation_stability(
            reg_mod.MEAN_AGGREGATE, loss, inst.table, inst.sample,
            seed=derive_seed(seed, "agg-check"),
        )
        if not agg.passed:
            raise RuntimeError(f"aggregation check failed: {agg.first_violation}")
    headline = certs[-1]
    return InstanceResult(
        instance_id=instance_id,
        n=config.n,
        d=0,
        loo=output.loo_error,
        erm_per_n=erm / config.n,
        bound=headline.rhs,
        slack=headline.slack,
        rho_hat=growth.good_fraction,
        certificates=certs,
        sections={
            "instance": {"class_size": config.class_size, "loss": loss.name},
            "growth-audit": {
                "good_fraction": growth.good_fraction,
                "delta": growth.delta,
                "c_g": growth.c_g,
                "levels": len(growth.levels),
            },
        },
    )


def _run_density(config: ExperimentConfig, seed: int, instance_id: str, deep_audit: bool) -> InstanceResult:
    rng = np.random.default_rng(derive_seed(seed, "generate"))
    inst = gen_mod.make_density_instance(
        config.class_size, config.space_size, config.n, rng
    )
    eps = config.eps
    if eps == -1.0:
        eps = 1.0 / config.n
    certs = []
    sections: dict = {
        "instance": {
            "class_size": config.class_size,
            "space_size": config.space_size,
            "log_ratio_bound": inst.dclass.log_ratio_bound,
        }
    }
    if eps > 0:
        smoothed = den_mod.smooth_class(inst.dclass, eps)
        output = den_mod.mlsa_for_density(smoothed, inst.observations)
        certs.append(
            den_mod.smoothing_inflation(inst.dclass, smoothed, inst.observations, eps)
        )
        certs.append(
            den_mod.verify_smoothed_density(output, inst.dclass, inst.observations, eps)
        )
        working = smoothed
        sections["instance"]["eps"] = eps
        sections["instance"]["smoothed_log_ratio_bound"] = smoothed.log_ratio_bound
    else:
        output = den_mod.mlsa_for_density(inst.dclass, inst.observations)
        certs.append(den_mod.verify_density_bound(output, inst.dclass, inst.observations))
        working = inst.dclass
    table, loss, sample = den_mod.log_loss_table(working, inst.observations)
    rho = None
    if working.n_densities >= 2:
        growth = audit_mod.grid_growth_audit(table, sample, loss, output.grid)
        rho = growth.good_fraction
        sections["growth-audit"] = {
            "good_fraction": growth.good_fraction,
            "delta": growth.delta,
            "c_g": growth.c_g,
            "levels": len(growth.levels),
        }
        certs.append(
            audit_mod.verify_grid_majority_bound(
                output,
                growth,
                float(cls_mod.loss_matrix(table, sample, loss).sum(axis=0).min()),
            )
        )
    if deep_audit and working.n_densities >= 2:
        agg = audit_mod.check_aggregation_stability(
            reg_mod.MEAN_AGGREGATE, loss, table, sample,
            seed=derive_seed(seed, "agg-check"),
        )
        if not agg.passed:
            raise RuntimeError(f"aggregation check failed: {agg.first_violation}")
    headline = certs[1] if eps > 0 else certs[0]
    erm = den_mod._erm_loss(working, np.asarray(inst.observations))
    return InstanceResult(
        instance_id=instance_id,
        n=config.n,
        d=0,
        loo=output.loo_error,
        erm_per_n=erm / config.n,
        bound=headline.rhs,
        slack=headline.slack,
        rho_hat=rho,
        certificates=certs,
        sections=sections,
    )


def _run_logistic(config: ExperimentConfig, seed: int, instance_id: str, deep_audit: bool) -> InstanceResult:
    rng = np.random.default_rng(derive_seed(seed, "generate"))
    problem = gen_mod.make_logistic_problem(
        config.n, config.d, config.r, config.R, rng, noise=config.noise
    )
    mc = log_mod.McConfig(
        samples_per_level=config.mc_samples,
        seed=derive_seed(seed, "mc"),
        min_accepted=config.min_accepted,
    )
    run = log_mod.run_mlsa_logistic(problem, mc)
    cert = log_mod.verify_logistic_bound(run.output, run.geometry, problem)
    sandwich = log_mod.crn_sandwich_report(run)
    certs = [cert]
    sections = {
        "geometry": log_mod.geometry_report(run.geometry, problem),
        "crn-sandwich": {"cells": sandwich.cells, "violations": sandwich.violations},
    }
    if deep_audit:
        containment = log_mod.verify_ellipsoid_containment(
            run.geometry, problem, mc, seed=derive_seed(seed, "containment")
        )
        volume = log_mod.verify_volume_lower_bound(
            run.geometry, problem, mc, seed=derive_seed(seed, "volume")
        )
        sections["containment"] = {
            "violations": containment.violations,
            "halfspace_fraction": containment.halfspace_fraction,
            "interior": containment.interior,
            "passed": containment.passed,
        }
        sections["volume-bound"] = {
            "estimate": volume.estimate,
            "threshold": volume.threshold,
            "passed": volume.passed,
        }
        if not (containment.passed and volume.passed and sandwich.passed):
            raise RuntimeError("logistic geometry audit failed; see report sections")
    erm = cert.components["erm_loss"]
    return InstanceResult(
        instance_id=instance_id,
        n=config.n,
        d=config.d,
        loo=run.output.loo_error,
        erm_per_n=erm / config.n,
        bound=cert.rhs,
        slack=cert.slack,
        rho_hat=None,
        certificates=certs,
        sections=sections,
    )


def _run_vaw(config: ExperimentConfig, seed: int, instance_id: str, deep_audit: bool) -> InstanceResult:
    rng = np.random.default_rng(derive_seed(seed, "generate"))
    X, y = gen_mod.make_linear_instance(
        config.n, config.d, rng, rank_deficient=config.noise > 0
    )
    svd_tol = config.svd_tol if config.svd_tol > 0 else None
    result = lin_mod.fit_transductive_vaw(X, y, svd_tol=svd_tol)
    cert = lin_mod.vaw_certificate(result)
    sections = {
        "instance": {"rank": result.rank, "m_sq": result.m_sq},
    }
    if deep_audit:
        pinv = lin_mod.verify_pinv_identity(X, svd_tol=svd_tol)
        sections["pinv-identity"] = {
            "max_abs_diff": pinv.max_abs_diff,
            "passed": pinv.passed,
        }
        if not pinv.passed:
            raise RuntimeError("pseudoinverse identity check failed")
    return InstanceResult(
        instance_id=instance_id,
        n=config.n,
        d=config.d,
        loo=result.loo_sq_sum / config.n,
        erm_per_n=result.fit_sq_sum / config.n,
        bound=cert.rhs / config.n,
        slack=(cert.rhs - cert.lhs) / config.n,
        rho_hat=None,
        certificates=[cert],
        sections=sections,
    )


_RUNNERS = {
    "classification": _run_classification,
    "regression": _run_regression,
    "density": _run_density,
    "logistic": _run_logistic,
    "vaw": _run_vaw,
}


def run_experiment(
    config: ExperimentConfig, instance_index: int = 0, deep_audit: bool = False
) -> InstanceResult:
    """Generate one instance from the derived seed and run its full pipeline."""
    seed = derive_seed(config.seed, config.task, instance_index)
    instance_id = f"{config.task}-{instance_index:04d}"
    return _RUNNERS[config.task](config, seed, instance_id, deep_audit)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return str(value)


def write_report(path: Path, config: ExperimentConfig, results, timings: dict) -> None:
    lines = ["[config]"]
    for f in fields(ExperimentConfig):
        lines.append(f"{f.name} = {_format_value(getattr(config, f.name))}")
    for res in results:
        lines.append("")
        lines.append(f"[run {res.instance_id}]")
        lines.append(f"loo = {repr(res.loo)}")
        lines.append(f"erm_per_n = {repr(res.erm_per_n)}")
        lines.append(f"passed = {res.passed}")
        for section, payload in res.sections.items():
            lines.append(f"[run {res.instance_id} / {section}]")
            for key, value in payload.items():
                lines.append(f"{key} = {_format_value(value)}")
        for cert in res.certificates:
            lines.append(f"[run {res.instance_id} / certificate {cert.name}]")
            lines.append(f"lhs = {repr(cert.lhs)}")
            lines.append(f"rhs = {repr(cert.rhs)}")
            lines.append(f"slack = {repr(cert.slack)}")
            lines.append(f"passed = {cert.passed}")
            for key, value in cert.components.items():
                lines.append(f"{key} = {_format_value(value)}")
    lines.append("")
    lines.append("[timing]")
    for key, value in timings.items():
        lines.append(f"{key} = {value:.3f}")
    path.write_text("\n".join(lines) + "\n")


def write_csv(path: Path, results) -> None:
    rows = [CSV_HEADER] + [res.csv_row() for res in results]
    path.write_text("\n".join(rows) + "\n")


def _expand_sweep(params: dict) -> list[dict]:
    """Cartesian product over the list-valued parameters, in file order."""
    combos = [dict()]
    for key, value in params.items():
        options = value if isinstance(value, list) else [value]
        combos = [dict(combo, **{key: option}) for combo in combos for option in options]
    return combos


def _gen_files(config: ExperimentConfig, out: Path) -> None:
    seed = derive_seed(config.seed, config.task, 0)
    rng = np.random.default_rng(derive_seed(seed, "generate"))
    fmt = "%.17g"
    if config.task == "classification":
        inst = gen_mod.make_classification_instance(
            config.descriptor, config.n, config.noise, rng, k=config.k_intervals
        )
        np.savetxt(out / "covariates.txt", np.atleast_2d(inst.covariates).T
                   if inst.covariates.ndim == 1 else inst.covariates, fmt=fmt)
        np.savetxt(out / "labels.txt", inst.sample.responses, fmt=fmt)
        np.savetxt(out / "table.txt", inst.table.values, fmt=fmt)
    elif config.task == "regression":
        inst = gen_mod.make_regression_instance(
            config.n, config.class_size, config.noise, rng
        )
        np.savetxt(out / "table.txt", inst.table.values, fmt=fmt)
        np.savetxt(out / "responses.txt", inst.sample.responses, fmt=fmt)
    elif config.task == "density":
        inst = gen_mod.make_density_instance(
            config.class_size, config.space_size, config.n, rng
        )
        np.savetxt(out / "densities.txt", inst.dclass.probs, fmt=fmt)
        np.savetxt(out / "observations.txt", inst.observations, fmt="%d")
    elif config.task == "logistic":
        problem = gen_mod.make_logistic_problem(
            config.n, config.d, config.r, config.R, rng, noise=config.noise
        )
        np.savetxt(
            out / "problem.txt",
            np.column_stack([problem.covariates, problem.labels]),
            fmt=fmt,
        )
    else:
        X, y = gen_mod.make_linear_instance(
            config.n, config.d, rng, rank_deficient=config.noise > 0
        )
        np.savetxt(out / "design.txt", np.column_stack([X, y]), fmt=fmt)


def _build_config(args, overrides: dict) -> tuple[ExperimentConfig, dict]:
    params: dict = {}
    if args.config:
        params.update(parse_config_file(args.config))
    params.update(overrides)
    if getattr(args, "task", None):
        params["task"] = args.task
    if args.seed is not None:
        params["seed"] = args.seed
    if getattr(args, "threads", None):
        params["threads"] = args.threads
    if args.out:
        params["out"] = args.out
    if "task" not in params:
        raise ValueError("a task is required (flag --task or config key)")
    if "seed" not in params:
        raise ValueError("a seed is required (flag --seed or config key); "
                         "runs never use ambient randomness")
    scalar = {k: (v[0] if isinstance(v, list) else v) for k, v in params.items()}
    return ExperimentConfig(**scalar), params


def _cmd_run(args, deep_audit: bool) -> int:
    config, _ = _build_config(args, _parse_sets(args.set))
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    results = []
    for idx in range(config.instances):
        results.append(run_experiment(config, idx, deep_audit=deep_audit))
    elapsed = time.perf_counter() - t0
    write_report(out / "report.txt", config, results, {"total_s": elapsed})
    write_csv(out / "results.csv", results)
    failed = [r for r in results if not r.passed]
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.instance_id} loo={res.loo:.6g} slack={res.slack:.6g}")
    return 1 if failed else 0


def _cmd_gen(args) -> int:
    config, _ = _build_config(args, _parse_sets(args.set))
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    _gen_files(config, out)
    print(f"instance files written to {out}")
    return 0


def _cmd_sweep(args) -> int:
    config, params = _build_config(args, _parse_sets(args.set))
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    combos = _expand_sweep(params)
    jobs = []
    for combo in combos:
        combo_config = ExperimentConfig(**{k: v for k, v in combo.items()})
        for _ in range(combo_config.instances):
            jobs.append((len(jobs), combo_config))
    t0 = time.perf_counter()

    def _work(job):
        index, cfg = job
        return run_experiment(cfg, instance_index=index)

    if config.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(_work, jobs))
    else:
        results = [_work(job) for job in jobs]
    elapsed = time.perf_counter() - t0
    write_report(out / "report.txt", config, results, {"total_s": elapsed})
    write_csv(out / "results.csv", results)
    failed = sum(not r.passed for r in results)
    print(f"{len(results)} runs, {failed} failed, {elapsed:.2f}s")
    return 1 if failed else 0


def _cmd_report(args) -> int:
    rows = []
    for path in args.csvs:
        lines = Path(path).read_text().strip().splitlines()
        if lines and lines[0] == CSV_HEADER:
            lines = lines[1:]
        rows.extend(line.split(",") for line in lines if line)
    by_task: dict[str, list] = {}
    for row in rows:
        task = row[0].rsplit("-", 1)[0]
        by_task.setdefault(task, []).append(row)
    lines = [f"{'task':<16}{'runs':>6}{'fail':>6}{'max_loo':>12}{'min_slack':>12}{'min_rho':>9}"]
    failures = 0
    for task in sorted(by_task):
        entries = by_task[task]
        loos = [float(r[3]) for r in entries]
        slacks = [float(r[6]) for r in entries]
        rhos = [float(r[7]) for r in entries if r[7]]
        fails = sum(s < -1e-9 for s in slacks)
        failures += fails
        rho_txt = f"{min(rhos):9.4f}" if rhos else "        -"
        lines.append(
            f"{task:<16}{len(entries):>6}{fails:>6}{max(loos):>12.5f}{min(slacks):>12.5f}{rho_txt}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 1 if failures else 0


def _parse_sets(pairs) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        overrides[key.strip()] = _parse_scalar(key.strip(), raw)
    return overrides


def _add_common(parser, with_task=True):
    if with_task:
        parser.add_argument("--task", choices=TASKS)
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--seed", type=int, help="64-bit master seed (mandatory)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="parallel instance workers")
    parser.add_argument(
        "--set", nargs="*", metavar="KEY=VALUE", help="config overrides"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mlsa", description="median of level-set aggregation experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("gen", help="write a synthetic instance to disk"))
    _add_common(sub.add_parser("run", help="generate, run, certify, report"))
    _add_common(sub.add_parser("audit", help="run plus the full audit battery"))
    _add_common(sub.add_parser("sweep", help="cartesian parameter grid of runs"))
    rep = sub.add_parser("report", help="aggregate result CSVs into a summary")
    rep.add_argument("csvs", nargs="+")
    rep.add_argument("--out")
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "run":
            return _cmd_run(args, deep_audit=False)
        if args.command == "audit":
            return _cmd_run(args, deep_audit=True)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_report(args)
    except (ValueError, RuntimeError, IndexError) as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
