"""Numerical certification of the aggregation and level-set growth conditions.

Every guarantee the library relies on is an inequality that can be checked
exactly on a concrete instance: the aggregation rule's stability condition,
the per-level growth-plus-sandwich condition, the single-level LOO bound, and
the grid-majority LOO bound.  Counting-measure arithmetic here is integer and
exact; a 1e-9 tolerance absorbs floating-point error in assertions that hold
exactly in real arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    NUMERIC_TOL,
    AggregationRule,
    LabeledSample,
    LossModel,
    MlsaOutput,
    PredictionTable,
    ToleranceGrid,
    loss_matrix,
    run_mlsa,
)

__all__ = [
    "AggregationStabilityReport",
    "LevelAudit",
    "GrowthAudit",
    "BoundCertificate",
    "GridMajorityError",
    "LevelNotGoodError",
    "GeneralizationReport",
    "check_aggregation_stability",
    "grid_growth_audit",
    "verify_single_level",
    "verify_grid_majority_bound",
    "simulate_generalization",
]


class GridMajorityError(ValueError):
    """Fewer than half of the grid levels are good; the main bound does not apply."""


class LevelNotGoodError(ValueError):
    """A single-level certificate was requested at a level failing the growth audit."""


@dataclass(frozen=True)
class AggregationStabilityReport:
    """Randomized check of the aggregation stability inequality.

    ``stability`` is the constant the rule declares for
    loss(aggregate) <= stability * (subset average loss).
    """

    trials: int
    violations: int
    stability: float
    first_violation: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class LevelAudit:
    level: float
    size_minus: int  # counting measure of the full-sample set at t - gap (clamped at 0)
    size_plus: int  # counting measure of the full-sample set at t + gap
    ratio: float
    sandwich_ok: bool
    good: bool


@dataclass(frozen=True)
class GrowthAudit:
    levels: tuple[LevelAudit, ...]
    good_fraction: float
    c_g: float
    delta: float


@dataclass(frozen=True)
class BoundCertificate:
    """Realized error against a bound value, with the bound's constituents.

    The certificate passes when slack = rhs - lhs >= -tolerance.
    """

    name: str
    lhs: float
    rhs: float
    components: dict = field(default_factory=dict)
    tolerance: float = NUMERIC_TOL

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance


def check_aggregation_stability(
    agg: AggregationRule,
    loss: LossModel,
    table: PredictionTable,
    sample: LabeledSample,
    trials: int = 1000,
    seed: int = 0,
) -> AggregationStabilityReport:
    """Check the aggregation stability inequality on random subsets and rows.

    For a random nonempty subset G of hypotheses and a random row i, the loss
    of the aggregate must not exceed the rule's declared stability constant
    times the average loss over G: factor 1 for averaging under a loss convex
    in the prediction (Jensen), factor 2 for majority vote under the 0-1 loss
    (a wrong vote means at least half of G is wrong, and no smaller constant
    works, e.g. voting {1, 1, 0} against response 0).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    lm = loss_matrix(table, sample, loss)
    n, m = lm.shape
    violations = 0
    first: Optional[dict] = None
    for trial in range(trials):
        size = int(rng.integers(1, m + 1))
        subset = np.sort(rng.choice(m, size=size, replace=False))
        i = int(rng.integers(n))
        prediction = agg(subset, table, i)
        lhs = float(loss.evaluate(prediction, sample.responses[i]))
        rhs = agg.stability * float(lm[i, subset].mean())
        if lhs > rhs + NUMERIC_TOL:
            violations += 1
            if first is None:
                first = {
                    "trial": trial,
                    "row": i,
                    "subset": subset.tolist(),
                    "aggregate": prediction,
                    "lhs": lhs,
                    "rhs": rhs,
                }
    return AggregationStabilityReport(
        trials=trials,
        violations=violations,
        stability=agg.stability,
        first_violation=first,
    )


def grid_growth_audit(
    table: PredictionTable,
    sample: LabeledSample,
    loss: LossModel,
    grid: ToleranceGrid,
    c_g: float = 2.0,
) -> GrowthAudit:
    """Audit every grid level for bounded growth and the leave-one-out sandwich.

    A level t is good when the counting-measure ratio of the full-sample sets
    at t + gap and t - gap is at most c_g, and when for every index i the
    leave-one-out set at t is nested between those two full-sample sets.  For
    t - gap < 0 the lower set is taken at 0 for the ratio and the lower
    inclusion is skipped (it is only meaningful at nonnegative tolerance; grids
    start at the gap, so this affects off-grid probing only).
    """
    if c_g < 1:
        raise ValueError("growth constant must be at least 1")
    lm = loss_matrix(table, sample, loss)
    totals = lm.sum(axis=0)
    t_min = totals.min()
    n = table.n_samples
    levels = grid.levels
    delta = grid.gap

    sorted_totals = np.sort(totals)
    size_minus = np.searchsorted(
        sorted_totals, t_min + np.maximum(levels - delta, 0.0), side="right"
    )
    size_plus = np.searchsorted(sorted_totals, t_min + levels + delta, side="right")

    order_full = np.argsort(totals, kind="stable")
    totals_by_full = totals[order_full]
    lower_applies = levels - delta >= -NUMERIC_TOL
    lower_counts = np.searchsorted(totals_by_full, t_min + (levels - delta), side="right")

    sandwich_ok = np.ones(levels.size, dtype=bool)
    for i in range(n):
        excl = totals - lm[i]
        e_min = excl.min()
        # lower inclusion: everything within t - gap on the full sample stays
        # within t once row i is removed
        excess_by_full = np.maximum.accumulate((excl - e_min)[order_full])
        checkable = lower_applies & (lower_counts > 0)
        idx = np.clip(lower_counts - 1, 0, excess_by_full.size - 1)
        lower_bad = checkable & (excess_by_full[idx] > levels + NUMERIC_TOL)
        # upper inclusion: everything within t on the reduced sample stays
        # within t + gap on the full sample
        order_excl = np.argsort(excl, kind="stable")
        full_by_excl = np.maximum.accumulate((totals - t_min)[order_excl])
        upper_counts = np.searchsorted(excl[order_excl], e_min + levels, side="right")
        upper_bad = full_by_excl[upper_counts - 1] > levels + delta + NUMERIC_TOL
        sandwich_ok &= ~(lower_bad | upper_bad)

    records = []
    for k in range(levels.size):
        ratio = size_plus[k] / size_minus[k]
        good = bool(sandwich_ok[k] and ratio <= c_g + NUMERIC_TOL)
        records.append(
            LevelAudit(
                level=float(levels[k]),
                size_minus=int(size_minus[k]),
                size_plus=int(size_plus[k]),
                ratio=float(ratio),
                sandwich_ok=bool(sandwich_ok[k]),
                good=good,
            )
        )
    good_fraction = sum(r.good for r in records) / len(records)
    return GrowthAudit(
        levels=tuple(records), good_fraction=good_fraction, c_g=c_g, delta=delta
    )


def _audit_one_level(table, sample, loss, t, delta, c_g) -> LevelAudit:
    grid = ToleranceGrid(levels=np.array([t], dtype=float), gap=delta)
    return grid_growth_audit(table, sample, loss, grid, c_g=c_g).levels[0]


def verify_single_level(
    table: PredictionTable,
    sample: LabeledSample,
    loss: LossModel,
    agg: AggregationRule,
    t: float,
    delta: float,
    c_g: float = 2.0,
) -> BoundCertificate:
    """Certify the single-level aggregate bound at a good level t.

    lhs is the mean loss of the per-index aggregates of the leave-one-out level
    sets at t; rhs is (c_g / n) * (best empirical loss + t + delta).  Levels
    failing the growth audit are rejected as a precondition violation rather
    than reported as a bound failure.
    """
    record = _audit_one_level(table, sample, loss, t, delta, c_g)
    if not record.good:
        raise LevelNotGoodError(
            f"level t={t} fails the growth audit "
            f"(ratio={record.ratio:.6g}, sandwich_ok={record.sandwich_ok})"
        )
    lm = loss_matrix(table, sample, loss)
    totals = lm.sum(axis=0)
    n = table.n_samples
    losses = np.empty(n)
    for i in range(n):
        excl = totals - lm[i]
        selected = np.flatnonzero(excl <= excl.min() + t)
        prediction = agg(selected, table, i)
        losses[i] = loss.evaluate(prediction, sample.responses[i])
    erm = float(totals.min())
    lhs = float(losses.mean())
    rhs = c_g / n * (erm + t + delta)
    return BoundCertificate(
        name="single-level-aggregate-bound",
        lhs=lhs,
        rhs=rhs,
        components={"erm_loss": erm, "t": t, "delta": delta, "c_g": c_g, "n": n},
    )


def verify_grid_majority_bound(
    output: MlsaOutput,
    audit: GrowthAudit,
    erm: float,
    grid: Optional[ToleranceGrid] = None,
    nominal_rho: float = 0.75,
) -> BoundCertificate:
    """Certify the grid-majority LOO bound for a finished run.

    The headline rhs uses the measured good fraction; the nominal fraction from
    the task's growth guarantee (and the bound it yields) is recorded alongside
    so both can be reported.
    """
    grid = grid if grid is not None else output.grid
    rho_hat = audit.good_fraction
    if rho_hat <= 0.5:
        raise GridMajorityError(
            f"grid-majority failure: measured good fraction {rho_hat:.4f} <= 1/2"
        )
    n = output.medians.size
    base = erm + grid.t_max + audit.delta
    multiplier = 2 * audit.c_g / ((2 * rho_hat - 1) * n)
    rhs = multiplier * base
    rhs_nominal = 2 * audit.c_g / ((2 * nominal_rho - 1) * n) * base
    return BoundCertificate(
        name="grid-majority-loo-bound",
        lhs=output.loo_error,
        rhs=rhs,
        components={
            "erm_loss": erm,
            "t_max": grid.t_max,
            "delta": audit.delta,
            "c_g": audit.c_g,
            "rho_hat": rho_hat,
            "rho_nominal": nominal_rho,
            "rhs_nominal": rhs_nominal,
            "multiplier": multiplier,
            "n": n,
        },
    )


@dataclass(frozen=True)
class GeneralizationReport:
    """Monte-Carlo estimate of held-out loss against the complexity bound."""

    repetitions: int
    mean_test_loss: float
    stderr: float
    oracle_risk: float
    multiplier: float
    complexity: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.mean_test_loss <= self.bound + 3 * self.stderr


def simulate_generalization(
    task,
    n: int,
    repetitions: int,
    seed: int = 0,
) -> GeneralizationReport:
    """Estimate the expected held-out loss of the transductive predictor.

    Each repetition draws n + 1 i.i.d. points from the task's distribution,
    runs the full pipeline on all n + 1 covariates (the prediction at the last
    index never sees its own response), and records the loss at that last
    index.  The mean is compared against
    multiplier * oracle_risk + complexity(n + 1) / (n + 1).

    ``task`` must provide ``make_instance(n_total, rng)``, ``loss``,
    ``aggregator``, ``grid_factory(n_total)``, ``oracle_risk``, ``multiplier``
    and ``complexity(n_total)``.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    rng = np.random.default_rng(seed)
    total = n + 1
    grid = task.grid_factory(total)
    held_out = np.empty(repetitions)
    for rep in range(repetitions):
        table, sample = task.make_instance(total, rng)
        output = run_mlsa(table, sample, task.loss, grid, task.aggregator)
        held_out[rep] = task.loss.evaluate(
            output.medians[-1], sample.responses[-1]
        )
    mean = float(held_out.mean())
    stderr = float(held_out.std(ddof=1) / np.sqrt(repetitions)) if repetitions > 1 else 0.0
    complexity = float(task.complexity(total))
    bound = task.multiplier * task.oracle_risk + complexity / total
    return GeneralizationReport(
        repetitions=repetitions,
        mean_test_loss=mean,
        stderr=stderr,
        oracle_risk=task.oracle_risk,
        multiplier=task.multiplier,
        complexity=complexity,
        bound=bound,
    )
