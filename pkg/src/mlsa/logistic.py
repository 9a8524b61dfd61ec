"""Logistic regression over an L2 parameter ball, with volumetric level sets.

The hypothesis class is the ball of radius r in R^d, covariates are bounded by
R in Euclidean norm, and the per-point loss is -log sigmoid(y x' theta).  Level
sets live inside the enlarged set H_A of parameters whose squared A-distance to
the ball is at most rR, where A is the empirical second-moment matrix; their
size is measured by the uniform distribution mu_B on the reference ellipsoid
B = {theta : |A^{1/2} theta| <= R_B} with R_B = sqrt(n) rR + 2 sqrt(rR).

Measure and aggregate estimates use plain rejection sampling from mu_B with
common random numbers across every (tolerance, index) cell, which makes the
accepted sets exactly nested and lets monotonicity and sandwich checks run
deterministically.  The grid gap is delta = 1 + rR + sqrt(rR / lambda_min(A)) R,
an upper bound for the per-point loss on H_A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .audit import BoundCertificate
from .classification import GridMismatchError
from .core import NUMERIC_TOL, MlsaOutput, ToleranceGrid

__all__ = [
    "LogisticProblem",
    "LogisticGeometry",
    "McConfig",
    "McWorkspace",
    "LogisticRun",
    "InsufficientAcceptanceError",
    "ErmConvergenceError",
    "fit_erm",
    "build_geometry",
    "membership_HA",
    "min_ball_distance_sq",
    "sample_muB",
    "estimate_level",
    "aggregate_prob",
    "logistic_grid",
    "run_mlsa_logistic",
    "crn_sandwich_report",
    "verify_ellipsoid_containment",
    "verify_volume_lower_bound",
    "verify_logistic_bound",
    "geometry_report",
    "load_logistic_problem",
]

_GRAD_VACUOUS = 1e-6  # below this gradient norm the minimizer is treated as interior


class InsufficientAcceptanceError(RuntimeError):
    """Too few Monte-Carlo samples accepted to trust an estimate."""


class ErmConvergenceError(RuntimeError):
    """Projected gradient descent did not reach the requested tolerance."""


@dataclass(frozen=True)
class LogisticProblem:
    """Covariates with bounded norm, labels in {-1, +1}, and the ball radius r."""

    covariates: np.ndarray
    labels: np.ndarray
    r: float
    R: float

    def __post_init__(self) -> None:
        x = np.asarray(self.covariates, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("covariates must form a nonempty n x d matrix")
        if y.shape != (x.shape[0],):
            raise ValueError("labels must be one per covariate row")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must lie in {-1, +1}")
        if not (self.r > 0 and self.R > 0):
            raise ValueError("radii r and R must be positive")
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms > self.R + NUMERIC_TOL):
            raise ValueError(
                f"covariate norm {norms.max():.6g} exceeds declared bound R={self.R}"
            )
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def d(self) -> int:
        return self.covariates.shape[1]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def per_sample_losses(problem: LogisticProblem, thetas: np.ndarray) -> np.ndarray:
    """-log sigmoid(y_i x_i' theta_s) for every (sample s, index i); shape (k, n)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    z = (thetas @ problem.covariates.T) * problem.labels[None, :]
    return np.logaddexp(0.0, -z)


def fit_erm(
    problem: LogisticProblem,
    exclude: Optional[int] = None,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Projected gradient descent for the ball-constrained logistic minimizer.

    Fixed step 4 / lambda_max(A) (the logistic Hessian is at most A / 4);
    terminates when the projected-gradient norm drops to ``tol``.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    X, y, r = problem.covariates, problem.labels, problem.r
    if exclude is not None:
        if not 0 <= exclude < problem.n:
            raise IndexError(f"exclude index {exclude} out of range [0, {problem.n})")
        keep = np.arange(problem.n) != exclude
        X, y = X[keep], y[keep]
    if X.shape[0] == 0:
        return np.zeros(problem.d)
    lam_max = float(np.linalg.eigvalsh(problem.covariates.T @ problem.covariates)[-1])
    if lam_max <= 0:
        return np.zeros(problem.d)
    step = 4.0 / lam_max
    theta = np.zeros(problem.d)
    for _ in range(max_iter):
        z = y * (X @ theta)
        grad = -(X * (y * _sigmoid(-z))[:, None]).sum(axis=0)
        candidate = theta - step * grad
        norm = np.linalg.norm(candidate)
        if norm > r:
            candidate = candidate * (r / norm)
        if np.linalg.norm(theta - candidate) / step <= tol:
            return candidate
        theta = candidate
    raise ErmConvergenceError(
        f"no convergence in {max_iter} iterations "
        f"(projected-gradient norm {np.linalg.norm(theta - candidate) / step:.3e}, tol {tol:.1e})"
    )


@dataclass(frozen=True)
class LogisticGeometry:
    """Second-moment geometry, the fixed minimizer, and the derived constants."""

    A: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    lambda_min: float
    A_half: np.ndarray
    A_half_inv: np.ndarray
    theta_star: np.ndarray
    grad_star: np.ndarray
    R_B: float
    delta: float


def build_geometry(problem: LogisticProblem, tol: float = 1e-8) -> LogisticGeometry:
    """Eigendecompose A = sum x_i x_i', fit the minimizer once, fix the constants."""
    X, y = problem.covariates, problem.labels
    A = X.T @ X
    eigvals, eigvecs = np.linalg.eigh(A)
    lambda_min = float(eigvals[0])
    if lambda_min <= 0:
        raise ValueError(
            f"second-moment matrix is degenerate (lambda_min={lambda_min:.3e}); "
            "the volumetric construction needs lambda_min > 0"
        )
    A_half = eigvecs @ np.diag(np.sqrt(eigvals)) @ eigvecs.T
    A_half_inv = eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.T
    theta_star = fit_erm(problem, tol=tol)
    z = y * (X @ theta_star)
    grad_star = -(X * (y * _sigmoid(-z))[:, None]).sum(axis=0)
    rR = problem.r * problem.R
    R_B = math.sqrt(problem.n) * rR + 2.0 * math.sqrt(rR)
    delta = 1.0 + rR + math.sqrt(rR / lambda_min) * problem.R
    return LogisticGeometry(
        A=A,
        eigvals=eigvals,
        eigvecs=eigvecs,
        lambda_min=lambda_min,
        A_half=A_half,
        A_half_inv=A_half_inv,
        theta_star=theta_star,
        grad_star=grad_star,
        R_B=R_B,
        delta=delta,
    )


def min_ball_distance_sq(
    geometry: LogisticGeometry, r: float, thetas: np.ndarray
) -> np.ndarray:
    """Squared A-distance from each row of thetas to the radius-r ball.

    Points inside the ball are at distance zero; otherwise the constrained
    projection is found by bisection on the Lagrange multiplier of the norm
    constraint in the eigenbasis of A.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    norms = np.linalg.norm(thetas, axis=1)
    out = np.zeros(thetas.shape[0])
    outside = norms > r
    if not np.any(outside):
        return out
    coords = thetas[outside] @ geometry.eigvecs  # coordinates in the eigenbasis
    a = geometry.eigvals[None, :]
    a_max = geometry.eigvals[-1]
    lo = np.zeros(coords.shape[0])
    hi = a_max * (norms[outside] / r - 1.0) * (1.0 + 1e-12) + 1e-300
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        proj = a * coords / (a + mid[:, None])
        too_big = (proj**2).sum(axis=1) > r * r
        lo = np.where(too_big, mid, lo)
        hi = np.where(too_big, hi, mid)
    lam = 0.5 * (lo + hi)
    scaled = lam[:, None] * coords / (a + lam[:, None])
    out[outside] = (a * scaled**2).sum(axis=1)
    return out


def membership_HA(
    geometry: LogisticGeometry, problem: LogisticProblem, theta: np.ndarray
) -> bool:
    """Whether theta lies within squared A-distance rR of the parameter ball."""
    dist_sq = min_ball_distance_sq(geometry, problem.r, np.atleast_2d(theta))[0]
    return bool(dist_sq <= problem.r * problem.R + 1e-12)


def sample_muB(geometry: LogisticGeometry, k: int, seed: int) -> np.ndarray:
    """k uniform draws from the reference ellipsoid B."""
    if k < 1:
        raise ValueError("sample count must be positive")
    rng = np.random.default_rng(seed)
    d = geometry.eigvals.size
    g = rng.standard_normal((k, d))
    g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
    radii = rng.random(k) ** (1.0 / d)
    return (g * radii[:, None] * geometry.R_B) @ geometry.A_half_inv


@dataclass(frozen=True)
class McConfig:
    """Sampling budget for the Monte-Carlo level-set machinery."""

    samples_per_level: int
    seed: int = 0
    min_accepted: int = 100

    def __post_init__(self) -> None:
        if self.min_accepted < 100:
            raise ValueError("min_accepted must be at least 100")
        if self.samples_per_level < self.min_accepted:
            raise ValueError("samples_per_level must be at least min_accepted")


@dataclass(frozen=True)
class McWorkspace:
    """Common-random-number sample pool shared by every (tolerance, index) cell.

    Reference losses come from the best of all fitted minimizers (full-sample
    and every leave-one-out fit evaluated on each objective), so that solver
    suboptimality can never break the nestedness of accepted sets.
    """

    thetas: np.ndarray  # (k, d)
    member: np.ndarray  # (k,) bool, H_A membership
    losses: np.ndarray  # (k, n) per-point losses
    totals: np.ndarray  # (k,) full-sample losses
    sig: np.ndarray  # (k, n) predicted probabilities of the observed labels
    theta_star_minus: np.ndarray  # (n, d)
    ref_full: float
    ref_excl: np.ndarray  # (n,)

    @property
    def k(self) -> int:
        return self.thetas.shape[0]


def build_workspace(
    geometry: LogisticGeometry,
    problem: LogisticProblem,
    mc: McConfig,
    theta_star_minus: Optional[np.ndarray] = None,
    erm_tol: float = 1e-8,
) -> McWorkspace:
    if theta_star_minus is None:
        theta_star_minus = np.array(
            [fit_erm(problem, exclude=i, tol=erm_tol) for i in range(problem.n)]
        )
    thetas = sample_muB(geometry, mc.samples_per_level, mc.seed)
    member = min_ball_distance_sq(geometry, problem.r, thetas) <= (
        problem.r * problem.R + 1e-12
    )
    z = (thetas @ problem.covariates.T) * problem.labels[None, :]
    losses = np.logaddexp(0.0, -z)
    sig = _sigmoid(z)
    totals = losses.sum(axis=1)
    candidates = np.vstack([geometry.theta_star[None, :], theta_star_minus])
    cand_losses = per_sample_losses(problem, candidates)
    cand_totals = cand_losses.sum(axis=1)
    ref_full = float(cand_totals.min())
    ref_excl = (cand_totals[:, None] - cand_losses).min(axis=0)
    return McWorkspace(
        thetas=thetas,
        member=member,
        losses=losses,
        totals=totals,
        sig=sig,
        theta_star_minus=theta_star_minus,
        ref_full=ref_full,
        ref_excl=ref_excl,
    )


@dataclass(frozen=True)
class LevelEstimate:
    """Rejection estimate of the measure of one level set."""

    t: float
    exclude: Optional[int]
    estimate: float
    stderr: float
    count: int
    samples: int
    accepted: np.ndarray  # accepted parameter vectors, (count, d)


def estimate_level(
    geometry: LogisticGeometry,
    problem: LogisticProblem,
    t: float,
    exclude: Optional[int] = None,
    mc: McConfig = None,
    workspace: Optional[McWorkspace] = None,
) -> LevelEstimate:
    """Estimate mu_B of the level set at tolerance t by rejection from mu_B.

    With a shared workspace the same sample pool serves every call, so
    estimates at nested tolerances use nested accepted sets.
    """
    if t < 0:
        raise ValueError("tolerance must be nonnegative")
    if mc is None:
        raise ValueError("an McConfig is required")
    if workspace is None:
        workspace = build_workspace(geometry, problem, mc)
    if exclude is None:
        ref = workspace.ref_full
        sample_losses = workspace.totals
    else:
        if not 0 <= exclude < problem.n:
            raise IndexError(f"exclude index {exclude} out of range [0, {problem.n})")
        ref = float(workspace.ref_excl[exclude])
        sample_losses = workspace.totals - workspace.losses[:, exclude]
    accepted_mask = workspace.member & (sample_losses <= ref + t)
    count = int(accepted_mask.sum())
    if count < mc.min_accepted:
        raise InsufficientAcceptanceError(
            f"only {count} of {workspace.k} samples accepted at t={t:.6g}, "
            f"exclude={exclude} (need {mc.min_accepted}); increase samples_per_level"
        )
    estimate = count / workspace.k
    stderr = math.sqrt(estimate * (1.0 - estimate) / workspace.k)
    return LevelEstimate(
        t=t,
        exclude=exclude,
        estimate=estimate,
        stderr=stderr,
        count=count,
        samples=workspace.k,
        accepted=workspace.thetas[accepted_mask],
    )


def aggregate_prob(accepted: np.ndarray, problem: LogisticProblem, i: int) -> float:
    """Mean predicted probability of the observed label y_i over accepted draws."""
    accepted = np.atleast_2d(np.asarray(accepted, dtype=float))
    if accepted.shape[0] == 0:
        raise ValueError("cannot aggregate an empty accepted set")
    z = problem.labels[i] * (accepted @ problem.covariates[i])
    return float(_sigmoid(z).mean())


def logistic_grid(geometry: LogisticGeometry, problem: LogisticProblem) -> ToleranceGrid:
    """Tolerances delta, 2 delta, ..., ceil(16 d ln(max(8, 2 n r R))) * delta."""
    count = math.ceil(
        16 * problem.d * math.log(max(8.0, 2.0 * problem.n * problem.r * problem.R))
    )
    levels = geometry.delta * np.arange(1, count + 1, dtype=float)
    return ToleranceGrid(levels=levels, gap=geometry.delta)


@dataclass(frozen=True)
class LogisticRun:
    """A finished run plus everything needed to audit it."""

    output: MlsaOutput
    geometry: LogisticGeometry
    workspace: McWorkspace
    problem: LogisticProblem
    mc: McConfig


def run_mlsa_logistic(
    problem: LogisticProblem,
    mc: McConfig,
    seed: Optional[int] = None,
    erm_tol: float = 1e-8,
) -> LogisticRun:
    """Median of level-set aggregation with Monte-Carlo level sets.

    For each index i and grid tolerance t, the predicted probability is the
    mean of sigmoid(y_i x_i' theta) over the common sample pool restricted to
    H_A and to the leave-one-out loss level; the final probability at i is the
    lower median across the grid and the LOO error is the mean negative log of
    those medians.
    """
    if seed is not None:
        mc = replace(mc, seed=seed)
    geometry = build_geometry(problem, tol=erm_tol)
    workspace = build_workspace(geometry, problem, mc, erm_tol=erm_tol)
    grid = logistic_grid(geometry, problem)
    n = problem.n
    n_levels = len(grid)
    member_idx = np.flatnonzero(workspace.member)
    per_level = np.empty((n_levels, n))
    for i in range(n):
        excl = (workspace.totals - workspace.losses[:, i])[member_idx]
        order = np.argsort(excl, kind="stable")
        sorted_losses = excl[order]
        prefix = np.concatenate(
            ([0.0], np.cumsum(workspace.sig[member_idx, i][order]))
        )
        counts = np.searchsorted(
            sorted_losses, workspace.ref_excl[i] + grid.levels, side="right"
        )
        if counts.min() < mc.min_accepted:
            bad = int(np.argmax(counts < mc.min_accepted))
            raise InsufficientAcceptanceError(
                f"only {counts[bad]} of {workspace.k} samples accepted at "
                f"t={grid.levels[bad]:.6g}, i={i} (need {mc.min_accepted}); "
                "increase samples_per_level"
            )
        per_level[:, i] = prefix[counts] / counts
    medians = np.sort(per_level, axis=0)[(n_levels + 1) // 2 - 1].copy()
    loo = float(np.mean(-np.log(medians)))
    output = MlsaOutput(per_level=per_level, medians=medians, loo_error=loo, grid=grid)
    return LogisticRun(
        output=output, geometry=geometry, workspace=workspace, problem=problem, mc=mc
    )


@dataclass(frozen=True)
class SandwichReport:
    cells: int
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def crn_sandwich_report(run: LogisticRun) -> SandwichReport:
    """Exact nestedness of accepted sets under common random numbers.

    For every index i and grid tolerance t, each sample accepted by the
    full-sample level at t - delta must be accepted by the leave-one-out level
    at t, and each sample that level accepts must be accepted by the
    full-sample level at t + delta.
    """
    ws = run.workspace
    grid = run.output.grid
    delta = grid.gap
    levels = grid.levels
    member_idx = np.flatnonzero(ws.member)
    full = (ws.totals - ws.ref_full)[member_idx]
    violations = 0
    for i in range(run.problem.n):
        excl = (ws.totals - ws.losses[:, i])[member_idx] - ws.ref_excl[i]
        order_full = np.argsort(full, kind="stable")
        excl_by_full = np.maximum.accumulate(excl[order_full])
        counts_low = np.searchsorted(full[order_full], levels - delta, side="right")
        have = counts_low > 0
        idx = np.clip(counts_low - 1, 0, excl_by_full.size - 1)
        violations += int(np.sum(have & (excl_by_full[idx] > levels + NUMERIC_TOL)))
        order_excl = np.argsort(excl, kind="stable")
        full_by_excl = np.maximum.accumulate(full[order_excl])
        counts_up = np.searchsorted(excl[order_excl], levels, side="right")
        have_up = counts_up > 0
        idx_up = np.clip(counts_up - 1, 0, full_by_excl.size - 1)
        violations += int(
            np.sum(have_up & (full_by_excl[idx_up] > levels + delta + NUMERIC_TOL))
        )
    return SandwichReport(cells=2 * run.problem.n * levels.size, violations=violations)


@dataclass(frozen=True)
class ContainmentReport:
    """Ellipsoid-in-level-set check around the fitted minimizer."""

    samples: int
    violations: int
    halfspace_fraction: float
    halfspace_stderr: float
    interior: bool
    grad_norm: float

    @property
    def passed(self) -> bool:
        if self.violations > 0:
            return False
        if self.interior:
            return True
        return self.halfspace_fraction >= 0.5 - 3.0 * self.halfspace_stderr


def verify_ellipsoid_containment(
    geometry: LogisticGeometry,
    problem: LogisticProblem,
    mc: McConfig,
    seed: Optional[int] = None,
) -> ContainmentReport:
    """Check that the half-ellipsoid of A-radius sqrt(rR) sits inside the level set.

    Uniform draws from the ellipsoid centered at the minimizer are filtered by
    the half-space of nonpositive first-order change (vacuous when the final
    gradient is negligible, the interior case); each retained draw must satisfy
    the loss-level test at rR and belong to H_A.  The half-space must also
    retain about half the draws, since its boundary passes through the center.
    """
    rng = np.random.default_rng(mc.seed if seed is None else seed)
    k = mc.samples_per_level
    d = problem.d
    rR = problem.r * problem.R
    g = rng.standard_normal((k, d))
    g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
    radii = rng.random(k) ** (1.0 / d)
    thetas = geometry.theta_star + (
        (g * radii[:, None] * math.sqrt(rR)) @ geometry.A_half_inv
    )
    grad_norm = float(np.linalg.norm(geometry.grad_star))
    interior = grad_norm <= _GRAD_VACUOUS
    if interior:
        half = np.ones(k, dtype=bool)
    else:
        half = (thetas - geometry.theta_star) @ geometry.grad_star <= 0.0
    fraction = float(half.mean())
    stderr = math.sqrt(0.25 / k)
    ref = float(per_sample_losses(problem, geometry.theta_star[None, :]).sum())
    totals = per_sample_losses(problem, thetas[half]).sum(axis=1)
    level_ok = totals <= ref + rR + NUMERIC_TOL
    member_ok = min_ball_distance_sq(geometry, problem.r, thetas[half]) <= rR + 1e-9
    violations = int(np.sum(~(level_ok & member_ok)))
    return ContainmentReport(
        samples=k,
        violations=violations,
        halfspace_fraction=fraction,
        halfspace_stderr=stderr,
        interior=interior,
        grad_norm=grad_norm,
    )


@dataclass(frozen=True)
class VolumeReport:
    """Monte-Carlo lower-bound check for the measure of the level set at rR."""

    estimate: float
    stderr: float
    threshold: float
    count: int
    samples: int

    @property
    def passed(self) -> bool:
        return self.estimate + 3.0 * self.stderr >= self.threshold


def verify_volume_lower_bound(
    geometry: LogisticGeometry,
    problem: LogisticProblem,
    mc: McConfig,
    seed: Optional[int] = None,
) -> VolumeReport:
    """Check mu_B(level set at rR) against the (max(8, 2 n r R))^(-d) floor."""
    thetas = sample_muB(geometry, mc.samples_per_level, mc.seed if seed is None else seed)
    rR = problem.r * problem.R
    ref = float(per_sample_losses(problem, geometry.theta_star[None, :]).sum())
    member = min_ball_distance_sq(geometry, problem.r, thetas) <= rR + 1e-12
    accepted = member & (per_sample_losses(problem, thetas).sum(axis=1) <= ref + rR)
    count = int(accepted.sum())
    if count < mc.min_accepted:
        raise InsufficientAcceptanceError(
            f"only {count} of {mc.samples_per_level} samples hit the level set at rR; "
            "increase samples_per_level to resolve the volume bound"
        )
    estimate = count / mc.samples_per_level
    stderr = math.sqrt(estimate * (1.0 - estimate) / mc.samples_per_level)
    threshold = max(8.0, 2.0 * problem.n * rR) ** (-problem.d)
    return VolumeReport(
        estimate=estimate,
        stderr=stderr,
        threshold=threshold,
        count=count,
        samples=mc.samples_per_level,
    )


def verify_logistic_bound(
    output: MlsaOutput,
    geometry: LogisticGeometry,
    problem: LogisticProblem,
    mc_slack: float = 0.05,
) -> BoundCertificate:
    """Certify the logistic LOO oracle bound for a finished run.

    rhs is (8/n) * best loss + (136/n) * delta * d * ln(max(8, 2 n r R)),
    inflated by ``mc_slack`` (relative) to absorb Monte-Carlo noise in lhs.
    """
    expected = logistic_grid(geometry, problem)
    if not math.isclose(output.grid.gap, expected.gap) or not np.allclose(
        output.grid.levels, expected.levels
    ):
        raise GridMismatchError("output grid does not match the logistic grid")
    n, d = problem.n, problem.d
    erm = float(per_sample_losses(problem, geometry.theta_star[None, :]).sum())
    log_term = math.log(max(8.0, 2.0 * n * problem.r * problem.R))
    base = 8.0 * erm / n + 136.0 * geometry.delta * d * log_term / n
    return BoundCertificate(
        name="logistic-oracle-bound",
        lhs=output.loo_error,
        rhs=(1.0 + mc_slack) * base,
        components={
            "erm_loss": erm,
            "delta": geometry.delta,
            "d": d,
            "n": n,
            "log_term": log_term,
            "grid_size": len(expected),
            "rhs_nominal": base,
            "mc_slack": mc_slack,
        },
    )


def geometry_report(geometry: LogisticGeometry, problem: LogisticProblem) -> dict:
    """Flat summary of the geometric constants for run reports."""
    grid = logistic_grid(geometry, problem)
    return {
        "eigenvalues": [float(v) for v in geometry.eigvals],
        "lambda_min": geometry.lambda_min,
        "theta_star": [float(v) for v in geometry.theta_star],
        "grad_norm": float(np.linalg.norm(geometry.grad_star)),
        "R_B": geometry.R_B,
        "delta": geometry.delta,
        "grid_size": len(grid),
    }


def load_logistic_problem(path, r: float, R: float) -> LogisticProblem:
    """Load a problem from whitespace-delimited text: columns x_1 .. x_d, y."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] < 2:
        raise ValueError("need at least one covariate column plus the label column")
    return LogisticProblem(covariates=data[:, :-1], labels=data[:, -1], r=r, R=R)
