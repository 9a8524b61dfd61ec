"""Logistic task: constrained ERM, ellipsoid geometry, MC level sets, bounds."""

import math

import numpy as np
import pytest

from mlsa.classification import GridMismatchError
from mlsa.generators import make_logistic_problem
from mlsa.logistic import (
    ErmConvergenceError,
    InsufficientAcceptanceError,
    LogisticProblem,
    McConfig,
    aggregate_prob,
    build_geometry,
    build_workspace,
    crn_sandwich_report,
    estimate_level,
    fit_erm,
    geometry_report,
    load_logistic_problem,
    logistic_grid,
    membership_HA,
    min_ball_distance_sq,
    per_sample_losses,
    run_mlsa_logistic,
    sample_muB,
    verify_logistic_bound,
    verify_ellipsoid_containment,
    verify_volume_lower_bound,
)


def identity_problem(labels=(1.0, -1.0)):
    """Covariates e_1, e_2 give A = I exactly."""
    return LogisticProblem(
        covariates=np.eye(2), labels=np.array(labels), r=1.0, R=1.0
    )


def total_loss(problem, theta, exclude=None):
    losses = per_sample_losses(problem, np.asarray(theta)[None, :])[0]
    if exclude is not None:
        return float(losses.sum() - losses[exclude])
    return float(losses.sum())


# -------------------------------------------------------------------- fitting


def test_fit_erm_separable_reaches_boundary():
    rng = np.random.default_rng(0)
    x = np.column_stack([rng.choice([-0.8, 0.8], size=12), 0.1 * rng.standard_normal(12)])
    x = np.clip(x, -1, 1)
    problem = LogisticProblem(x, np.sign(x[:, 0]), r=3.0, R=1.2)
    theta = fit_erm(problem)
    assert np.linalg.norm(theta) == pytest.approx(3.0, abs=1e-6)
    assert total_loss(problem, theta) / 12 < 0.15


def test_fit_erm_sign_symmetry():
    rng = np.random.default_rng(1)
    problem = make_logistic_problem(10, 2, 1.0, 1.0, rng)
    flipped = LogisticProblem(problem.covariates, -problem.labels, r=1.0, R=1.0)
    assert np.allclose(fit_erm(problem), -fit_erm(flipped), atol=1e-9)


def _golden_section(f, lo, hi, tol=1e-12):
    phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def test_fit_erm_1d_matches_golden_section():
    problem = LogisticProblem(
        covariates=np.array([[0.9], [-0.4]]),
        labels=np.array([1.0, 1.0]),
        r=1.5,
        R=1.0,
    )
    theta = fit_erm(problem, tol=1e-10)

    def objective(t):
        return total_loss(problem, np.array([t]))

    best = _golden_section(objective, -1.5, 1.5)
    assert theta[0] == pytest.approx(best, abs=1e-6)


def test_fit_erm_excluded_row_ignored():
    rng = np.random.default_rng(2)
    problem = make_logistic_problem(6, 2, 1.0, 1.0, rng)
    reduced = LogisticProblem(
        problem.covariates[1:], problem.labels[1:], r=1.0, R=1.0
    )
    assert np.allclose(fit_erm(problem, exclude=0), fit_erm(reduced), atol=1e-7)


def test_fit_erm_convergence_error_reports_diagnostics():
    rng = np.random.default_rng(3)
    problem = make_logistic_problem(8, 2, 1.0, 1.0, rng)
    with pytest.raises(ErmConvergenceError, match="iterations"):
        fit_erm(problem, tol=1e-300, max_iter=5)


def test_problem_validation():
    with pytest.raises(ValueError, match="labels"):
        LogisticProblem(np.eye(2), np.array([1.0, 0.0]), r=1.0, R=1.0)
    with pytest.raises(ValueError, match="norm"):
        LogisticProblem(2.0 * np.eye(2), np.array([1.0, -1.0]), r=1.0, R=1.0)


def test_geometry_rejects_degenerate_second_moment():
    problem = LogisticProblem(
        covariates=np.array([[1.0, 0.0], [0.5, 0.0]]),
        labels=np.array([1.0, -1.0]),
        r=1.0,
        R=1.0,
    )
    with pytest.raises(ValueError, match="degenerate"):
        build_geometry(problem)


def test_geometry_square_root_and_constants():
    rng = np.random.default_rng(4)
    problem = make_logistic_problem(9, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    assert np.allclose(geo.A_half @ geo.A_half, geo.A, atol=1e-8)
    rR = 1.0
    assert geo.R_B == pytest.approx(math.sqrt(9) * rR + 2.0)
    assert geo.delta == pytest.approx(1.0 + rR + math.sqrt(rR / geo.lambda_min))


def test_erm_beats_random_feasible_probes():
    rng = np.random.default_rng(5)
    problem = make_logistic_problem(12, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    star = total_loss(problem, geo.theta_star)
    g = rng.standard_normal((1000, 2))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    probes = g * (rng.random((1000, 1)) ** 0.5)
    probe_losses = per_sample_losses(problem, probes).sum(axis=1)
    assert star <= probe_losses.min() + 1e-6


# ----------------------------------------------------------------- membership


def test_membership_inside_ball_is_free():
    problem = identity_problem()
    geo = build_geometry(problem)
    assert membership_HA(geo, problem, np.array([0.3, -0.4]))
    assert min_ball_distance_sq(geo, 1.0, np.array([[0.3, -0.4]]))[0] == 0.0


def test_membership_isotropic_closed_form():
    problem = identity_problem()
    geo = build_geometry(problem)
    rng = np.random.default_rng(6)
    thetas = rng.uniform(-3, 3, size=(200, 2))
    dist = min_ball_distance_sq(geo, 1.0, thetas)
    norms = np.linalg.norm(thetas, axis=1)
    closed = np.maximum(norms - 1.0, 0.0) ** 2
    assert np.allclose(dist, closed, atol=1e-9)
    for theta, d2 in zip(thetas, dist):
        assert membership_HA(geo, problem, theta) == (d2 <= 1.0 + 1e-12)


def test_membership_matches_grid_projection_oracle():
    rng = np.random.default_rng(7)
    problem = make_logistic_problem(8, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    radii = np.sqrt(np.linspace(0.0, 1.0, 500))
    angles = np.linspace(0.0, 2 * math.pi, 1001)[:-1]
    ball = np.column_stack(
        [
            np.outer(radii, np.cos(angles)).ravel(),
            np.outer(radii, np.sin(angles)).ravel(),
        ]
    )
    for theta in rng.uniform(-2.5, 2.5, size=(12, 2)):
        diff = ball - theta
        grid_min = float(np.min(np.einsum("ij,jk,ik->i", diff, geo.A, diff)))
        exact = float(min_ball_distance_sq(geo, 1.0, theta[None, :])[0])
        assert exact <= grid_min + 1e-9
        assert grid_min <= exact + 0.05  # grid resolution slack


# ------------------------------------------------------------------- sampling


def test_sample_muB_respects_ellipsoid():
    rng = np.random.default_rng(8)
    problem = make_logistic_problem(10, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    thetas = sample_muB(geo, 5000, seed=9)
    norms = np.linalg.norm(thetas @ geo.A_half, axis=1)
    assert np.all(norms <= geo.R_B + 1e-9)


def test_sample_muB_is_centered():
    problem = identity_problem()
    geo = build_geometry(problem)
    thetas = sample_muB(geo, 40_000, seed=10)
    stderr = thetas.std(axis=0) / math.sqrt(40_000)
    assert np.all(np.abs(thetas.mean(axis=0)) <= 3 * stderr)


def test_sample_muB_half_radius_mass():
    problem = identity_problem()
    geo = build_geometry(problem)
    thetas = sample_muB(geo, 40_000, seed=11)
    inside = np.linalg.norm(thetas @ geo.A_half, axis=1) <= geo.R_B / 2
    fraction = inside.mean()
    assert abs(fraction - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 40_000)


# ------------------------------------------------------------ level estimates


def test_estimate_level_vacuous_tolerance_measures_HA():
    rng = np.random.default_rng(12)
    problem = make_logistic_problem(8, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    mc = McConfig(samples_per_level=4000, seed=13)
    ws = build_workspace(geo, problem, mc)
    huge = 1e9
    est = estimate_level(geo, problem, huge, mc=mc, workspace=ws)
    assert est.estimate == pytest.approx(ws.member.mean())


def test_estimate_level_monotone_under_common_randomness():
    rng = np.random.default_rng(14)
    problem = make_logistic_problem(10, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    mc = McConfig(samples_per_level=20_000, seed=15)
    ws = build_workspace(geo, problem, mc)
    estimates = [
        estimate_level(geo, problem, t, exclude=3, mc=mc, workspace=ws).estimate
        for t in [2.0, 4.0, 8.0, 16.0]
    ]
    assert estimates == sorted(estimates)


def test_estimate_level_positive_just_above_zero():
    rng = np.random.default_rng(16)
    problem = make_logistic_problem(8, 1, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    mc = McConfig(samples_per_level=60_000, seed=17)
    ws = build_workspace(geo, problem, mc)
    est = estimate_level(geo, problem, 0.05, mc=mc, workspace=ws)
    assert est.estimate > 0


def test_estimate_level_insufficient_acceptance_names_cell():
    rng = np.random.default_rng(18)
    problem = make_logistic_problem(8, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    mc = McConfig(samples_per_level=200, seed=19, min_accepted=200)
    ws = build_workspace(geo, problem, mc)
    with pytest.raises(InsufficientAcceptanceError, match="t="):
        estimate_level(geo, problem, 0.01, exclude=2, mc=mc, workspace=ws)


def test_mcconfig_validation():
    with pytest.raises(ValueError):
        McConfig(samples_per_level=1000, min_accepted=50)
    with pytest.raises(ValueError):
        McConfig(samples_per_level=50, min_accepted=100)


# ---------------------------------------------------------------- aggregation


def test_aggregate_prob_at_origin_is_half():
    problem = identity_problem()
    assert aggregate_prob(np.zeros((1, 2)), problem, 0) == 0.5


def test_aggregate_prob_common_logit():
    problem = identity_problem()
    # covariate e_1: the second coordinate never enters the logit
    thetas = np.array([[0.7, -2.0], [0.7, 3.0], [0.7, 0.0]])
    expected = 1.0 / (1.0 + math.exp(-0.7))
    assert aggregate_prob(thetas, problem, 0) == pytest.approx(expected)


def test_aggregate_prob_self_consistent_across_seeds():
    rng = np.random.default_rng(20)
    problem = make_logistic_problem(8, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    values = []
    errs = []
    for seed in (21, 22):
        mc = McConfig(samples_per_level=100_000, seed=seed)
        ws = build_workspace(geo, problem, mc)
        est = estimate_level(geo, problem, 3.0, exclude=1, mc=mc, workspace=ws)
        sig = 1.0 / (1.0 + np.exp(-problem.labels[1] * (est.accepted @ problem.covariates[1])))
        values.append(sig.mean())
        errs.append(sig.std(ddof=1) / math.sqrt(sig.size))
    assert abs(values[0] - values[1]) <= 3 * math.hypot(*errs)


# ----------------------------------------------------------------------- grid


def test_logistic_grid_size_d2_n50():
    rng = np.random.default_rng(23)
    problem = make_logistic_problem(50, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    grid = logistic_grid(geo, problem)
    assert len(grid) == 148  # ceil(32 * ln 100) = ceil(147.36...)
    assert grid.gap == geo.delta


def test_logistic_grid_delta_identity_geometry():
    problem = identity_problem()
    geo = build_geometry(problem)
    assert geo.delta == pytest.approx(3.0)  # 1 + rR + sqrt(rR / 1) * R


def test_logistic_grid_monotone_in_n():
    rng = np.random.default_rng(24)
    sizes = []
    for n in (10, 40, 160):
        problem = make_logistic_problem(n, 2, 1.0, 1.0, rng)
        geo = build_geometry(problem)
        sizes.append(len(logistic_grid(geo, problem)))
    assert sizes == sorted(sizes)


# ------------------------------------------------------------------ full runs


def test_run_single_sample_aggregates_all_of_HA():
    problem = LogisticProblem(
        covariates=np.array([[0.8]]), labels=np.array([1.0]), r=1.0, R=1.0
    )
    mc = McConfig(samples_per_level=20_000, seed=25)
    run = run_mlsa_logistic(problem, mc)
    ws = run.workspace
    sig = 1.0 / (1.0 + np.exp(-(ws.thetas[ws.member, 0] * 0.8)))
    expected = sig.mean()
    assert np.allclose(run.output.per_level, expected)
    assert run.output.medians[0] == pytest.approx(expected)


def test_run_symmetric_pair_predicts_identically():
    x = np.array([[0.6, 0.2], [-0.6, -0.2]])
    problem = LogisticProblem(x, np.array([1.0, -1.0]), r=1.0, R=1.0)
    mc = McConfig(samples_per_level=5000, seed=26)
    run = run_mlsa_logistic(problem, mc)
    # the two rows share the same logit for every parameter, and common random
    # numbers make the accepted sets equal, so the outputs match exactly
    assert np.array_equal(run.output.per_level[:, 0], run.output.per_level[:, 1])


def quadrature_loo(problem, n_grid=200_001, n_ball=40_001):
    """Dense 1-d quadrature replacement for the MC pipeline."""
    x = problem.covariates[:, 0]
    y = problem.labels
    n = x.size
    r, R = problem.r, problem.R
    A = float(x @ x)
    rR = r * R
    R_B = math.sqrt(n) * rR + 2.0 * math.sqrt(rR)
    delta = 1.0 + rR + math.sqrt(rR / A) * R
    count = math.ceil(16 * math.log(max(8.0, 2.0 * n * rR)))
    levels = delta * np.arange(1, count + 1)
    theta = np.linspace(-R_B / math.sqrt(A), R_B / math.sqrt(A), n_grid)
    member = A * np.maximum(np.abs(theta) - r, 0.0) ** 2 <= rR
    z = theta[:, None] * (y * x)[None, :]
    losses = np.logaddexp(0.0, -z)
    totals = losses.sum(axis=1)
    ball = np.linspace(-r, r, n_ball)
    ball_losses = np.logaddexp(0.0, -(ball[:, None] * (y * x)[None, :]))
    ball_totals = ball_losses.sum(axis=1)
    per_level = np.empty((count, n))
    for i in range(n):
        ref = float((ball_totals - ball_losses[:, i]).min())
        excl = totals - losses[:, i]
        sig = 1.0 / (1.0 + np.exp(-z[:, i]))
        for k, t in enumerate(levels):
            sel = member & (excl <= ref + t)
            per_level[k, i] = sig[sel].mean()
    medians = np.sort(per_level, axis=0)[(count + 1) // 2 - 1]
    return float(np.mean(-np.log(medians)))


def test_run_matches_quadrature_oracle_1d():
    rng = np.random.default_rng(27)
    problem = make_logistic_problem(6, 1, 1.0, 1.0, rng)
    mc = McConfig(samples_per_level=200_000, seed=28)
    run = run_mlsa_logistic(problem, mc)
    assert run.output.loo_error == pytest.approx(quadrature_loo(problem), abs=1e-2)


def test_run_crn_sandwich_has_no_violations():
    rng = np.random.default_rng(29)
    problem = make_logistic_problem(12, 2, 1.0, 1.0, rng)
    run = run_mlsa_logistic(problem, McConfig(samples_per_level=10_000, seed=30))
    report = crn_sandwich_report(run)
    assert report.violations == 0


def test_crn_sandwich_agrees_with_naive_set_inclusion():
    rng = np.random.default_rng(48)
    problem = make_logistic_problem(5, 2, 1.0, 1.0, rng)
    run = run_mlsa_logistic(problem, McConfig(samples_per_level=2000, seed=49, min_accepted=100))
    ws = run.workspace
    levels = run.output.grid.levels
    delta = run.output.grid.gap
    naive_violations = 0
    member = np.flatnonzero(ws.member)
    for i in range(problem.n):
        excl = ws.totals - ws.losses[:, i]
        for t in levels:
            lower = set(member[(ws.totals - ws.ref_full)[member] <= t - delta].tolist())
            inner = set(member[(excl - ws.ref_excl[i])[member] <= t].tolist())
            upper = set(member[(ws.totals - ws.ref_full)[member] <= t + delta].tolist())
            naive_violations += int(not lower <= inner) + int(not inner <= upper)
    report = crn_sandwich_report(run)
    assert naive_violations == 0
    assert report.violations == naive_violations


def test_estimate_level_consistent_with_run_cells():
    rng = np.random.default_rng(50)
    problem = make_logistic_problem(6, 2, 1.0, 1.0, rng)
    mc = McConfig(samples_per_level=20_000, seed=51)
    run = run_mlsa_logistic(problem, mc)
    grid = run.output.grid
    for i in (0, 3):
        for k in (0, len(grid) // 2, len(grid) - 1):
            est = estimate_level(
                run.geometry, problem, float(grid.levels[k]), exclude=i,
                mc=mc, workspace=run.workspace,
            )
            assert aggregate_prob(est.accepted, problem, i) == pytest.approx(
                run.output.per_level[k, i], abs=1e-12
            )


def test_member_losses_bounded_by_delta():
    rng = np.random.default_rng(31)
    problem = make_logistic_problem(10, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    mc = McConfig(samples_per_level=20_000, seed=32)
    ws = build_workspace(geo, problem, mc)
    member_losses = ws.losses[ws.member]
    assert float(member_losses.max()) <= geo.delta + 1e-9


def test_probabilities_strictly_inside_unit_interval():
    rng = np.random.default_rng(33)
    problem = make_logistic_problem(8, 2, 1.0, 1.0, rng)
    run = run_mlsa_logistic(problem, McConfig(samples_per_level=5000, seed=34))
    assert np.all(run.output.per_level > 0.0) and np.all(run.output.per_level < 1.0)
    assert math.isfinite(run.output.loo_error)


# ----------------------------------------------------------- geometry checks


def test_containment_boundary_minimizer():
    rng = np.random.default_rng(35)
    problem = make_logistic_problem(20, 2, 1.0, 1.0, rng, noise=0)
    geo = build_geometry(problem)
    report = verify_ellipsoid_containment(geo, problem, McConfig(samples_per_level=10_000, seed=36))
    assert report.violations == 0
    assert not report.interior
    assert abs(report.halfspace_fraction - 0.5) <= 3 * report.halfspace_stderr
    assert report.passed


def test_containment_interior_minimizer():
    # balanced conflicting labels at shared covariates put the minimizer at 0
    x = np.array([[0.9, 0.0], [0.9, 0.0], [0.0, 0.9], [0.0, 0.9]])
    y = np.array([1.0, -1.0, 1.0, -1.0])
    problem = LogisticProblem(x, y, r=1.0, R=1.0)
    geo = build_geometry(problem, tol=1e-10)
    report = verify_ellipsoid_containment(geo, problem, McConfig(samples_per_level=4000, seed=37))
    assert report.interior
    assert report.halfspace_fraction == 1.0
    assert report.violations == 0


def test_volume_lower_bound_d1_and_d2():
    rng = np.random.default_rng(38)
    for d, k in [(1, 20_000), (2, 100_000)]:
        problem = make_logistic_problem(20, d, 1.0, 1.0, rng)
        geo = build_geometry(problem)
        report = verify_volume_lower_bound(
            geo, problem, McConfig(samples_per_level=k, seed=39)
        )
        assert report.passed
        assert report.estimate <= 1.0


# --------------------------------------------------------------- certificate


def test_logistic_bound_components_echo_geometry():
    rng = np.random.default_rng(40)
    problem = make_logistic_problem(12, 2, 1.0, 1.0, rng)
    run = run_mlsa_logistic(problem, McConfig(samples_per_level=4000, seed=41))
    cert = verify_logistic_bound(run.output, run.geometry, problem)
    assert cert.components["delta"] == run.geometry.delta
    assert cert.components["grid_size"] == len(run.output.grid)
    assert cert.components["log_term"] == pytest.approx(math.log(max(8.0, 24.0)))
    assert cert.components["rhs_nominal"] == pytest.approx(cert.rhs / 1.05)
    assert cert.passed


def test_logistic_bound_grid_mismatch():
    rng = np.random.default_rng(42)
    problem = make_logistic_problem(12, 2, 1.0, 1.0, rng)
    run = run_mlsa_logistic(problem, McConfig(samples_per_level=4000, seed=43))
    other = make_logistic_problem(30, 2, 1.0, 1.0, rng)
    with pytest.raises(GridMismatchError):
        verify_logistic_bound(run.output, build_geometry(other), other)


def test_logistic_bound_scaling_rerun_keeps_verdict():
    rng = np.random.default_rng(44)
    base = make_logistic_problem(10, 1, 1.0, 1.0, rng)
    scaled = LogisticProblem(0.5 * base.covariates, base.labels, r=1.0, R=0.5)
    verdicts = []
    for problem in (base, scaled):
        run = run_mlsa_logistic(problem, McConfig(samples_per_level=20_000, seed=45))
        cert = verify_logistic_bound(run.output, run.geometry, problem)
        verdicts.append(cert.passed)
    assert verdicts[0] == verdicts[1]


def test_geometry_report_fields():
    rng = np.random.default_rng(46)
    problem = make_logistic_problem(10, 2, 1.0, 1.0, rng)
    geo = build_geometry(problem)
    report = geometry_report(geo, problem)
    assert set(report) == {
        "eigenvalues", "lambda_min", "theta_star", "grad_norm", "R_B", "delta", "grid_size",
    }
    assert len(report["eigenvalues"]) == 2


def test_load_logistic_problem(tmp_path):
    rng = np.random.default_rng(47)
    problem = make_logistic_problem(6, 2, 1.0, 1.0, rng)
    path = tmp_path / "problem.txt"
    np.savetxt(path, np.column_stack([problem.covariates, problem.labels]), fmt="%.17g")
    loaded = load_logistic_problem(path, r=1.0, R=1.0)
    assert np.allclose(loaded.covariates, problem.covariates)
    assert np.array_equal(loaded.labels, problem.labels)
