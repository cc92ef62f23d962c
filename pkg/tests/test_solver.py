import numpy as np
import pytest

from fracblowup.errors import ConfigError, HypothesisViolationError, IntegrabilityError, IterationError
from fracblowup.models.asymptotics import bbehav_check, boundary_exponent
from fracblowup.models.ball_kernels import h1_mass, h1_profile
from fracblowup.models.ko_conditions import KOProfile
from fracblowup.models.nonlinearity import NonlinearityModel
from fracblowup.models.solver import (
    build_supersolution,
    classify_sweep,
    monotone_iteration,
    solve_g_problem,
    solve_k_problem,
    sweep_k,
)
from fracblowup.schemas.nonlinearity import Family, NonlinearitySpec
from fracblowup.schemas.solve import DomainKind, MeshSpec, SolveConfig, SweepObservation


def _g_config(spec: str, p: float = 2.5, n: int = 32) -> SolveConfig:
    return SolveConfig(
        s=0.5,
        model=NonlinearitySpec(family=Family.POWER, p=p),
        mesh=MeshSpec(n=n),
        g_spec=spec,
    )


def test_config_needs_exactly_one_data_source():
    model = NonlinearitySpec(family=Family.POWER, p=2.5)
    with pytest.raises(ValueError):
        SolveConfig(s=0.5, model=model)
    with pytest.raises(ValueError):
        SolveConfig(s=0.5, model=model, k=1.0, g_spec="zero")


def test_config_default_grading():
    config = SolveConfig(s=0.25, model=NonlinearitySpec(p=2.0), k=1.0)
    assert config.mesh_q() == 8.0


def test_monotone_iteration_solves_scalar_problem():
    model = NonlinearityModel.power(2.0)
    weights = 0.5 * np.eye(4)
    outcome = monotone_iteration(model, weights, np.ones(4), max_iters=50, tol=1e-12)
    np.testing.assert_allclose(outcome.u, np.sqrt(3.0) - 1.0, rtol=1e-10)
    assert outcome.fixed_point_gap < 1e-10
    assert outcome.clamped == 0 and outcome.violations == 0
    assert outcome.history[-1] <= 1e-12


def test_monotone_iteration_without_coupling_returns_base():
    outcome = monotone_iteration(NonlinearityModel.power(2.0), np.zeros((3, 3)), np.full(3, 5.0), 10, 1e-12)
    assert outcome.iterations == 1
    np.testing.assert_array_equal(outcome.u, 5.0)


def test_monotone_iteration_reports_non_convergence():
    with pytest.raises(IterationError):
        monotone_iteration(NonlinearityModel.power(2.0), 0.5 * np.eye(2), np.ones(2), max_iters=1, tol=1e-14)


def test_monotone_iteration_refuses_a_clipped_stall():
    # negative coupling pushes every step upward; the clip freezes u at base
    with pytest.raises(IterationError) as excinfo:
        monotone_iteration(NonlinearityModel.power(3.0), np.array([[-0.1]]), np.ones(1), max_iters=20, tol=1e-10)
    assert excinfo.value.details["clipped"] == 20
    assert excinfo.value.details["fixed_point_gap"] == pytest.approx(0.1, rel=1e-12)


def test_k_problem_is_sandwiched(k_config):
    config = k_config(k=2.0)
    result = solve_k_problem(config)
    mesh = result.solution.mesh
    total = result.solution.total()
    bound = 2.0 * h1_profile(0.5, mesh.delta)
    assert np.all(total >= 0.0)
    assert np.all(total <= bound * (1.0 + 1e-10))
    summary = result.summary
    assert summary.converged and summary.k == 2.0
    assert summary.fixed_point_gap <= config.tol
    assert summary.monotonicity_violations == 0 and summary.clamped_count == 0
    assert 0.0 < summary.L1_norm < 2.0 * h1_mass(0.5, 1)
    assert summary.residual is not None and summary.residual.n_nodes == 29
    assert summary.tech_ok


def test_k_problem_is_monotone_in_k(k_config):
    small = solve_k_problem(k_config(k=1.0), with_residual=False).solution.total()
    large = solve_k_problem(k_config(k=2.0), with_residual=False).solution.total()
    assert np.all(large >= small - 1e-8)


def test_k_problem_refused_when_E_fails(k_config):
    with pytest.raises(IntegrabilityError):
        solve_k_problem(k_config(p=3.5))


def test_g_problem_with_zero_data():
    result = solve_g_problem(_g_config("zero"))
    assert not np.any(result.solution.total())
    assert result.summary.L1_norm == 0.0
    assert len(result.summary.ladder) == 1
    assert result.summary.g2_ok is True


def test_g_problem_with_shell_data():
    result = solve_g_problem(_g_config("shell:1.2:2"))
    total = result.solution.total()
    assert np.all(total >= 0.0) and np.all(total <= 1.0)
    assert np.any(total > 0.0)
    # the shell amplitude is below every truncation level, so the ladder stops after two rungs
    assert [rung["k"] for rung in result.summary.ladder] == [4.0, 16.0]
    assert result.summary.truncation == 16.0


def test_stabilizing_observation():
    observed, growth = classify_sweep([1, 2, 4, 8], [1.0, 1.5, 1.7, 1.75], [0.5, 0.7, 0.8, 0.8], [1, 2, 3, 3.2])
    assert observed == SweepObservation.STABILIZING
    assert growth == pytest.approx(np.log(1.75 / 1.7) / np.log(2.0))


def test_uniform_blowup_observation():
    observed, _ = classify_sweep([1, 2, 4, 8], [1.0, 2.0, 4.0, 8.0], [1.0, 2.0, 4.0, 8.0], [1, 2, 4, 8])
    assert observed == SweepObservation.UNIFORM_BLOWUP


def test_l1_escape_observation():
    observed, _ = classify_sweep([1, 2, 4, 8], [1.0, 1.8, 3.0, 4.8], [0.1, 0.1, 0.1, 0.1], [1, 2, 4, 8])
    assert observed == SweepObservation.L1_ESCAPE


def test_unclassified_observation():
    observed, _ = classify_sweep([1, 2, 4, 8], [1.0, 1.8, 3.0, 4.8], [0.1, 0.1, 0.1, 0.1], [1, 1.2, 1.4, 1.6])
    assert observed == SweepObservation.UNCLASSIFIED
    assert classify_sweep([1], [1.0], [1.0], [1.0]) == (SweepObservation.UNCLASSIFIED, None)


def test_sweep_refuses_beyond_E_threshold(k_config):
    result = sweep_k(k_config(p=3.5), [1.0, 2.0])
    assert result.summary.regime_observed == SweepObservation.REFUSAL.value
    assert result.summary.agree
    assert "(E)" in result.summary.refusal_reason


@pytest.mark.parametrize("k_list", [[2.0, 1.0], [0.0, 1.0], []])
def test_sweep_rejects_bad_k_list(k_config, k_list):
    with pytest.raises(ConfigError):
        sweep_k(k_config(), k_list)


def test_supersolution_needs_interval():
    config = SolveConfig(
        s=0.5,
        model=NonlinearitySpec(family=Family.POWER, p=2.5),
        mesh=MeshSpec(domain=DomainKind.BALL, N=2, n=32),
        k=1.0,
    )
    with pytest.raises(ConfigError):
        build_supersolution(config)


@pytest.mark.parametrize("p", [0.7, 1.2])
def test_supersolution_needs_L1(k_config, p):
    with pytest.raises(HypothesisViolationError):
        build_supersolution(k_config(p=p))


@pytest.mark.slow
@pytest.mark.parametrize("s, p", [(0.5, 2.5), (0.75, 4.0)])
def test_supersolution_holds(k_config, s, p):
    spec = build_supersolution(k_config(p=p, s=s, n=128))
    summary = spec.summary
    assert summary.min_scaled_residual >= -1e-3
    assert summary.mu >= 1.0 and summary.lam >= 0.0
    assert np.all(spec.ubar.total() >= spec.U.total())


@pytest.mark.slow
@pytest.mark.parametrize(
    "p, observed",
    [
        (2.5, SweepObservation.STABILIZING),
        (1.2, SweepObservation.L1_ESCAPE),
        (0.7, SweepObservation.UNIFORM_BLOWUP),
    ],
)
def test_regime_sweep(k_config, p, observed):
    result = sweep_k(k_config(p=p, n=128), [1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    summary = result.summary
    assert summary.regime_observed == observed.value
    assert summary.agree
    assert summary.k_monotone and summary.sandwich_ok
    if p == 2.5:
        assert summary.below_supersolution


@pytest.mark.slow
def test_large_solution_sweep_at_full_resolution(k_config):
    k_list = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    result = sweep_k(k_config(p=2.5, n=256), k_list)
    assert result.summary.regime_observed == SweepObservation.STABILIZING.value
    assert result.summary.k_monotone and result.summary.sandwich_ok
    for k in k_list:
        summary = result.results[k].summary
        assert summary.converged
        assert summary.monotonicity_violations == 0 and summary.clamped_count == 0

    largest = result.results[k_list[-1]].solution
    fit = boundary_exponent(largest)
    assert -0.78 <= fit.exponent <= -0.55
    bbehav = bbehav_check(largest, KOProfile.build(NonlinearityModel.power(2.5), 0.5))
    assert bbehav.min_ratio >= 0.2 and bbehav.half_window_min >= 0.2
