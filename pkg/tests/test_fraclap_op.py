import numpy as np
import pytest

from fracblowup.errors import ConfigError, ProximityError
from fracblowup.models.ball_kernels import KernelSet, green_apply
from fracblowup.models.fraclap_op import (
    FracLapOperator,
    h1_grid_function,
    ko_grid_function,
    residual,
    supersolution_inequality_check,
    trace_growth_check,
)
from fracblowup.models.ko_conditions import KOProfile
from fracblowup.models.mesh_domain import Domain, GridFunction, build_graded_mesh, parse_exterior_spec


def _torsion_error(n: int, q: float) -> float:
    mesh = build_graded_mesh(Domain.interval(), n, q)
    op = FracLapOperator(mesh, 0.5)
    u = GridFunction(mesh, 0.5, np.sqrt(mesh.delta * (2.0 - mesh.delta)))
    centre = op.admissible[np.abs(mesh.x[op.admissible]) < 0.5]
    return float(np.max(np.abs(op.apply_nodes(u, centre) - 1.0)))


def test_operator_needs_interval():
    with pytest.raises(ConfigError):
        FracLapOperator(build_graded_mesh(Domain.ball(2), 32, 4.0), 0.5)


def test_operator_needs_valid_order(interval_mesh):
    with pytest.raises(ConfigError):
        FracLapOperator(interval_mesh, 1.0)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_constant_with_matching_exterior_is_annihilated(interval_mesh, s):
    op = FracLapOperator(interval_mesh, s)
    u = GridFunction(interval_mesh, s, np.ones(interval_mesh.size), parse_exterior_spec("power:0", s))
    values = op.apply_nodes(u)
    scale = op.A_const * op.h[op.admissible] ** (-2.0 * s) / s
    assert np.max(np.abs(values) / scale) < 1e-4


def test_half_laplacian_of_semicircle():
    assert _torsion_error(128, 2.0) < 0.05


@pytest.mark.slow
def test_semicircle_error_decreases_with_refinement():
    assert _torsion_error(256, 2.0) < _torsion_error(128, 2.0)


@pytest.mark.slow
def test_h1_is_s_harmonic():
    errors = []
    for n in (64, 128):
        mesh = build_graded_mesh(Domain.interval(), n, 2.0)
        op = FracLapOperator(mesh, 0.5)
        centre = op.admissible[np.abs(mesh.x[op.admissible]) < 0.5]
        errors.append(float(np.max(np.abs(op.apply_nodes(h1_grid_function(mesh, 0.5), centre)))))
    assert errors[1] < errors[0]
    assert errors[1] < 0.1


def test_outermost_nodes_are_refused(interval_mesh):
    op = FracLapOperator(interval_mesh, 0.5)
    u = GridFunction(interval_mesh, 0.5, np.ones(interval_mesh.size))
    with pytest.raises(ProximityError) as excinfo:
        op.apply(u, 0)
    assert excinfo.value.details["node"] == 0


def test_residual_adds_the_source(interval_mesh):
    op = FracLapOperator(interval_mesh, 0.5)
    u = GridFunction(interval_mesh, 0.5, np.sqrt(interval_mesh.delta * (2.0 - interval_mesh.delta)))
    plain = op.apply_nodes(u)
    shifted = residual(op, u, lambda v: np.full_like(v, 2.0))
    np.testing.assert_allclose(shifted - plain, 2.0, rtol=1e-12)


def test_off_diagonal_weights_are_nonnegative(interval_mesh):
    op = FracLapOperator(interval_mesh, 0.5)
    weights = op.off_diagonal_weights()
    assert np.all(weights[op.admissible] >= 0.0)


def test_ko_function_matches_psi(fine_interval_mesh, cubic_model):
    profile = KOProfile.build(cubic_model, 0.5)
    u = ko_grid_function(fine_interval_mesh, profile, scale=3.0)
    np.testing.assert_allclose(u.total(), 6.0 * fine_interval_mesh.delta ** -0.5, rtol=1e-12)
    assert u.exterior(np.array([0.25]))[0] == pytest.approx(12.0, rel=1e-12)


def test_trace_of_ko_function_grows(fine_interval_mesh, power_model):
    profile = KOProfile.build(power_model, 0.5)
    ratios = trace_growth_check(fine_interval_mesh, profile)
    assert ratios[0] > ratios[-1]


def test_inequality_report_of_ko_function(interval_mesh, power_model):
    profile = KOProfile.build(power_model, 0.5)
    op = FracLapOperator(interval_mesh, 0.5)
    report = supersolution_inequality_check(op, ko_grid_function(interval_mesh, profile), power_model, 0.2)
    assert report.n_checked == len(op.admissible)
    assert report.C_strip >= 0.0
    assert report.delta0 == 0.2


def test_h1_grid_function_values(interval_mesh):
    u = h1_grid_function(interval_mesh, 0.5, k=2.0)
    assert u.trace_coeff is None
    assert u.values[15] == pytest.approx(2.0 * 2.0 ** 0.5, rel=1e-14)


def test_kernel_normalisation_is_shared(interval_mesh):
    op = FracLapOperator(interval_mesh, 0.3)
    assert op.A_const == KernelSet(1, 0.3).fraclap_constant


def test_fractional_laplacian_inverts_green_operator():
    mesh = build_graded_mesh(Domain.interval(), 128, 2.0)
    source = np.ones(mesh.size)
    values = green_apply(KernelSet(1, 0.5), GridFunction(mesh, 0.5, source))
    op = FracLapOperator(mesh, 0.5)
    centre = op.admissible[np.abs(mesh.x[op.admissible]) < 0.5]
    recovered = op.apply_nodes(GridFunction(mesh, 0.5, values), centre)
    assert np.max(np.abs(recovered - source[centre])) < 0.05
