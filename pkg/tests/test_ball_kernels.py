import numpy as np
import pytest
from scipy.integrate import quad

from fracblowup.errors import DataInadmissibleError, IntegrabilityError, SingularityError
from fracblowup.models.asymptotics import boundary_exponent
from fracblowup.models.ball_kernels import (
    KernelSet,
    green,
    green_apply,
    green_integral,
    h1,
    h1_mass,
    h1_profile,
    poisson,
    poisson_apply,
    torsion,
    torsion_profile,
)
from fracblowup.models.mesh_domain import Domain, GridFunction, build_graded_mesh, parse_exterior_spec


def test_constants_at_half_in_one_dimension():
    kernels = KernelSet(1, 0.5)
    assert kernels.green_constant == pytest.approx(1.0 / (2.0 * np.pi), rel=1e-14)
    assert kernels.fraclap_constant == pytest.approx(1.0 / np.pi, rel=1e-14)
    assert kernels.torsion_constant == pytest.approx(1.0, rel=1e-14)
    assert kernels.poisson_constant == pytest.approx(1.0 / np.pi, rel=1e-14)


@pytest.mark.parametrize("N, s", [(1, 0.25), (1, 0.5), (1, 0.75), (3, 0.5), (3, 0.75)])
def test_green_integral_matches_quadrature(N, s):
    for r0 in (1e-3, 0.7, 25.0):
        # t = u^(1/s) removes the endpoint singularity
        expected, _ = quad(lambda u: (1.0 + u ** (1.0 / s)) ** (-N / 2.0) / s, 0.0, r0 ** s, epsabs=0.0, epsrel=1e-12)
        assert float(green_integral(r0, N, s)) == pytest.approx(expected, rel=1e-9)


def test_green_of_interval_at_half_is_logarithmic():
    kernels = KernelSet(1, 0.5)
    x, y = 0.3, -0.55
    expected = np.log((1.0 - x * y + np.sqrt((1.0 - x * x) * (1.0 - y * y))) / abs(x - y)) / np.pi
    assert float(green(kernels, x, y)) == pytest.approx(expected, rel=1e-12)


def test_green_is_symmetric():
    rng = np.random.default_rng(7)
    kernels = KernelSet(3, 0.75)
    x = rng.uniform(-0.5, 0.5, size=(16, 3))
    y = rng.uniform(-0.5, 0.5, size=(16, 3))
    np.testing.assert_allclose(green(kernels, x, y), green(kernels, y, x), rtol=1e-12)


def test_green_on_diagonal_raises():
    with pytest.raises(SingularityError):
        green(KernelSet(1, 0.5), 0.2, 0.2)


def test_h1_normalization():
    delta = np.array([1e-8, 1e-6])
    np.testing.assert_allclose(delta ** 0.75 * h1_profile(0.25, delta), 1.0, rtol=1e-5)
    kernels = KernelSet(3, 0.25)
    assert float(h1(kernels, np.array([0.0, 0.0, 0.5]))) == pytest.approx(float(h1_profile(0.25, 0.5)), rel=1e-14)


@pytest.mark.parametrize("N, s", [(1, 0.5), (1, 0.3), (3, 0.75)])
def test_h1_mass_matches_quadrature(N, s):
    area = 2.0 if N == 1 else 4.0 * np.pi
    # r = 1 - v^(1/s) removes the boundary singularity
    expected, _ = quad(
        lambda v: 2.0 ** (1.0 - s) * (1.0 - v ** (1.0 / s)) ** (N - 1) * (2.0 - v ** (1.0 / s)) ** (s - 1.0) / s,
        0.0,
        1.0,
        epsabs=0.0,
        epsrel=1e-12,
    )
    assert h1_mass(s, N) == pytest.approx(area * expected, rel=1e-9)


def test_torsion_matches_profile():
    kernels = KernelSet(1, 0.5)
    x = np.array([-0.9, 0.0, 0.4])
    np.testing.assert_allclose(torsion(kernels, x), np.sqrt(1.0 - x ** 2), rtol=1e-14)
    assert float(torsion(kernels, 1.5)) == 0.0


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_green_of_one_is_torsion_on_interval(s):
    mesh = build_graded_mesh(Domain.interval(), 64, 4.0)
    kernels = KernelSet(1, s)
    values = green_apply(kernels, GridFunction(mesh, s, np.ones(mesh.size)))
    expected = torsion_profile(s, 1, mesh.delta)
    np.testing.assert_allclose(values, expected, rtol=1e-3)


@pytest.mark.slow
def test_green_of_one_is_torsion_on_ball():
    s = 0.5
    mesh = build_graded_mesh(Domain.ball(3), 32, 4.0)
    kernels = KernelSet(3, s)
    values = green_apply(kernels, GridFunction(mesh, s, np.ones(mesh.size)))
    np.testing.assert_allclose(values, torsion_profile(s, 3, mesh.delta), rtol=1e-3)


def test_green_of_zero_source(interval_mesh):
    values = green_apply(KernelSet(1, 0.5), GridFunction(interval_mesh, 0.5, np.zeros(interval_mesh.size)))
    assert not np.any(values)


def test_green_refuses_non_integrable_source(interval_mesh):
    source = GridFunction(interval_mesh, 0.5, interval_mesh.delta ** -1.6)
    with pytest.raises(IntegrabilityError):
        green_apply(KernelSet(1, 0.5), source)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
def test_poisson_of_one_is_one(interval_mesh, s):
    values = poisson_apply(KernelSet(1, s), interval_mesh, parse_exterior_spec("power:0", s))
    np.testing.assert_allclose(values, 1.0, rtol=5e-3)


def test_poisson_of_zero_data(interval_mesh):
    assert not np.any(poisson_apply(KernelSet(1, 0.5), interval_mesh, parse_exterior_spec("zero", 0.5)))


def test_poisson_refuses_slowly_decaying_data(interval_mesh):
    with pytest.raises(DataInadmissibleError):
        poisson_apply(KernelSet(1, 0.5), interval_mesh, parse_exterior_spec("power:-1", 0.5))


def test_poisson_of_shell_is_positive_and_bounded(interval_mesh):
    values = poisson_apply(KernelSet(1, 0.5), interval_mesh, parse_exterior_spec("shell:1.2:2", 0.5))
    assert np.all(values > 0) and np.all(values < 1.0)


@pytest.mark.parametrize("N", [1, 3])
def test_poisson_kernel_is_positive(N):
    rng = np.random.default_rng(7)
    directions = rng.normal(size=(2, 200, N))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    x = directions[0] * rng.uniform(0.0, 0.95, size=(200, 1))
    y = directions[1] * rng.uniform(1.01, 5.0, size=(200, 1))
    assert np.all(poisson(KernelSet(N, 0.5), x, y) > 0)


@pytest.mark.parametrize("node", [15, 5])
def test_poisson_of_shell_matches_kernel_quadrature(interval_mesh, node):
    kernels = KernelSet(1, 0.5)
    values = poisson_apply(kernels, interval_mesh, parse_exterior_spec("shell:1.2:2", 0.5))
    x = float(interval_mesh.x[node])
    right, _ = quad(lambda y: float(poisson(kernels, x, y)), 1.2, 2.0, epsabs=0.0, epsrel=1e-12)
    left, _ = quad(lambda y: float(poisson(kernels, x, y)), -2.0, -1.2, epsabs=0.0, epsrel=1e-12)
    assert values[node] == pytest.approx(right + left, rel=1e-5)


def test_poisson_of_power_data_keeps_its_exponent():
    s = 0.5
    mesh = build_graded_mesh(Domain.interval(), 256, 4.0)
    # data (|y|^2 - 1)^(-s/2) gives a solution growing like delta^(-s/2)
    values = poisson_apply(KernelSet(1, s), mesh, parse_exterior_spec(f"power:{s / 2}", s))
    fit = boundary_exponent(GridFunction(mesh, s, values), top=1e-4)
    assert fit.exponent == pytest.approx(-s / 2, abs=0.015)
