import numpy as np
import pytest

from fracblowup.errors import FitError, InsufficientDataError
from fracblowup.models.asymptotics import (
    analyze,
    bbehav_check,
    boundary_exponent,
    boundary_window,
    singular_trace,
)
from fracblowup.models.fraclap_op import ko_grid_function
from fracblowup.models.ko_conditions import KOProfile
from fracblowup.models.mesh_domain import Domain, GridFunction, build_graded_mesh


def test_window_excludes_nearest_nodes(fine_interval_mesh):
    u = GridFunction(fine_interval_mesh, 0.5, np.ones(fine_interval_mesh.size))
    nodes = boundary_window(u)
    assert len(nodes) == 64
    assert np.all(fine_interval_mesh.boundary_rank()[nodes] > 3)
    assert np.all(fine_interval_mesh.delta[nodes] <= 0.1)


def test_window_on_coarse_mesh_is_too_small():
    mesh = build_graded_mesh(Domain.interval(), 16, 4.0)
    with pytest.raises(InsufficientDataError):
        boundary_window(GridFunction(mesh, 0.5, np.ones(mesh.size)))


def test_pure_power_fit(fine_interval_mesh):
    u = GridFunction(fine_interval_mesh, 0.5, 3.0 * fine_interval_mesh.delta ** (-2.0 / 3.0))
    fit = boundary_exponent(u)
    assert fit.exponent == pytest.approx(-2.0 / 3.0, abs=1e-9)
    assert fit.coefficient == pytest.approx(3.0, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_needs_positive_values(fine_interval_mesh):
    values = np.ones(fine_interval_mesh.size)
    values[boundary_window(GridFunction(fine_interval_mesh, 0.5, values))[0]] = 0.0
    with pytest.raises(FitError):
        boundary_exponent(GridFunction(fine_interval_mesh, 0.5, values))


def test_fast_blowup_has_diverging_trace(fine_interval_mesh):
    u = GridFunction(fine_interval_mesh, 0.5, fine_interval_mesh.delta ** (-2.0 / 3.0))
    trace = singular_trace(u)
    assert trace.diverging and trace.value == float("inf")


def test_trace_of_h1_multiple(fine_interval_mesh):
    u = GridFunction(fine_interval_mesh, 0.5, np.zeros(fine_interval_mesh.size), trace_coeff=2.0)
    trace = singular_trace(u)
    assert not trace.diverging
    assert trace.value == pytest.approx(2.0, rel=1e-3)
    assert trace.exponent == pytest.approx(-0.5, abs=0.03)


def test_ko_profile_meets_phi_bound(fine_interval_mesh, cubic_model):
    profile = KOProfile.build(cubic_model, 0.5)
    report = bbehav_check(ko_grid_function(fine_interval_mesh, profile), profile)
    assert report.passed
    assert report.min_ratio == pytest.approx(1.0, rel=1e-9)
    assert report.fitted_limit == pytest.approx(1.0, rel=1e-6)


def test_analyze_reports_every_part(fine_interval_mesh, cubic_model):
    profile = KOProfile.build(cubic_model, 0.5)
    report = analyze(ko_grid_function(fine_interval_mesh, profile), profile)
    assert report.fit.exponent == pytest.approx(-0.5, abs=1e-9)
    assert report.half_window_exponent == pytest.approx(-0.5, abs=1e-9)
    assert report.bbehav is not None and report.bbehav.passed
    assert analyze(ko_grid_function(fine_interval_mesh, profile)).bbehav is None
