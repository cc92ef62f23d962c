import numpy as np
import pytest
from scipy.integrate import quad

from fracblowup.errors import ConfigError, HypothesisViolationError, OutOfRangeError
from fracblowup.models.nonlinearity import (
    NonlinearityModel,
    check_linear_bound,
    check_monotone_scaling,
    check_power_lower_bounds,
    estimate_growth_envelope,
    eval_F,
    eval_f,
    eval_f_prime,
    growth_ratio,
    load_table,
)
from fracblowup.schemas.nonlinearity import Family, NonlinearitySpec


def test_power_values(power_model):
    assert eval_f(power_model, 0.0) == 0.0
    assert eval_f(power_model, 2.0) == pytest.approx(2.0 ** 2.5, rel=1e-15)
    values = eval_f(power_model, np.array([1.0, 4.0]))
    assert isinstance(values, np.ndarray)
    np.testing.assert_allclose(values, [1.0, 32.0], rtol=1e-15)


def test_scale_multiplies_f_and_F():
    model = NonlinearityModel.power(2.0, scale=1e-3)
    assert eval_f(model, 10.0) == pytest.approx(0.1, rel=1e-14)
    assert eval_F(model, 3.0) == pytest.approx(1e-3 * 27.0 / 3.0, rel=1e-14)


def test_negative_argument_rejected(power_model):
    with pytest.raises(ConfigError):
        eval_f(power_model, -1.0)


def test_nonpositive_exponent_rejected():
    with pytest.raises(ConfigError):
        NonlinearityModel.power(0.0)


def test_power_derivative(power_model):
    t = np.geomspace(1e-3, 1e3, 7)
    np.testing.assert_allclose(eval_f_prime(power_model, t), 2.5 * t ** 1.5, rtol=1e-13)


def test_powerlog_growth_ratio_closed_form():
    model = NonlinearityModel.power_log(3.0, 1.0)
    assert growth_ratio(model, 1.0) == pytest.approx(3.0 + 1.0 / (2.0 * np.log(2.0)), rel=1e-14)
    assert growth_ratio(model, 1e12) == pytest.approx(3.0, abs=0.05)


def test_powerlog_primitive_matches_quad():
    model = NonlinearityModel.power_log(2.0, 1.0)
    expected, _ = quad(lambda x: x ** 2 * np.log1p(x), 0.0, 3.0, epsabs=0.0, epsrel=1e-13)
    assert eval_F(model, 3.0) == pytest.approx(expected, rel=1e-10)


def test_tabulated_model_interpolates(table_file):
    t, f = load_table(str(table_file))
    model = NonlinearityModel.tabulated(t, f)
    samples = np.array([2.5e-3, 1.7, 3.3e5])
    np.testing.assert_allclose(eval_f(model, samples), samples ** 3, rtol=1e-6)
    assert not model.f_prime_available


def test_tabulated_out_of_range(table_file):
    t, f = load_table(str(table_file))
    model = NonlinearityModel.tabulated(t, f)
    with pytest.raises(OutOfRangeError) as excinfo:
        eval_f(model, 1e9)
    assert excinfo.value.details["t"] == 1e9


def test_tabulated_needs_increasing_samples():
    with pytest.raises(ConfigError):
        NonlinearityModel.tabulated(np.array([1.0, 2.0, 3.0, 4.0]), np.array([1.0, 3.0, 2.0, 5.0]))


def test_from_spec_builds_each_family(table_file):
    assert NonlinearityModel.from_spec(NonlinearitySpec(family=Family.POWER, p=2.0)).p == 2.0
    log_model = NonlinearityModel.from_spec(NonlinearitySpec(family=Family.POWERLOG, p=2.0, alpha=1.5))
    assert log_model.alpha == 1.5
    tab = NonlinearityModel.from_spec(NonlinearitySpec(family=Family.TABULATED, table_path=str(table_file)))
    assert tab.family == Family.TABULATED


def test_spec_validation():
    with pytest.raises(ValueError):
        NonlinearitySpec(family=Family.POWER)
    with pytest.raises(ValueError):
        NonlinearitySpec(family=Family.TABULATED)


def test_envelope_of_power(power_model):
    envelope = estimate_growth_envelope(power_model)
    assert envelope.m == pytest.approx(1.5, abs=1e-12)
    assert envelope.M == pytest.approx(1.5, abs=1e-12)
    assert envelope.closed_at_infinity


def test_envelope_of_powerlog_includes_limit_at_infinity():
    envelope = estimate_growth_envelope(NonlinearityModel.power_log(3.0, 1.0))
    assert envelope.m == pytest.approx(2.0, abs=1e-12)
    assert 2.99 < envelope.M <= 3.0


@pytest.mark.parametrize("p", [0.7, 1.0])
def test_envelope_rejects_non_superlinear(p):
    with pytest.raises(HypothesisViolationError):
        estimate_growth_envelope(NonlinearityModel.power(p))


def test_monotone_scaling_of_power(power_model):
    envelope = estimate_growth_envelope(power_model)
    report = check_monotone_scaling(power_model, envelope, 10.0)
    assert report.passed
    assert report.max_violation <= 1e-12


def test_envelope_grid_is_plain_text(power_model):
    envelope = estimate_growth_envelope(power_model)
    assert "np." not in envelope.grid
    assert envelope.grid == "geomspace(1e-06, 1000000.0, 2048)"


def test_monotone_scaling_rejects_small_factor(power_model):
    envelope = estimate_growth_envelope(power_model)
    with pytest.raises(ConfigError):
        check_monotone_scaling(power_model, envelope, 0.5)


def test_linear_bound_for_sublinear_power():
    model = NonlinearityModel.power(0.7)
    bound = check_linear_bound(model)
    assert bound is not None and not bound.range_limited
    t = np.geomspace(1e-6, 1e12, 1024)
    assert np.all(eval_f(model, t) <= bound.a + bound.b * t)


def test_linear_bound_witness_is_tight_for_square_root():
    model = NonlinearityModel.power(0.5)
    bound = check_linear_bound(model)
    # sqrt(t) <= a + b t is tightest in a + b at a = b = 1/2
    assert bound.a == pytest.approx(0.5, rel=0.15)
    assert bound.b == pytest.approx(0.5, rel=0.15)
    t = np.geomspace(1e-6, 1e12, 1024)
    assert np.all(eval_f(model, t) <= bound.a + bound.b * t)


def test_no_linear_bound_for_superlinear_power(power_model):
    assert check_linear_bound(power_model) is None


def test_range_limited_linear_bound(power_model):
    bound = check_linear_bound(power_model, t_range=(1e-3, 1e3))
    assert bound is not None and bound.range_limited


def test_power_lower_bounds(power_model):
    envelope = estimate_growth_envelope(power_model)
    report = check_power_lower_bounds(power_model, envelope)
    assert report.passed
    assert report.F_ratio_min == pytest.approx(3.5, rel=1e-10)


def test_load_table_rejects_wrong_shape(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3\n4,5,6\n")
    with pytest.raises(ConfigError):
        load_table(str(path))


def test_generated_fixture_matches_its_model(tmp_path):
    from scripts.generate_tabulated_nonlinearity import write_table

    path = write_table(tmp_path, "powerlog_3_1", 3.0, 1.0)
    t, f = load_table(str(path))
    model = NonlinearityModel.tabulated(t, f)
    samples = np.array([1e-3, 0.7, 5.0, 1e4])
    exact = samples**3 * np.log1p(samples)
    np.testing.assert_allclose(eval_f(model, samples), exact, rtol=1e-4)
