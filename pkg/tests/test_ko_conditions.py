import numpy as np
import pytest

from fracblowup.errors import DivergentIntegralError, InversionRangeError
from fracblowup.models.ko_conditions import (
    KOProfile,
    check_condition,
    check_E,
    check_L1,
    check_U_integrability,
    classify_power_regime,
    predict_regime,
    verify_ratio_bounds,
)
from fracblowup.models.nonlinearity import NonlinearityModel, load_table
from fracblowup.schemas.conditions import Condition, Regime, Verdict
from fracblowup.schemas.nonlinearity import GrowthEnvelope


def test_phi_of_cubic_is_closed_form(cubic_model):
    profile = KOProfile.build(cubic_model, 0.5)
    u = np.geomspace(1e-3, 1e6, 31)
    np.testing.assert_allclose(profile.phi(u), 2.0 / u, rtol=1e-9)
    assert profile.phi(0.0) == np.inf


def test_phi_prime_of_cubic(cubic_model):
    profile = KOProfile.build(cubic_model, 0.5)
    u = np.geomspace(1e-3, 1e6, 31)
    np.testing.assert_allclose(profile.phi_prime(u), -2.0 / u ** 2, rtol=1e-12)


def test_psi_inverts_phi(power_model):
    profile = KOProfile.build(power_model, 0.5)
    u = np.geomspace(1e-4, 1e7, 23)
    np.testing.assert_allclose(profile.psi(profile.phi(u)), u, rtol=1e-8)


def test_tabulated_phi_matches_closed_form(table_file, cubic_model):
    t, f = load_table(str(table_file))
    table_profile = KOProfile.build(NonlinearityModel.tabulated(t, f), 0.5)
    exact = KOProfile.build(cubic_model, 0.5)
    u = np.geomspace(1e-3, 1e6, 19)
    np.testing.assert_allclose(table_profile.phi(u), exact.phi(u), rtol=1e-5)
    np.testing.assert_allclose(table_profile.psi(exact.phi(u)), u, rtol=1e-5)


def test_powerlog_psi_round_trip():
    profile = KOProfile.build(NonlinearityModel.power_log(3.0, 1.0), 0.5)
    u = np.geomspace(1e-3, 1e6, 19)
    np.testing.assert_allclose(profile.psi(profile.phi(u)), u, rtol=1e-8)


def test_psi_rejects_nonpositive_argument(power_model):
    profile = KOProfile.build(power_model, 0.5)
    with pytest.raises(InversionRangeError):
        profile.psi(np.array([1.0, 0.0]))


def test_profile_refuses_non_integrable_tail():
    model = NonlinearityModel.power(0.9)
    envelope = GrowthEnvelope(m=0.1, M=0.1, sample_min=1e-6, sample_max=1e6, n_samples=2, grid="manual")
    with pytest.raises(DivergentIntegralError):
        KOProfile(model, 0.5, envelope, 1e8)


@pytest.mark.parametrize(
    "p, condition, verdict",
    [
        (2.5, Condition.L1BIS, Verdict.CONVERGES),
        (1.5, Condition.L1BIS, Verdict.DIVERGES),
        (2.0, Condition.L1BIS, Verdict.BORDERLINE),
        (2.5, Condition.E, Verdict.CONVERGES),
        (3.5, Condition.E, Verdict.DIVERGES),
        (3.0, Condition.E, Verdict.BORDERLINE),
    ],
)
def test_power_thresholds_at_half(p, condition, verdict):
    report = check_condition(NonlinearityModel.power(p), 0.5, condition)
    assert report.verdict == verdict


def test_power_tail_exponent_is_exact():
    report = check_condition(NonlinearityModel.power(2.5), 0.5, Condition.L1BIS)
    assert report.tail_exponent_of_integrand == pytest.approx(-1.5, abs=1e-9)
    assert report.margin == pytest.approx(0.5, abs=1e-9)
    assert report.decided_by == "power"


@pytest.mark.parametrize(
    "p, alpha, condition, verdict",
    [
        (2.0, 1.5, Condition.L1BIS, Verdict.CONVERGES),
        (2.0, 0.5, Condition.L1BIS, Verdict.DIVERGES),
        (3.0, -2.0, Condition.E, Verdict.CONVERGES),
        (3.0, -0.7, Condition.E, Verdict.DIVERGES),
    ],
)
def test_log_factor_decides_at_critical_power(p, alpha, condition, verdict):
    report = check_condition(NonlinearityModel.power_log(p, alpha), 0.5, condition)
    assert report.verdict == verdict
    assert report.decided_by == "log"


@pytest.mark.parametrize("model", [NonlinearityModel.power(2.5), NonlinearityModel.power_log(3.0, 1.0)])
def test_both_L1_forms_agree(model):
    profile = KOProfile.build(model, 0.5)
    assert check_L1(profile, form="phi").verdict == check_L1(profile, form="bis").verdict


def test_U_integrability_follows_L1bis(power_model):
    profile = KOProfile.build(power_model, 0.5)
    assert check_U_integrability(profile).verdict == Verdict.CONVERGES
    assert check_E(profile).verdict == Verdict.CONVERGES


def test_ratio_bounds_hold_for_table(table_file):
    t, f = load_table(str(table_file))
    report = verify_ratio_bounds(KOProfile.build(NonlinearityModel.tabulated(t, f), 0.5))
    assert report.passed, report.worst_margin


@pytest.mark.parametrize(
    "model",
    [
        NonlinearityModel.power(2.5),
        NonlinearityModel.power(4.0),
        NonlinearityModel.power_log(3.0, 1.0),
        NonlinearityModel.power_log(3.0, -2.0),
    ],
    ids=lambda model: model.label,
)
def test_ratio_bounds_hold(model):
    profile = KOProfile.build(model, 0.5)
    t_grid = np.geomspace(profile.envelope.sample_min * 10.0, profile.envelope.sample_max / 10.0, 256)
    report = verify_ratio_bounds(profile, t_grid)
    assert report.passed, (model.label, report.worst_margin)
    assert all(np.isfinite(check.margin) for check in report.checks)


@pytest.mark.parametrize(
    "p, s, regime",
    [
        (0.7, 0.5, Regime.UNIFORM_BLOWUP),
        (1.0, 0.5, Regime.UNIFORM_BLOWUP),
        (1.2, 0.5, Regime.L1_ESCAPE),
        (1.7, 0.5, Regime.UNCLASSIFIED),
        (2.5, 0.5, Regime.LARGE_SOLUTION),
        (3.0, 0.5, Regime.NONEXISTENCE),
        (3.5, 0.5, Regime.NONEXISTENCE),
        (1.6, 0.25, Regime.LARGE_SOLUTION),
        (2.0, 0.25, Regime.NONEXISTENCE),
        (6.0, 0.75, Regime.LARGE_SOLUTION),
        (7.0, 0.75, Regime.NONEXISTENCE),
    ],
)
def test_power_regime_map(p, s, regime):
    assert classify_power_regime(p, s) == regime


def test_predict_regime_for_log_models():
    assert predict_regime(NonlinearityModel.power_log(2.0, 1.5), 0.5) == Regime.LARGE_SOLUTION
    assert predict_regime(NonlinearityModel.power_log(3.0, 1.0), 0.5) == Regime.NONEXISTENCE
