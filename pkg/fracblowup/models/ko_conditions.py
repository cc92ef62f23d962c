"""
Keller-Osserman transform phi(u) = int_u^inf F^(-1/2), its inverse psi, the
integral conditions on f and the regime map for power nonlinearities.
"""
import logging
from typing import Optional

import numpy as np

from fracblowup.config import settings
from fracblowup.errors import (
    DivergentIntegralError,
    InsufficientDataError,
    InversionRangeError,
)
from fracblowup.models.nonlinearity import (
    NonlinearityModel,
    ArrayLike,
    eval_f,
    eval_F,
    estimate_growth_envelope,
    check_linear_bound,
)
from fracblowup.models.quadrature import composite_log_gl, log_panel_edges, log_panel_rule
from fracblowup.schemas.conditions import (
    Condition,
    Verdict,
    Regime,
    ConditionReport,
    RatioCheck,
    RatioBoundsReport,
)
from fracblowup.schemas.nonlinearity import Family, GrowthEnvelope

logger = logging.getLogger(__name__)

BORDERLINE_BAND = 0.02
TABLE_LOW = 1e-10
PANELS_PER_DECADE = 16
NEWTON_TOL = 1e-13
NEWTON_MAX = 60


class KOProfile:
    """
    phi and psi of a model satisfying the growth hypothesis.

    Power models use the exact closed forms. Other models use a table of F and
    phi on log-spaced edges in [1e-10, T] plus power-law head and tail
    extensions matched at the table ends. Immutable after construction.
    """

    def __init__(
        self,
        model: NonlinearityModel,
        s: float,
        envelope: GrowthEnvelope,
        tail_cutoff: float,
    ):
        self.model = model
        self.s = s
        self.envelope = envelope
        self.tail_cutoff = tail_cutoff
        self._closed = model.family == Family.POWER
        if self._closed:
            p = model.p
            self._c = 2.0 * np.sqrt(p + 1.0) / ((p - 1.0) * np.sqrt(model.scale))
            self.tail_exponent = 0.5 * (p + 1.0)
        else:
            self._build_table()
        if self.tail_exponent <= 1.0:
            raise DivergentIntegralError(
                "F^(-1/2) is not integrable at infinity",
                tail_exponent=self.tail_exponent,
            )

    @classmethod
    def build(
        cls,
        model: NonlinearityModel,
        s: float,
        envelope: Optional[GrowthEnvelope] = None,
        tail_cutoff: Optional[float] = None,
    ) -> "KOProfile":
        """
        Build the profile, estimating the growth envelope if not given.

        Raises:
            HypothesisViolationError: f violates the growth hypothesis
            DivergentIntegralError: phi is infinite
        """
        if envelope is None:
            envelope = estimate_growth_envelope(model)
        if tail_cutoff is None:
            tail_cutoff = settings.tail_cutoff
        if model.family == Family.TABULATED:
            tail_cutoff = min(tail_cutoff, model.t_range[1])
        return cls(model, s, envelope, tail_cutoff)

    def _build_table(self) -> None:
        model = self.model
        low = TABLE_LOW
        if model.family == Family.TABULATED:
            low = max(low, model.t_range[0])
        edges = log_panel_edges(low, self.tail_cutoff, PANELS_PER_DECADE)
        increments = composite_log_gl(lambda t: eval_f(model, t), edges[:-1], edges[1:])
        F_edges = float(eval_F(model, edges[0])) + np.concatenate([[0.0], np.cumsum(increments)])
        self._edges = edges
        self._log_edges = np.log(edges)
        self._F_edges = F_edges

        T, F_T = edges[-1], F_edges[-1]
        self.tail_exponent = T * float(eval_f(model, T)) / (2.0 * F_T)
        self._tail_scale = T / np.sqrt(F_T) / (self.tail_exponent - 1.0) if self.tail_exponent > 1 else np.inf

        t0, F_0 = edges[0], F_edges[0]
        self.head_exponent = t0 * float(eval_f(model, t0)) / (2.0 * F_0)

        pieces = composite_log_gl(lambda t: self._F_inside(t) ** -0.5, edges[:-1], edges[1:])
        phi_edges = self._tail_scale + np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        self._phi_edges = phi_edges
        self._log_phi_edges = np.log(phi_edges)

    def _F_inside(self, t: np.ndarray) -> np.ndarray:
        """F at points inside the table range, by Gauss quadrature from the panel start."""
        shape = t.shape
        flat = t.ravel()
        j = np.clip(np.searchsorted(self._edges, flat, side="right") - 1, 0, len(self._edges) - 2)
        start = self._edges[j]
        values = self._F_edges[j] + composite_log_gl(lambda x: eval_f(self.model, x), start, np.maximum(flat, start))
        return values.reshape(shape)

    def F_eval(self, t: ArrayLike) -> ArrayLike:
        """F consistent with phi: the table inside, power-law extensions outside."""
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        if self._closed:
            out = eval_F(self.model, t)
            return float(out) if scalar else out
        out = np.empty_like(t)
        lo, hi = self._edges[0], self._edges[-1]
        head, tail = t < lo, t > hi
        mid = ~head & ~tail
        out[mid] = self._F_inside(t[mid])
        out[head] = self._F_edges[0] * (t[head] / lo) ** (2.0 * self.head_exponent)
        out[tail] = self._F_edges[-1] * (t[tail] / hi) ** (2.0 * self.tail_exponent)
        return float(out) if scalar else out

    def phi(self, u: ArrayLike) -> ArrayLike:
        """
        phi(u) = int_u^inf F(t)^(-1/2) dt for u > 0; phi(0) = inf.
        """
        scalar = np.ndim(u) == 0
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        zero = u <= 0
        out[zero] = np.inf
        pos = ~zero
        up = u[pos]
        if self._closed:
            out[pos] = self._c * up ** (0.5 * (1.0 - self.model.p))
        else:
            out[pos] = self._phi_table(up)
        return float(out) if scalar else out

    def _phi_table(self, u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        lo, hi = self._edges[0], self._edges[-1]
        head, tail = u < lo, u > hi
        mid = ~head & ~tail
        e_t = self.tail_exponent
        out[tail] = self._phi_edges[-1] * (u[tail] / hi) ** (1.0 - e_t)

        e_h = self.head_exponent
        scale_h = lo / np.sqrt(self._F_edges[0])
        x = u[head] / lo
        if abs(e_h - 1.0) < 1e-12:
            head_part = -scale_h * np.log(x)
        else:
            head_part = scale_h * (x ** (1.0 - e_h) - 1.0) / (e_h - 1.0)
        out[head] = self._phi_edges[0] + head_part

        um = u[mid]
        j = np.clip(np.searchsorted(self._edges, um, side="right") - 1, 0, len(self._edges) - 2)
        stop = self._edges[j + 1]
        out[mid] = self._phi_edges[j + 1] + composite_log_gl(
            lambda t: self._F_inside(t) ** -0.5, um, np.maximum(stop, um)
        )
        return out

    def phi_prime(self, u: ArrayLike) -> ArrayLike:
        """phi'(u) = -F(u)^(-1/2)."""
        return -np.asarray(self.F_eval(u)) ** -0.5

    def psi(self, v: ArrayLike) -> ArrayLike:
        """
        Inverse of phi, by table bracketing and Newton in log variables.

        Raises:
            InversionRangeError: v is not positive or psi(v) is not representable
        """
        scalar = np.ndim(v) == 0
        v = np.asarray(v, dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise InversionRangeError(
                "psi needs finite v > 0",
                bracket=self.representable_range(),
            )
        if self._closed:
            with np.errstate(over="ignore", under="ignore"):
                out = (v / self._c) ** (2.0 / (1.0 - self.model.p))
        else:
            out = self._psi_newton(v)
        if np.any(~np.isfinite(out)) or np.any(out <= 0):
            raise InversionRangeError(
                "psi(v) overflows or underflows",
                bracket=self.representable_range(),
            )
        return float(out) if scalar else out

    def _psi_newton(self, v: np.ndarray) -> np.ndarray:
        log_v = np.log(v)
        # log phi is decreasing in log t; interp needs increasing abscissae
        w = np.interp(-log_v, -self._log_phi_edges, self._log_edges)
        e_t, e_h = self.tail_exponent, self.head_exponent
        below = v < self._phi_edges[-1]
        w[below] = self._log_edges[-1] + (log_v[below] - self._log_phi_edges[-1]) / (1.0 - e_t)
        above = v > self._phi_edges[0]
        if e_h > 1.0:
            w[above] = self._log_edges[0] + (log_v[above] - self._log_phi_edges[0]) / (1.0 - e_h)
        else:
            w[above] = self._log_edges[0] - (v[above] - self._phi_edges[0]) * np.sqrt(self._F_edges[0]) / self._edges[0]

        for _ in range(NEWTON_MAX):
            u = np.exp(w)
            phi_u = self.phi(u)
            g = np.log(phi_u) - log_v
            if np.max(np.abs(g)) < NEWTON_TOL:
                break
            slope = u * self.phi_prime(u) / phi_u
            w = w - np.clip(g / slope, -5.0, 5.0)
        return np.exp(w)

    def representable_range(self):
        """(smallest, largest) v for which psi(v) is a finite positive float."""
        with np.errstate(over="ignore"):
            values = self.phi(np.array([1e300, 1e-300]))
        return [float(values[0]), float(values[1])]


def _integrand_log(model: NonlinearityModel, s: float, condition: Condition, t: np.ndarray,
                   profile: Optional[KOProfile]) -> np.ndarray:
    if condition == Condition.E:
        return np.log(eval_f(model, t)) - (2.0 / (1.0 - s)) * np.log(t)
    if condition == Condition.L1 and profile is not None:
        return np.log(profile.phi(t)) / s
    return (np.log(t) - np.log(eval_f(model, t))) / (2.0 * s)


_INTEGRANDS = {
    Condition.L1: "(t/f(t))^(1/(2s))",
    Condition.L1BIS: "(t/f(t))^(1/(2s))",
    Condition.UL1: "(t/f(t))^(1/(2s))",
    Condition.E: "f(t) t^(-2/(1-s))",
}


def check_condition(
    model: NonlinearityModel,
    s: float,
    condition: Condition,
    profile: Optional[KOProfile] = None,
    tail_cutoff: Optional[float] = None,
) -> ConditionReport:
    """
    Decide convergence of int_1^inf of the condition's integrand.

    The log-integrand is regressed on [1, ln t, ln ln t] over [T/1e4, T]. The
    power exponent decides outside the borderline band around -1; inside it
    the ln t exponent b decides (b < -1.1 converges, b > -0.9 diverges, pure
    critical powers stay borderline).
    """
    T = tail_cutoff if tail_cutoff is not None else settings.tail_cutoff
    lo = T / 1e4
    if model.family == Family.TABULATED:
        t_min, t_max = model.t_range
        T = min(T, t_max)
        lo = max(T / 1e4, t_min)
        if T / lo < 100.0:
            raise InsufficientDataError(
                "Tabulated range too short for a tail fit",
                t_min=t_min,
                t_max=t_max,
            )
    t = np.geomspace(lo, T, 64)
    y = _integrand_log(model, s, condition, t, profile)
    design = np.column_stack([np.ones_like(t), np.log(t), np.log(np.log(t))])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a, b = float(coef[1]), float(coef[2])
    gap = a + 1.0

    if gap < -BORDERLINE_BAND:
        verdict, decided_by = Verdict.CONVERGES, "power"
    elif gap > BORDERLINE_BAND:
        verdict, decided_by = Verdict.DIVERGES, "power"
    elif b < -1.1:
        verdict, decided_by = Verdict.CONVERGES, "log"
    elif b > -0.9 and abs(b) > 0.05:
        verdict, decided_by = Verdict.DIVERGES, "log"
    else:
        verdict, decided_by = Verdict.BORDERLINE, "power"

    start = max(1.0, model.t_range[0])
    nodes, weights = log_panel_rule(log_panel_edges(start, T, 4), 16)
    with np.errstate(over="ignore"):
        partial = float(np.sum(weights * np.exp(_integrand_log(model, s, condition, nodes, profile))))

    form = "phi(t)^(1/s)" if condition == Condition.L1 and profile is not None else _INTEGRANDS[condition]
    return ConditionReport(
        condition=condition,
        verdict=verdict,
        tail_exponent_of_integrand=a,
        margin=abs(gap),
        log_exponent=b,
        decided_by=decided_by,
        partial_integral=partial,
        fit_window=(float(lo), float(T)),
        details=f"integrand {form} ~ t^{a:.4f} (ln t)^{b:.4f} for s={s!r}, {model.label}",
    )


def check_L1(profile: KOProfile, form: str = "bis") -> ConditionReport:
    """
    Integrability of (L1). form='bis' tests int (t/f)^(1/(2s)); form='phi'
    tests the original int phi(t)^(1/s). Both forms give the same verdict.
    """
    chosen = profile if form == "phi" else None
    return check_condition(profile.model, profile.s, Condition.L1, chosen, profile.tail_cutoff)


def check_E(profile: KOProfile) -> ConditionReport:
    return check_condition(profile.model, profile.s, Condition.E, None, profile.tail_cutoff)


def check_U_integrability(profile: KOProfile) -> ConditionReport:
    """U = psi(delta^s) is integrable iff (L1-bis) holds; reported separately."""
    return check_condition(profile.model, profile.s, Condition.UL1, None, profile.tail_cutoff)


def _ratio_check(name: str, values: np.ndarray, lower: Optional[float], upper: Optional[float], tol: float) -> RatioCheck:
    margins = []
    if lower is not None:
        margins.append((values.min() - lower) / abs(lower))
    if upper is not None:
        margins.append((upper - values.max()) / abs(upper))
    margin = min(margins)
    return RatioCheck(
        name=name,
        lower=lower,
        upper=upper,
        observed_min=float(values.min()),
        observed_max=float(values.max()),
        margin=float(margin),
        passed=bool(margin >= -tol),
    )


def verify_ratio_bounds(
    profile: KOProfile,
    t_grid: Optional[np.ndarray] = None,
    c_values=(0.1, 0.25, 0.5, 0.75, 0.9),
    tolerance: float = 1e-6,
) -> RatioBoundsReport:
    """
    Check the two-sided consequences of the growth hypothesis on a grid:
    t f/F, v|psi'|/psi at v = phi(t), psi(cv)/psi(v) for c in (0, 1),
    v^2 f(psi(v))/(2 psi(v)) and phi(u) sqrt(f(u)/u).

    The scaling of psi is checked in the form
    c^(-2/M) <= psi(cv)/psi(v) <= c^(-2/m).
    """
    env = profile.envelope
    m, M = env.m, env.M
    if t_grid is None:
        t_grid = np.geomspace(env.sample_min * 10.0, env.sample_max / 10.0, 256)
    t = np.asarray(t_grid, dtype=float)
    f = eval_f(profile.model, t)
    F = eval_F(profile.model, t)
    phi = profile.phi(t)

    checks = [
        _ratio_check("t f/F", t * f / F, 2.0 + m, 2.0 + M, tolerance),
        _ratio_check("v |psi'(v)|/psi(v)", phi * np.sqrt(F) / t, 2.0 / M, 2.0 / m, tolerance),
    ]
    scaling = []
    # log space: c^(-2/m) overflows when m is tiny
    with np.errstate(over="ignore", under="ignore"):
        for c in c_values:
            log_ratio = np.log(profile.psi(c * phi) / t)
            scaling.append(np.exp(log_ratio + (2.0 / M) * np.log(c)))
            scaling.append(np.exp(log_ratio + (2.0 / m) * np.log(c)))
    ratios_low = np.concatenate(scaling[0::2])
    ratios_high = np.concatenate(scaling[1::2])
    checks.append(_ratio_check("psi(cv) c^(2/M)/psi(v)", ratios_low, 1.0, None, tolerance))
    checks.append(_ratio_check("psi(cv) c^(2/m)/psi(v)", ratios_high, None, 1.0, tolerance))
    checks.append(
        _ratio_check(
            "v^2 f(psi)/(2 psi)",
            phi ** 2 * f / (2.0 * t),
            (4.0 / M ** 2) * (1.0 + m / 2.0),
            (4.0 / m ** 2) * (1.0 + M / 2.0),
            tolerance,
        )
    )
    checks.append(
        _ratio_check(
            "phi(u) sqrt(f(u)/u)",
            phi * np.sqrt(f / t),
            (2.0 / M) * np.sqrt(2.0 + m),
            (2.0 / m) * np.sqrt(2.0 + M),
            tolerance,
        )
    )
    worst = min(c.margin for c in checks)
    return RatioBoundsReport(
        m=m,
        M=M,
        n_points=len(t),
        tolerance=tolerance,
        checks=checks,
        worst_margin=float(worst),
        passed=all(c.passed for c in checks),
    )


def classify_power_regime(p: float, s: float) -> Regime:
    """Regime of f(t) = t^p; the band 1+s <= p <= 1+2s is left unclassified."""
    if p >= 1.0 + 2.0 * s / (1.0 - s):
        return Regime.NONEXISTENCE
    if p > 1.0 + 2.0 * s:
        return Regime.LARGE_SOLUTION
    if p <= 1.0:
        return Regime.UNIFORM_BLOWUP
    if p < 1.0 + s:
        return Regime.L1_ESCAPE
    return Regime.UNCLASSIFIED


def predict_regime(model: NonlinearityModel, s: float) -> Regime:
    """
    Regime prediction for any model: powers use the closed-form thresholds,
    other models the integral conditions and the linear-growth test.
    """
    if model.family == Family.POWER:
        return classify_power_regime(model.p, s)
    e_report = check_condition(model, s, Condition.E)
    if e_report.verdict != Verdict.CONVERGES:
        return Regime.NONEXISTENCE
    if check_linear_bound(model) is not None:
        return Regime.UNIFORM_BLOWUP
    if check_condition(model, s, Condition.L1BIS).verdict == Verdict.CONVERGES:
        return Regime.LARGE_SOLUTION
    return Regime.UNCLASSIFIED
