"""
The nonlinear term f, its antiderivative F and the structural checks on f.

All evaluators are vectorised: they accept a scalar or an array and return a
float or an array of the same shape.
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad, IntegrationWarning
from scipy.interpolate import PchipInterpolator

from fracblowup.errors import (
    ConfigError,
    HypothesisViolationError,
    OutOfRangeError,
    QuadratureError,
)
from fracblowup.schemas.nonlinearity import (
    Family,
    NonlinearitySpec,
    GrowthEnvelope,
    ScalingReport,
    LinearBound,
    PowerBoundsReport,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

FD_STEP = 1e-6
QUAD_EPSREL = 1e-12
QUAD_ACCEPT = 1e-8
WITNESS_SLOPES = 256


def _out(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


@dataclass(frozen=True)
class NonlinearityModel:
    """
    f(t) = scale * t^p (power), scale * t^p ln^alpha(1+t) (powerlog) or a
    monotone log-log interpolant of samples (tabulated).
    """

    family: Family
    p: float = 0.0
    alpha: float = 0.0
    scale: float = 1.0
    table_t: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    table_f: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.family == Family.TABULATED:
            t, f = self.table_t, self.table_f
            if t is None or f is None or len(t) < 4:
                raise ConfigError("Tabulated nonlinearity needs at least 4 samples")
            if np.any(t <= 0) or np.any(np.diff(t) <= 0):
                raise ConfigError("Tabulated t must be positive and strictly increasing")
            if np.any(f <= 0) or np.any(np.diff(f) <= 0):
                raise ConfigError("Tabulated f must be positive and strictly increasing")
            spline = PchipInterpolator(np.log(t), np.log(f), extrapolate=False)
            object.__setattr__(self, "_spline", spline)
            object.__setattr__(self, "_dspline", spline.derivative())
        elif self.p <= 0:
            raise ConfigError(f"Exponent p must be positive, got {self.p}")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.family == Family.POWER:
            text = f"power:p={self.p!r}"
        elif self.family == Family.POWERLOG:
            text = f"powerlog:p={self.p!r}:alpha={self.alpha!r}"
        else:
            text = f"tabulated:{len(self.table_t)} samples"
        return text if self.scale == 1.0 else f"{text}:scale={self.scale!r}"

    @classmethod
    def power(cls, p: float, scale: float = 1.0) -> "NonlinearityModel":
        return cls(Family.POWER, p=float(p), scale=float(scale))

    @classmethod
    def power_log(cls, p: float, alpha: float, scale: float = 1.0) -> "NonlinearityModel":
        return cls(Family.POWERLOG, p=float(p), alpha=float(alpha), scale=float(scale))

    @classmethod
    def tabulated(cls, t: np.ndarray, f: np.ndarray, scale: float = 1.0, label: str = "") -> "NonlinearityModel":
        return cls(
            Family.TABULATED,
            scale=float(scale),
            table_t=np.asarray(t, dtype=float),
            table_f=np.asarray(f, dtype=float),
            label=label,
        )

    @classmethod
    def from_spec(cls, spec: NonlinearitySpec) -> "NonlinearityModel":
        """Build a model from its validated config form."""
        if spec.family == Family.POWER:
            return cls.power(spec.p, spec.scale)
        if spec.family == Family.POWERLOG:
            return cls.power_log(spec.p, spec.alpha, spec.scale)
        t, f = load_table(spec.table_path)
        return cls.tabulated(t, f, spec.scale, label=spec.label())

    @property
    def f_prime_available(self) -> bool:
        return self.family != Family.TABULATED

    @property
    def t_range(self) -> Tuple[float, float]:
        """Range where f can be evaluated (0 is always allowed)."""
        if self.family == Family.TABULATED:
            return float(self.table_t[0]), float(self.table_t[-1])
        return 0.0, np.inf

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return eval_f(self, t)


def load_table(path: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Read a two-column (t, f) CSV; lines starting with '#' and a non-numeric
    header row are skipped.

    Raises:
        ConfigError: If the file cannot be read or has the wrong shape
    """
    try:
        data = np.genfromtxt(path, delimiter=",", comments="#", dtype=float)
    except OSError as e:
        raise ConfigError(f"Cannot read table {path}: {str(e)}")
    data = np.atleast_2d(data)
    data = data[~np.isnan(data).any(axis=1)]
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigError(f"Table {path} must have exactly two columns")
    return data[:, 0], data[:, 1]


def _check_range(model: NonlinearityModel, t: np.ndarray) -> None:
    lo, hi = model.t_range
    bad = (t != 0) & ((t < lo * (1 - 1e-12)) | (t > hi * (1 + 1e-12)))
    if np.any(bad):
        offending = float(t[bad].flat[0])
        raise OutOfRangeError(
            f"t={offending!r} outside the tabulated range",
            t=offending,
            t_min=lo,
            t_max=hi,
        )


def _log1p_ratio(t: np.ndarray) -> np.ndarray:
    """t / ((1+t) ln(1+t)), equal to 1 at t = 0."""
    out = np.ones_like(t)
    small = t < 1e-8
    big = ~small
    out[small] = 1.0 - 0.5 * t[small]
    tb = t[big]
    out[big] = tb / ((1.0 + tb) * np.log1p(tb))
    return out


def eval_f(model: NonlinearityModel, t: ArrayLike) -> ArrayLike:
    """
    Evaluate f(t) for t >= 0; f(0) = 0 exactly.

    Raises:
        OutOfRangeError: Tabulated model evaluated outside its samples
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConfigError("f is defined for t >= 0 only")
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    if model.family == Family.POWER:
        out[pos] = model.scale * tp ** model.p
    elif model.family == Family.POWERLOG:
        out[pos] = model.scale * tp ** model.p * np.log1p(tp) ** model.alpha
    else:
        _check_range(model, t)
        clipped = np.clip(tp, model.table_t[0], model.table_t[-1])
        out[pos] = model.scale * np.exp(model._spline(np.log(clipped)))
    return _out(out, scalar)


def growth_ratio(model: NonlinearityModel, t: ArrayLike) -> ArrayLike:
    """t f'(t) / f(t) for t > 0."""
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if model.family == Family.POWER:
        out = np.full_like(t, model.p)
    elif model.family == Family.POWERLOG:
        out = model.p + model.alpha * _log1p_ratio(t)
    else:
        out = t * eval_f_prime(model, t) / eval_f(model, t)
    return _out(out, scalar)


def eval_f_prime(model: NonlinearityModel, t: ArrayLike) -> ArrayLike:
    """
    f'(t), closed form when available, otherwise central differences with
    relative step t * 1e-6 (one-sided at the ends of a table).
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if model.f_prime_available:
        pos = t > 0
        out = np.zeros_like(t)
        out[pos] = growth_ratio(model, t[pos]) * eval_f(model, t[pos]) / t[pos]
        if model.family == Family.POWER and model.p == 1.0:
            out[~pos] = model.scale
        return _out(out, scalar)

    lo, hi = model.t_range
    h = t * FD_STEP
    left = np.maximum(t - h, lo)
    right = np.minimum(t + h, hi)
    out = (eval_f(model, right) - eval_f(model, left)) / (right - left)
    return _out(out, scalar)


def _quad(func, a: float, b: float) -> Tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, abserr = quad(func, a, b, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
    return value, abserr


def _F_scalar(model: NonlinearityModel, t: float) -> float:
    if t == 0.0:
        return 0.0
    if model.family == Family.TABULATED:
        lo = float(model.table_t[0])
        f_lo = float(eval_f(model, lo))
        head_slope = float(model._dspline(np.log(lo)))
        head = lo * f_lo / (1.0 + head_slope)
        if t < lo:
            _check_range(model, np.asarray([t]))
        pieces = [(head, 0.0)]
        pieces.append(_quad(lambda y: eval_f(model, np.exp(y)) * np.exp(y), np.log(lo), np.log(t)))
    else:
        split = min(t, 1.0)
        pieces = [_quad(lambda x: eval_f(model, x), 0.0, split)]
        if t > 1.0:
            pieces.append(_quad(lambda y: eval_f(model, np.exp(y)) * np.exp(y), 0.0, np.log(t)))
    value = sum(v for v, _ in pieces)
    abserr = sum(e for _, e in pieces)
    if not np.isfinite(value) or abserr > QUAD_ACCEPT * abs(value):
        raise QuadratureError(
            f"Quadrature of F({t!r}) did not converge",
            achieved_tolerance=abserr / abs(value) if value else abserr,
        )
    return value


def eval_F(model: NonlinearityModel, t: ArrayLike) -> ArrayLike:
    """
    F(t) = int_0^t f; closed form for powers, adaptive quadrature otherwise.

    Raises:
        QuadratureError: Adaptive quadrature missed its tolerance
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if model.family == Family.POWER:
        out = model.scale * t ** (model.p + 1.0) / (model.p + 1.0)
    else:
        out = np.array([_F_scalar(model, float(x)) for x in t.ravel()]).reshape(t.shape)
    return _out(out, scalar)


def estimate_growth_envelope(
    model: NonlinearityModel,
    t_range: Tuple[float, float] = (1e-6, 1e6),
    n_samples: int = 2048,
) -> GrowthEnvelope:
    """
    Estimate (m, M) of 1+m <= t f'/f <= 1+M on a log grid.

    For the closed-form families the limit of t f'/f at infinity (= p) is
    included, since phi integrates f up to infinity.

    Raises:
        HypothesisViolationError: If t f'/f <= 1 somewhere (m <= 0)
    """
    lo, hi = t_range
    if not (0 < lo < hi) or n_samples < 2:
        raise ConfigError("t_range must satisfy 0 < lo < hi and n_samples >= 2")
    if model.family == Family.TABULATED:
        t_min, t_max = model.t_range
        lo, hi = max(lo, t_min), min(hi, t_max)
    grid = np.geomspace(lo, hi, n_samples)
    ratios = growth_ratio(model, grid)
    closed = model.family != Family.TABULATED
    r_min, r_max = float(ratios.min()), float(ratios.max())
    worst_t = float(grid[int(np.argmin(ratios))])
    if closed:
        if model.p < r_min:
            worst_t = np.inf
        r_min, r_max = min(r_min, model.p), max(r_max, model.p)

    if r_min <= 1.0:
        raise HypothesisViolationError(
            f"t f'/f = {r_min!r} <= 1 at t = {worst_t!r}: f is outside the superlinear class",
            t=worst_t,
            ratio=r_min,
        )
    envelope = GrowthEnvelope(
        m=r_min - 1.0,
        M=r_max - 1.0,
        sample_min=float(grid[0]),
        sample_max=float(grid[-1]),
        n_samples=n_samples,
        grid=f"geomspace({float(grid[0])!r}, {float(grid[-1])!r}, {n_samples})",
        closed_at_infinity=closed,
    )
    logger.debug(f"Growth envelope of {model.label}: m={envelope.m}, M={envelope.M}")
    return envelope


def check_monotone_scaling(
    model: NonlinearityModel,
    envelope: GrowthEnvelope,
    c: float,
    t_grid: Optional[np.ndarray] = None,
    tolerance: float = 1e-9,
) -> ScalingReport:
    """Check c^(1+m) f(t) <= f(ct) <= c^(1+M) f(t) on the grid."""
    if c < 1.0:
        raise ConfigError(f"Scaling factor must be >= 1, got {c}")
    if t_grid is None:
        t_grid = np.geomspace(envelope.sample_min, envelope.sample_max / c, 256)
    t_grid = np.asarray(t_grid, dtype=float)
    if model.family == Family.TABULATED:
        lo, hi = model.t_range
        t_grid = t_grid[(t_grid >= lo) & (c * t_grid <= hi)]
    f_t = eval_f(model, t_grid)
    f_ct = eval_f(model, c * t_grid)
    lower = c ** (1.0 + envelope.m) * f_t
    upper = c ** (1.0 + envelope.M) * f_t
    violation = np.maximum(np.maximum(lower - f_ct, f_ct - upper), 0.0) / f_ct
    worst = int(np.argmax(violation)) if len(violation) else None
    max_violation = float(violation.max()) if len(violation) else 0.0
    return ScalingReport(
        c=c,
        n_points=len(t_grid),
        max_violation=max_violation,
        worst_t=float(t_grid[worst]) if worst is not None else None,
        passed=max_violation <= tolerance,
    )


def check_linear_bound(
    model: NonlinearityModel,
    t_range: Tuple[float, float] = (1e-6, np.inf),
    growth_tol: float = 1e-3,
) -> Optional[LinearBound]:
    """
    Look for witnesses a, b with f(t) <= a + b t on t_range.

    An infinite upper end is sampled up to 1e12 (or the end of a table).
    Among the slopes b covering the last sampled decade, the witness with the
    smallest a + b is reported. Returns None when f(t)/(1+t) still grows
    over the last sampled decade of an unbounded range; on a bounded range
    that case gives the range-limited witness a = b = sup f/(1+t).
    """
    lo, hi = t_range
    unbounded = not np.isfinite(hi)
    top = 1e12 if unbounded else hi
    if model.family == Family.TABULATED:
        top = min(top, model.t_range[1])
        lo = max(lo, model.t_range[0])
    grid = np.geomspace(lo, top, 1024)
    f = eval_f(model, grid)
    ratio = f / (1.0 + grid)
    decade = grid >= top / 10.0
    tail = ratio[decade]
    growing = tail[-1] > tail[0] * (1.0 + growth_tol)
    if growing:
        if unbounded:
            return None
        sup = float(ratio.max())
        return LinearBound(a=sup, b=sup, range_limited=True)
    # b must cover the tail slope; among admissible slopes take the pair with the smallest a + b
    b_floor = float(np.max(f[decade] / grid[decade]))
    b_cap = max(float(np.max(f / grid)), b_floor)
    slopes = np.geomspace(b_floor, b_cap, WITNESS_SLOPES) if b_cap > b_floor else np.array([b_floor])
    intercepts = np.max(f[None, :] - slopes[:, None] * grid[None, :], axis=1)
    best = int(np.argmin(np.maximum(intercepts, 0.0) + slopes))
    b = float(slopes[best])
    a = max(float(intercepts[best]) * (1.0 + 1e-9), np.finfo(float).tiny)
    return LinearBound(a=a, b=b, range_limited=False)


def check_power_lower_bounds(
    model: NonlinearityModel,
    envelope: GrowthEnvelope,
    t_grid: Optional[np.ndarray] = None,
    tolerance: float = 1e-8,
) -> PowerBoundsReport:
    """
    Check the consequences of the growth hypothesis for t >= 1:
    f(t) >= f(1) t^(1+m), F(t) >= f(1)(t^(2+m) - 1)/(2+m), and
    2+m <= t f/F <= 2+M on the whole grid.
    """
    if t_grid is None:
        t_grid = np.geomspace(envelope.sample_min, envelope.sample_max, 128)
    t_grid = np.asarray(t_grid, dtype=float)
    m, M = envelope.m, envelope.M
    f1 = float(eval_f(model, 1.0))
    upper = t_grid[t_grid >= 1.0]
    f_up = eval_f(model, upper)
    F_up = eval_F(model, upper)
    f_bound = f1 * upper ** (1.0 + m)
    F_bound = f1 * (upper ** (2.0 + m) - 1.0) / (2.0 + m)
    f_violation = float(np.max(np.maximum(f_bound - f_up, 0.0) / f_up, initial=0.0))
    F_violation = float(np.max(np.maximum(F_bound - F_up, 0.0) / F_up, initial=0.0))
    ratio = t_grid * eval_f(model, t_grid) / eval_F(model, t_grid)
    ratio_ok = ratio.min() >= (2.0 + m) * (1 - tolerance) and ratio.max() <= (2.0 + M) * (1 + tolerance)
    return PowerBoundsReport(
        f_violation=f_violation,
        F_violation=F_violation,
        F_ratio_min=float(ratio.min()),
        F_ratio_max=float(ratio.max()),
        passed=bool(f_violation <= tolerance and F_violation <= tolerance and ratio_ok),
        points=[float(t_grid[0]), float(t_grid[-1])],
    )
