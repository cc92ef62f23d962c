"""
Boundary behaviour of computed solutions: power-law fits, the singular
trace lim delta^(1-s) u and the comparison of phi(u) with delta^s.
"""
import logging
from typing import Optional

import numpy as np
from scipy.stats import linregress

from fracblowup.errors import FitError, InsufficientDataError
from fracblowup.models.ko_conditions import KOProfile
from fracblowup.models.mesh_domain import GridFunction
from fracblowup.schemas.analysis import AnalysisReport, BbehavReport, BoundaryFit, TraceEstimate

logger = logging.getLogger(__name__)

WINDOW_TOP = 0.1
EXCLUDED_NEAREST = 3
MIN_NODES = 8
DIVERGENCE_MARGIN = 0.05


def boundary_window(u: GridFunction, top: float = WINDOW_TOP) -> np.ndarray:
    """
    Nodes with 4 delta_min <= delta <= top, excluding the three nodes nearest
    the boundary on each side.

    Raises:
        InsufficientDataError: If fewer than 8 nodes remain
    """
    mesh = u.mesh
    delta = mesh.delta
    keep = (delta >= 4.0 * delta.min()) & (delta <= top) & (mesh.boundary_rank() > EXCLUDED_NEAREST)
    nodes = np.nonzero(keep)[0]
    if len(nodes) < MIN_NODES:
        raise InsufficientDataError(
            f"Boundary window [{4.0 * delta.min():.3e}, {top}] holds {len(nodes)} nodes, need {MIN_NODES}",
            nodes=len(nodes),
        )
    return nodes


def _window_bounds(u: GridFunction, nodes: np.ndarray):
    d = u.mesh.delta[nodes]
    return (float(d.min()), float(d.max()))


def boundary_exponent(u: GridFunction, top: float = WINDOW_TOP) -> BoundaryFit:
    """
    Log-log regression u ~ c delta^a on the boundary window.

    Raises:
        FitError: If u is not positive on the window
    """
    nodes = boundary_window(u, top)
    values = u.total()[nodes]
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise FitError("Boundary fit needs positive finite values", nonpositive=int(np.count_nonzero(values <= 0)))
    fit = linregress(np.log(u.mesh.delta[nodes]), np.log(values))
    return BoundaryFit(
        window=_window_bounds(u, nodes),
        exponent=float(fit.slope),
        coefficient=float(np.exp(fit.intercept)),
        r_squared=float(fit.rvalue ** 2),
        stderr=float(fit.stderr),
        node_count=len(nodes),
    )


def singular_trace(u: GridFunction, top: float = WINDOW_TOP) -> TraceEstimate:
    """
    lim delta^(1-s) u at the boundary. Flagged as diverging when the boundary
    exponent lies below s - 1 - 0.05; otherwise a quadratic fit of
    delta^(1-s) u in delta extrapolated to delta = 0.
    """
    s = u.s
    fit = boundary_exponent(u, top)
    nodes = boundary_window(u, top)
    if fit.exponent < s - 1.0 - DIVERGENCE_MARGIN:
        return TraceEstimate(value=float("inf"), diverging=True, exponent=fit.exponent, window=fit.window)
    delta = u.mesh.delta[nodes]
    scaled = delta ** (1.0 - s) * u.total()[nodes]
    coefficients = np.polyfit(delta, scaled, 2)
    return TraceEstimate(
        value=float(coefficients[-1]),
        diverging=False,
        exponent=fit.exponent,
        window=fit.window,
    )


def bbehav_check(u: GridFunction, profile: KOProfile, c0: float = 0.05, top: float = WINDOW_TOP) -> BbehavReport:
    """
    phi(u)/delta^s on the boundary window and on the halved window; passes
    when the minimum is at least c0 on both.
    """
    nodes = boundary_window(u, top)
    half = boundary_window(u, 0.5 * top)
    values = u.total()
    delta = u.mesh.delta
    ratio = profile.phi(values[nodes]) / delta[nodes] ** profile.s
    half_ratio = profile.phi(values[half]) / delta[half] ** profile.s
    finite = np.isfinite(ratio)
    fitted = None
    if np.count_nonzero(finite) >= 2:
        fitted = float(np.polyfit(delta[nodes][finite], ratio[finite], 1)[-1])
    min_ratio, half_min = float(ratio.min()), float(half_ratio.min())
    return BbehavReport(
        window=_window_bounds(u, nodes),
        min_ratio=min_ratio,
        max_ratio=float(ratio.max()),
        half_window_min=half_min,
        fitted_limit=fitted,
        c0=c0,
        node_count=len(nodes),
        passed=bool(min_ratio >= c0 and half_min >= c0),
    )


def analyze(u: GridFunction, profile: Optional[KOProfile] = None) -> AnalysisReport:
    """Trace, boundary exponent on the full and halved windows, and phi(u) versus delta^s."""
    fit = boundary_exponent(u)
    half = boundary_exponent(u, 0.5 * WINDOW_TOP)
    report = AnalysisReport(
        trace=singular_trace(u),
        fit=fit,
        half_window_exponent=half.exponent,
        bbehav=bbehav_check(u, profile) if profile is not None else None,
    )
    logger.info(
        f"Boundary exponent {fit.exponent:.4f} (half window {half.exponent:.4f}), "
        f"trace {'diverging' if report.trace.diverging else report.trace.value}"
    )
    return report
