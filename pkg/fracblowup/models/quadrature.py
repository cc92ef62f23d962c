"""
Shared quadrature rules.

Gauss rules are cached per order and returned as read-only arrays so that the
same nodes can be shared between threads.
"""
import logging
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

logger = logging.getLogger(__name__)


def _frozen(*arrays: np.ndarray) -> Tuple[np.ndarray, ...]:
    for array in arrays:
        array.setflags(write=False)
    return arrays


@lru_cache(maxsize=None)
def gauss_legendre_01(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(n)
    return _frozen(0.5 * (x + 1.0), 0.5 * w)


@lru_cache(maxsize=None)
def gauss_jacobi_01(n: int, a: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights for int_0^1 x^a g(x) dx with a > -1.

    Args:
        n: Number of nodes
        a: Exponent of the endpoint weight at x = 0

    Returns:
        Tuple (nodes, weights) on [0, 1]
    """
    if a <= -1.0:
        raise ValueError(f"Jacobi exponent must exceed -1, got {a}")
    y, w = roots_jacobi(n, 0.0, a)
    return _frozen(0.5 * (y + 1.0), w * 0.5 ** (a + 1.0))


def composite_log_gl(
    func: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    order: int = 16,
) -> np.ndarray:
    """
    Integrate func over [lo, hi] elementwise with one Gauss-Legendre panel in ln t.

    Args:
        func: Vectorised integrand accepting arrays of any shape
        lo: Lower limits (positive)
        hi: Upper limits (positive)
        order: Number of Gauss nodes

    Returns:
        Array of integrals with the broadcast shape of lo and hi
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    x, w = gauss_legendre_01(order)
    log_lo = np.log(lo)
    span = np.log(hi) - log_lo
    t = np.exp(log_lo[..., None] + span[..., None] * x)
    return (func(t) * t * w).sum(axis=-1) * span


def log_panel_edges(lo: float, hi: float, per_decade: int, extra=()) -> np.ndarray:
    """Log-spaced panel edges on [lo, hi], merged with the extra breakpoints inside."""
    count = max(1, int(np.ceil(np.log10(hi / lo) * per_decade)))
    edges = np.geomspace(lo, hi, count + 1)
    inside = [float(b) for b in extra if lo < b < hi]
    if inside:
        edges = np.unique(np.concatenate([edges, inside]))
    return edges


def geometric_pieces(start: float, stop: float, levels: int) -> np.ndarray:
    """
    Breakpoints of [start, stop] refined geometrically toward start.

    Returns levels + 2 increasing (or decreasing, if stop < start) points
    start, start + L 2^-levels, ..., start + L/2, stop.
    """
    length = stop - start
    fractions = np.concatenate([[0.0], 2.0 ** -np.arange(levels, 0, -1), [1.0]])
    return start + length * fractions


def panel_rule(edges: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive edges."""
    x, w = gauss_legendre_01(order)
    widths = np.diff(edges)
    nodes = edges[:-1, None] + widths[:, None] * x
    weights = widths[:, None] * w
    return nodes.ravel(), weights.ravel()


def log_panel_rule(edges: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule in ln t; weights include the Jacobian t."""
    log_nodes, log_weights = panel_rule(np.log(edges), order)
    nodes = np.exp(log_nodes)
    return nodes, log_weights * nodes
