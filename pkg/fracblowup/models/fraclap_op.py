"""
Pointwise fractional Laplacian on the interval (-1, 1).

(-Delta)^s u(x_i) = A [ h^(-2s)/s u_i - u''_i h^(2-2s)/(2-2s)
                        - int_{Omega, |y-x_i|>h} u(y) |x_i-y|^(-1-2s) dy
                        - int_{|y|>1} g(y) |x_i-y|^(-1-2s) dy ]

with h the shorter neighbouring cell, a three-point second difference for
u'', and the far field integrated against the same power-weighted hat basis
as the Green operator.
"""
import logging
import threading
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from fracblowup.errors import ConfigError, DataInadmissibleError, ProximityError
from fracblowup.models.ball_kernels import KernelSet, h1_profile
from fracblowup.models.ko_conditions import KOProfile
from fracblowup.models.mesh_domain import (
    ExteriorData,
    GradedMesh,
    GridFunction,
    fit_end_exponent,
    parse_exterior_spec,
    strip_indices,
)
from fracblowup.models.nonlinearity import NonlinearityModel, eval_f
from fracblowup.models.quadrature import gauss_jacobi_01, gauss_legendre_01, geometric_pieces, panel_rule
from fracblowup.schemas.solve import DomainKind, InequalityReport

logger = logging.getLogger(__name__)

FAR_ORDER = 16
PARTIAL_LEVELS = 10
EXTERIOR_E_MAX = 1e4
BETA_CLIP = (-0.99, 2.0)

Source = Union[NonlinearityModel, Callable[[np.ndarray], np.ndarray]]


class FracLapOperator:
    """Discrete (-Delta)^s on an interval mesh. Immutable once built."""

    def __init__(self, mesh: GradedMesh, s: float):
        if mesh.domain.kind != DomainKind.INTERVAL:
            raise ConfigError("The pointwise operator is only available on the interval")
        if not 0.0 < s < 1.0:
            raise ConfigError(f"s must lie in (0, 1), got {s}")
        self.mesh = mesh
        self.s = s
        self.kernels = KernelSet(1, s)
        self.A_const = self.kernels.fraclap_constant
        self.admissible = mesh.admissible_indices()
        size = mesh.size
        self._h_left = np.full(size, np.nan)
        self._h_right = np.full(size, np.nan)
        for i in range(1, size - 1):
            self._h_left[i] = self._gap(i, i - 1)
            self._h_right[i] = self._gap(i, i + 1)
        self.h = np.fmin(self._h_left, self._h_right)
        self._far_cache: Dict[Tuple[float, float], np.ndarray] = {}
        self._lock = threading.Lock()

    def _gap(self, i: int, j: int) -> float:
        mesh = self.mesh
        di, dj = mesh.delta[i], mesh.delta[j]
        if mesh.side[i] == mesh.side[j] or di == 1.0 or dj == 1.0:
            return float(abs(di - dj))
        return float(2.0 - di - dj)

    def _distance(self, i: int, delta_y: np.ndarray, side_y: np.ndarray) -> np.ndarray:
        di = self.mesh.delta[i]
        same = (side_y == self.mesh.side[i]) | (di == 1.0)
        return np.where(same, np.abs(di - delta_y), 2.0 - di - delta_y)

    def _basis(self, c: int, delta: np.ndarray, betas: Tuple[float, float]):
        """Hat-times-power values of the two nodes of a regular cell at points delta."""
        mesh = self.mesh
        beta = betas[0] if mesh.cell_side[c] < 0 else betas[1]
        lo, hi = mesh.cell_tau_lo[c], mesh.cell_tau_hi[c]
        a, b = mesh.cell_node_lo[c], mesh.cell_node_hi[c]
        tau = delta ** (1.0 / mesh.q)
        lam = (tau - lo) / (hi - lo)
        return (1.0 - lam) * (delta / mesh.delta[a]) ** beta, lam * (delta / mesh.delta[b]) ** beta

    def _cell_rule(self, c: int, betas: Tuple[float, float]):
        mesh, q = self.mesh, self.mesh.q
        lo, hi = mesh.cell_tau_lo[c], mesh.cell_tau_hi[c]
        if mesh.cell_node_lo[c] < 0:
            beta = betas[0] if mesh.cell_side[c] < 0 else betas[1]
            jx, jw = gauss_jacobi_01(FAR_ORDER, q * (beta + 1.0) - 1.0)
            delta = (hi * jx) ** q
            return delta, np.zeros_like(delta), q * hi ** q * jw
        x, w = gauss_legendre_01(FAR_ORDER)
        tau = lo + (hi - lo) * x
        delta = tau ** q
        jac = (hi - lo) * w * q * tau ** (q - 1.0)
        b_lo, b_hi = self._basis(c, delta, betas)
        return delta, jac * b_lo, jac * b_hi

    def _far_row(self, i: int, betas: Tuple[float, float], rules) -> np.ndarray:
        mesh = self.mesh
        size = mesh.size
        row = np.zeros(size + 1)
        skip = {i, i + 1}
        exponent = -1.0 - 2.0 * self.s
        for c, (delta, w_lo, w_hi) in enumerate(rules):
            if c in skip:
                continue
            kernel = self._distance(i, delta, np.full(delta.shape, mesh.cell_side[c])) ** exponent
            lo = mesh.cell_node_lo[c]
            row[lo if lo >= 0 else size] += np.sum(kernel * w_lo)
            row[mesh.cell_node_hi[c]] += np.sum(kernel * w_hi)

        h = self.h[i]
        for c, j, length in ((i, i - 1, self._h_left[i]), (i + 1, i + 1, self._h_right[i])):
            if length <= h * (1.0 + 1e-12):
                continue
            toward = mesh.delta[j] - mesh.delta[i]
            start = mesh.delta[i] + h * np.sign(toward)
            edges = np.sort(geometric_pieces(start, mesh.delta[j], PARTIAL_LEVELS))
            delta, wts = panel_rule(edges, 8)
            b_lo, b_hi = self._basis(c, delta, betas)
            kernel = np.abs(delta - mesh.delta[i]) ** exponent
            row[mesh.cell_node_lo[c]] += np.sum(kernel * wts * b_lo)
            row[mesh.cell_node_hi[c]] += np.sum(kernel * wts * b_hi)
        return row[:size]

    def far_weights(self, betas: Tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
        """Far-field weights (without A) for admissible rows; other rows are zero."""
        key = (round(betas[0], 6), round(betas[1], 6))
        with self._lock:
            cached = self._far_cache.get(key)
        if cached is not None:
            return cached
        rules = [self._cell_rule(c, key) for c in range(len(self.mesh.cell_side))]
        weights = np.zeros((self.mesh.size, self.mesh.size))
        for i in self.admissible:
            weights[i] = self._far_row(int(i), key, rules)
        weights.setflags(write=False)
        with self._lock:
            self._far_cache.setdefault(key, weights)
        logger.debug(f"Assembled far-field weights for betas {key} on {len(self.admissible)} rows")
        return weights

    def off_diagonal_weights(self, betas: Tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
        """
        w_ij with (-Delta)^s u_i = d_i u_i - sum_j w_ij u_j - ext_i on admissible rows.
        Nonnegative weights give the discrete maximum principle.
        """
        weights = np.array(self.far_weights(betas))
        s = self.s
        for i in self.admissible:
            h, hl, hr = self.h[i], self._h_left[i], self._h_right[i]
            near = h ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
            weights[i, i - 1] += near * 2.0 / (hl * (hl + hr))
            weights[i, i + 1] += near * 2.0 / (hr * (hl + hr))
        return self.A_const * weights

    def exterior_integral(self, exterior: ExteriorData) -> np.ndarray:
        """
        int_{|y|>1} g(y) |x_i - y|^(-1-2s) dy at every node.

        Raises:
            DataInadmissibleError: If g is not integrable near the boundary
        """
        if exterior.is_zero:
            return np.zeros(self.mesh.size)
        s = self.s
        delta = self.mesh.delta[:, None]
        e_min = min(1e-12, 1e-3 * float(self.mesh.delta.min()))
        near, far = exterior.end_exponents(e_min, EXTERIOR_E_MAX)

        def kernel(e):
            return (e + delta) ** (-1.0 - 2.0 * s) + (e + 2.0 - delta) ** (-1.0 - 2.0 * s)

        nodes, weights = exterior.quadrature(e_min, EXTERIOR_E_MAX)
        total = np.sum(kernel(nodes) * exterior(nodes) * weights, axis=1)
        if exterior.support[0] <= 0.0:
            if near <= -1.0:
                raise DataInadmissibleError("Exterior data not integrable at the boundary", exponent=near)
            e = np.array([e_min])
            total += kernel(e)[:, 0] * exterior(e)[0] * e_min / (1.0 + near)
        if exterior.support[1] > EXTERIOR_E_MAX:
            if far >= 2.0 * s:
                raise DataInadmissibleError("Exterior data decays too slowly at infinity", exponent=far)
            e = np.array([EXTERIOR_E_MAX])
            tail = (e + delta) ** (-2.0 * s) + (e + 2.0 - delta) ** (-2.0 * s)
            total += tail[:, 0] * exterior(e)[0] / (2.0 * s - far)
        return total

    def side_exponents(self, values: np.ndarray) -> Tuple[float, float]:
        return (
            fit_end_exponent(self.mesh, values, -1, BETA_CLIP),
            fit_end_exponent(self.mesh, values, 1, BETA_CLIP),
        )

    def apply_nodes(self, u: GridFunction, indices: Optional[np.ndarray] = None) -> np.ndarray:
        """
        (-Delta)^s u at admissible nodes. A set trace_coeff contributes nothing:
        h1 is s-harmonic with zero exterior values.

        Raises:
            ProximityError: If a requested node is closer than two cells to the boundary
        """
        if u.mesh is not self.mesh and u.mesh.key != self.mesh.key:
            raise ConfigError("Grid function lives on a different mesh")
        if indices is None:
            indices = self.admissible
        indices = np.asarray(indices, dtype=int)
        bad = np.setdiff1d(indices, self.admissible)
        if len(bad):
            raise ProximityError(
                "Node too close to the boundary for the stencil",
                node=int(bad[0]),
                min_admissible_delta=self.mesh.min_admissible_delta(),
            )
        values = u.values
        s = self.s
        far = self.far_weights(self.side_exponents(values))[indices] @ values
        h, hl, hr = self.h[indices], self._h_left[indices], self._h_right[indices]
        ui, ul, ur = values[indices], values[indices - 1], values[indices + 1]
        second = 2.0 * ((ur - ui) / hr - (ui - ul) / hl) / (hl + hr)
        local = h ** (-2.0 * s) / s * ui - second * h ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
        ext = self.exterior_integral(u.exterior)[indices]
        return self.A_const * (local - far - ext)

    def apply(self, u: GridFunction, index: int) -> float:
        return float(self.apply_nodes(u, np.array([index]))[0])


def _source_values(source: Source, values: np.ndarray) -> np.ndarray:
    if isinstance(source, NonlinearityModel):
        return np.asarray(eval_f(source, np.maximum(values, 0.0)))
    return np.asarray(source(values), dtype=float) * np.ones_like(values)


def residual(op: FracLapOperator, u: GridFunction, source: Source,
             region: Optional[np.ndarray] = None) -> np.ndarray:
    """(-Delta)^s u + f(u) per node of region (admissible nodes by default)."""
    if region is None:
        region = op.admissible
    region = np.asarray(region, dtype=int)
    return op.apply_nodes(u, region) + _source_values(source, u.total()[region])


def supersolution_inequality_check(
    op: FracLapOperator,
    ubar: GridFunction,
    source: Source,
    delta0: float,
    tolerance: float = 1e-3,
) -> InequalityReport:
    """
    Evaluate (-Delta)^s ubar + f(ubar) at every admissible node and the best
    constant C with (-Delta)^s ubar >= -C f(ubar) on the strip delta < delta0.
    """
    nodes = op.admissible
    lap = op.apply_nodes(ubar, nodes)
    f = _source_values(source, ubar.total()[nodes])
    res = lap + f
    scaled = res / np.maximum(1.0, f)
    violating = nodes[scaled < -tolerance]

    strip = np.isin(nodes, strip_indices(op.mesh, delta0))
    deficit = -lap[strip]
    f_strip = f[strip]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(f_strip > 0, deficit / f_strip, np.where(deficit > 0, np.inf, 0.0))
    C_strip = float(max(0.0, ratios.max())) if len(ratios) else 0.0

    return InequalityReport(
        n_checked=len(nodes),
        min_residual=float(res.min()),
        min_scaled_residual=float(scaled.min()),
        violating_nodes=[int(v) for v in violating],
        C_strip=C_strip,
        delta0=delta0,
    )


def ko_grid_function(mesh: GradedMesh, profile: KOProfile, scale: float = 1.0) -> GridFunction:
    """scale * psi(delta^s) inside and outside (delta = | |x| - 1 |)."""
    s = profile.s
    exterior = parse_exterior_spec(f"ko:{float(scale)!r}", s, profile.psi)
    return GridFunction(mesh, s, scale * profile.psi(mesh.delta ** s), exterior)


def trace_growth_check(mesh: GradedMesh, profile: KOProfile) -> np.ndarray:
    """delta^(1-s) psi(delta^s) at the nodes, ordered from the boundary inward."""
    order = np.argsort(mesh.delta)
    delta = mesh.delta[order]
    return delta ** (1.0 - profile.s) * profile.psi(delta ** profile.s)


def h1_grid_function(mesh: GradedMesh, s: float, k: float = 1.0) -> GridFunction:
    """k h1 as explicit nodal values (no analytic splitting)."""
    return GridFunction(mesh, s, k * h1_profile(s, mesh.delta))
