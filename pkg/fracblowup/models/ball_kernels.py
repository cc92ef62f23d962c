"""
Closed-form kernels of the unit ball (and interval) for the fractional
Laplacian: Green function, Poisson kernel, the boundary profile h1 and the
torsion function, plus the Green and Poisson integral operators on graded
meshes.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc, gamma

from fracblowup.config import settings
from fracblowup.errors import DataInadmissibleError, IntegrabilityError, SingularityError
from fracblowup.models.mesh_domain import ExteriorData, GradedMesh, GridFunction
from fracblowup.models.quadrature import (
    gauss_jacobi_01,
    gauss_legendre_01,
    geometric_pieces,
    panel_rule,
)
from fracblowup.schemas.solve import DomainKind

logger = logging.getLogger(__name__)

POISSON_E_MAX = 99.0
POISSON_PER_DECADE = 8


def sphere_area(N: int) -> float:
    """|S^(N-1)|, with |S^0| = 2."""
    return 2.0 * np.pi ** (N / 2.0) / gamma(N / 2.0)


@dataclass(frozen=True)
class KernelSet:
    """Kernel constants for order s in dimension N."""

    N: int
    s: float

    @property
    def green_constant(self) -> float:
        N, s = self.N, self.s
        return gamma(N / 2.0) / (2.0 ** (2.0 * s) * np.pi ** (N / 2.0) * gamma(s) ** 2)

    @property
    def poisson_constant(self) -> float:
        N, s = self.N, self.s
        return gamma(N / 2.0) * np.pi ** (-N / 2.0 - 1.0) * np.sin(np.pi * s)

    @property
    def torsion_constant(self) -> float:
        N, s = self.N, self.s
        return gamma(N / 2.0) / (2.0 ** (2.0 * s) * gamma(N / 2.0 + s) * gamma(1.0 + s))

    @property
    def fraclap_constant(self) -> float:
        """Normalization A(N, s) of the principal-value integral."""
        N, s = self.N, self.s
        return 2.0 ** (2.0 * s) * s * gamma(N / 2.0 + s) / (np.pi ** (N / 2.0) * gamma(1.0 - s))

    @property
    def h1_normalization(self) -> float:
        return 2.0 ** (1.0 - self.s)

    def constants(self) -> Dict[str, float]:
        return {
            "green_constant": float(self.green_constant),
            "poisson_constant": float(self.poisson_constant),
            "torsion_constant": float(self.torsion_constant),
            "fraclap_constant": float(self.fraclap_constant),
            "h1_normalization": float(self.h1_normalization),
            "h1_mass": h1_mass(self.s, self.N),
            "sphere_area": sphere_area(self.N),
        }


def green_integral(r0, N: int, s: float) -> np.ndarray:
    """
    int_0^r0 t^(s-1) (1+t)^(-N/2) dt as the incomplete Beta B(z; s, N/2 - s),
    z = r0/(1+r0).
    """
    r0 = np.asarray(r0, dtype=float)
    b = N / 2.0 - s
    z = r0 / (1.0 + r0)
    if abs(b) < 1e-14:
        return 2.0 * np.arcsinh(np.sqrt(r0))
    if b > 0:
        return betainc(s, b, z) * beta_fn(s, b)
    upper = betainc(s, b + 1.0, z) * beta_fn(s, b + 1.0)
    return ((s + b) * upper - z ** s * (1.0 + r0) ** (-b)) / b


def _green_from_geometry(kernels: KernelSet, D: np.ndarray, r0: np.ndarray) -> np.ndarray:
    N, s = kernels.N, kernels.s
    return kernels.green_constant * D ** (2.0 * s - N) * green_integral(r0, N, s)


def _as_points(x, N: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if N == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    return x


def green(kernels: KernelSet, x, y) -> np.ndarray:
    """
    Green function of the unit ball at points x, y (arrays of shape (..., N), or
    scalars for N = 1).

    Raises:
        SingularityError: If x = y for any pair
    """
    x, y = _as_points(x, kernels.N), _as_points(y, kernels.N)
    D = np.linalg.norm(x - y, axis=-1)
    if np.any(D == 0):
        raise SingularityError("Green function evaluated on the diagonal")
    a_x = 1.0 - np.sum(x * x, axis=-1)
    a_y = 1.0 - np.sum(y * y, axis=-1)
    return _green_from_geometry(kernels, D, a_x * a_y / D ** 2)


def poisson(kernels: KernelSet, x, y) -> np.ndarray:
    """Poisson kernel P(x, y) for |x| < 1 < |y|."""
    x, y = _as_points(x, kernels.N), _as_points(y, kernels.N)
    D = np.linalg.norm(x - y, axis=-1)
    ratio = (1.0 - np.sum(x * x, axis=-1)) / (np.sum(y * y, axis=-1) - 1.0)
    return kernels.poisson_constant * ratio ** kernels.s / D ** kernels.N


def torsion_profile(s: float, N: int, delta) -> np.ndarray:
    """gamma_(N,s) (1 - |x|^2)^s as a function of delta = 1 - |x|."""
    delta = np.asarray(delta, dtype=float)
    return KernelSet(N, s).torsion_constant * (delta * (2.0 - delta)) ** s


def torsion(kernels: KernelSet, x) -> np.ndarray:
    """Torsion function xi: (-Delta)^s xi = 1 in the ball, xi = 0 outside."""
    x = _as_points(x, kernels.N)
    a = np.clip(1.0 - np.sum(x * x, axis=-1), 0.0, None)
    return kernels.torsion_constant * a ** kernels.s


def h1_profile(s: float, delta) -> np.ndarray:
    """2^(1-s) (1 - |x|^2)^(s-1), normalized so delta^(1-s) h1 -> 1 at the boundary."""
    delta = np.asarray(delta, dtype=float)
    return 2.0 ** (1.0 - s) * (delta * (2.0 - delta)) ** (s - 1.0)


def h1(kernels: KernelSet, x) -> np.ndarray:
    x = _as_points(x, kernels.N)
    a = 1.0 - np.sum(x * x, axis=-1)
    return kernels.h1_normalization * a ** (kernels.s - 1.0)


def h1_mass(s: float, N: int) -> float:
    """int_Omega h1 = |S^(N-1)| 2^(1-s) B(N/2, s) / 2."""
    return float(sphere_area(N) * 2.0 ** (1.0 - s) * beta_fn(N / 2.0, s) / 2.0)


def _sphere_kernel(kernels: KernelSet, delta_x: float, delta_y: np.ndarray) -> np.ndarray:
    """
    rho^(N-1) int_{S^(N-1)} G(r e, rho theta) dtheta for r = 1 - delta_x and
    rho = 1 - delta_y, by the substitution D = |r e - rho theta|.
    """
    N, s = kernels.N, kernels.s
    a_x = delta_x * (2.0 - delta_x)
    a_y = delta_y * (2.0 - delta_y)
    if N == 1:
        near = np.abs(delta_x - delta_y)
        far = 2.0 - delta_x - delta_y
        return _green_from_geometry(kernels, near, a_x * a_y / near ** 2) + _green_from_geometry(
            kernels, far, a_x * a_y / far ** 2
        )

    rho = 1.0 - delta_y
    if delta_x == 1.0:
        return sphere_area(N) * rho ** (N - 1) * _green_from_geometry(kernels, rho, a_y / rho ** 2)

    r = 1.0 - delta_x
    d_minus = np.abs(delta_y - delta_x)
    d_plus = 2.0 - delta_x - delta_y
    length = d_plus - d_minus
    a = 0.5 * (N - 3)
    x8, w8 = gauss_legendre_01(8)
    jx, jw = gauss_jacobi_01(8, a)

    levels = np.clip(np.ceil(np.log2(length / d_minus)) + 3, 3, 48).astype(int)
    out = np.empty_like(delta_y)
    for J in np.unique(levels):
        idx = np.nonzero(levels == J)[0]
        dm, dp, L = d_minus[idx, None], d_plus[idx, None], length[idx, None]
        ay, rh = a_y[idx, None], rho[idx, None]

        def smooth(D):
            mu_part = ((D + dm) * (dp + D)) ** a / (2.0 * r * rh) ** (2.0 * a)
            return _green_from_geometry(kernels, D, a_x * ay / D ** 2) * mu_part * D / (r * rh)

        breaks = dm + L * geometric_pieces(0.0, 1.0, int(J))[None, :]
        first = breaks[:, 1:2] - breaks[:, 0:1]
        D = dm + first * jx
        total = np.sum(smooth(D) * (dp - D) ** a * jw, axis=1) * first[:, 0] ** (a + 1.0)

        lo, hi = breaks[:, 1:-2], breaks[:, 2:-1]
        D = lo[..., None] + (hi - lo)[..., None] * x8
        dd = dm[..., None]
        dpp = dp[..., None]
        mu_part = ((D + dd) * (dpp + D)) ** a / (2.0 * r * rh[..., None]) ** (2.0 * a)
        values = (
            _green_from_geometry(kernels, D, a_x * ay[..., None] / D ** 2)
            * mu_part
            * D
            / (r * rh[..., None])
            * ((D - dd) * (dpp - D)) ** a
        )
        total += np.sum(values * w8 * (hi - lo)[..., None], axis=(1, 2))

        last = breaks[:, -1:] - breaks[:, -2:-1]
        D = dp - last * jx
        total += np.sum(smooth(D) * (D - dm) ** a * jw, axis=1) * last[:, 0] ** (a + 1.0)

        out[idx] = rho[idx] ** (N - 1) * total
    return sphere_area(N - 1) * out


def fit_boundary_exponent(mesh: GradedMesh, values: np.ndarray) -> float:
    """Boundary exponent of nodal values from the two outermost nodes (0 if they change sign)."""
    first, second = mesh.outermost(-1)
    v1, v2 = values[first], values[second]
    if v1 * v2 <= 0:
        return 0.0
    return float(np.log(v1 / v2) / np.log(mesh.delta[first] / mesh.delta[second]))


class GreenOperator:
    """
    Product-rule discretisation of int_Omega G(x_i, y) source(y) dy.

    The source is represented as sum_j source_j (delta/delta_j)^beta hat_j(tau),
    with hat functions piecewise linear in tau and a pure power law on the end
    cells, so the weights are nonnegative and the operator is linear for a
    fixed beta.
    """

    REGULAR_ORDER = 12
    PIECE_ORDER = 8
    END_ORDER = 12
    ADJACENT_LEVELS = 40
    NEAR_LEVELS = 12

    def __init__(self, kernels: KernelSet, mesh: GradedMesh, beta: float):
        self.kernels = kernels
        self.mesh = mesh
        self.beta = float(beta)
        if self.beta + kernels.s <= -1.0:
            raise IntegrabilityError(
                "Source not integrable against delta^s",
                weighted_exponent=self.beta + kernels.s,
            )
        self._prepare_regular()
        self.weights = self._assemble()
        self.weights.setflags(write=False)

    def _positions(self, tau: np.ndarray, side: np.ndarray) -> np.ndarray:
        if self.mesh.domain.kind == DomainKind.INTERVAL:
            return side * (1.0 - tau ** self.mesh.q)
        return 1.0 - tau ** self.mesh.q

    def _cell_weights(self, c: int, tau: np.ndarray, wts: np.ndarray):
        """Basis weights of the two cell nodes at quadrature points tau of a regular cell."""
        mesh, q, beta = self.mesh, self.mesh.q, self.beta
        lo, hi = mesh.cell_tau_lo[c], mesh.cell_tau_hi[c]
        a, b = mesh.cell_node_lo[c], mesh.cell_node_hi[c]
        delta = tau ** q
        jac = wts * q * tau ** (q - 1.0)
        lam = (tau - lo) / (hi - lo)
        w_lo = jac * (1.0 - lam) * (delta / mesh.delta[a]) ** beta
        w_hi = jac * lam * (delta / mesh.delta[b]) ** beta
        return delta, w_lo, w_hi

    def _end_points(self, c: int, t_end: float):
        """Jacobi rule on [0, t_end] of an end cell; weights include 1/delta^s."""
        mesh, q, s, beta = self.mesh, self.mesh.q, self.kernels.s, self.beta
        tau1 = mesh.cell_tau_hi[c]
        jx, jw = gauss_jacobi_01(self.END_ORDER, q * (beta + s + 1.0) - 1.0)
        tau = t_end * jx
        delta = tau ** q
        w = q * t_end ** (q * (beta + s + 1.0)) * tau1 ** (-q * beta) * jw / delta ** s
        return delta, w

    def _prepare_regular(self) -> None:
        mesh = self.mesh
        x, w = gauss_legendre_01(self.REGULAR_ORDER)
        self._regular: Dict[int, Tuple] = {}
        for c in range(len(mesh.cell_side)):
            if mesh.cell_node_lo[c] < 0:
                delta, wt = self._end_points(c, mesh.cell_tau_hi[c])
                self._regular[c] = (delta, np.zeros_like(wt), wt)
                continue
            lo, hi = mesh.cell_tau_lo[c], mesh.cell_tau_hi[c]
            tau = lo + (hi - lo) * x
            self._regular[c] = self._cell_weights(c, tau, (hi - lo) * w)
        self._cell_pos_lo = self._positions(mesh.cell_tau_lo, mesh.cell_side)
        self._cell_pos_hi = self._positions(mesh.cell_tau_hi, mesh.cell_side)

    def _refined(self, c: int, toward: float, away: float, levels: int):
        edges = np.sort(geometric_pieces(toward, away, levels))
        tau, wts = panel_rule(edges, self.PIECE_ORDER)
        return self._cell_weights(c, tau, wts)

    def _kernel(self, i: int, delta_y: np.ndarray, side_y: np.ndarray) -> np.ndarray:
        mesh = self.mesh
        delta_x = float(mesh.delta[i])
        if mesh.domain.kind == DomainKind.BALL:
            return _sphere_kernel(self.kernels, delta_x, delta_y)
        same = (side_y == mesh.side[i]) | (delta_x == 1.0)
        D = np.where(same, np.abs(delta_x - delta_y), 2.0 - delta_x - delta_y)
        a_x = delta_x * (2.0 - delta_x)
        a_y = delta_y * (2.0 - delta_y)
        return _green_from_geometry(self.kernels, D, a_x * a_y / D ** 2)

    def _row(self, i: int) -> np.ndarray:
        mesh = self.mesh
        size = mesh.size
        x_i = mesh.x[i]
        deltas, sides, lo_idx, lo_w, hi_idx, hi_w = [], [], [], [], [], []

        def add(c, delta, w_lo, w_hi):
            deltas.append(delta)
            sides.append(np.full(delta.shape, mesh.cell_side[c]))
            lo_idx.append(np.full(delta.shape, mesh.cell_node_lo[c] if mesh.cell_node_lo[c] >= 0 else size))
            hi_idx.append(np.full(delta.shape, mesh.cell_node_hi[c]))
            lo_w.append(w_lo)
            hi_w.append(w_hi)

        for c in range(len(mesh.cell_side)):
            a, b = mesh.cell_node_lo[c], mesh.cell_node_hi[c]
            lo, hi = mesh.cell_tau_lo[c], mesh.cell_tau_hi[c]
            if a < 0 and b == i:
                # target is the outermost node: Jacobi on [0, tau1/2], refined toward tau1
                delta, w = self._end_points(c, 0.5 * hi)
                add(c, delta, np.zeros_like(w), w)
                edges = np.sort(geometric_pieces(hi, 0.5 * hi, self.ADJACENT_LEVELS))
                tau, wts = panel_rule(edges, self.PIECE_ORDER)
                w_end = wts * mesh.q * tau ** (mesh.q - 1.0) * (tau / hi) ** (mesh.q * self.beta)
                add(c, tau ** mesh.q, np.zeros_like(w_end), w_end)
                continue
            if a == i or b == i:
                toward, away = (lo, hi) if a == i else (hi, lo)
                add(c, *self._refined(c, toward, away, self.ADJACENT_LEVELS))
                continue
            pos_lo, pos_hi = self._cell_pos_lo[c], self._cell_pos_hi[c]
            gap_lo, gap_hi = abs(pos_lo - x_i), abs(pos_hi - x_i)
            if a >= 0 and min(gap_lo, gap_hi) < abs(pos_hi - pos_lo):
                toward, away = (lo, hi) if gap_lo < gap_hi else (hi, lo)
                add(c, *self._refined(c, toward, away, self.NEAR_LEVELS))
                continue
            add(c, *self._regular[c])

        delta = np.concatenate(deltas)
        kernel = self._kernel(i, delta, np.concatenate(sides))
        row = np.bincount(np.concatenate(lo_idx), weights=kernel * np.concatenate(lo_w), minlength=size + 1)
        row += np.bincount(np.concatenate(hi_idx), weights=kernel * np.concatenate(hi_w), minlength=size + 1)
        return row[:size]

    def _assemble(self) -> np.ndarray:
        mesh = self.mesh
        logger.debug(
            f"Assembling Green weights for {mesh.domain.kind.value} N={mesh.domain.N} "
            f"n={mesh.n} s={self.kernels.s} beta={self.beta:.4f}"
        )
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            rows = list(pool.map(self._row, range(mesh.size)))
        return np.vstack(rows)

    def apply(self, source: np.ndarray, index: Optional[int] = None):
        source = np.asarray(source, dtype=float)
        if index is not None:
            return float(self.weights[index] @ source)
        return self.weights @ source


_OPERATOR_CACHE: Dict[Tuple, GreenOperator] = {}
_CACHE_LOCK = threading.Lock()


def get_green_operator(kernels: KernelSet, mesh: GradedMesh, beta: float) -> GreenOperator:
    """Green operator for (mesh, s, beta), built once per process."""
    key = mesh.key + (round(kernels.s, 12), round(float(beta), 6))
    with _CACHE_LOCK:
        operator = _OPERATOR_CACHE.get(key)
    if operator is not None:
        return operator
    operator = GreenOperator(kernels, mesh, round(float(beta), 6))
    with _CACHE_LOCK:
        _OPERATOR_CACHE.setdefault(key, operator)
    return operator


def green_weight_exponent(kernels: KernelSet, mesh: GradedMesh, source: np.ndarray) -> Tuple[float, float]:
    """
    (fitted source exponent, exponent used by the product rule).

    Raises:
        IntegrabilityError: If source * delta^s is not integrable at the boundary
    """
    beta_src = fit_boundary_exponent(mesh, source)
    if beta_src + kernels.s <= -1.0:
        raise IntegrabilityError(
            "Source not integrable against delta^s",
            weighted_exponent=beta_src + kernels.s,
        )
    return beta_src, min(0.0, beta_src)


def green_apply(kernels: KernelSet, source: GridFunction, index: Optional[int] = None):
    """
    int_Omega G(x, y) source(y) dy at one node or at every node.

    Raises:
        IntegrabilityError: If the source is not integrable against delta^s
    """
    values = source.total()
    if not np.any(values):
        return 0.0 if index is not None else np.zeros(source.mesh.size)
    _, beta = green_weight_exponent(kernels, source.mesh, values)
    return get_green_operator(kernels, source.mesh, beta).apply(values, index)


def poisson_apply(kernels: KernelSet, mesh: GradedMesh, exterior: ExteriorData) -> np.ndarray:
    """
    int_{|y|>1} P(x, y) g(y) dy at every node for radial data g(|y| - 1).

    The sphere average of |x - y|^(-N) reduces the kernel to
    c |S^(N-1)| a_x^s (1+e) / ((e(2+e))^s (e+delta)(2+e-delta)) in e = |y| - 1.

    Raises:
        DataInadmissibleError: If g delta^(-s) is not integrable near the sphere
            or g is not integrable against |y|^(-N-2s) at infinity
    """
    if exterior.is_zero:
        return np.zeros(mesh.size)
    s, N = kernels.s, kernels.N
    delta = mesh.delta[:, None]
    e_min = min(1e-12, 1e-3 * float(mesh.delta.min()))
    e_max = POISSON_E_MAX
    near, far = exterior.end_exponents(e_min, e_max)

    def integrand(e, g):
        return g * (1.0 + e) / ((e * (2.0 + e)) ** s * (e + delta) * (2.0 + e - delta))

    nodes, weights = exterior.quadrature(e_min, e_max, POISSON_PER_DECADE, 8)
    total = np.sum(integrand(nodes, exterior(nodes)) * weights, axis=1)
    if exterior.support[0] <= 0.0:
        if 1.0 + near - s <= 0.0:
            raise DataInadmissibleError(
                "Exterior data not integrable against delta^(-s) at the boundary",
                exponent=near,
            )
        e = np.array([e_min])
        total += integrand(e, exterior(e))[:, 0] * e_min / (1.0 + near - s)
    if exterior.support[1] > e_max:
        if far >= 2.0 * s:
            raise DataInadmissibleError("Exterior data decays too slowly at infinity", exponent=far)
        e = np.array([e_max])
        total += integrand(e, exterior(e))[:, 0] * e_max / (2.0 * s - far)
    a_x = mesh.delta * (2.0 - mesh.delta)
    return kernels.poisson_constant * sphere_area(N) * a_x ** s * total
