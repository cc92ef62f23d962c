"""
Domains, graded meshes and grid functions.

Nodes are uniform in tau = delta^(1/q) and store delta and tau directly, so
that geometry near the boundary never loses digits to 1 - |x|.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import gamma

from fracblowup.errors import ConfigError, DataInadmissibleError, MeshError
from fracblowup.models.quadrature import gauss_jacobi_01, gauss_legendre_01, log_panel_edges, log_panel_rule
from fracblowup.schemas.solve import DomainKind

logger = logging.getLogger(__name__)

MIN_CELLS = 16


@dataclass(frozen=True)
class Domain:
    kind: DomainKind
    N: int = 1

    @classmethod
    def interval(cls) -> "Domain":
        return cls(DomainKind.INTERVAL, 1)

    @classmethod
    def ball(cls, N: int) -> "Domain":
        if N < 1:
            raise MeshError(f"Dimension must be >= 1, got {N}")
        return cls(DomainKind.BALL, N)

    @property
    def sphere_area(self) -> float:
        """|S^(N-1)|; 2 for N = 1."""
        return 2.0 * np.pi ** (self.N / 2.0) / gamma(self.N / 2.0)


def distance(domain: Domain, x) -> np.ndarray:
    """| |x| - 1 |: 1 - |x| inside, |x| - 1 outside. x is a coordinate or radius."""
    return np.abs(np.abs(np.asarray(x, dtype=float)) - 1.0)


@dataclass(frozen=True, eq=False)
class GradedMesh:
    """
    Nodes x (signed coordinate on the interval, radius on the ball) sorted
    increasingly, with per-node delta, tau and side (-1 left, +1 right).

    Cells are described in tau by (side, tau_lo, tau_hi, node_lo, node_hi);
    node_lo = -1 marks the end cell touching the boundary.
    """

    domain: Domain
    n: int
    q: float
    x: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    side: np.ndarray = field(repr=False)
    cell_side: np.ndarray = field(repr=False)
    cell_tau_lo: np.ndarray = field(repr=False)
    cell_tau_hi: np.ndarray = field(repr=False)
    cell_node_lo: np.ndarray = field(repr=False)
    cell_node_hi: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.x)

    @property
    def key(self) -> Tuple:
        return (self.domain.kind.value, self.domain.N, self.n, round(self.q, 12))

    def boundary_rank(self) -> np.ndarray:
        """Index k of each node in tau_k = k * tau_1 (1 for the outermost nodes)."""
        return np.rint(self.tau / self.tau.min()).astype(int)

    def admissible_indices(self) -> np.ndarray:
        """Nodes with at least two cells between them and the boundary."""
        return np.nonzero(self.boundary_rank() >= 2)[0]

    def min_admissible_delta(self) -> float:
        return float(self.delta[self.admissible_indices()].min())

    def outermost(self, side: int = -1) -> Tuple[int, int]:
        """Indices of the two nodes nearest the boundary on the given side."""
        rank = self.boundary_rank()
        on_side = (self.side == side) | (self.domain.kind == DomainKind.BALL)
        first = np.nonzero(on_side & (rank == 1))[0][0]
        second = np.nonzero(on_side & (rank == 2))[0][0]
        return int(first), int(second)

    def radial_weight(self, delta: np.ndarray) -> np.ndarray:
        """Measure factor in delta: |S^(N-1)| r^(N-1) on the ball, 1 on the interval."""
        if self.domain.kind == DomainKind.INTERVAL:
            return np.ones_like(delta)
        return self.domain.sphere_area * (1.0 - delta) ** (self.domain.N - 1)

    def integrate(self, values: np.ndarray, end_exponent: Optional[float] = None) -> float:
        """
        int_Omega u for nodal values u, piecewise linear in tau, with a power
        law on the end cells (exponent fitted from the two outermost nodes
        unless given).

        Raises:
            DataInadmissibleError: If the end exponent is <= -1
        """
        values = np.asarray(values, dtype=float)
        x, w = gauss_legendre_01(8)
        q = self.q
        total = 0.0
        for c in range(len(self.cell_side)):
            lo, hi = self.cell_tau_lo[c], self.cell_tau_hi[c]
            a, b = self.cell_node_lo[c], self.cell_node_hi[c]
            if a < 0:
                beta = end_exponent if end_exponent is not None else fit_end_exponent(self, values, int(self.cell_side[c]))
                if beta <= -1.0:
                    raise DataInadmissibleError("Function is not integrable at the boundary", exponent=beta)
                jx, jw = gauss_jacobi_01(8, q * (beta + 1.0) - 1.0)
                delta = (hi * jx) ** q
                total += values[b] * q * hi ** q * np.sum(jw * self.radial_weight(delta))
                continue
            tau = lo + (hi - lo) * x
            delta = tau ** q
            lam = (tau - lo) / (hi - lo)
            u = (1.0 - lam) * values[a] + lam * values[b]
            total += (hi - lo) * np.sum(w * u * q * tau ** (q - 1.0) * self.radial_weight(delta))
        return float(total)


def fit_end_exponent(mesh: GradedMesh, values: np.ndarray, side: int = -1,
                     clip: Tuple[float, float] = (-0.99, 2.0)) -> float:
    """Boundary exponent of values from the two outermost nodes of one side."""
    first, second = mesh.outermost(side)
    v1, v2 = values[first], values[second]
    if v1 * v2 <= 0:
        return 0.0
    beta = np.log(v1 / v2) / np.log(mesh.delta[first] / mesh.delta[second])
    return float(np.clip(beta, *clip))


def build_graded_mesh(domain: Domain, n: int, q: float) -> GradedMesh:
    """
    Graded mesh uniform in tau = delta^(1/q).

    Interval: n cells (n even), n - 1 nodes, tau_k = 2k/n on each half.
    Ball: n radial nodes, tau_k = k/n, with the centre r = 0 at k = n.

    Raises:
        MeshError: If n < 16, q < 1 or the interval gets an odd n
    """
    if n < MIN_CELLS:
        raise MeshError(f"Mesh needs n >= {MIN_CELLS}, got {n}", n=n)
    if q < 1.0:
        raise MeshError(f"Grading exponent must be >= 1, got {q}", q=q)

    if domain.kind == DomainKind.INTERVAL:
        if n % 2:
            raise MeshError("Interval mesh needs an even number of cells", n=n)
        half = n // 2
        tau_left = 2.0 * np.arange(1, half + 1) / n
        tau_left[-1] = 1.0
        tau = np.concatenate([tau_left, tau_left[-2::-1]])
        side = np.concatenate([-np.ones(half - 1), [1.0], np.ones(half - 1)]).astype(int)
        delta = tau ** q
        x = side * (1.0 - delta)
        x[half - 1] = 0.0
        count = len(x)
        cells_side, cells_lo, cells_hi, node_lo, node_hi = [-1], [0.0], [tau[0]], [-1], [0]
        for i in range(count - 1):
            if i < half - 1:
                cells_side.append(-1)
                cells_lo.append(tau[i])
                cells_hi.append(tau[i + 1])
                node_lo.append(i)
                node_hi.append(i + 1)
            else:
                cells_side.append(1)
                cells_lo.append(tau[i + 1])
                cells_hi.append(tau[i])
                node_lo.append(i + 1)
                node_hi.append(i)
        cells_side.append(1)
        cells_lo.append(0.0)
        cells_hi.append(tau[-1])
        node_lo.append(-1)
        node_hi.append(count - 1)
    else:
        k = np.arange(n, 0, -1)
        tau = k / n
        delta = tau ** q
        x = 1.0 - delta
        x[0] = 0.0
        side = np.ones(n, dtype=int)
        cells_side, cells_lo, cells_hi, node_lo, node_hi = [], [], [], [], []
        for i in range(n - 1):
            cells_side.append(1)
            cells_lo.append(tau[i + 1])
            cells_hi.append(tau[i])
            node_lo.append(i + 1)
            node_hi.append(i)
        cells_side.append(1)
        cells_lo.append(0.0)
        cells_hi.append(tau[-1])
        node_lo.append(-1)
        node_hi.append(n - 1)

    mesh = GradedMesh(
        domain=domain,
        n=n,
        q=float(q),
        x=x,
        delta=delta,
        tau=tau,
        side=side,
        cell_side=np.asarray(cells_side, dtype=int),
        cell_tau_lo=np.asarray(cells_lo, dtype=float),
        cell_tau_hi=np.asarray(cells_hi, dtype=float),
        cell_node_lo=np.asarray(node_lo, dtype=int),
        cell_node_hi=np.asarray(node_hi, dtype=int),
    )
    for array in (mesh.x, mesh.delta, mesh.tau, mesh.side):
        array.setflags(write=False)
    logger.debug(f"Built {domain.kind.value} mesh n={n} q={q}: {mesh.size} nodes, min delta {delta.min():.3e}")
    return mesh


def strip_indices(mesh: GradedMesh, delta0: float) -> np.ndarray:
    """Indices of nodes with delta < delta0; delta0 >= 1 selects every node."""
    if delta0 >= 1.0:
        return np.arange(mesh.size)
    return np.nonzero(mesh.delta < delta0)[0]


class ExteriorKind(str, Enum):
    ZERO = "zero"
    TRUNCATED = "truncated"
    CLOSED_FORM = "closed-form"


@dataclass(frozen=True)
class ExteriorData:
    """
    Radial exterior values g as a function of e = |y| - 1 > 0, vanishing
    outside the support, optionally truncated to min(k, g).
    """

    kind: ExteriorKind
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)
    support: Tuple[float, float] = (0.0, np.inf)
    truncation: Optional[float] = None
    label: str = "zero"

    @classmethod
    def zero(cls) -> "ExteriorData":
        return cls(ExteriorKind.ZERO)

    @property
    def is_zero(self) -> bool:
        return self.kind == ExteriorKind.ZERO

    def truncated(self, k: float) -> "ExteriorData":
        if self.is_zero:
            return self
        return ExteriorData(ExteriorKind.TRUNCATED, self.profile, self.support, float(k), self.label)

    def __call__(self, e) -> np.ndarray:
        e = np.asarray(e, dtype=float)
        if self.is_zero:
            return np.zeros_like(e)
        inside = (e > self.support[0]) & (e < self.support[1])
        out = np.zeros_like(e)
        out[inside] = self.profile(e[inside])
        if self.truncation is not None:
            out = np.minimum(out, self.truncation)
        return out

    def quadrature(self, e_min: float, e_max: float, per_decade: int = 8, order: int = 8):
        """Composite Gauss rule in ln e on [e_min, e_max] with the support ends as breakpoints."""
        lo = max(e_min, self.support[0]) if self.support[0] > 0 else e_min
        hi = min(e_max, self.support[1])
        if hi <= lo:
            return np.empty(0), np.empty(0)
        edges = log_panel_edges(lo, hi, per_decade, extra=self.support)
        return log_panel_rule(edges, order)

    def end_exponents(self, e_min: float, e_max: float) -> Tuple[float, float]:
        """Power exponents of g near e = 0 and at e = e_max (0 where g vanishes)."""
        near = 0.0
        if self.support[0] <= 0.0:
            g1, g2 = self(np.array([e_min, 2.0 * e_min]))
            near = float(np.log(g2 / g1) / np.log(2.0)) if g1 > 0 and g2 > 0 else 0.0
        far = 0.0
        if self.support[1] > e_max:
            g1, g2 = self(np.array([e_max / 2.0, e_max]))
            far = float(np.log(g2 / g1) / np.log(2.0)) if g1 > 0 and g2 > 0 else 0.0
        return near, far


def exterior_l1_norm(exterior: ExteriorData, N: int, e_max: float = 1e6) -> float:
    """
    int_{|y|>1} g(y) dy for radial g.

    Raises:
        DataInadmissibleError: If g is not integrable near the sphere or at infinity
    """
    if exterior.is_zero:
        return 0.0
    e_min = 1e-12
    near, far = exterior.end_exponents(e_min, e_max)
    if near <= -1.0:
        raise DataInadmissibleError("Exterior data not integrable at the boundary", exponent=near)
    if exterior.support[1] > e_max and far + N >= 0.0:
        raise DataInadmissibleError("Exterior data not integrable at infinity", exponent=far)
    nodes, weights = exterior.quadrature(e_min, e_max)
    area = 2.0 * np.pi ** (N / 2.0) / gamma(N / 2.0)
    total = np.sum(weights * exterior(nodes) * (1.0 + nodes) ** (N - 1))
    if exterior.support[0] <= 0.0:
        total += float(exterior(np.array([e_min]))[0]) * e_min / (1.0 + near)
    if exterior.support[1] > e_max:
        total += float(exterior(np.array([e_max]))[0]) * e_max ** N / -(far + N)
    return float(area * total)


def parse_exterior_spec(spec: str, s: float, psi: Optional[Callable] = None) -> ExteriorData:
    """
    Parse an exterior data spec:

        zero                 g = 0
        shell:R1:R2[:amp]    g = amp on R1 < |y| < R2
        power:a[:R2]         g = (|y|^2 - 1)^(-a) on 1 < |y| < R2 (R2 = inf by default)
        ko-shell[:R2]        g = psi(delta^s) on 1 < |y| < R2 (R2 = 2 by default)
        ko[:scale]           g = scale * psi(delta^s) on |y| > 1

    Raises:
        ConfigError: If the spec is malformed
    """
    parts = spec.strip().split(":")
    name, args = parts[0], parts[1:]
    try:
        values = [float(a) for a in args]
    except ValueError:
        raise ConfigError(f"Malformed exterior spec: {spec}")

    if name == "zero" and not values:
        return ExteriorData.zero()
    if name == "shell" and len(values) in (2, 3):
        r1, r2 = values[0], values[1]
        amp = values[2] if len(values) == 3 else 1.0
        if not (1.0 <= r1 < r2) or amp < 0:
            raise ConfigError(f"Shell needs 1 <= R1 < R2 and amp >= 0: {spec}")
        return ExteriorData(
            ExteriorKind.CLOSED_FORM,
            lambda e: np.full_like(e, amp),
            (r1 - 1.0, r2 - 1.0),
            label=spec,
        )
    if name == "power" and len(values) in (1, 2):
        a = values[0]
        r2 = values[1] if len(values) == 2 else np.inf
        return ExteriorData(
            ExteriorKind.CLOSED_FORM,
            lambda e: (e * (2.0 + e)) ** (-a),
            (0.0, r2 - 1.0),
            label=spec,
        )
    if name == "ko" and len(values) in (0, 1):
        if psi is None:
            raise ConfigError("ko data needs a Keller-Osserman profile")
        scale = values[0] if values else 1.0
        return ExteriorData(
            ExteriorKind.CLOSED_FORM,
            lambda e: scale * psi(e ** s),
            (0.0, np.inf),
            label=spec,
        )
    if name == "ko-shell" and len(values) in (0, 1):
        if psi is None:
            raise ConfigError("ko-shell data needs a Keller-Osserman profile")
        r2 = values[0] if values else 2.0
        return ExteriorData(
            ExteriorKind.CLOSED_FORM,
            lambda e: psi(e ** s),
            (0.0, r2 - 1.0),
            label=spec,
        )
    raise ConfigError(f"Unknown exterior spec: {spec}")


@dataclass
class GridFunction:
    """
    Nodal values on a mesh plus exterior data. With trace_coeff set, values
    hold the regular remainder u - trace_coeff * h1.
    """

    mesh: GradedMesh
    s: float
    values: np.ndarray
    exterior: ExteriorData = field(default_factory=ExteriorData.zero)
    trace_coeff: Optional[float] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.size,):
            raise ConfigError(
                f"GridFunction needs {self.mesh.size} values, got {self.values.shape}"
            )

    def singular_part(self) -> np.ndarray:
        if not self.trace_coeff:
            return np.zeros(self.mesh.size)
        from fracblowup.models.ball_kernels import h1_profile

        return self.trace_coeff * h1_profile(self.s, self.mesh.delta)

    def total(self) -> np.ndarray:
        return self.values + self.singular_part()

    def l1_norm(self) -> float:
        """int_Omega u, with the singular part integrated in closed form."""
        regular = self.mesh.integrate(self.values) if np.any(self.values) else 0.0
        if not self.trace_coeff:
            return regular
        from fracblowup.models.ball_kernels import h1_mass

        return self.trace_coeff * h1_mass(self.s, self.mesh.domain.N) + regular
