from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from fracblowup.schemas.nonlinearity import NonlinearitySpec


class DomainKind(str, Enum):
    INTERVAL = "interval"
    BALL = "ball"


class SweepObservation(str, Enum):
    STABILIZING = "Stabilizing"
    L1_ESCAPE = "L1Escape"
    UNIFORM_BLOWUP = "UniformBlowup"
    REFUSAL = "Refusal"
    UNCLASSIFIED = "Unclassified"


class MeshSpec(BaseModel):
    domain: DomainKind = Field(DomainKind.INTERVAL, description="Interval (-1,1) or radial unit ball")
    N: int = Field(1, ge=1, description="Space dimension")
    n: int = Field(128, ge=16, description="Number of cells (interval) or radial nodes (ball)")
    q: Optional[float] = Field(None, ge=1.0, description="Grading exponent; default 2/s")

    @model_validator(mode="after")
    def check_dimension(self) -> "MeshSpec":
        if self.domain == DomainKind.INTERVAL and self.N != 1:
            raise ValueError("the interval domain has N = 1")
        if self.domain == DomainKind.INTERVAL and self.n % 2:
            raise ValueError("the interval mesh needs an even number of cells")
        return self


class SolveConfig(BaseModel):
    s: float = Field(..., gt=0.0, lt=1.0, description="Fractional order")
    model: NonlinearitySpec = Field(..., description="Nonlinearity")
    mesh: MeshSpec = Field(default_factory=MeshSpec, description="Mesh parameters")
    k: Optional[float] = Field(None, ge=0.0, description="Singular trace value")
    g_spec: Optional[str] = Field(None, description="Exterior data spec for the g-problem")
    g_ladder: List[float] = Field([4.0, 16.0, 64.0, 256.0, 1024.0], description="Truncation levels of g")
    ladder_tol: float = Field(1e-2, gt=0.0, description="Relative L1 change stopping the ladder")
    max_iters: int = Field(200, ge=1, description="Iteration cap")
    tol: float = Field(1e-10, gt=0.0, description="Relative sup-norm tolerance on the regular part")
    damping: float = Field(1.0, gt=0.0, le=1.0, description="Damping factor")
    delta0: float = Field(0.2, gt=0.0, lt=1.0, description="Strip width for the supersolution")

    @model_validator(mode="after")
    def check_data(self) -> "SolveConfig":
        if (self.k is None) == (self.g_spec is None):
            raise ValueError("exactly one of k and g_spec must be given")
        return self

    def mesh_q(self) -> float:
        return self.mesh.q if self.mesh.q is not None else 2.0 / self.s


class ResidualSummary(BaseModel):
    region: str = Field(..., description="Node set checked")
    n_nodes: int = Field(..., description="Number of nodes checked")
    max_residual: float = Field(..., description="max |(-Delta)^s u + f(u)|")
    max_scaled_residual: float = Field(..., description="max of |residual| / max(1, f(u))")
    max_scaled_interior: float = Field(..., description="Scaled residual restricted to delta > 0.1")


class SolveSummary(BaseModel):
    k: Optional[float] = Field(None, description="Trace value (k-problem)")
    truncation: Optional[float] = Field(None, description="Final truncation level (g-problem)")
    iterations: int = Field(..., description="Iterations of the final solve")
    converged: bool = Field(..., description="Convergence flag")
    sup_norm_history: List[float] = Field(..., description="Relative iterate gaps")
    L1_norm: float = Field(..., description="Integral of u over the domain")
    clamped_count: int = Field(0, description="Nodes clamped at 0")
    monotonicity_violations: int = Field(0, description="Nodes where an iterate increased beyond tolerance")
    fixed_point_gap: float = Field(..., description="Relative gap of u to base - G f(u)")
    source_exponent: float = Field(..., description="Boundary exponent of f(u) used by the Green quadrature")
    tech_ok: bool = Field(..., description="Growth hypothesis satisfied")
    g2_ok: Optional[bool] = Field(None, description="phi(g) >= d^s near the boundary (g-problem)")
    ladder: List[Dict[str, float]] = Field(default_factory=list, description="Truncation ladder history")
    residual: Optional[ResidualSummary] = Field(None, description="Operator residual (interval)")


class SupersolutionSummary(BaseModel):
    mu: float = Field(..., description="Multiplier of psi(delta^s)")
    lam: float = Field(..., description="Multiplier of the torsion function")
    C_measured: float = Field(..., description="Best C with (-Delta)^s U >= -C f(U) on the strip")
    delta0: float = Field(..., description="Strip width")
    interior_sup: float = Field(..., description="max(0, sup of -(-Delta)^s U) away from the strip")
    m: float = Field(..., description="Envelope m")
    M: float = Field(..., description="Envelope M")
    mu_rule: str = Field(..., description="Exponent used for mu: 'M' or 'm'")
    min_residual: float = Field(..., description="min of (-Delta)^s ubar + f(ubar)")
    min_scaled_residual: float = Field(..., description="min of the residual / max(1, f(ubar))")
    n_checked: int = Field(..., description="Admissible nodes checked")


class SweepSummary(BaseModel):
    s: float = Field(..., description="Fractional order")
    model: str = Field(..., description="Nonlinearity label")
    k_list: List[float] = Field(..., description="Trace values")
    regime_observed: str = Field(..., description="Observed behaviour")
    regime_predicted: str = Field(..., description="Predicted regime")
    agree: bool = Field(..., description="Observation matches prediction")
    refusal_reason: Optional[str] = Field(None, description="Integrability failure message")
    k_monotone: Optional[bool] = Field(None, description="u_k nondecreasing in k")
    sandwich_ok: Optional[bool] = Field(None, description="0 <= u_k <= k h1")
    scaling_ok: Optional[bool] = Field(None, description="Scaling sanity in k")
    below_supersolution: Optional[bool] = Field(None, description="u_k <= ubar where built")
    l1_norms: List[float] = Field(default_factory=list, description="L1 norms per k")
    l1_ratios: List[float] = Field(default_factory=list, description="Successive L1 ratios")
    l1_lower_bound_ratios: List[float] = Field(default_factory=list, description="L1 norm over k times the h1 mass")
    interior_means: List[float] = Field(default_factory=list, description="Mean of u_k over delta > 0.1")
    strip_mins: List[float] = Field(default_factory=list, description="min of u_k over delta < 0.2")
    growth_exponent: Optional[float] = Field(None, description="d ln(interior mean) / d ln k over the last step")
    limit_estimate: Optional[float] = Field(None, description="Aitken extrapolation of the interior mean")
    limit_is_extrapolated: bool = Field(False, description="limit_estimate is an extrapolation")


class InequalityReport(BaseModel):
    n_checked: int = Field(..., description="Admissible nodes checked")
    min_residual: float = Field(..., description="min of (-Delta)^s u + f(u)")
    min_scaled_residual: float = Field(..., description="min of the residual / max(1, f(u))")
    violating_nodes: List[int] = Field(default_factory=list, description="Nodes below the tolerance")
    C_strip: float = Field(..., description="Smallest C with (-Delta)^s u >= -C f(u) on the strip")
    delta0: float = Field(..., description="Strip width")
