from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class Condition(str, Enum):
    L1 = "L1"
    L1BIS = "L1bis"
    E = "E"
    UL1 = "UL1"


class Verdict(str, Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    BORDERLINE = "Borderline"


class Regime(str, Enum):
    NONEXISTENCE = "Nonexistence"
    LARGE_SOLUTION = "LargeSolution"
    L1_ESCAPE = "L1Escape"
    UNIFORM_BLOWUP = "UniformBlowup"
    UNCLASSIFIED = "Unclassified"


class ConditionReport(BaseModel):
    condition: Condition = Field(..., description="Integral condition tested")
    verdict: Verdict = Field(..., description="Convergence verdict")
    tail_exponent_of_integrand: float = Field(..., description="Fitted power exponent of the integrand tail")
    margin: float = Field(..., description="Distance of the exponent from -1")
    log_exponent: float = Field(0.0, description="Fitted exponent of ln t in the integrand tail")
    decided_by: str = Field(..., description="'power' or 'log' term that decided the verdict")
    partial_integral: float = Field(..., description="Integral of the integrand over [1, T]")
    fit_window: Tuple[float, float] = Field(..., description="t-range of the tail fit")
    details: str = Field("", description="Human-readable summary")


class RatioCheck(BaseModel):
    name: str = Field(..., description="Inequality checked")
    lower: Optional[float] = Field(None, description="Lower bound (None for one-sided checks)")
    upper: Optional[float] = Field(None, description="Upper bound (None for one-sided checks)")
    observed_min: float = Field(..., description="Smallest observed value")
    observed_max: float = Field(..., description="Largest observed value")
    margin: float = Field(..., description="Worst relative margin (negative means violation)")
    passed: bool = Field(..., description="margin >= -tolerance")


class RatioBoundsReport(BaseModel):
    m: float = Field(..., description="Envelope m")
    M: float = Field(..., description="Envelope M")
    n_points: int = Field(..., description="Grid size")
    tolerance: float = Field(..., description="Relative tolerance")
    checks: List[RatioCheck] = Field(..., description="Individual inequality checks")
    worst_margin: float = Field(..., description="Smallest margin over all checks")
    passed: bool = Field(..., description="All checks passed")
