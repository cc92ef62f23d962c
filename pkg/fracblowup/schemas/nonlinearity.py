from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class Family(str, Enum):
    POWER = "power"
    POWERLOG = "powerlog"
    TABULATED = "tabulated"


class NonlinearitySpec(BaseModel):
    family: Family = Field(Family.POWER, description="Nonlinearity family")
    p: Optional[float] = Field(None, description="Power exponent (power, powerlog)")
    alpha: float = Field(0.0, description="Log exponent of t^p ln^alpha(1+t)")
    scale: float = Field(1.0, gt=0.0, description="Amplitude multiplying f")
    table_path: Optional[str] = Field(None, description="Two-column CSV (t, f) for tabulated f")

    @model_validator(mode="after")
    def check_family_fields(self) -> "NonlinearitySpec":
        if self.family in (Family.POWER, Family.POWERLOG):
            if self.p is None or self.p <= 0:
                raise ValueError(f"family {self.family.value} requires p > 0")
        elif self.table_path is None:
            raise ValueError("family tabulated requires table_path")
        return self

    def label(self) -> str:
        if self.family == Family.POWER:
            text = f"power:p={self.p!r}"
        elif self.family == Family.POWERLOG:
            text = f"powerlog:p={self.p!r}:alpha={self.alpha!r}"
        else:
            text = f"tabulated:{self.table_path}"
        if self.scale != 1.0:
            text += f":scale={self.scale!r}"
        return text


class GrowthEnvelope(BaseModel):
    m: float = Field(..., description="min of t f'/f minus 1")
    M: float = Field(..., description="max of t f'/f minus 1")
    sample_min: float = Field(..., description="Smallest sampled t")
    sample_max: float = Field(..., description="Largest sampled t")
    n_samples: int = Field(..., description="Number of grid points")
    grid: str = Field(..., description="Description of the t-grid")
    closed_at_infinity: bool = Field(False, description="Limit of t f'/f at infinity included")


class ScalingReport(BaseModel):
    c: float = Field(..., description="Scaling factor")
    n_points: int = Field(..., description="Grid points checked")
    max_violation: float = Field(..., description="Largest relative violation of c^(1+m) f <= f(ct) <= c^(1+M) f")
    worst_t: Optional[float] = Field(None, description="t attaining the largest violation")
    passed: bool = Field(..., description="max_violation within tolerance")


class LinearBound(BaseModel):
    a: float = Field(..., description="Intercept witness of f(t) <= a + b t")
    b: float = Field(..., description="Slope witness of f(t) <= a + b t")
    range_limited: bool = Field(False, description="Bound holds on the sampled range only")


class PowerBoundsReport(BaseModel):
    f_violation: float = Field(..., description="Largest relative violation of f(t) >= f(1) t^(1+m), t >= 1")
    F_violation: float = Field(..., description="Largest relative violation of F(t) >= f(1)(t^(2+m)-1)/(2+m), t >= 1")
    F_ratio_min: float = Field(..., description="min of t f/F on the grid")
    F_ratio_max: float = Field(..., description="max of t f/F on the grid")
    passed: bool = Field(..., description="All bounds within tolerance")
    points: List[float] = Field(default_factory=list, description="Grid endpoints")
