from typing import Optional, Tuple

from pydantic import BaseModel, Field


class BoundaryFit(BaseModel):
    window: Tuple[float, float] = Field(..., description="delta-range used")
    exponent: float = Field(..., description="Fitted exponent a of u ~ c delta^a")
    coefficient: float = Field(..., description="Fitted coefficient c")
    r_squared: float = Field(..., description="Goodness of fit")
    stderr: float = Field(..., description="Standard error of the exponent")
    node_count: int = Field(..., description="Nodes in the window")


class TraceEstimate(BaseModel):
    value: float = Field(..., description="Fitted limit of delta^(1-s) u (inf when diverging)")
    diverging: bool = Field(..., description="Trace flagged as +infinity")
    exponent: float = Field(..., description="Fitted boundary exponent")
    window: Tuple[float, float] = Field(..., description="delta-range used")


class BbehavReport(BaseModel):
    window: Tuple[float, float] = Field(..., description="delta-range used")
    min_ratio: float = Field(..., description="min of phi(u)/delta^s")
    max_ratio: float = Field(..., description="max of phi(u)/delta^s")
    half_window_min: float = Field(..., description="min of the ratio on the halved window")
    fitted_limit: Optional[float] = Field(None, description="Linear extrapolation of the ratio to delta = 0")
    c0: float = Field(..., description="Pass threshold")
    node_count: int = Field(..., description="Nodes in the window")
    passed: bool = Field(..., description="min ratio >= c0 on both windows")


class AnalysisReport(BaseModel):
    trace: TraceEstimate = Field(..., description="Singular trace estimate")
    fit: BoundaryFit = Field(..., description="Boundary exponent fit")
    half_window_exponent: float = Field(..., description="Exponent on the halved window")
    bbehav: Optional[BbehavReport] = Field(None, description="phi(u) versus delta^s")
