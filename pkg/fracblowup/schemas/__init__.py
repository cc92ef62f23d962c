from fracblowup.schemas.nonlinearity import (
    Family,
    NonlinearitySpec,
    GrowthEnvelope,
    ScalingReport,
    LinearBound,
    PowerBoundsReport,
)
from fracblowup.schemas.conditions import (
    Condition,
    Verdict,
    Regime,
    ConditionReport,
    RatioCheck,
    RatioBoundsReport,
)
from fracblowup.schemas.solve import (
    DomainKind,
    SweepObservation,
    MeshSpec,
    SolveConfig,
    ResidualSummary,
    SolveSummary,
    SupersolutionSummary,
    SweepSummary,
    InequalityReport,
)
from fracblowup.schemas.analysis import BoundaryFit, TraceEstimate, BbehavReport, AnalysisReport
from fracblowup.schemas.run import Command, Scenario, RunConfig
