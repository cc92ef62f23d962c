"""
Domain errors raised by the numerical core.

Every error carries a ``details`` dict so controllers can log and serialize the
diagnostic payload (offending t, achieved tolerance, violating nodes, ...).
"""
from typing import Any, Dict


class FracBlowupError(Exception):
    """Base class for all fracblowup errors."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def __str__(self) -> str:
        if not self.details:
            return self.message
        extra = ", ".join(f"{key}={value}" for key, value in sorted(self.details.items()))
        return f"{self.message} ({extra})"


class ConfigError(FracBlowupError):
    """Invalid run configuration or input file."""


class HypothesisViolationError(FracBlowupError):
    """The nonlinearity violates the growth hypothesis 1+m <= t f'/f <= 1+M."""


class OutOfRangeError(FracBlowupError):
    """Evaluation of a tabulated model outside its sampled range."""


class QuadratureError(FracBlowupError):
    """Adaptive quadrature did not reach the requested tolerance."""


class DivergentIntegralError(FracBlowupError):
    """An improper integral that must be finite diverges (e.g. the KO integral)."""


class InversionRangeError(FracBlowupError):
    """psi evaluated outside the representable range of phi."""


class MeshError(FracBlowupError):
    """Invalid mesh parameters."""


class ProximityError(FracBlowupError):
    """Node too close to the boundary for the operator stencil."""


class SingularityError(FracBlowupError):
    """Kernel evaluated on its diagonal."""


class IntegrabilityError(FracBlowupError):
    """Source not integrable against the boundary weight delta^s."""


class DataInadmissibleError(FracBlowupError):
    """Exterior data violates the weighted integrability assumptions."""


class IterationError(FracBlowupError):
    """Monotone iteration did not converge within max_iters."""


class DiscretizationError(FracBlowupError):
    """Discrete comparison principle broken beyond tolerance."""


class SupersolutionError(FracBlowupError):
    """The built supersolution fails the global inequality check."""


class InsufficientDataError(FracBlowupError):
    """Fit window contains too few nodes."""


class FitError(FracBlowupError):
    """Boundary fit impossible on the given data."""
