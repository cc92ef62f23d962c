from enum import Enum
from typing import Any, Dict

from pydantic import BaseModel, Field


class Command(str, Enum):
    CHECK = "check"
    SOLVE = "solve"
    SWEEP = "sweep"
    RESIDUAL = "residual"
    ANALYZE = "analyze"
    REPLICATE = "replicate"


class Scenario(str, Enum):
    POWER_THRESHOLDS = "power-thresholds"
    LOG_CRITICAL_LOWER = "log-critical-lower"
    LOG_CRITICAL_UPPER = "log-critical-upper"
    REGIME_SWEEP = "regime-sweep"
    SUPERSOLUTION_AUDIT = "supersolution-audit"


class RunConfig(BaseModel):
    command: Command = Field(..., description="Subcommand")
    params: Dict[str, Any] = Field(default_factory=dict, description="Command parameters")
    output_dir: str = Field("results", description="Output directory")
    seed: int = Field(0, description="Seed for sampling-based checks")
    log_level: str = Field("INFO", description="Log verbosity")

    def hashed_view(self) -> Dict[str, Any]:
        """The part of the config that determines results (output location excluded)."""
        return {"command": self.command.value, "params": self.params, "seed": self.seed}
