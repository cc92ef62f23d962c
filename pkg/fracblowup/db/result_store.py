"""
File-based result store for fracblowup.
Solutions go to CSV with a '#' metadata header, reports to canonical JSON.
"""
import csv
import hashlib
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError

from fracblowup.config import settings
from fracblowup.errors import ConfigError
from fracblowup.models.mesh_domain import (
    Domain,
    GridFunction,
    build_graded_mesh,
    parse_exterior_spec,
)
from fracblowup.schemas.nonlinearity import NonlinearitySpec
from fracblowup.schemas.solve import DomainKind

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"
SOLUTION_COLUMNS = ["delta", "value", "singular_part", "total"]
DELTA_RTOL = 1e-12


def sanitize(payload: Any) -> Any:
    """Convert a payload to plain JSON types; non-finite floats become strings."""
    if isinstance(payload, BaseModel):
        return sanitize(payload.model_dump())
    if isinstance(payload, dict):
        return {str(key): sanitize(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [sanitize(value) for value in payload]
    if isinstance(payload, np.ndarray):
        return [sanitize(value) for value in payload.tolist()]
    if isinstance(payload, Enum):
        return payload.value
    if isinstance(payload, (bool, np.bool_)):
        return bool(payload)
    if isinstance(payload, np.integer):
        return int(payload)
    if isinstance(payload, (float, np.floating)):
        value = float(payload)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return payload


def canonical_json(payload: Any) -> str:
    return json.dumps(sanitize(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(payload: Any) -> str:
    """sha256 of the compact canonical JSON of a config."""
    text = json.dumps(sanitize(payload), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _fmt(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


class ResultStore:
    """Singleton writer and reader of result files."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(ResultStore, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        """Initialize the store with the configured output directory."""
        if self._initialized:
            return
        self.output_dir = Path(settings.output_dir)
        self._initialized = True

    def run_dir(self, output_dir: Optional[str] = None, *parts: str) -> Path:
        """
        Create and return an output directory.

        Args:
            output_dir: Root directory (the configured default when None)
            parts: Subdirectories below the root

        Returns:
            The created directory
        """
        root = Path(output_dir) if output_dir is not None else self.output_dir
        path = root.joinpath(*parts)
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Failed to create output directory {path}: {str(e)}")
            raise ConfigError(f"Cannot create output directory {path}: {str(e)}")
        return path

    def write_json(self, path: Path, payload: Any) -> Path:
        """Write payload as JSON with sorted keys and a 2-space indent."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(payload), encoding="utf-8")
        logger.info(f"Wrote {path}")
        return path

    def read_json(self, path: Path) -> Dict[str, Any]:
        try:
            return json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read JSON file {path}: {str(e)}")

    def write_columns(self, path: Path, header: Sequence[str], columns: Sequence[Sequence[float]]) -> Path:
        """Write equally long columns as a gnuplot-ready CSV (header line starts with '#')."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = zip(*columns)
        with path.open("w", newline="", encoding="utf-8") as handle:
            handle.write("# " + ",".join(header) + "\n")
            writer = csv.writer(handle, lineterminator="\n")
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        logger.info(f"Wrote {path}")
        return path

    def write_solution_csv(
        self,
        path: Path,
        solution: GridFunction,
        model_spec: Optional[NonlinearitySpec] = None,
    ) -> Path:
        """
        Write a grid function with its metadata header.

        Args:
            path: Target CSV path
            solution: Grid function to write
            model_spec: Nonlinearity the solution belongs to (recorded for analysis)

        Returns:
            The written path
        """
        mesh = solution.mesh
        coordinate = "x" if mesh.domain.kind == DomainKind.INTERVAL else "r"
        exterior = solution.exterior
        metadata = {
            "domain": mesh.domain.kind.value,
            "N": str(mesh.domain.N),
            "n": str(mesh.n),
            "q": repr(float(mesh.q)),
            "s": repr(float(solution.s)),
            "trace_coeff": repr(float(solution.trace_coeff)) if solution.trace_coeff is not None else "none",
            "exterior": exterior.label,
            "truncation": repr(float(exterior.truncation)) if exterior.truncation is not None else "none",
            "model": model_spec.model_dump_json() if model_spec is not None else "none",
        }
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        singular = solution.singular_part()
        total = solution.total()
        with path.open("w", newline="", encoding="utf-8") as handle:
            for key, value in metadata.items():
                handle.write(f"# {key}: {value}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow([coordinate] + SOLUTION_COLUMNS)
            for i in range(mesh.size):
                writer.writerow(
                    [_fmt(mesh.x[i]), _fmt(mesh.delta[i]), _fmt(solution.values[i]), _fmt(singular[i]), _fmt(total[i])]
                )
        logger.info(f"Wrote solution {path} ({mesh.size} nodes)")
        return path

    def read_solution_csv(
        self,
        path: Path,
        psi_factory: Optional[Callable[[Dict[str, Any]], Callable]] = None,
    ) -> Tuple[GridFunction, Dict[str, Any]]:
        """
        Read a solution CSV back into a grid function on the rebuilt mesh.

        Args:
            path: CSV written by write_solution_csv
            psi_factory: Builds psi from the metadata when the exterior data needs it

        Returns:
            (grid function, metadata with 'model' parsed to a NonlinearitySpec or None)

        Raises:
            ConfigError: If the file is malformed or its delta column does not match the mesh
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Solution file not found: {path}")
        metadata: Dict[str, Any] = {}
        rows: List[List[str]] = []
        with path.open("r", encoding="utf-8") as handle:
            for line in handle:
                if line.startswith("#"):
                    key, _, value = line[1:].partition(":")
                    metadata[key.strip()] = value.strip()
                elif line.strip():
                    rows.append(next(csv.reader([line])))
        missing = {"domain", "N", "n", "q", "s", "trace_coeff", "exterior", "truncation", "model"} - set(metadata)
        if missing or not rows:
            raise ConfigError(f"Malformed solution file {path}", missing=sorted(missing))

        try:
            kind = DomainKind(metadata["domain"])
            N, n, q, s = int(metadata["N"]), int(metadata["n"]), float(metadata["q"]), float(metadata["s"])
            trace = None if metadata["trace_coeff"] == "none" else float(metadata["trace_coeff"])
            truncation = None if metadata["truncation"] == "none" else float(metadata["truncation"])
            model = None if metadata["model"] == "none" else NonlinearitySpec.model_validate_json(metadata["model"])
            data = np.array([[float(v) for v in row] for row in rows[1:]])
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"Malformed solution file {path}: {str(e)}")
        metadata.update({"N": N, "n": n, "q": q, "s": s, "trace_coeff": trace, "truncation": truncation, "model": model})

        domain = Domain.interval() if kind == DomainKind.INTERVAL else Domain.ball(N)
        mesh = build_graded_mesh(domain, n, q)
        if data.shape != (mesh.size, 1 + len(SOLUTION_COLUMNS)):
            raise ConfigError(f"Solution file {path} has {data.shape[0]} rows, mesh has {mesh.size} nodes")
        if not np.allclose(data[:, 1], mesh.delta, rtol=DELTA_RTOL, atol=0.0):
            raise ConfigError(f"Delta column of {path} does not match the rebuilt mesh")

        spec = metadata["exterior"]
        psi = psi_factory(metadata) if spec.split(":")[0] in ("ko", "ko-shell") and psi_factory else None
        exterior = parse_exterior_spec(spec, s, psi)
        if truncation is not None:
            exterior = exterior.truncated(truncation)
        solution = GridFunction(mesh, s, data[:, 2], exterior, trace_coeff=trace)
        logger.info(f"Read solution {path} ({mesh.size} nodes, s={s})")
        return solution, metadata


result_store = ResultStore()
