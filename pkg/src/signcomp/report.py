"""Machine-readable run reports.

A report records the command, its input files and parameters, the files and
figures it wrote, scalar metrics and wall time.  ``to_json`` replaces
non-finite floats by ``null`` so the output is strict JSON; the published
schema lives in ``signcomp/schemas/run_report.schema.json``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, List, Optional

import numpy as np

REPORT_VERSION = "1.0"


def _clean(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    return str(value)


@dataclass
class RunReport:
    command: str
    input_files: Dict[str, str] = field(default_factory=dict)
    parameters: Dict[str, Any] = field(default_factory=dict)
    output_files: Dict[str, str] = field(default_factory=dict)
    figures: List[str] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)
    status: str = "ok"
    error: Optional[Dict[str, Any]] = None
    wall_time: float = 0.0

    def fail(self, exc: BaseException, exit_code: int) -> None:
        self.status = "error"
        self.error = {"type": type(exc).__name__, "message": str(exc), "exit_code": exit_code}

    def to_dict(self) -> dict:
        out = {
            "report_version": REPORT_VERSION,
            "command": self.command,
            "status": self.status,
            "inputs": {"files": dict(self.input_files), "parameters": _clean(self.parameters)},
            "outputs": {"files": dict(self.output_files), "figures": list(self.figures)},
            "metrics": _clean(self.metrics),
            "wall_time": max(0.0, float(self.wall_time)),
        }
        if self.error is not None:
            out["error"] = dict(self.error)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def load_schema() -> dict:
    text = resources.files("signcomp").joinpath("schemas/run_report.schema.json").read_text()
    return json.loads(text)


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` violates the schema."""
    import jsonschema

    jsonschema.validate(report, load_schema())
