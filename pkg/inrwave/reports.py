"""
RunReport: the machine-readable record every CLI command writes next to
its human summary. Versioned schema; artifact paths are checked at write time.
"""
from __future__ import annotations

import hashlib
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

from .errors import InvalidInputError
from .inr.counting import param_count
from .inr.schemas import InrModel

SCHEMA_VERSION = 1
REPORT_SUFFIX = ".report.json"


class ModelEntry(BaseModel):
    label: str
    arch: dict[str, Any]
    param_count: int = Field(..., ge=1)


class NmseSummary(BaseModel):
    mean: float = Field(..., ge=0)
    min: float = Field(..., ge=0)
    max: float = Field(..., ge=0)
    std: float = Field(0.0, ge=0)
    n: int = Field(1, ge=1)
    per_channel: dict[str, float] = Field(default_factory=dict)
    transient_mean: Optional[float] = Field(None, description="NMSE inside the event window")


class Compression(BaseModel):
    raw_samples: int = Field(..., ge=1, description="samples x channels")
    param_count: int = Field(..., ge=1)
    ratio: float = Field(..., gt=0)
    ratio_fraction: str = Field(..., description="exact raw_samples/param_count, reduced")


class RunReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: str
    status: Literal["ok", "diverged", "failed"] = "ok"
    config: dict[str, Any] = Field(default_factory=dict)
    input_hashes: dict[str, str] = Field(default_factory=dict)
    models: list[ModelEntry] = Field(default_factory=list)
    nmse: Optional[NmseSummary] = None
    spectral: Optional[dict[str, Any]] = None
    compression: Optional[Compression] = None
    results: list[dict[str, Any]] = Field(default_factory=list, description="sweep / compare rows")
    failures: list[dict[str, Any]] = Field(default_factory=list)
    artifacts: list[str] = Field(default_factory=list)
    wall_time_s: float = Field(0.0, ge=0)


# ---------- Builders ----------


def compression_of(raw_samples: int, params: int) -> Compression:
    if raw_samples < 1 or params < 1:
        raise InvalidInputError(f"compression needs positive counts, got {raw_samples}/{params}")
    exact = Fraction(raw_samples, params)
    return Compression(
        raw_samples=raw_samples,
        param_count=params,
        ratio=float(exact),
        ratio_fraction=f"{exact.numerator}/{exact.denominator}",
    )


def model_entry(label: str, model: InrModel) -> ModelEntry:
    return ModelEntry(label=label, arch=model.arch.to_dict(), param_count=param_count(model))


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def hash_inputs(paths: list[str | Path]) -> dict[str, str]:
    return {str(p): file_sha256(p) for p in paths}


def report_path_for(out: str | Path) -> Path:
    p = Path(out)
    return p.with_name(p.name + REPORT_SUFFIX)


def write_report(report: RunReport, path: str | Path) -> Path:
    """Refuses to write a report that references a missing artifact."""
    missing = [a for a in report.artifacts if not Path(a).exists()]
    if missing:
        raise InvalidInputError(f"report references missing artifacts: {missing}")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return p


def load_report(path: str | Path) -> RunReport:
    return RunReport.model_validate_json(Path(path).read_text(encoding="utf-8"))
