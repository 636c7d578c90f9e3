"""
Model files: versioned JSON holding the architecture, metadata and every
weight. Python's float repr is the shortest string that round-trips, so
weights survive save/load exactly and a re-save is byte-identical.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ..errors import InvalidInputError, ModelFormatError
from .schemas import ArchSpec, InrModel, ModelMeta, model_from_parameters

FORMAT_VERSION = 1
MODEL_SUFFIX = ".model.json"


def model_to_dict(model: InrModel) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "arch": model.arch.to_dict(),
        "meta": model.meta.to_dict(),
        "parameters": {name: model.params[name].tolist() for name in model.arch.shapes()},
    }


def model_from_dict(data: dict[str, Any]) -> InrModel:
    if not isinstance(data, dict):
        raise ModelFormatError("model file must hold a JSON object")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format_version {version!r} (expected {FORMAT_VERSION})", field="format_version"
        )
    for section in ("arch", "meta", "parameters"):
        if not isinstance(data.get(section), dict):
            raise ModelFormatError(f"missing or malformed section {section!r}", field=section)
    try:
        arch = ArchSpec.from_dict(data["arch"])
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ModelFormatError):
            raise
        raise ModelFormatError(f"bad arch section: {e}", field="arch") from e
    try:
        meta = ModelMeta.from_dict(data["meta"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"bad meta section: {e}", field="meta") from e
    try:
        return model_from_parameters(arch, data["parameters"], meta)
    except ModelFormatError:
        raise
    except InvalidInputError as e:
        raise ModelFormatError(str(e)) from e


def save_model(model: InrModel, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(model_to_dict(model), indent=2, allow_nan=False)
    p.write_text(text + "\n", encoding="utf-8")
    return p


def load_model(path: str | Path) -> InrModel:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ModelFormatError(f"model file not found: {p}") from e
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{p.name} is not valid JSON: {e}") from e
    return model_from_dict(data)
