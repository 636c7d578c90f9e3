"""
Training hyperparameters. Validated with pydantic; readable from a JSON
config file with per-field overrides applied on top.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import InvalidInputError


class TrainConfig(BaseModel):
    """Defaults: Adam at lr 1e-4, 2000 full-grid epochs."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(1e-4, gt=0)
    epochs: int = Field(2000, ge=1)
    batch_size: Optional[int] = Field(None, ge=1, description="None = full grid every step")
    optimizer: Literal["adam", "sgd"] = "adam"
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    eps: float = Field(1e-8, gt=0)
    seed: int = Field(0, ge=0, lt=2**64)
    omega0: Optional[float] = Field(None, gt=0, description="None = use the architecture's omega0")
    loss_report_stride: int = Field(10, ge=1)
    divergence_factor: float = Field(1e6, gt=1)

    def with_overrides(self, **overrides: Any) -> TrainConfig:
        """New config with the non-None overrides applied, re-validated."""
        return build_train_config({**self.model_dump(), **overrides})

    def with_seed(self, seed: int) -> TrainConfig:
        return self.model_copy(update={"seed": seed})


def build_train_config(values: Mapping[str, Any]) -> TrainConfig:
    clean = {k: v for k, v in values.items() if v is not None}
    try:
        return TrainConfig.model_validate(clean)
    except ValidationError as e:
        raise InvalidInputError(f"invalid training config: {_summarize(e)}") from e


def load_train_config(path: str | Path, **overrides: Any) -> TrainConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InvalidInputError(f"config file not found: {p}") from e
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"config file {p.name} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise InvalidInputError(f"config file {p.name} must hold a JSON object")
    return build_train_config({**data, **{k: v for k, v in overrides.items() if v is not None}})


def _summarize(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"])
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)
