"""
Sinusoidal-network initialization.

First layer (fan_in = 1, the time input): weights and biases U(-1, 1).
Deeper layers: U(-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0) with the
architecture's own omega0, biases on the same range as their layer's weights.
"""
from __future__ import annotations

import math

import numpy as np

from ..inr.schemas import ArchKind, ArchSpec, InrModel, ModelMeta, model_from_parameters
from .rng import SeededRNG


def first_layer_bound(fan_in: int = 1) -> float:
    return 1.0 / fan_in


def hidden_layer_bound(fan_in: int, omega0: float) -> float:
    return math.sqrt(6.0 / fan_in) / omega0


def init_parameters(arch: ArchSpec, seed: int | None) -> dict[str, np.ndarray]:
    """Draw every parameter in canonical order from one seeded stream."""
    rng = SeededRNG(seed)
    w0 = arch.omega0
    bounds: dict[str, float] = {"a1": first_layer_bound(), "b1": first_layer_bound()}
    if arch.kind is ArchKind.SINGLE:
        bounds.update(a2=hidden_layer_bound(arch.h, w0), b2=hidden_layer_bound(arch.h, w0))
    else:
        out_w = "a3" if arch.kind is ArchKind.DOUBLE else "A3"
        bounds.update(
            A2=hidden_layer_bound(arch.h1, w0),
            b2=hidden_layer_bound(arch.h1, w0),
            **{out_w: hidden_layer_bound(arch.h2, w0)},
            b3=hidden_layer_bound(arch.h2, w0),
        )
    params: dict[str, np.ndarray] = {}
    for name, shape in arch.shapes().items():
        bound = bounds[name]
        params[name] = np.asarray(rng.uniform(-bound, bound, shape), dtype=float)
    return params


def init_model(arch: ArchSpec, seed: int | None, meta: ModelMeta | None = None) -> InrModel:
    """Deterministic given seed."""
    return model_from_parameters(arch, init_parameters(arch, seed), meta)
