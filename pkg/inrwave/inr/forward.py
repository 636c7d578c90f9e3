"""
Deterministic forward evaluation. `forward_pass` works on raw parameter
dicts and keeps the pre-activations the gradient code needs; `evaluate`
and the scalar forward_* functions are thin wrappers over it, so every
path computes the same floating-point operations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import InvalidInputError
from ..waveform import TimeGrid, Waveform, WaveformSet, normalize_time
from .schemas import (
    Activation,
    ArchKind,
    ArchSpec,
    DoubleLayerModel,
    InrModel,
    MultiOutputModel,
    SingleLayerModel,
)


def activate(x: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.SINE:
        return np.sin(x)
    return np.maximum(x, 0.0)


def activation_derivative(x: np.ndarray, activation: Activation, overwrite: bool = False) -> np.ndarray:
    """cos for sine; 0/1 subgradient for relu, 0 at exactly 0. overwrite=True reuses x's buffer for cos."""
    if activation is Activation.SINE:
        return np.cos(x, out=x if overwrite else None)
    return (x > 0.0).astype(float)


@dataclass(frozen=True)
class ForwardCache:
    """Intermediate arrays of one pass over a batch of n time points."""
    t: np.ndarray
    z_pre: np.ndarray  # (n, h) or (n, h1)
    z: np.ndarray
    y_pre: np.ndarray | None  # (n, h2), None for single
    y: np.ndarray | None
    output: np.ndarray  # (n,) or (n, C)


def forward_pass(arch: ArchSpec, params: dict[str, np.ndarray], t: Any) -> ForwardCache:
    # In-place updates keep one (n, h) buffer per pre-activation; same arithmetic as omega0 * (t a1) + b1.
    tt = np.asarray(t, dtype=float).reshape(-1)
    act = arch.activation
    z_pre = np.multiply.outer(tt, params["a1"])
    z_pre *= arch.omega0
    z_pre += params["b1"]
    z = activate(z_pre, act)
    if arch.kind is ArchKind.SINGLE:
        out = z @ params["a2"]
        out += params["b2"]
        return ForwardCache(tt, z_pre, z, None, None, out)
    y_pre = z @ params["A2"]
    y_pre += params["b2"]
    y = activate(y_pre, act)
    out = y @ (params["a3"] if arch.kind is ArchKind.DOUBLE else params["A3"])
    out += params["b3"]
    return ForwardCache(tt, z_pre, z, y_pre, y, out)


def evaluate(model: InrModel, t: Any) -> np.ndarray:
    """Normalized model output at every t: shape (n,), or (n, C) for multi-output."""
    return forward_pass(model.arch, model.params, t).output


def forward_single(model: SingleLayerModel, t: float) -> float:
    return float(evaluate(model, [t])[0])


def forward_double(model: DoubleLayerModel, t: float) -> float:
    return float(evaluate(model, [t])[0])


def forward_multi(model: MultiOutputModel, t: float) -> np.ndarray:
    return evaluate(model, [t])[0]


def reconstruct(model: InrModel, grid: TimeGrid | None = None) -> Waveform | WaveformSet:
    """
    Evaluate on the grid (default: the capture's own grid from metadata) and
    undo target normalization. Multi-output models return a WaveformSet in label order.
    """
    meta = model.meta
    if meta.sampling is None:
        raise InvalidInputError("model has no SamplingSpec metadata; cannot reconstruct a waveform")
    if grid is None:
        if meta.n_samples is None:
            raise InvalidInputError("model metadata lacks n_samples; pass an explicit TimeGrid")
        grid = normalize_time(meta.n_samples)
    out = evaluate(model, grid.t)
    scales = np.asarray(meta.scales, dtype=float)
    if model.arch.kind is ArchKind.MULTI:
        return WaveformSet.from_matrix((out * scales).T, meta.sampling, meta.labels, meta.units)
    return Waveform(out * scales[0], meta.sampling, meta.labels[0], meta.units[0])
