"""
MSE loss and its exact analytic gradient for all three architectures,
plus a central finite-difference checker.

With residual r = output - target over N scalars (n samples, times C
channels for multi-output), L = sum(r^2) / N and dL/doutput = 2r / N.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from ..errors import InvalidInputError, NumericalError
from ..inr.forward import activation_derivative, forward_pass
from ..inr.schemas import ArchKind, ArchSpec, InrModel, parameters_of
from ..waveform import TimeGrid, Waveform, WaveformSet

FD_STEP = 1e-6


@dataclass(frozen=True)
class Gradients:
    """Per-parameter gradient arrays, shape-congruent with the model."""
    values: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    def items(self):
        return self.values.items()

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(g))) if g.size else 0.0 for g in self.values.values())


# ---------- Target plumbing ----------


def target_array(arch: ArchSpec, target: Any) -> np.ndarray:
    """Targets as (n,) for single/double, (n, C) for multi-output."""
    if isinstance(target, Waveform):
        y = target.samples
    elif isinstance(target, WaveformSet):
        y = target.as_matrix().T
        if arch.kind is not ArchKind.MULTI:
            if target.n_channels != 1:
                raise InvalidInputError(
                    f"{arch.kind.value} model fits one channel, got {target.n_channels}"
                )
            y = y[:, 0]
    else:
        y = np.asarray(target, dtype=float)
    if arch.kind is ArchKind.MULTI:
        if y.ndim != 2 or y.shape[1] != arch.channels:
            raise InvalidInputError(
                f"multi-output model with {arch.channels} channels needs an (n, {arch.channels}) target, "
                f"got shape {y.shape}"
            )
    elif y.ndim != 1:
        raise InvalidInputError(f"single-output model needs a one-dimensional target, got shape {y.shape}")
    return y


def _check_lengths(grid: TimeGrid | np.ndarray, y: np.ndarray) -> np.ndarray:
    t = grid.t if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    if t.shape[0] != y.shape[0]:
        raise InvalidInputError(f"grid has {t.shape[0]} points but target has {y.shape[0]} samples")
    return t


# ---------- Loss and gradient on raw parameter dicts ----------


def loss_value(arch: ArchSpec, params: dict[str, np.ndarray], t: np.ndarray, y: np.ndarray) -> float:
    r = forward_pass(arch, params, t).output - y
    return float(np.mean(r * r))


def loss_and_gradients(
    arch: ArchSpec, params: dict[str, np.ndarray], t: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """
    One forward pass and its backward pass. The cached pre-activations are
    overwritten with their derivatives; hidden-layer gradients of the
    single-layer model reduce to two matrix-vector products.
    """
    cache = forward_pass(arch, params, t)
    r = cache.output - y
    loss = float(np.mean(r * r))
    g = 2.0 * r / r.size
    act = arch.activation
    grads: dict[str, np.ndarray] = {}

    if arch.kind is ArchKind.SINGLE:
        grads["a2"] = cache.z.T @ g
        grads["b2"] = np.asarray(g.sum())
        d = activation_derivative(cache.z_pre, act, overwrite=True)
        # sum_k g_k d_kj and sum_k t_k g_k d_kj, scaled by a2_j
        w = d.T @ np.column_stack((g, cache.t * g))
        grads["b1"] = params["a2"] * w[:, 0]
        grads["a1"] = arch.omega0 * (params["a2"] * w[:, 1])
    else:
        if arch.kind is ArchKind.DOUBLE:
            grads["a3"] = cache.y.T @ g
            grads["b3"] = np.asarray(g.sum())
            dy_pre = np.multiply.outer(g, params["a3"])
        else:
            grads["A3"] = cache.y.T @ g
            grads["b3"] = g.sum(axis=0)
            dy_pre = g @ params["A3"].T
        dy_pre *= activation_derivative(cache.y_pre, act, overwrite=True)
        grads["A2"] = cache.z.T @ dy_pre
        grads["b2"] = dy_pre.sum(axis=0)
        dz_pre = dy_pre @ params["A2"].T
        dz_pre *= activation_derivative(cache.z_pre, act, overwrite=True)
        grads["b1"] = dz_pre.sum(axis=0)
        grads["a1"] = arch.omega0 * (cache.t @ dz_pre)

    ordered = {name: grads[name] for name in arch.shapes()}
    for name, value in ordered.items():
        if not np.all(np.isfinite(value)):
            raise NumericalError(f"non-finite gradient for parameter {name!r}", parameter=name)
    return loss, ordered


# ---------- Model-level API ----------


def mse_loss(model: InrModel, target: Any, grid: TimeGrid | np.ndarray) -> float:
    """Mean squared error of the network output against target; channels weighted equally."""
    y = target_array(model.arch, target)
    t = _check_lengths(grid, y)
    return loss_value(model.arch, model.params, t, y)


def backward(model: InrModel, target: Any, grid: TimeGrid | np.ndarray) -> Gradients:
    y = target_array(model.arch, target)
    t = _check_lengths(grid, y)
    _, grads = loss_and_gradients(model.arch, model.params, t, y)
    return Gradients(grads)


def finite_difference_gradients(
    model: InrModel, target: Any, grid: TimeGrid | np.ndarray, step: float = FD_STEP
) -> Gradients:
    """Central differences, one scalar at a time."""
    y = target_array(model.arch, target)
    t = _check_lengths(grid, y)
    params = parameters_of(model)
    out: dict[str, np.ndarray] = {}
    for name, arr in params.items():
        grad = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_value(model.arch, params, t, y)
            flat[i] = orig - step
            down = loss_value(model.arch, params, t, y)
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * step)
        out[name] = grad
    return Gradients(out)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """|a - n| / max(|a|, |n|) elementwise; 0 where both are exactly zero."""
    a = np.asarray(analytic, dtype=float)
    n = np.asarray(numeric, dtype=float)
    denom = np.maximum(np.abs(a), np.abs(n))
    diff = np.abs(a - n)
    return np.divide(diff, denom, out=np.zeros_like(diff), where=denom > 0.0)


def check_gradients(
    model: InrModel,
    target: Any,
    grid: TimeGrid | np.ndarray,
    step: float = FD_STEP,
) -> dict[str, float]:
    """Max elementwise relative error per parameter between analytic and finite-difference gradients."""
    analytic = backward(model, target, grid)
    numeric = finite_difference_gradients(model, target, grid, step)
    return {
        name: float(np.max(relative_error(a, numeric[name]))) if a.size else 0.0
        for name, a in analytic.items()
    }
