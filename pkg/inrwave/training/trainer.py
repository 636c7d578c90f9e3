"""
Fitting loop: init, optimizer steps on the MSE loss over the normalized
time grid, best-iterate selection, divergence guard, and the report.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..errors import InvalidInputError, NumericalError, TrainingDivergedError, UndefinedMetricError
from ..inr.counting import param_count
from ..inr.forward import reconstruct
from ..inr.schemas import ArchKind, ArchSpec, InrModel, ModelMeta, model_from_parameters
from ..waveform import (
    Waveform,
    WaveformSet,
    as_waveform_set,
    nmse_percent,
    normalize_time,
    segment_nmse_percent,
)
from .config import TrainConfig
from .gradients import loss_and_gradients, loss_value
from .init import init_parameters
from .optimizers import make_optimizer
from .rng import SeededRNG

logger = logging.getLogger(__name__)

DEFAULT_HARMONIC_SPAN = 16


def omega0_for_capture(n_cycles: float, harmonic_span: int = DEFAULT_HARMONIC_SPAN) -> float:
    """
    First-layer frequency scale for a capture of n_cycles fundamental cycles
    mapped onto [-1, 1]. The fundamental sits at angular frequency pi*n_cycles
    there; with first-layer weights starting in (-1, 1) this scale spreads the
    initial frequencies over the first harmonic_span harmonics.
    """
    if n_cycles <= 0 or harmonic_span < 1:
        raise InvalidInputError(f"bad omega0 inputs: n_cycles={n_cycles}, harmonic_span={harmonic_span}")
    return harmonic_span * math.pi * n_cycles


@dataclass
class TrainReport:
    final_nmse_percent: float
    loss_trace: list[tuple[int, float]]
    wall_time_s: float
    seed: int
    epochs: int
    omega0: float
    param_count: int
    best_epoch: int
    best_loss: float
    channel_nmse_percent: dict[str, float] = field(default_factory=dict)
    transient_nmse_percent: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["loss_trace"] = [[e, l] for e, l in self.loss_trace]
        return d


# ---------- Target preparation ----------


def _rms_scales(capture: WaveformSet) -> np.ndarray:
    m = capture.as_matrix()
    scales = np.sqrt(np.mean(m * m, axis=1))
    for label, s in zip(capture.labels, scales):
        if s == 0.0:
            raise UndefinedMetricError(f"channel {label} has zero energy; NMSE is undefined")
    return scales


def _check_compatible(arch: ArchSpec, capture: WaveformSet) -> None:
    if arch.kind is ArchKind.MULTI:
        if capture.n_channels != arch.channels:
            raise InvalidInputError(
                f"multi-output model has {arch.channels} outputs but the capture has {capture.n_channels} channels"
            )
    elif capture.n_channels != 1:
        raise InvalidInputError(
            f"{arch.kind.value} model fits one channel; got {capture.n_channels} (use fit_separate or a multi arch)"
        )


# ---------- Fit ----------


class _Tracker:
    """Keeps the best iterate, the strided loss trace and the divergence guard."""

    def __init__(self, config: TrainConfig) -> None:
        self.config = config
        self.trace: list[tuple[int, float]] = []
        self.best_loss = math.inf
        self.best_epoch = 0
        self.best_params: dict[str, np.ndarray] = {}
        self.initial_loss: float | None = None

    def observe(self, epoch: int, loss: float, params: dict[str, np.ndarray], final: bool = False) -> None:
        if self.initial_loss is None:
            self.initial_loss = loss
        limit = self.config.divergence_factor * max(self.initial_loss, np.finfo(float).tiny)
        if not math.isfinite(loss) or loss > limit:
            logger.warning("fit diverged at epoch %d (loss %s, seed %d)", epoch, loss, self.config.seed)
            raise TrainingDivergedError(
                f"training diverged at epoch {epoch}: loss {loss!r} (initial {self.initial_loss!r})",
                loss_trace=self.trace,
                seed=self.config.seed,
            )
        if epoch % self.config.loss_report_stride == 0 or final:
            if not self.trace or self.trace[-1][0] != epoch:
                self.trace.append((epoch, loss))
            logger.debug("epoch %d loss %.6g", epoch, loss)
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_epoch = epoch
            self.best_params = {k: v.copy() for k, v in params.items()}


def _run_epochs(
    arch: ArchSpec, config: TrainConfig, t: np.ndarray, y: np.ndarray
) -> _Tracker:
    params = init_parameters(arch, config.seed)
    optimizer = make_optimizer(config)
    tracker = _Tracker(config)
    n = t.shape[0]
    minibatch = config.batch_size is not None and config.batch_size < n
    try:
        if not minibatch:
            for epoch in range(config.epochs):
                loss, grads = loss_and_gradients(arch, params, t, y)
                tracker.observe(epoch, loss, params)
                optimizer.step(params, grads)
        else:
            shuffle = SeededRNG([config.seed, 1])
            tracker.observe(0, loss_value(arch, params, t, y), params)
            for epoch in range(1, config.epochs + 1):
                order = shuffle.permutation(n)
                for start in range(0, n, config.batch_size):
                    idx = order[start : start + config.batch_size]
                    _, grads = loss_and_gradients(arch, params, t[idx], y[idx])
                    optimizer.step(params, grads)
                if epoch < config.epochs:
                    tracker.observe(epoch, loss_value(arch, params, t, y), params)
        tracker.observe(config.epochs, loss_value(arch, params, t, y), params, final=True)
    except TrainingDivergedError:
        raise
    except NumericalError as e:
        logger.warning("fit hit a non-finite gradient (seed %d): %s", config.seed, e)
        raise TrainingDivergedError(str(e), loss_trace=tracker.trace, seed=config.seed) from e
    return tracker


def fit(
    target: Waveform | WaveformSet,
    arch: ArchSpec,
    config: TrainConfig,
    event_window: slice | None = None,
) -> tuple[InrModel, TrainReport]:
    """
    Fit arch to target; returns the lowest-loss iterate and its report.
    Targets are scaled to unit RMS per channel; the scales go into the
    model metadata so reconstruct() returns physical units.
    """
    capture = as_waveform_set(target)
    _check_compatible(arch, capture)
    if config.omega0 is not None:
        arch = arch.with_omega0(config.omega0)

    scales = _rms_scales(capture)
    y = (capture.as_matrix() / scales[:, None]).T
    if arch.kind is not ArchKind.MULTI:
        y = y[:, 0]
    t = normalize_time(capture.n_samples).t

    logger.info(
        "fit %s (%d params, omega0=%.4g) seed=%d epochs=%d",
        arch.kind.value, param_count(arch), arch.omega0, config.seed, config.epochs,
    )
    started = time.perf_counter()
    tracker = _run_epochs(arch, config, t, y)
    wall = time.perf_counter() - started

    meta = ModelMeta(
        labels=capture.labels,
        units=capture.units,
        sampling=capture.spec,
        n_samples=capture.n_samples,
        scales=tuple(float(s) for s in scales),
    )
    model = model_from_parameters(arch, tracker.best_params, meta)
    per_channel, transient = _score(model, capture, event_window)
    report = TrainReport(
        final_nmse_percent=float(np.mean(list(per_channel.values()))),
        loss_trace=tracker.trace,
        wall_time_s=wall,
        seed=config.seed,
        epochs=config.epochs,
        omega0=arch.omega0,
        param_count=param_count(arch),
        best_epoch=tracker.best_epoch,
        best_loss=tracker.best_loss,
        channel_nmse_percent=per_channel,
        transient_nmse_percent=transient,
    )
    logger.info("fit done: NMSE %.4f%% (best epoch %d, %.2fs)", report.final_nmse_percent, tracker.best_epoch, wall)
    return model, report


def _score(
    model: InrModel, capture: WaveformSet, event_window: slice | None
) -> tuple[dict[str, float], float | None]:
    recon = as_waveform_set(reconstruct(model))
    per_channel = {
        raw.label: nmse_percent(raw, rec) for raw, rec in zip(capture, recon)
    }
    transient = None
    if event_window is not None:
        start, stop, _ = event_window.indices(capture.n_samples)
        transient = float(
            np.mean([segment_nmse_percent(raw, rec, start, stop) for raw, rec in zip(capture, recon)])
        )
    return per_channel, transient

