"""
Fitting captures the way the CLI does: one channel with a single or double
model, every channel with separate double models, or all channels with one
combined multi-output model. Handles multi-run fan-out and the
capture-scaled omega0 default.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

from ..errors import InvalidInputError
from ..inr.counting import param_count
from ..inr.schemas import ArchSpec, InrModel
from ..training.config import TrainConfig
from ..training.multi_run import NmseStats, RunFailure, fit_multi_run, fit_separate
from ..training.trainer import omega0_for_capture
from ..waveform import Waveform, WaveformSet, event_window_samples

logger = logging.getLogger(__name__)

ArchChoice = Literal["single", "double", "separate", "combined"]
ARCH_CHOICES: tuple[str, ...] = ("single", "double", "separate", "combined")


@dataclass(frozen=True)
class FitRequest:
    arch: ArchChoice
    h: int | None = None
    h1: int | None = None
    h2: int | None = None
    activation: str = "sine"
    runs: int = 1
    channel: str | None = None  # single/double: which channel; default the first
    event_window_cycles: tuple[float, float] | None = None  # (start, duration)

    def __post_init__(self) -> None:
        if self.arch not in ARCH_CHOICES:
            raise InvalidInputError(f"unknown arch {self.arch!r}; choose from {ARCH_CHOICES}")
        if self.arch == "single" and self.h is None:
            raise InvalidInputError("--arch single needs --h")
        if self.arch != "single" and (self.h1 is None or self.h2 is None):
            raise InvalidInputError(f"--arch {self.arch} needs --h1 and --h2")
        if self.runs < 1:
            raise InvalidInputError(f"runs must be >= 1, got {self.runs}")


@dataclass
class FitOutcome:
    """Best run's models plus statistics over all successful runs."""
    request: FitRequest
    models: list[tuple[str, InrModel]]
    stats: NmseStats
    per_channel: dict[str, float]
    param_count: int
    raw_samples: int
    transient_mean: float | None = None
    run_nmse: list[float] = field(default_factory=list)
    failures: list[RunFailure] = field(default_factory=list)
    best_seed: int = 0


def with_capture_omega0(config: TrainConfig, n_cycles: float) -> TrainConfig:
    """Fill in omega0 from the capture length unless the config sets one."""
    if config.omega0 is not None:
        return config
    return config.model_copy(update={"omega0": omega0_for_capture(n_cycles)})


def arch_for(request: FitRequest, channels: int) -> ArchSpec:
    if request.arch == "single":
        return ArchSpec.single(request.h)
    if request.arch == "combined":
        return ArchSpec.multi(request.h1, request.h2, channels, request.activation)
    return ArchSpec.double(request.h1, request.h2, request.activation)


def fit_capture(
    capture: WaveformSet,
    request: FitRequest,
    config: TrainConfig,
    workers: int | None = 1,
) -> FitOutcome:
    config = with_capture_omega0(config, capture.spec.cycles(capture.n_samples))
    logger.debug("fit_capture: %s on %d channels, %d runs", request.arch, capture.n_channels, request.runs)
    window = None
    if request.event_window_cycles is not None:
        window = event_window_samples(capture.spec, *request.event_window_cycles)
    if request.arch == "separate":
        return _fit_separate_runs(capture, request, config, workers, window)

    if request.arch == "combined":
        if capture.n_channels < 2:
            raise InvalidInputError("--arch combined needs a capture with at least 2 channels")
        target: Waveform | WaveformSet = capture
    else:
        target = capture.channel(request.channel) if request.channel else capture.channels[0]
    arch = arch_for(request, capture.n_channels)
    result = fit_multi_run(target, arch, config, request.runs, workers, window)
    best = result.best_report
    label = "combined" if isinstance(target, WaveformSet) else target.label
    return FitOutcome(
        request=request,
        models=[(label, result.best_model)],
        stats=result.stats,
        per_channel=dict(best.channel_nmse_percent),
        param_count=param_count(arch),
        raw_samples=capture.n_samples * (capture.n_channels if request.arch == "combined" else 1),
        transient_mean=best.transient_nmse_percent,
        run_nmse=[r.final_nmse_percent for r in result.reports],
        failures=result.failures,
        best_seed=best.seed,
    )


def _fit_separate_runs(
    capture: WaveformSet,
    request: FitRequest,
    config: TrainConfig,
    workers: int | None,
    window: slice | None,
) -> FitOutcome:
    result = fit_separate(
        capture, request.h1, request.h2, config, request.activation, window, request.runs, workers
    )
    per_channel: dict[str, float] = {}
    for report in result.reports:
        per_channel.update(report.channel_nmse_percent)
    return FitOutcome(
        request=request,
        models=list(zip(capture.labels, result.models)),
        stats=result.stats,
        per_channel=per_channel,
        param_count=result.param_count,
        raw_samples=capture.n_samples * capture.n_channels,
        transient_mean=result.transient_nmse_percent,
        run_nmse=result.run_nmse,
        failures=result.failures,
        best_seed=result.reports[0].seed,
    )
