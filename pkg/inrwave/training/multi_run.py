"""
Multi-run protocol: the same fit under seeds seed+0 .. seed+runs-1,
summarized as NMSE statistics plus the best model. A failed run is
recorded and skipped; only an all-failed batch raises. Separate per-channel
fits follow the same protocol with one seed per (run, channel) pair.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..errors import InvalidInputError, NumericalError, TrainingDivergedError
from ..inr.counting import separate_param_count
from ..inr.schemas import ArchSpec, InrModel
from ..pool import map_in_pool
from ..waveform import Waveform, WaveformSet
from .config import TrainConfig
from .trainer import TrainReport, fit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunFailure:
    seed: int
    kind: str
    message: str
    loss_trace: tuple[tuple[int, float], ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {"seed": self.seed, "kind": self.kind, "message": self.message}


@dataclass
class NmseStats:
    mean: float
    min: float
    max: float
    std: float
    n: int

    @classmethod
    def of(cls, values: list[float]) -> NmseStats:
        arr = np.asarray(values, dtype=float)
        return cls(float(arr.mean()), float(arr.min()), float(arr.max()), float(arr.std()), int(arr.size))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class MultiRunResult:
    stats: NmseStats
    best_model: InrModel
    best_report: TrainReport
    reports: list[TrainReport]
    failures: list[RunFailure] = field(default_factory=list)

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.reports]


@dataclass(frozen=True)
class FitTask:
    target: Waveform | WaveformSet
    arch: ArchSpec
    config: TrainConfig
    event_window: slice | None = None


def run_fit_task(task: FitTask) -> tuple[InrModel, TrainReport] | RunFailure:
    """
    Pool entry point. Numerical failures depend on the seed and come back as
    values; input errors would fail every run and propagate.
    """
    try:
        return fit(task.target, task.arch, task.config, task.event_window)
    except TrainingDivergedError as e:
        return RunFailure(task.config.seed, type(e).__name__, str(e), tuple(e.loss_trace))
    except NumericalError as e:
        return RunFailure(task.config.seed, type(e).__name__, str(e))


def split_outcomes(
    outcomes: list[tuple[InrModel, TrainReport] | RunFailure],
) -> tuple[list[tuple[InrModel, TrainReport]], list[RunFailure]]:
    fits: list[tuple[InrModel, TrainReport]] = []
    failures: list[RunFailure] = []
    for outcome in outcomes:
        if isinstance(outcome, RunFailure):
            logger.warning("run with seed %d failed: %s: %s", outcome.seed, outcome.kind, outcome.message)
            failures.append(outcome)
        else:
            fits.append(outcome)
    return fits, failures


def fit_multi_run(
    target: Waveform | WaveformSet,
    arch: ArchSpec,
    config: TrainConfig,
    runs: int,
    workers: int | None = 1,
    event_window: slice | None = None,
) -> MultiRunResult:
    if runs < 1:
        raise InvalidInputError(f"runs must be >= 1, got {runs}")
    tasks = [FitTask(target, arch, config.with_seed(config.seed + i), event_window) for i in range(runs)]
    outcomes = map_in_pool(run_fit_task, tasks, workers)

    fits, failures = split_outcomes(outcomes)
    if not fits:
        first = failures[0]
        raise TrainingDivergedError(
            f"all {runs} runs failed; first (seed {first.seed}): {first.kind}: {first.message}",
            loss_trace=list(first.loss_trace),
            seed=first.seed,
        )

    reports = [r for _, r in fits]
    best_model, best_report = min(fits, key=lambda mr: mr[1].final_nmse_percent)
    stats = NmseStats.of([r.final_nmse_percent for r in reports])
    logger.info(
        "multi-run: %d/%d ok, NMSE mean %.4f%% std %.4f (best seed %d)",
        len(fits), runs, stats.mean, stats.std, best_report.seed,
    )
    return MultiRunResult(stats, best_model, best_report, reports, failures)


# ---------- Separate per-channel models ----------


@dataclass
class SeparateFit:
    """Best run of C independent double-layer models; a run's NMSE is the mean of its per-channel NMSEs."""
    models: list[InrModel]
    reports: list[TrainReport]
    mean_nmse_percent: float
    param_count: int
    transient_nmse_percent: float | None = None
    run_nmse: list[float] = field(default_factory=list)
    failures: list[RunFailure] = field(default_factory=list)

    @property
    def stats(self) -> NmseStats:
        return NmseStats.of(self.run_nmse)


def separate_fit_tasks(
    target: WaveformSet,
    h1: int,
    h2: int,
    config: TrainConfig,
    runs: int = 1,
    activation: str = "sine",
    event_window: slice | None = None,
) -> list[FitTask]:
    """Run-major task list; channel c of run r trains with seed config.seed + r*C + c."""
    C = target.n_channels
    arch = ArchSpec.double(h1, h2, activation)
    return [
        FitTask(channel, arch, config.with_seed(config.seed + r * C + c), event_window)
        for r in range(runs)
        for c, channel in enumerate(target)
    ]


def fit_separate(
    target: WaveformSet,
    h1: int,
    h2: int,
    config: TrainConfig,
    activation: str = "sine",
    event_window: slice | None = None,
    runs: int = 1,
    workers: int | None = 1,
) -> SeparateFit:
    """A run counts only when every channel fit succeeds; the best complete run is kept."""
    if runs < 1:
        raise InvalidInputError(f"runs must be >= 1, got {runs}")
    C = target.n_channels
    outcomes = map_in_pool(
        run_fit_task, separate_fit_tasks(target, h1, h2, config, runs, activation, event_window), workers
    )

    complete: list[list[tuple[InrModel, TrainReport]]] = []
    failures: list[RunFailure] = []
    for r in range(runs):
        fits, failed = split_outcomes(outcomes[r * C : (r + 1) * C])
        failures.extend(failed)
        if not failed:
            complete.append(fits)
    if not complete:
        first = failures[0]
        raise TrainingDivergedError(
            f"all {runs} separate runs failed; first (seed {first.seed}): {first.kind}: {first.message}",
            loss_trace=list(first.loss_trace),
            seed=first.seed,
        )

    run_nmse = [float(np.mean([r.final_nmse_percent for _, r in fits])) for fits in complete]
    best = complete[int(np.argmin(run_nmse))]
    transients = [r.transient_nmse_percent for _, r in best if r.transient_nmse_percent is not None]
    logger.info("separate fit: %d/%d runs ok, mean NMSE %.4f%%", len(complete), runs, float(np.mean(run_nmse)))
    return SeparateFit(
        models=[m for m, _ in best],
        reports=[r for _, r in best],
        mean_nmse_percent=min(run_nmse),
        param_count=separate_param_count(h1, h2, C),
        transient_nmse_percent=float(np.mean(transients)) if transients else None,
        run_nmse=run_nmse,
        failures=failures,
    )
