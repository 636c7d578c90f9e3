"""
Separate-vs-combined comparison at matched parameter budgets.

Layer widths are searched on the lattice h1, h2 in {10, 20, ..., 300}.
For each budget and approach the chosen (h1, h2) minimizes
|count - budget|; ties go to the larger h2, then the smaller h1.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from ..errors import BudgetTooSmallError, InvalidInputError
from ..inr.counting import combined_param_count, separate_param_count
from ..inr.schemas import ArchSpec
from ..pool import map_in_pool
from ..training.config import TrainConfig
from ..training.multi_run import FitTask, RunFailure, run_fit_task, separate_fit_tasks
from ..waveform import WaveformSet
from .fit_service import with_capture_omega0

logger = logging.getLogger(__name__)

LATTICE_STEP = 10
LATTICE_MAX = 300
LATTICE = tuple(range(LATTICE_STEP, LATTICE_MAX + 1, LATTICE_STEP))
DEFAULT_BUDGETS = (1000, 3000, 8103)

SEPARATE = "separate"
COMBINED = "combined"


@dataclass(frozen=True)
class LatticeChoice:
    h1: int
    h2: int
    count: int


def nearest_on_lattice(budget: int, count: Callable[[int, int], int]) -> LatticeChoice:
    best: tuple[tuple[int, int, int], LatticeChoice] | None = None
    for h1 in LATTICE:
        for h2 in LATTICE:
            c = count(h1, h2)
            key = (abs(c - budget), -h2, h1)
            if best is None or key < best[0]:
                best = (key, LatticeChoice(h1, h2, c))
    return best[1]


def nearest_separate(budget: int, channels: int) -> LatticeChoice:
    return nearest_on_lattice(budget, lambda h1, h2: separate_param_count(h1, h2, channels))


def nearest_combined(budget: int, channels: int) -> LatticeChoice:
    return nearest_on_lattice(budget, lambda h1, h2: combined_param_count(h1, h2, channels))


def minimum_counts(channels: int) -> dict[str, int]:
    h = LATTICE[0]
    return {
        SEPARATE: separate_param_count(h, h, channels),
        COMBINED: combined_param_count(h, h, channels),
    }


@dataclass
class CompareRow:
    budget: int
    approach: str
    status: str  # "ok" or "failed"
    h1: int | None = None
    h2: int | None = None
    params: int | None = None
    mean_nmse: float | None = None
    std: float | None = None
    n_runs: int = 0
    message: str = ""

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class Comparison:
    rows: list[CompareRow]
    runs: int
    failures: list[RunFailure] = field(default_factory=list)

    def row(self, budget: int, approach: str) -> CompareRow:
        for r in self.rows:
            if r.budget == budget and r.approach == approach:
                return r
        raise InvalidInputError(f"no comparison row for budget {budget} / {approach}")


@dataclass(frozen=True)
class _Plan:
    budget: int
    approach: str
    choice: LatticeChoice | None
    message: str = ""


def _plan(budgets: Sequence[int], channels: int) -> list[_Plan]:
    minima = minimum_counts(channels)
    smallest = min(minima.values())
    plans: list[_Plan] = []
    for budget in budgets:
        if budget < smallest:
            raise BudgetTooSmallError(
                f"budget {budget} is below the smallest model on the lattice ({smallest} parameters)",
                minimum=smallest,
            )
        for approach, nearest in ((SEPARATE, nearest_separate), (COMBINED, nearest_combined)):
            if budget < minima[approach]:
                plans.append(
                    _Plan(budget, approach, None, f"budget below smallest {approach} model ({minima[approach]})")
                )
            else:
                plans.append(_Plan(budget, approach, nearest(budget, channels)))
    return plans


def compare_budgets(
    capture: WaveformSet,
    budgets: Sequence[int],
    config: TrainConfig,
    runs: int = 1,
    workers: int | None = 1,
) -> Comparison:
    """
    Both approaches at every budget. A run's NMSE is the mean of per-channel
    NMSEs; a separate run counts only when all C channel fits succeed.
    Run r of the combined model uses seed + r; channel c of separate run r
    uses seed + r*C + c.
    """
    if capture.n_channels < 2:
        raise InvalidInputError("comparison needs a multi-channel capture")
    if not budgets:
        raise InvalidInputError("comparison needs at least one budget")
    if runs < 1:
        raise InvalidInputError(f"runs must be >= 1, got {runs}")
    C = capture.n_channels
    config = with_capture_omega0(config, capture.spec.cycles(capture.n_samples))
    plans = _plan(budgets, C)

    tasks: list[FitTask] = []
    spans: list[tuple[int, int]] = []
    for plan in plans:
        start = len(tasks)
        if plan.choice is not None:
            h1, h2 = plan.choice.h1, plan.choice.h2
            if plan.approach == COMBINED:
                arch = ArchSpec.multi(h1, h2, C)
                tasks.extend(FitTask(capture, arch, config.with_seed(config.seed + r)) for r in range(runs))
            else:
                tasks.extend(separate_fit_tasks(capture, h1, h2, config, runs))
        spans.append((start, len(tasks)))
    logger.info("compare: %d budgets, %d fits", len(budgets), len(tasks))
    outcomes = map_in_pool(run_fit_task, tasks, workers)

    rows: list[CompareRow] = []
    failures: list[RunFailure] = []
    for plan, (start, stop) in zip(plans, spans):
        if plan.choice is None:
            rows.append(CompareRow(plan.budget, plan.approach, "failed", message=plan.message))
            continue
        chunk = outcomes[start:stop]
        group = C if plan.approach == SEPARATE else 1
        run_values: list[float] = []
        for r in range(runs):
            run = chunk[r * group : (r + 1) * group]
            bad = [o for o in run if isinstance(o, RunFailure)]
            failures.extend(bad)
            if not bad:
                run_values.append(float(np.mean([o[1].final_nmse_percent for o in run])))
        row = CompareRow(
            budget=plan.budget,
            approach=plan.approach,
            status="ok" if run_values else "failed",
            h1=plan.choice.h1,
            h2=plan.choice.h2,
            params=plan.choice.count,
            n_runs=len(run_values),
        )
        if run_values:
            row.mean_nmse = float(np.mean(run_values))
            row.std = float(np.std(run_values))
        else:
            row.message = "every run failed"
        rows.append(row)
    return Comparison(rows=rows, runs=runs, failures=failures)
