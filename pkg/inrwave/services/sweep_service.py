"""
h1 x h2 sensitivity sweep: double-layer fits over a suite of event
captures and several seeds per cell, summarized as a long-format table,
plus the monotone-trend check (more second-layer neurons should help).
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from ..errors import InvalidInputError
from ..inr.counting import double_param_count
from ..inr.schemas import ArchSpec
from ..pool import map_in_pool
from ..training.config import TrainConfig
from ..training.multi_run import FitTask, RunFailure, run_fit_task
from ..waveform import WaveformSet
from .fit_service import with_capture_omega0

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["h1", "h2", "params", "mean_nmse", "median_nmse", "std", "n", "failures"]


@dataclass
class SweepRow:
    h1: int
    h2: int
    params: int
    mean_nmse: float
    median_nmse: float
    std: float
    n: int
    failures: int = 0


@dataclass
class TrendCheck:
    spearman_by_h1: dict[int, float]
    best_cell: tuple[int, int]
    max_h2: int
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "spearman_by_h1": {str(k): v for k, v in self.spearman_by_h1.items()},
            "best_cell": list(self.best_cell),
            "max_h2": self.max_h2,
            "passed": self.passed,
        }


@dataclass
class SweepTable:
    rows: list[SweepRow]
    runs: int
    n_events: int
    failures: list[RunFailure] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.rows], columns=TABLE_COLUMNS)

    def save_csv(self, path: str | Path) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(p, index=False, float_format="%.10g", lineterminator="\n")
        return p

    def cell(self, h1: int, h2: int) -> SweepRow:
        for r in self.rows:
            if r.h1 == h1 and r.h2 == h2:
                return r
        raise InvalidInputError(f"no sweep cell ({h1}, {h2})")


def run_sweep(
    suite: Sequence[WaveformSet],
    h1_values: Sequence[int],
    h2_values: Sequence[int],
    config: TrainConfig,
    runs: int = 1,
    workers: int | None = 1,
    channel: str | None = None,
) -> SweepTable:
    """
    Every (h1, h2, event, run) is one pool task fitting the named channel of
    each event (default its first); run r uses seed config.seed + r. Cells
    report mean NMSE over successful fits.
    """
    if not suite or not h1_values or not h2_values:
        raise InvalidInputError("sweep needs a nonempty suite and grid")
    if runs < 1:
        raise InvalidInputError(f"runs must be >= 1, got {runs}")
    cells = [(int(h1), int(h2)) for h1 in h1_values for h2 in h2_values]
    targets = [capture.channel(channel) if channel else capture.channels[0] for capture in suite]
    tasks: list[FitTask] = []
    for h1, h2 in cells:
        arch = ArchSpec.double(h1, h2)
        for capture, target in zip(suite, targets):
            cfg = with_capture_omega0(config, capture.spec.cycles(capture.n_samples))
            for r in range(runs):
                tasks.append(FitTask(target, arch, cfg.with_seed(config.seed + r)))
    logger.info("sweep: %d cells x %d events x %d runs = %d fits", len(cells), len(suite), runs, len(tasks))
    outcomes = map_in_pool(run_fit_task, tasks, workers)

    per_cell = len(suite) * runs
    rows: list[SweepRow] = []
    failures: list[RunFailure] = []
    for i, (h1, h2) in enumerate(cells):
        chunk = outcomes[i * per_cell : (i + 1) * per_cell]
        values = [o[1].final_nmse_percent for o in chunk if not isinstance(o, RunFailure)]
        failed = [o for o in chunk if isinstance(o, RunFailure)]
        failures.extend(failed)
        arr = np.asarray(values, dtype=float)
        rows.append(
            SweepRow(
                h1=h1,
                h2=h2,
                params=double_param_count(h1, h2),
                mean_nmse=float(arr.mean()) if arr.size else float("nan"),
                median_nmse=float(np.median(arr)) if arr.size else float("nan"),
                std=float(arr.std()) if arr.size else float("nan"),
                n=int(arr.size),
                failures=len(failed),
            )
        )
    return SweepTable(rows=rows, runs=runs, n_events=len(suite), failures=failures)


def check_trend(table: SweepTable) -> TrendCheck:
    """
    Pass when, at every h1, Spearman's rho between h2 and mean NMSE is
    negative, and the best cell overall sits in the largest-h2 column.
    """
    frame = table.to_frame().dropna(subset=["mean_nmse"])
    if frame.empty:
        raise InvalidInputError("sweep table has no successful cells")
    rhos: dict[int, float] = {}
    for h1, group in frame.groupby("h1"):
        if group["h2"].nunique() < 2:
            raise InvalidInputError(f"trend check needs at least two h2 values at h1={h1}")
        rho, _ = stats.spearmanr(group["h2"], group["mean_nmse"])
        rhos[int(h1)] = float(rho)
    best = frame.loc[frame["mean_nmse"].idxmin()]
    max_h2 = int(frame["h2"].max())
    passed = all(math.isfinite(r) and r < 0 for r in rhos.values()) and int(best["h2"]) == max_h2
    return TrendCheck(rhos, (int(best["h1"]), int(best["h2"])), max_h2, passed)
