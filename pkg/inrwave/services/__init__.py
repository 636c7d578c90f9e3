"""
Orchestration used by the CLI: capture fitting, the sensitivity sweep,
and the separate-vs-combined budget comparison.
"""
from .fit_service import ARCH_CHOICES, FitOutcome, FitRequest, arch_for, fit_capture, with_capture_omega0
from .sweep_service import SweepRow, SweepTable, TrendCheck, check_trend, run_sweep
from .compare_service import (
    DEFAULT_BUDGETS,
    LATTICE,
    CompareRow,
    Comparison,
    LatticeChoice,
    compare_budgets,
    minimum_counts,
    nearest_combined,
    nearest_separate,
)

__all__ = [
    "ARCH_CHOICES",
    "FitOutcome",
    "FitRequest",
    "arch_for",
    "fit_capture",
    "with_capture_omega0",
    "SweepRow",
    "SweepTable",
    "TrendCheck",
    "check_trend",
    "run_sweep",
    "DEFAULT_BUDGETS",
    "LATTICE",
    "CompareRow",
    "Comparison",
    "LatticeChoice",
    "compare_budgets",
    "minimum_counts",
    "nearest_combined",
    "nearest_separate",
]
