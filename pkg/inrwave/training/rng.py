"""
Seeded RNG for deterministic, replayable fits and synthetic captures.
"""
from __future__ import annotations

from typing import Any, Sequence

import numpy as np


class SeededRNG:
    """Wrapper around numpy.random.Generator (PCG64) for reproducible draws."""

    def __init__(self, seed: int | Sequence[int] | None = None) -> None:
        self._rng = np.random.default_rng(seed)

    def uniform(self, low: float, high: float, size: int | tuple[int, ...] | None = None) -> Any:
        return self._rng.uniform(low, high, size)

    def normal(self, scale: float, size: int | tuple[int, ...]) -> np.ndarray:
        return self._rng.normal(0.0, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._rng.permutation(n)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._rng.integers(low, high))

