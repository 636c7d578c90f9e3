"""
Bounded process pool for independent fits (multi-run, sweep cells,
budget comparisons). Results come back in task order.
"""
from __future__ import annotations

import concurrent.futures
import logging
import os
from typing import Callable, Sequence, TypeVar

from .errors import InvalidInputError

logger = logging.getLogger(__name__)

WORKERS_ENV = "INRWAVE_WORKERS"
MAX_DEFAULT_WORKERS = 4

T = TypeVar("T")
R = TypeVar("R")


def default_worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError as e:
            raise InvalidInputError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from e
        if value < 1:
            raise InvalidInputError(f"{WORKERS_ENV} must be >= 1, got {value}")
        return value
    return min(MAX_DEFAULT_WORKERS, os.cpu_count() or 1)


def map_in_pool(fn: Callable[[T], R], tasks: Sequence[T], workers: int | None = None) -> list[R]:
    """
    fn(task) for every task. fn must be a module-level function so it pickles;
    workers <= 1 runs inline in this process.
    """
    n = workers if workers is not None else default_worker_count()
    if n <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    n = min(n, len(tasks))
    logger.debug("running %d tasks on %d workers", len(tasks), n)
    with concurrent.futures.ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, tasks))
