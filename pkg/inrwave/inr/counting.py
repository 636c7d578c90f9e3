"""
Closed-form parameter counts. omega0 is a fixed hyperparameter and is not counted.

  single:          3h + 1
  double:          2h1 + h1*h2 + 2h2 + 1
  separate(C):     C * (2h1 + h1*h2 + 2h2 + 1)
  multi (C outs):  2h1 + h1*h2 + h2 + C*(h2 + 1)
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from .schemas import ArchKind, ArchSpec, InrModel


def param_count(arch: ArchSpec | InrModel) -> int:
    if not isinstance(arch, ArchSpec):
        arch = arch.arch
    if arch.kind is ArchKind.SINGLE:
        return 3 * arch.h + 1
    h1, h2 = arch.h1, arch.h2
    if arch.kind is ArchKind.DOUBLE:
        return double_param_count(h1, h2)
    return 2 * h1 + h1 * h2 + h2 + arch.channels * (h2 + 1)


def double_param_count(h1: int, h2: int) -> int:
    return 2 * h1 + h1 * h2 + 2 * h2 + 1


def separate_param_count(h1: int, h2: int, channels: int) -> int:
    """C independent double-layer models, one per channel."""
    if channels < 1:
        raise InvalidInputError(f"channels must be >= 1, got {channels}")
    return channels * double_param_count(h1, h2)


def combined_param_count(h1: int, h2: int, channels: int) -> int:
    return param_count(ArchSpec.multi(h1, h2, channels))


def enumerate_parameters(model: InrModel) -> list[tuple[str, np.ndarray]]:
    """(name, array) pairs in canonical order; sizes sum to param_count(model)."""
    return [(name, model.params[name]) for name in model.arch.shapes()]


def enumerated_size(model: InrModel) -> int:
    return sum(int(np.size(arr)) for _, arr in enumerate_parameters(model))
