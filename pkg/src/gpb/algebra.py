"""Value algebras for the message recursions.

Energies enter an algebra through ``lift``: the tropical algebra keeps them as
they are, the log algebra negates them, and the max-product algebra maps
``e -> exp(-e)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def _log_reduce(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isneginf(m), 0.0, m)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - safe), axis=axis, keepdims=True)) + safe
    return np.squeeze(out, axis=axis)


@dataclass(frozen=True)
class ValueAlgebra:
    name: str
    plus: Callable
    reduce: Callable  # reduce(array, axis) with ``plus``
    times: Callable
    divide: Callable
    zero: float
    one: float
    lift: Callable
    supports_argmin: bool = False

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """(a ⊗ b) aggregated with ⊕ over the shared axis."""
        if a.shape[1] == 0:
            return np.full((a.shape[0], b.shape[1]), self.zero)
        return self.reduce(self.times(a[:, :, None], b[None, :, :]), 1)


TROPICAL = ValueAlgebra(
    "tropical", np.minimum, lambda a, axis: np.min(a, axis=axis), np.add, np.subtract,
    np.inf, 0.0, lambda e: np.asarray(e, dtype=float), supports_argmin=True)

LOG = ValueAlgebra(
    "log", np.logaddexp, _log_reduce, np.add, np.subtract,
    -np.inf, 0.0, lambda e: -np.asarray(e, dtype=float))

MAX_PRODUCT = ValueAlgebra(
    "max-product", np.maximum, lambda a, axis: np.max(a, axis=axis), np.multiply, np.divide,
    0.0, 1.0, lambda e: np.exp(-np.asarray(e, dtype=float)))
