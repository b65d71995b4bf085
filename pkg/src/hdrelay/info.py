"""Information measures and exact combinatorial counts.

Symbol order on every 3x3 edge table is (0, 1, N), i.e. row/column index
0 is the symbol "0", 1 is "1" and 2 is the silent symbol N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError

MASS_TOL = 1e-9
LOG2_3 = math.log2(3.0)

ZERO, ONE, SILENT = 0, 1, 2


def _check_pmf(p: np.ndarray) -> None:
    if p.size == 0:
        raise ValidationError("empty pmf")
    if not np.all(np.isfinite(p)):
        raise ValidationError("pmf has non-finite entries")
    if np.any(p < 0):
        raise ValidationError(f"pmf has negative entries: {p.min()!r}")
    total = math.fsum(p.ravel().tolist())
    if abs(total - 1.0) > MASS_TOL:
        raise ValidationError(f"pmf mass is {total!r}, expected 1")


def _entropy_unchecked(p) -> float:
    # 0 log 0 := 0
    terms = [-x * math.log2(x) for x in np.ravel(p).tolist() if x > 0.0]
    return max(math.fsum(terms), 0.0)


def entropy(p: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy in bits of a probability vector."""
    arr = np.asarray(p, dtype=float)
    _check_pmf(arr)
    return _entropy_unchecked(arr)


def binary_entropy(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"binary entropy argument {q!r} outside [0, 1]")
    return _entropy_unchecked((q, 1.0 - q))


@dataclass(frozen=True, eq=False)
class EdgeDistribution:
    """Joint pmf p(x_prev, x_self) of two adjacent channel inputs.

    ``p[a, b]`` is the probability that the upstream node sends symbol ``a``
    while the node itself sends ``b``.  With ``binary=True`` the (N, N)
    entry must be exactly zero.
    """

    p: np.ndarray
    binary: bool = False

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.shape != (3, 3):
            raise ValidationError(f"edge pmf must be 3x3, got {arr.shape}")
        _check_pmf(arr)
        if self.binary and arr[SILENT, SILENT] != 0.0:
            raise ValidationError("binary model edge puts mass on (N, N)")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @classmethod
    def from_entries(cls, entries: dict, binary: bool = False) -> "EdgeDistribution":
        """Build from a mapping like ``{"0N": 0.25, "N1": 0.5, ...}``."""
        idx = {"0": ZERO, "1": ONE, "N": SILENT}
        arr = np.zeros((3, 3))
        for key, value in entries.items():
            arr[idx[key[0]], idx[key[1]]] += value
        return cls(arr, binary=binary)

    @property
    def prev_marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def self_marginal(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def __getitem__(self, key: str) -> float:
        idx = {"0": ZERO, "1": ONE, "N": SILENT}
        return float(self.p[idx[key[0]], idx[key[1]]])

    def __eq__(self, other):
        if not isinstance(other, EdgeDistribution):
            return NotImplemented
        return self.binary == other.binary and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash((self.p.tobytes(), self.binary))

    def to_list(self) -> list[float]:
        """Row-major 9 floats in (0, 1, N) x (0, 1, N) order."""
        return [float(x) for x in self.p.ravel()]


def _conditional_entropy_of_column(col: np.ndarray) -> float:
    mass = math.fsum(col.tolist())
    if mass <= 0.0:
        return 0.0
    return mass * _entropy_unchecked(col / mass)


def cond_entropy_prev_given_self(e: EdgeDistribution) -> float:
    """H(X_prev | X_self)."""
    return math.fsum(_conditional_entropy_of_column(e.p[:, b]) for b in range(3))


def cut_entropy_output_given_self(e: EdgeDistribution) -> float:
    """H(Y | X_self) for the relay fed by this edge.

    A transmitting relay only hears itself, so the received symbol is
    random only in the slots where the relay is silent:
    p(X_self = N) * H(X_prev | X_self = N).
    """
    return _conditional_entropy_of_column(e.p[:, SILENT])


def log2_binomial(n: int, k: int) -> float:
    """log2 C(n, k) by summing logarithms of the multiplicative formula."""
    if n < 0 or k < 0:
        raise DomainError("binomial arguments must be non-negative")
    if k > n:
        raise DomainError(f"k={k} exceeds n={n}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    terms = [math.log2(n - k + j) - math.log2(j) for j in range(1, k + 1)]
    return math.fsum(terms)


def exact_binomial(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise DomainError("binomial arguments must be non-negative")
    if k > n:
        raise DomainError(f"k={k} exceeds n={n}")
    return math.comb(n, k)
