"""Degeneracy classes of density-matrix spectra and their stratum dimensions.

A spectrum sorted in descending order defines an ordered multiplicity
partition (k1, ..., kn).  The stratum of states with that degeneracy pattern
is a flag manifold times a simplex piece; its real dimension splits as
D = D1 + D2 with D1 = N^2 - sum k_i^2 and D2 = n - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .qstate import DensityMatrix

DEFAULT_DEGENERACY_EPS = 1e-8


@dataclass(frozen=True)
class SpectrumType:
    dim: int
    partition: tuple[int, ...]

    def __post_init__(self):
        if any(k < 1 for k in self.partition) or sum(self.partition) != self.dim:
            raise ValidationError(
                f"partition {self.partition} does not sum to N={self.dim}")

    @property
    def n_distinct(self) -> int:
        return len(self.partition)

    def label(self) -> str:
        return "(" + ",".join(str(k) for k in self.partition) + ")"


def classify_spectrum(rho: DensityMatrix, eps: float = DEFAULT_DEGENERACY_EPS) -> SpectrumType:
    """Merge adjacent eigenvalues within ``eps`` (single linkage) into blocks."""
    evals = np.sort(rho.eigvals())[::-1]
    partition = []
    count = 1
    for k in range(1, evals.size):
        if evals[k - 1] - evals[k] <= eps:
            count += 1
        else:
            partition.append(count)
            count = 1
    partition.append(count)
    return SpectrumType(rho.dim, tuple(partition))


def stratum_dimension(t: SpectrumType) -> tuple[int, int, int]:
    """(D, D1, D2): flag-manifold dimension plus the simplex-piece dimension."""
    d1 = t.dim ** 2 - sum(k * k for k in t.partition)
    d2 = t.n_distinct - 1
    return d1 + d2, d1, d2


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    """Number of integer partitions P(n) by dynamic programming (exact)."""
    if n < 0:
        raise ValidationError("dimension must be nonnegative")
    table = [1] + [0] * n
    for part in range(1, n + 1):
        for total in range(part, n + 1):
            table[total] += table[total - part]
    return table[n]


def partition_census(n: int) -> dict:
    """Counts of strata for dimension ``n``.

    ``partitions``: P(n), the number of topologically distinct strata;
    ``per_m_counts``: binom(n-1, m-1) ordered patterns with m distinct
    eigenvalues, m = 1..n; ``total_parts``: 2^(n-1).
    """
    if n < 1:
        raise ValidationError("dimension must be >= 1")
    per_m = [math.comb(n - 1, m - 1) for m in range(1, n + 1)]
    return {
        "partitions": partition_count(n),
        "per_m_counts": per_m,
        "total_parts": 2 ** (n - 1),
    }


def compositions(n: int):
    """All ordered multiplicity patterns of n, largest-eigenvalue block first."""
    if n < 1:
        raise ValidationError("dimension must be >= 1")

    def rec(remaining, prefix):
        if remaining == 0:
            yield tuple(prefix)
            return
        for k in range(1, remaining + 1):
            yield from rec(remaining - k, prefix + [k])

    yield from rec(n, [])


def stratum_table(n: int) -> list[dict]:
    """One row per ordered pattern: partition, (D, D1, D2)."""
    rows = []
    for part in compositions(n):
        t = SpectrumType(n, part)
        d, d1, d2 = stratum_dimension(t)
        rows.append({"partition": part, "D": d, "D1": d1, "D2": d2})
    return rows
