"""Hardness scaffolding: 3-partition embedded into permuted linear systems.

The reduction maps a 3-partition instance (3k positive integers, each strictly
between a quarter and half of the per-triple target C) to the question of
whether some row shuffle of the response vector makes an integer linear system
exactly solvable.  Feasibility transfers in both directions, which is what the
exhaustive checkers below are for.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _ratlin
from .errors import CapExceededError

__all__ = [
    "ThreePartitionInstance",
    "PlsInstance",
    "reduce_3partition",
    "check_3partition_brute",
    "pls_feasible_brute",
    "gen_yes_instance",
]


@dataclass(frozen=True)
class ThreePartitionInstance:
    """Multiset ``z`` of ``3k`` integers with per-triple target ``c``."""

    z: tuple[int, ...]
    k: int
    c: int

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(self.z) != 3 * self.k:
            raise ValueError("z must hold exactly 3k = %d values, got %d" % (3 * self.k, len(self.z)))
        if sum(self.z) != self.c * self.k:
            raise ValueError("sum(z) = %d must equal c * k = %d" % (sum(self.z), self.c * self.k))
        for v in self.z:
            if not (4 * v > self.c and 2 * v < self.c):
                raise ValueError("value %d violates c/4 < z_i < c/2 for c = %d" % (v, self.c))


@dataclass(frozen=True)
class PlsInstance:
    """Integer matrix ``a`` (n x d) and vector ``b`` (length n); feasible iff
    some permutation of ``b`` lies in the column span of ``a``."""

    a: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(tuple(int(v) for v in row) for row in self.a))
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        if not self.a or not self.a[0]:
            raise ValueError("empty system")
        d = len(self.a[0])
        if any(len(row) != d for row in self.a):
            raise ValueError("ragged matrix")
        if len(self.b) != len(self.a):
            raise ValueError("b length must match row count")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def d(self) -> int:
        return len(self.a[0])


def reduce_3partition(tp: ThreePartitionInstance) -> PlsInstance:
    """Feasibility-preserving embedding with ``n = 4k`` rows and ``d = 3k`` columns.

    The top ``3k`` rows are the identity (pinning each value slot) and each of
    the bottom ``k`` rows sums one candidate triple of slots ``(3j, 3j+1,
    3j+2)``; the right-hand side is ``z`` followed by ``k`` copies of ``c``.
    """
    k = tp.k
    d = 3 * k
    rows = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    for j in range(k):
        rows.append(tuple(int(3 * j <= i < 3 * j + 3) for i in range(d)))
    return PlsInstance(a=tuple(rows), b=tuple(tp.z) + (tp.c,) * k)


def check_3partition_brute(tp: ThreePartitionInstance, cap: int = 4) -> bool:
    """Exhaustively decide 3-partition.  Refuses ``k > cap`` (default 4)."""
    if tp.k > cap:
        raise CapExceededError("check_3partition_brute capped at k <= %d, got k = %d" % (cap, tp.k))

    def split(avail: tuple[int, ...]) -> bool:
        if not avail:
            return True
        first = avail[0]
        rest = avail[1:]
        for i, j in itertools.combinations(range(len(rest)), 2):
            if tp.z[first] + tp.z[rest[i]] + tp.z[rest[j]] == tp.c:
                left = tuple(v for idx, v in enumerate(rest) if idx not in (i, j))
                if split(left):
                    return True
        return False

    return split(tuple(range(3 * tp.k)))


def pls_feasible_brute(pls: PlsInstance, cap: int = 8) -> bool:
    """Exhaustively decide permuted-system feasibility, exactly.

    True iff some permutation ``pi`` makes ``a x = (b[pi(0)], ..., b[pi(n-1)])``
    consistent; equivalently the exact rational least-squares residual is zero.
    Decided via an integer basis of the left null space of ``a``, so no
    tolerance enters.  Refuses ``n > cap`` (default 8).
    """
    n = pls.n
    if n > cap:
        raise CapExceededError("pls_feasible_brute capped at n <= %d, got n = %d" % (cap, n))
    null_rows = _ratlin.left_nullspace_int([list(r) for r in pls.a])
    if not null_rows:
        return True
    for perm in itertools.permutations(range(n)):
        if all(sum(nr[i] * pls.b[perm[i]] for i in range(n)) == 0 for nr in null_rows):
            return True
    return False


def gen_yes_instance(k: int, c: int, seed: int) -> ThreePartitionInstance:
    """Test utility: plant ``k`` triples each summing to ``c``, then shuffle.

    Values are drawn uniformly from the admissible open interval
    ``(c/4, c/2)``; raises if ``c`` leaves that interval too tight to plant.
    """
    lo = c // 4 + 1
    hi = (c - 1) // 2
    if hi < lo:
        raise ValueError("no admissible values for c = %d" % c)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    vals: list[int] = []
    for _ in range(k):
        for _attempt in range(10000):
            a = int(rng.integers(lo, hi + 1))
            b = int(rng.integers(lo, hi + 1))
            rem = c - a - b
            if lo <= rem <= hi:
                vals.extend((a, b, rem))
                break
        else:
            raise ValueError("could not plant a triple for c = %d" % c)
    order = rng.permutation(3 * k)
    return ThreePartitionInstance(z=tuple(vals[i] for i in order), k=k, c=c)
