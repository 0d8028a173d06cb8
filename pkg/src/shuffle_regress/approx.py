"""(1+eps)-approximate joint least squares over weights and permutation.

``fptas_solve`` returns a pair ``(w, pi)`` whose cost
``sum_i (dot(w, x[pi(i)]) - y_i)^2`` is within a factor ``1 + eps`` of the best
achievable by any weights and any permutation.  The search works in an
orthonormalized coordinate system: a barrier-selected row sample pins down a
small family of candidate response assignments, each candidate contributes a
weighted least-squares center, and an axis-aligned grid around each center is
scanned with the exact one-dimensional matcher.

Cost model: with ``k`` the covariate rank, the candidate family has size
``n**m`` for ``m <= 4k`` distinct sampled rows and every grid has
``O((sqrt(k)/eps)**k)`` points, so the overall work is ``(n/eps)**O(k)``.  A
budget cap (default 50 million candidate evaluations) turns runaway instances
into a hard error instead of an open-ended computation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import BudgetExceededError
from .model import Instance, Permutation
from .perm1d import sort_match
from .rowsample import SamplingMatrix, row_sample

__all__ = [
    "Solution",
    "OrthonormalReduction",
    "orthonormalize",
    "candidate_targets",
    "build_net",
    "approx_factor",
    "fptas_solve",
]

DEFAULT_BUDGET = 50_000_000


@dataclass(frozen=True)
class Solution:
    """Weights, permutation, and the squared cost they achieve."""

    w: np.ndarray
    perm: Permutation
    cost: float


@dataclass(frozen=True)
class OrthonormalReduction:
    """Thin SVD of the covariate matrix restricted to its row space.

    ``u`` is ``n x k`` with orthonormal columns, ``sigma`` the positive singular
    values, ``v`` the ``d x k`` right factor.  A weight vector ``w_r`` in the
    reduced problem maps back to ``v @ (w_r / sigma)`` in the original one, and
    both achieve identical costs against every permutation.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def k(self) -> int:
        return self.sigma.shape[0]

    def to_original(self, w_r) -> np.ndarray:
        return self.v @ (np.asarray(w_r, dtype=float) / self.sigma)


def orthonormalize(x) -> OrthonormalReduction:
    """Reduce covariates to an orthonormal basis of their column space.

    Singular values below ``1e-9 * max`` are treated as zero, so ``k`` is the
    numerical rank; duplicated or dependent columns collapse.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("x must be 2-d")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        k = 0
    else:
        k = int(np.sum(s > 1e-9 * s[0]))
    return OrthonormalReduction(u=u[:, :k], sigma=s[:k].copy(), v=vt[:k].T.copy())


def sampled_columns(s: SamplingMatrix) -> list:
    """Distinct coordinate indices hit by the sample, ascending."""
    return sorted({entry[0] for entry in s.rows if entry is not None})


def candidate_targets(s: SamplingMatrix, y) -> Iterator[np.ndarray]:
    """Enumerate candidate right-hand sides for the sampled least squares.

    Coordinates the sample never touches are forced to zero; each remaining
    coordinate ranges over all observed responses.  Vectors come out in
    lexicographic order of the (column-sorted) nonzero coordinates, ``n**m`` of
    them for ``m`` distinct sampled columns.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    cols = sampled_columns(s)
    for choice in itertools.product(range(n), repeat=len(cols)):
        b = np.zeros(n)
        b[cols] = y[list(choice)]
        yield b


def approx_factor(n: int, k: int) -> float:
    """Approximation constant ``c = 1 + 4 (1 + sqrt(n / (4k)))**2`` of the sample."""
    return 1.0 + 4.0 * (1.0 + math.sqrt(n / (4.0 * k))) ** 2


def _grid(center: np.ndarray, half_steps: int, spacing: float) -> np.ndarray:
    """Axis-aligned grid, ``2*half_steps + 1`` points per axis, center included,
    rows in row-major order over the offset box."""
    k = center.shape[0]
    offs = (np.arange(2 * half_steps + 1) - half_steps) * spacing
    pts = np.stack(np.meshgrid(*([offs] * k), indexing="ij"), axis=-1).reshape(-1, k)
    return pts + center


def build_net(w_center, r_b: float, eps: float, c: float) -> np.ndarray:
    """Grid of weight candidates covering the ball where an optimum can hide.

    The ball has radius ``sqrt(c * r_b)`` in the infinity norm around
    ``w_center`` and the grid spacing is ``2 * sqrt(eps * r_b / c) / sqrt(k)``,
    which leaves every point of the ball within ``sqrt(eps * r_b / c)`` of some
    grid point.  ``r_b = 0`` yields the single point ``w_center``.  The center
    is itself a grid point.  Rows come out in row-major offset order.
    """
    w_center = np.asarray(w_center, dtype=float)
    if w_center.ndim != 1:
        raise ValueError("w_center must be a vector")
    k = w_center.shape[0]
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    if r_b < 0 or not math.isfinite(r_b):
        raise ValueError("r_b must be finite and >= 0")
    if r_b == 0.0 or k == 0:
        return w_center.reshape(1, -1).copy()
    spacing = 2.0 * math.sqrt(eps * r_b / c) / math.sqrt(k)
    half = math.ceil(math.sqrt(c * r_b) / spacing)
    return _grid(w_center, half, spacing)


def _min_perm_costs(a_cols: np.ndarray, y_sorted: np.ndarray) -> np.ndarray:
    """Best-permutation cost of every column of ``a_cols`` against ``y``."""
    diff = np.sort(a_cols, axis=0) - y_sorted[:, None]
    return np.einsum("ij,ij->j", diff, diff)


def fptas_solve(
    inst: Instance,
    eps: float,
    *,
    budget: Optional[int] = DEFAULT_BUDGET,
    chunk: int = 8192,
) -> Solution:
    """Approximate ``min_{w, pi} sum_i (dot(w, x[pi(i)]) - y_i)^2``.

    Guarantees ``cost <= (1 + eps) * optimum``.  Deterministic: among
    equal-cost candidates the winner is the one met earliest in enumeration
    order (candidate vector first, then row-major grid position), independent
    of internal batching.

    Raises :class:`BudgetExceededError` if the enumeration would touch more
    than ``budget`` candidate weight vectors; pass ``budget=None`` to disable.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    x = inst.x
    y = np.asarray(inst.y, dtype=float)
    n = inst.n

    red = orthonormalize(x)
    k = red.k
    if k == 0:
        m0 = sort_match(np.zeros(n), y)
        return Solution(w=np.zeros(inst.d), perm=m0.perm, cost=m0.cost)

    u = red.u
    samp = row_sample(u, 4 * k)
    c = approx_factor(n, k)
    cols = sampled_columns(samp)
    m = len(cols)
    y_sorted = np.sort(y)

    n_cand = n**m
    if budget is not None and n_cand > budget:
        raise BudgetExceededError(
            "candidate family has %d members, budget is %d" % (n_cand, budget)
        )

    # Center of candidate b depends linearly on the m chosen response values:
    # w_center(b) = pinv(S u) (S b) = vals @ gmap with gmap (m, k).
    entries = [e for e in samp.rows if e is not None]
    su = np.array([wt * u[col] for col, wt in entries])
    pin = np.linalg.pinv(su)
    gmap = np.zeros((m, k))
    pos = {col: idx for idx, col in enumerate(cols)}
    for row_idx, (col, wt) in enumerate(entries):
        gmap[pos[col]] += wt * pin[:, row_idx]

    # Pass 1: center cost r_b for every candidate assignment b.
    idx_grid = np.stack(
        np.meshgrid(*([np.arange(n, dtype=np.int32)] * m), indexing="ij"), axis=-1
    ).reshape(-1, m)
    r_all = np.empty(n_cand)
    w_all = np.empty((n_cand, k))
    for lo in range(0, n_cand, chunk):
        hi = min(lo + chunk, n_cand)
        w_chunk = y[idx_grid[lo:hi]] @ gmap
        r_all[lo:hi] = _min_perm_costs(u @ w_chunk.T, y_sorted)
        w_all[lo:hi] = w_chunk

    r_min = float(r_all.min())
    b_min = int(r_all.argmin())

    # A candidate whose center cost exceeds c * min_b r_b cannot be the
    # certificate: the certificate's own center cost is at most c * optimum
    # <= c * r_min.  Skipping those grids keeps the (1+eps) guarantee intact.
    keep_thr = c * r_min * (1.0 + 1e-9) + 1e-300
    survivors = np.flatnonzero(r_all <= keep_thr)

    # Likewise the optimum lies within sqrt((c-1) * optimum) of the certificate
    # center, so grids only need radius sqrt((c-1) * r_min), not sqrt(c * r_b).
    reach = math.sqrt((c - 1.0) * r_min) * (1.0 + 1e-9)
    spacing_unit = 2.0 * math.sqrt(eps / c) / math.sqrt(k)  # times sqrt(r_b)

    surv_r = r_all[survivors]
    surv_sp = spacing_unit * np.sqrt(surv_r)
    halves = np.zeros(survivors.size, dtype=np.int64)
    pos_r = surv_r > 0.0
    if reach > 0.0:
        halves[pos_r] = np.ceil(reach / surv_sp[pos_r]).astype(np.int64)
    grid_sizes = (2 * halves + 1) ** k
    total_evals = int(grid_sizes.sum())
    if budget is not None and total_evals > budget:
        raise BudgetExceededError(
            "net enumeration needs %d weight evaluations, budget is %d"
            % (total_evals, budget)
        )

    # Incumbent: center of the cheapest candidate (a grid point of its own
    # net, sitting at the middle row-major index).
    at_min = int(np.searchsorted(survivors, b_min))
    best_cost = r_min
    best_key = (b_min, (int(grid_sizes[at_min]) - 1) // 2)
    best_w = w_all[b_min].copy()

    # Pass 2: scan surviving grids, batched by half-width so each batch shares
    # one offset pattern.  Points are pruned by the Lipschitz lower bound
    # |sqrt(cost(v)) - sqrt(r_b)| <= ||v - center|| (columns of u are
    # orthonormal); dropped points are strictly worse than the incumbent, so
    # the lexicographic minimum over (cost, candidate, grid position) is
    # unaffected and the result does not depend on batch boundaries.
    by_half: dict[int, list[int]] = {}
    for s_pos, h in enumerate(halves.tolist()):
        by_half.setdefault(h, []).append(s_pos)

    for h in sorted(by_half):
        members = np.asarray(by_half[h], dtype=np.int64)
        base = _grid(np.zeros(k), h, 1.0)  # integer offsets, row-major
        base_norm = np.linalg.norm(base, axis=1)
        npts = base.shape[0]
        group = max(1, chunk // npts)
        for lo in range(0, members.size, group):
            mem = members[lo : lo + group]
            b_idx = survivors[mem]
            sp = surv_sp[mem]
            rt = np.sqrt(surv_r[mem])
            lb = np.abs(sp[:, None] * base_norm[None, :] - rt[:, None])
            keep_b, keep_p = np.nonzero(lb * lb <= best_cost * (1.0 + 1e-12) + 1e-300)
            if keep_b.size == 0:
                continue
            pts = w_all[b_idx[keep_b]] + sp[keep_b, None] * base[keep_p]
            costs = _min_perm_costs(u @ pts.T, y_sorted)
            j = int(costs.argmin())  # first minimum: smallest (candidate, point)
            cand = float(costs[j])
            key = (int(b_idx[keep_b[j]]), int(keep_p[j]))
            if cand < best_cost or (cand == best_cost and key < best_key):
                best_cost = cand
                best_key = key
                best_w = pts[j].copy()

    w_orig = red.to_original(best_w)
    matched = sort_match(x @ w_orig, y)
    return Solution(w=w_orig, perm=matched.perm, cost=matched.cost)
