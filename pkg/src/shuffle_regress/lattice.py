"""Exact recovery of weights and correspondence from noiseless quantized data.

The pipeline turns "which response belongs to which covariate" into a subset-sum
problem: with one anchored measurement ``(x0, y0)`` and exact arithmetic,
``y0 = sum over matched pairs (i, j) of y_i * <pinv(x) e_j, x0>``, so the
correct correspondence is a subset of the ``n^2`` source values summing exactly
to ``y0``.  Low-density subset sums of this kind are solved by lattice basis
reduction: embed the instance in an integer lattice scaled by a large ``beta``
and look for a reduced vector of the pattern ``z * (1, indicator, 0)``.

All arithmetic on this path is exact: rationals in the setup, arbitrary-size
integers inside the reduction.  Floating point would void the recovered
certificate, which is checked by exact re-substitution before anything is
returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath

from . import _ratlin
from .errors import DegenerateInstanceError, RankDeficiencyError
from .model import Permutation, QuantizedAnchoredInstance

__all__ = [
    "LatticeBasis",
    "SubsetSumInstance",
    "SubsetSearchResult",
    "RecoveryResult",
    "lll_reduce",
    "subset_sum_basis",
    "lagarias_odlyzko",
    "build_sources",
    "w_norm_lower_bound",
    "epsilon_bound",
    "default_beta",
    "find_permutation",
    "recover",
]


@dataclass(frozen=True)
class LatticeBasis:
    """Integer basis given as columns, plus the denominator cleared to build it.

    ``scale`` records the factor applied to the (originally rational) bottom
    row during integerization; the reduction itself only ever sees integers.
    """

    columns: tuple[tuple[int, ...], ...]
    scale: int = 1

    def __post_init__(self):
        if not self.columns:
            raise ValueError("empty basis")
        dim = len(self.columns[0])
        if any(len(c) != dim for c in self.columns):
            raise ValueError("ragged columns")
        if len(self.columns) > dim:
            raise ValueError("more columns than ambient dimension")
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        object.__setattr__(
            self, "columns", tuple(tuple(int(v) for v in c) for c in self.columns)
        )

    @property
    def dim(self) -> int:
        return len(self.columns[0])

    @property
    def ncols(self) -> int:
        return len(self.columns)


def _round_div(a: int, b: int) -> int:
    # nearest integer to a / b for b > 0 (half rounds toward +inf)
    return (2 * a + b) // (2 * b)


def lll_reduce(basis: LatticeBasis, delta: Fraction = Fraction(3, 4)) -> LatticeBasis:
    """Lenstra-Lenstra-Lovasz reduction in exact integer arithmetic.

    Uses the classic integral bookkeeping (Gram determinants ``d_i`` and scaled
    Gram-Schmidt coefficients ``lambda_{i,j} = d_j mu_{i,j}``) so no rounding
    ever occurs; floating point here would void the defect bound.  With the
    default ``delta = 3/4`` the first output column satisfies
    ``||b_1|| <= 2**((k-1)/2) * lambda_1`` for a rank-``k`` input.  The output
    spans the same lattice (the change of basis is unimodular).

    ``delta`` is configurable in ``(1/4, 99/100]``.  Raises ``ValueError`` on
    dependent columns.
    """
    delta = Fraction(delta)
    if not (Fraction(1, 4) < delta <= Fraction(99, 100)):
        raise ValueError("delta must lie in (1/4, 99/100]")
    p, q = delta.numerator, delta.denominator
    cols = [list(c) for c in basis.columns]
    m = len(cols)

    def dot(u, v):
        return sum(a * b for a, b in zip(u, v))

    if m == 1:
        if not any(cols[0]):
            raise ValueError("columns not linearly independent")
        return LatticeBasis(columns=(tuple(cols[0]),), scale=basis.scale)

    dvec = [0] * (m + 1)
    dvec[0] = 1
    dvec[1] = dot(cols[0], cols[0])
    if dvec[1] == 0:
        raise ValueError("columns not linearly independent")
    lam = [[0] * (m + 1) for _ in range(m + 1)]  # lam[i][j], 1-based, j < i

    def red(k: int, l: int):
        if 2 * abs(lam[k][l]) > dvec[l]:
            r = _round_div(lam[k][l], dvec[l])
            bk, bl = cols[k - 1], cols[l - 1]
            cols[k - 1] = [a - r * b for a, b in zip(bk, bl)]
            lam[k][l] -= r * dvec[l]
            for i in range(1, l):
                lam[k][i] -= r * lam[l][i]

    k = 2
    kmax = 1
    while k <= m:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(cols[k - 1], cols[j - 1])
                for i in range(1, j):
                    u = (dvec[i] * u - lam[k][i] * lam[j][i]) // dvec[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    dvec[k] = u
                    if u == 0:
                        raise ValueError("columns not linearly independent")
        red(k, k - 1)
        if q * (dvec[k] * dvec[k - 2] + lam[k][k - 1] ** 2) < p * dvec[k - 1] ** 2:
            # Lovasz condition fails: swap columns k-1, k and fix bookkeeping
            cols[k - 1], cols[k - 2] = cols[k - 2], cols[k - 1]
            for j in range(1, k - 1):
                lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
            lbar = lam[k][k - 1]
            bnew = (dvec[k - 2] * dvec[k] + lbar * lbar) // dvec[k - 1]
            for i in range(k + 1, kmax + 1):
                t = lam[i][k]
                lam[i][k] = (dvec[k] * lam[i][k - 1] - lbar * t) // dvec[k - 1]
                lam[i][k - 1] = (bnew * t + lbar * lam[i][k]) // dvec[k]
            dvec[k - 1] = bnew
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1

    return LatticeBasis(columns=tuple(tuple(c) for c in cols), scale=basis.scale)


@dataclass(frozen=True)
class SubsetSumInstance:
    """Exact subset-sum data: ``sources`` indexed by hashable keys, a target,
    and the embedding scale ``beta`` (set later if built without one)."""

    sources: dict
    target: Fraction
    beta: Optional[Fraction] = None

    def __post_init__(self):
        if not self.sources:
            raise ValueError("no sources")
        object.__setattr__(
            self, "sources", {k: Fraction(v) for k, v in self.sources.items()}
        )
        object.__setattr__(self, "target", Fraction(self.target))
        if self.beta is not None:
            b = Fraction(self.beta)
            if b <= 0:
                raise ValueError("beta must be positive")
            object.__setattr__(self, "beta", b)

    def with_beta(self, beta) -> "SubsetSumInstance":
        return SubsetSumInstance(sources=dict(self.sources), target=self.target, beta=beta)


@dataclass(frozen=True)
class SubsetSearchResult:
    """Outcome of the lattice search: a verified key subset or ``None``.

    ``from_fallback`` is True when the pattern was found on a reduced basis
    vector other than the first.
    """

    subset: Optional[tuple]
    from_fallback: bool = False


def subset_sum_basis(ssi: SubsetSumInstance) -> tuple[LatticeBasis, list]:
    """Embedding lattice for a subset-sum instance, plus the source key order.

    With ``N`` sources ``c_1..c_N`` (keys sorted) and target ``t``, the basis
    has ``N + 1`` columns in dimension ``N + 2``: column 0 is ``e_0`` on top of
    ``beta * t``, column ``j >= 1`` is ``e_j`` on top of ``-beta * c_j``; the
    bottom row is scaled by the common denominator so every entry is an
    integer.  A subset ``S`` summing to ``t`` corresponds to the lattice vector
    ``(1, indicator(S), 0)`` of squared length ``|S| + 1``.
    """
    if ssi.beta is None:
        raise ValueError("instance has no beta")
    keys = sorted(ssi.sources)
    bt = ssi.beta * ssi.target
    bcs = [ssi.beta * ssi.sources[k] for k in keys]
    scale = math.lcm(bt.denominator, *(v.denominator for v in bcs))
    n1 = len(keys) + 1
    columns = []
    for j in range(n1):
        col = [0] * (n1 + 1)
        col[j] = 1
        col[-1] = int(bt * scale) if j == 0 else -int(bcs[j - 1] * scale)
        columns.append(tuple(col))
    return LatticeBasis(columns=tuple(columns), scale=scale), keys


def _indicator_subset(col: Sequence[int], keys: list) -> Optional[tuple]:
    if col[-1] != 0:
        return None
    z = col[0]
    if z == 0:
        return None
    picked = []
    for key, v in zip(keys, col[1:-1]):
        if v == z:
            picked.append(key)
        elif v != 0:
            return None
    return tuple(picked)


def lagarias_odlyzko(
    ssi: SubsetSumInstance, delta: Fraction = Fraction(3, 4)
) -> SubsetSearchResult:
    """Lattice search for a subset of the sources summing exactly to the target.

    Reduces the embedding basis and looks for a column of the pattern
    ``z * (1, indicator, 0)`` with ``z != 0`` and an exactly zero last
    coordinate.  The first basis vector is checked first; failing that, the
    remaining reduced vectors are scanned (``from_fallback`` marks that case).
    Every candidate subset is re-verified by exact summation before being
    returned.  Heuristic: succeeds with high probability when the sources have
    many more bits than ``n^2`` (low density), which is what a large ``beta``
    buys in the recovery pipeline.
    """
    basis, keys = subset_sum_basis(ssi)
    red = lll_reduce(basis, delta)
    for idx, col in enumerate(red.columns):
        subset = _indicator_subset(col, keys)
        if subset is not None:
            if sum((ssi.sources[k] for k in subset), Fraction(0)) == ssi.target:
                return SubsetSearchResult(subset=subset, from_fallback=idx > 0)
    return SubsetSearchResult(subset=None)


def build_sources(x0, x, y, y0) -> SubsetSumInstance:
    """Subset-sum sources whose correct-match subset sums to the anchor response.

    For exact data ``y_i = <w, x_{pi(i)}>`` with full-column-rank ``x``, the
    value ``c[(i, j)] = y_i * <pinv(x) e_j, x0>`` summed over the matched pairs
    ``(i, pi(i))`` equals ``y0 = <w, x0>``.  Keys are 0-based ``(response,
    covariate)`` pairs; ``beta`` is left unset.

    Raises :class:`RankDeficiencyError` when ``x`` lacks full column rank.
    """
    xm = _ratlin.mat(x)
    n = len(xm)
    d = len(xm[0])
    if n < d:
        raise ValueError("need at least d measurements")
    x0 = [Fraction(v) for v in x0]
    y = [Fraction(v) for v in y]
    if len(x0) != d or len(y) != n:
        raise ValueError("shape mismatch")
    pinv = _ratlin.pinv_full_col_rank(xm)  # d x n
    proj = [sum(pinv[r][j] * x0[r] for r in range(d)) for j in range(n)]
    sources = {(i, j): y[i] * proj[j] for i in range(n) for j in range(n)}
    return SubsetSumInstance(sources=sources, target=Fraction(y0), beta=None)


def w_norm_lower_bound(y) -> float:
    """Data-driven lower estimate ``sqrt(sum(y^2) / (2 n))`` of ``||w||_2``.

    For responses generated as ``<w, x>`` with standard normal covariates, the
    sum concentrates around ``n ||w||^2``, so this sits below ``||w||`` with
    overwhelming probability once ``n`` is moderate.
    """
    ys = [float(v) for v in y]
    if not ys:
        raise ValueError("empty response vector")
    return math.sqrt(sum(v * v for v in ys) / (2 * len(ys)))


def _mpf_to_fraction(t) -> Fraction:
    # raw libmp tuple (sign, mantissa, exponent, bitcount); specials have
    # mantissa 0 with a nonzero exponent marker
    sign, man, exp, _ = t
    if man == 0 and exp != 0:
        raise ArithmeticError("non-finite interval endpoint")
    if man == 0:
        return Fraction(0)
    num = -int(man) if sign else int(man)
    return Fraction(num) * Fraction(2) ** int(exp)


def epsilon_bound(
    n: int,
    d: int,
    delta: Union[float, Fraction],
    w_norm_lb: Union[float, Fraction],
    *,
    zr_coeff: int = 1,
) -> Fraction:
    """Separation margin guaranteed for wrong-subset sums, as an exact rational.

    Evaluates

        (pi / 4) * sqrt((d - 1) / n)
            * (delta / (6 * 2**(zr_coeff * n**4)))**(2 + 1/(d - 1))
            / (sqrt(n) + sqrt(d) + sqrt(2 ln(2 / delta)))**2
            * w_norm_lb

    in outward-rounded interval arithmetic and returns the lower endpoint, so
    the result is a true lower bound of the real value.  The ``2**(zr_coeff *
    n**4)`` term over-approximates the count of sign patterns realizable by
    the data; ``zr_coeff`` scales its exponent.

    ``d = 1`` is refused: the exponent ``1/(d - 1)`` is undefined there, so
    callers must supply their own margin instead.
    """
    if d < 2:
        raise ValueError("d must be >= 2 (margin exponent undefined at d = 1)")
    if n < d:
        raise ValueError("need n >= d")
    if zr_coeff < 1:
        raise ValueError("zr_coeff must be >= 1")
    delta = Fraction(delta)
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    wlb = Fraction(w_norm_lb)
    if wlb <= 0:
        raise ValueError("w_norm_lb must be positive")

    iv = mpmath.iv
    saved = iv.prec
    try:
        iv.prec = 96

        def as_iv(fr: Fraction):
            return iv.mpf(fr.numerator) / iv.mpf(fr.denominator)

        dl = as_iv(delta)
        expo = as_iv(Fraction(2) + Fraction(1, d - 1))
        base = dl / (6 * iv.mpf(2) ** (zr_coeff * n**4))
        numer = (iv.pi / 4) * iv.sqrt(iv.mpf(d - 1) / n) * base**expo * as_iv(wlb)
        denom = (iv.sqrt(iv.mpf(n)) + iv.sqrt(iv.mpf(d)) + iv.sqrt(2 * iv.log(2 / dl))) ** 2
        lo = (numer / denom)._mpi_[0]
    finally:
        iv.prec = saved
    out = _mpf_to_fraction(lo)
    if out <= 0:
        raise ArithmeticError("interval lower bound collapsed to zero")
    return out


def default_beta(n: int, eps_hat: Fraction, *, half_exponent: bool = False) -> Fraction:
    """Smallest power of two at least ``2**a / eps_hat``.

    The guarantee only needs ``a = ceil(n^2 / 2)`` bits of separation
    (``half_exponent=True``); the default takes the conservative ``a = n^2``.
    """
    eps_hat = Fraction(eps_hat)
    if eps_hat <= 0:
        raise ValueError("eps_hat must be positive")
    a = math.ceil(n * n / 2) if half_exponent else n * n
    target = Fraction(2) ** a / eps_hat
    e = target.numerator.bit_length() - target.denominator.bit_length() - 1
    while Fraction(2) ** e < target:
        e += 1
    return Fraction(2) ** e


def find_permutation(
    inst: QuantizedAnchoredInstance,
    delta: Union[float, Fraction],
    beta: Union[int, Fraction],
    *,
    eps_override: Optional[Union[float, Fraction]] = None,
) -> Optional[Permutation]:
    """Correspondence for the ``n`` unanchored measurements, assuming the anchor
    pairing ``(x0, y0)`` is genuine.

    Runs the lattice subset-sum search over the ``n^2`` sources; succeeds only
    if the returned subset is exactly a permutation support (each response and
    each covariate appearing once).  The returned map sends response index to
    covariate index, both 0-based over the unanchored block.

    ``beta`` must satisfy ``beta >= 2**(n^2/2) / eps_hat`` where ``eps_hat``
    comes from :func:`epsilon_bound` (or ``eps_override``); smaller values are
    rejected.  Returns ``None`` on failure.  Raises
    :class:`DegenerateInstanceError` when every unanchored response is zero
    (the margin bound is vacuous there).
    """
    n = inst.n
    d = inst.d
    if all(v == 0 for v in inst.y):
        raise DegenerateInstanceError("unanchored responses all zero")
    if eps_override is not None:
        eps_hat = Fraction(eps_override)
        if eps_hat <= 0:
            raise ValueError("eps_override must be positive")
    else:
        eps_hat = epsilon_bound(n, d, delta, w_norm_lower_bound(inst.y))
    beta = Fraction(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta**2 * eps_hat**2 < Fraction(2) ** (n * n):
        raise ValueError("beta below 2**(n^2/2) / eps_hat")

    ssi = build_sources(inst.x0, inst.x, inst.y, inst.y0)
    if ssi.target == 0 and all(v == 0 for v in ssi.sources.values()):
        raise DegenerateInstanceError("zero target with all-zero sources")
    res = lagarias_odlyzko(ssi.with_beta(beta))
    if res.subset is None:
        return None
    hits_resp = [0] * n
    hits_cov = [0] * n
    mapping = [0] * n
    for i, j in res.subset:
        hits_resp[i] += 1
        hits_cov[j] += 1
        mapping[i] = j
    if any(v != 1 for v in hits_resp) or any(v != 1 for v in hits_cov):
        return None
    return Permutation(tuple(mapping))


@dataclass(frozen=True)
class RecoveryResult:
    """Exact reconstruction: global correspondence, rational weights, and the
    anchor guess (index of the covariate paired with ``y0``) that verified."""

    perm: Permutation
    w: tuple[Fraction, ...]
    anchor: int

    def as_jsonable(self) -> dict:
        return {
            "anchor": self.anchor,
            "perm": list(self.perm.map),
            "w": ["%d/%d" % (v.numerator, v.denominator) for v in self.w],
        }


def recover(
    inst: QuantizedAnchoredInstance,
    delta: Union[float, Fraction],
    *,
    beta: Optional[Union[int, Fraction]] = None,
    half_exponent: bool = False,
    eps_override: Optional[Union[float, Fraction]] = None,
) -> Optional[RecoveryResult]:
    """Exact weights and correspondence from ``n + 1`` noiseless measurements.

    Tries every anchor guess in ascending order: covariate ``a`` is swapped
    into the anchor slot, the lattice search proposes a correspondence for the
    rest, the linear system it induces is solved exactly over the rationals,
    and all ``n + 1`` equations are re-checked.  The first guess that verifies
    wins; its result satisfies ``y_i = <w, x_{perm(i)}>`` exactly for every
    measurement including the anchor.

    ``beta`` defaults to :func:`default_beta` of the internally computed (or
    overridden) margin.  Returns ``None`` if no anchor verifies.
    """
    n = inst.n
    d = inst.d
    if n < d:
        raise ValueError("need n >= d")
    ys_all = [inst.y0, *inst.y]
    if all(v == 0 for v in ys_all):
        raise DegenerateInstanceError("all responses zero")
    xs_all = [tuple(inst.x0), *(tuple(row) for row in inst.x)]

    if beta is None:
        if eps_override is not None:
            eps_hat = Fraction(eps_override)
            if eps_hat <= 0:
                raise ValueError("eps_override must be positive")
        else:
            eps_hat = epsilon_bound(n, d, delta, w_norm_lower_bound(inst.y))
        beta = default_beta(n, eps_hat, half_exponent=half_exponent)

    for a in range(n + 1):
        rows = list(xs_all)
        rows[0], rows[a] = rows[a], rows[0]
        sub = QuantizedAnchoredInstance(
            x0=rows[0], y0=Fraction(inst.y0), x=tuple(rows[1:]), y=tuple(inst.y)
        )
        try:
            pi_hat = find_permutation(sub, delta, beta, eps_override=eps_override)
        except DegenerateInstanceError:
            continue
        if pi_hat is None:
            continue
        system = [rows[1 + pi_hat(i)] for i in range(n)]
        w = _ratlin.solve(_ratlin.mat(system), list(inst.y))
        if w is None:
            continue
        # translate slot indices back to original covariate indices
        gmap = [a]
        for i in range(n):
            slot = 1 + pi_hat(i)
            gmap.append(0 if slot == a else slot)
        ok = all(
            ys_all[i] == sum(wv * xv for wv, xv in zip(w, xs_all[gmap[i]]))
            for i in range(n + 1)
        )
        if not ok:
            continue
        return RecoveryResult(perm=Permutation(tuple(gmap)), w=tuple(w), anchor=a)
    return None
