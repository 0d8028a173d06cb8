"""Instance types, random generators, quantization, and JSON serialization.

A problem instance couples an ``n x d`` covariate matrix ``x`` with a response
vector ``y`` of length ``n``; responses are observed in an order scrambled by a
hidden permutation.  Anchored instances carry one extra measurement ``(x0, y0)``
whose pairing is the solver's to guess.

Randomness contract: every generator derives three independent Philox streams
from the user seed via ``numpy.random.SeedSequence(seed).spawn(3)``.  Stream 0
drives the covariates, stream 1 the hidden permutation (Fisher-Yates via
``Generator.permutation``), stream 2 the noise.  Normal variates come from
numpy's Ziggurat sampler.  The same seed therefore reproduces bit-identical
instances, and each field can be regenerated without drawing the others.

JSON schema (one instance per file)::

    {"n": 3, "d": 2,
     "x": [[...], ...],            # n rows of d floats
     "y": [...],                   # n floats
     "anchor": {"x0": [...], "y0": ...},          # optional
     "truth": {"w_bar": [...], "pi_bar": [...], "sigma": ...},  # optional
     "quantization": {"p": 16}}    # optional

Floats are written with Python's shortest round-trip repr, so a write/read
cycle reproduces every entry bit-exactly.  NaN and infinity are rejected in
both directions; ``truth`` stores ``sigma`` rather than an SNR so the noiseless
case needs no infinity sentinel (the SNR is derived on load).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ParseError, SchemaError

__all__ = [
    "Permutation",
    "GroundTruth",
    "Instance",
    "AnchoredInstance",
    "QuantizationConfig",
    "QuantizedInstance",
    "QuantizedAnchoredInstance",
    "InstanceRecord",
    "gen_gaussian_noisy",
    "gen_uniform_noisy",
    "gen_noiseless_anchored",
    "random_unit_vector",
    "responses",
    "quantize_value",
    "quantize",
    "quantize_noiseless",
    "write_instance",
    "read_instance",
    "read_instance_record",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``{0, ..., m-1}`` stored as the mapping ``i -> map[i]``."""

    map: tuple[int, ...]

    def __post_init__(self):
        m = len(self.map)
        if m == 0:
            raise ValueError("empty permutation")
        if sorted(self.map) != list(range(m)):
            raise ValueError("map is not a bijection on 0..%d" % (m - 1))
        object.__setattr__(self, "map", tuple(int(v) for v in self.map))

    def __len__(self) -> int:
        return len(self.map)

    def __call__(self, i: int) -> int:
        return self.map[i]

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(m)))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.map)
        for i, j in enumerate(self.map):
            inv[j] = i
        return Permutation(tuple(inv))

    def gather(self, values) -> np.ndarray:
        """Reorder ``values`` so position ``i`` holds ``values[map[i]]``."""
        return np.asarray(values)[np.asarray(self.map, dtype=np.intp)]

    def matrix(self) -> np.ndarray:
        m = len(self.map)
        P = np.zeros((m, m))
        P[np.arange(m), np.asarray(self.map)] = 1.0
        return P


@dataclass(frozen=True)
class GroundTruth:
    """Hidden parameters behind a generated instance.

    ``snr`` is derived: ``||w_bar||^2 / sigma^2``, with ``math.inf`` used as the
    sentinel for the noiseless case ``sigma = 0``.
    """

    w_bar: np.ndarray
    pi_bar: Permutation
    sigma: float
    snr: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "w_bar", _readonly(self.w_bar))
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite and >= 0")
        nrm2 = float(self.w_bar @ self.w_bar)
        snr = math.inf if self.sigma == 0 else nrm2 / self.sigma**2
        object.__setattr__(self, "snr", snr)


def _check_xy(x: np.ndarray, y: np.ndarray):
    if x.ndim != 2 or y.ndim != 1:
        raise ValueError("x must be 2-d and y 1-d")
    n, d = x.shape
    if n == 0 or d == 0:
        raise ValueError("empty instance")
    if y.shape[0] != n:
        raise ValueError("y length %d does not match n=%d" % (y.shape[0], n))
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise ValueError("non-finite entries")


@dataclass(frozen=True)
class Instance:
    """Covariates ``x`` (n rows, d columns) and scrambled responses ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _readonly(self.x)
        y = _readonly(self.y)
        _check_xy(x, y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class AnchoredInstance:
    """Instance plus one held-out measurement ``(x0, y0)`` of unknown pairing."""

    x0: np.ndarray
    y0: float
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _readonly(self.x)
        y = _readonly(self.y)
        x0 = _readonly(self.x0)
        _check_xy(x, y)
        if x0.shape != (x.shape[1],):
            raise ValueError("x0 must have length d")
        if not np.all(np.isfinite(x0)) or not math.isfinite(self.y0):
            raise ValueError("non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "y0", float(self.y0))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class QuantizationConfig:
    """Grid resolution: values are rounded to integer multiples of ``2**-p``."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 1:
            raise ValueError("p must be an integer >= 1")


@dataclass(frozen=True)
class QuantizedInstance:
    """Exact-rational counterpart of :class:`Instance`."""

    x: tuple[tuple[Fraction, ...], ...]
    y: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def d(self) -> int:
        return len(self.x[0])


@dataclass(frozen=True)
class QuantizedAnchoredInstance:
    """Exact-rational counterpart of :class:`AnchoredInstance`."""

    x0: tuple[Fraction, ...]
    y0: Fraction
    x: tuple[tuple[Fraction, ...], ...]
    y: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def d(self) -> int:
        return len(self.x[0])


def _streams(seed: int):
    sx, sp, se = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.Generator(np.random.Philox(sx)),
        np.random.Generator(np.random.Philox(sp)),
        np.random.Generator(np.random.Philox(se)),
    )


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the unit sphere in R^d (Gaussian direction, normalized)."""
    while True:
        v = rng.standard_normal(d)
        nrm = float(np.linalg.norm(v))
        if nrm > 1e-12:
            return v / nrm


def responses(x: np.ndarray, perm: Permutation, w: np.ndarray) -> np.ndarray:
    """Noise-free responses ``y_i = dot(w, x[perm(i)])``, one row dot per entry.

    Generators and verification code share this routine so the identity holds
    bit-exactly in doubles.
    """
    w = np.asarray(w, dtype=float)
    return np.array([float(np.dot(x[j], w)) for j in perm.map])


def _gen_noisy(w_bar, n, sigma, seed, draw_x):
    w_bar = np.asarray(w_bar, dtype=float)
    d = w_bar.shape[0]
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    if sigma < 0 or not math.isfinite(sigma):
        raise ValueError("sigma must be finite and >= 0")
    gx, gp, ge = _streams(seed)
    x = draw_x(gx, n, d)
    pi = Permutation(tuple(int(v) for v in gp.permutation(n)))
    y = responses(x, pi, w_bar)
    if sigma > 0:
        y = y + sigma * ge.standard_normal(n)
    inst = Instance(x=x, y=y)
    return inst, GroundTruth(w_bar=w_bar, pi_bar=pi, sigma=float(sigma))


def gen_gaussian_noisy(w_bar, n: int, sigma: float, seed: int):
    """Instance with i.i.d. standard normal covariate entries.

    Returns ``(Instance, GroundTruth)``.  With ``sigma = 0`` the identity
    ``y_i = dot(w_bar, x[pi_bar(i)])`` holds bit-exactly in doubles.
    """
    return _gen_noisy(w_bar, n, sigma, seed, lambda g, n_, d_: g.standard_normal((n_, d_)))


def gen_uniform_noisy(w_bar, n: int, sigma: float, seed: int):
    """Instance with covariate entries uniform on ``[-1/2, 1/2]``."""
    return _gen_noisy(w_bar, n, sigma, seed, lambda g, n_, d_: g.random((n_, d_)) - 0.5)


def gen_noiseless_anchored(w_bar, n: int, seed: int, *, anchored: bool = True):
    """Noise-free anchored instance with ``n + 1`` Gaussian covariates.

    The hidden permutation acts on ``{0, ..., n}``.  With ``anchored=True``
    (default) it fixes 0, i.e. the held-out response ``y0`` really pairs with
    ``x0``; the remaining ``n`` measurements are scrambled uniformly.  With
    ``anchored=False`` the permutation is uniform over all ``(n+1)!`` orders and
    ``pi_bar.map[0]`` records which covariate the anchor response pairs with.

    Returns ``(AnchoredInstance, GroundTruth)`` where ``truth.pi_bar`` lives on
    ``{0, ..., n}``: row ``i >= 1`` of the instance pairs with covariate index
    ``pi_bar(i)`` in the combined list ``[x0, x_1, ..., x_n]``.
    """
    w_bar = np.asarray(w_bar, dtype=float)
    d = w_bar.shape[0]
    if d < 1:
        raise ValueError("d must be >= 1")
    if n < d:
        raise ValueError("need n >= d (at least d + 1 measurements)")
    gx, gp, _ = _streams(seed)
    xs = gx.standard_normal((n + 1, d))
    if anchored:
        tail = gp.permutation(n) + 1
        pi = Permutation((0, *(int(v) for v in tail)))
    else:
        pi = Permutation(tuple(int(v) for v in gp.permutation(n + 1)))
    ys = responses(xs, pi, w_bar)
    inst = AnchoredInstance(x0=xs[0], y0=float(ys[0]), x=xs[1:], y=ys[1:])
    return inst, GroundTruth(w_bar=w_bar, pi_bar=pi, sigma=0.0)


def quantize_value(v: Union[float, int, Fraction], p: int) -> Fraction:
    """Nearest multiple of ``2**-p`` with ties rounded half-to-even. Exact."""
    scaled = Fraction(v) * (1 << p)
    return Fraction(round(scaled), 1 << p)


def quantize(inst, cfg: QuantizationConfig):
    """Round every entry of an instance to the ``2**-p`` grid, exactly.

    Idempotent: re-quantizing at the same ``p`` is the identity.  Accepts plain
    or already-quantized instances, anchored or not, and returns the matching
    quantized type.
    """
    p = cfg.p

    def qv(v):
        return quantize_value(v, p)

    def qm(rows):
        return tuple(tuple(qv(v) for v in row) for row in rows)

    if isinstance(inst, (Instance, QuantizedInstance)):
        return QuantizedInstance(x=qm(inst.x), y=tuple(qv(v) for v in inst.y))
    if isinstance(inst, (AnchoredInstance, QuantizedAnchoredInstance)):
        return QuantizedAnchoredInstance(
            x0=tuple(qv(v) for v in inst.x0),
            y0=qv(inst.y0),
            x=qm(inst.x),
            y=tuple(qv(v) for v in inst.y),
        )
    raise TypeError("expected an instance, got %r" % type(inst).__name__)


def quantize_noiseless(
    inst: AnchoredInstance, truth: GroundTruth, cfg: QuantizationConfig
):
    """Quantize covariates and the hidden weights, then recompute responses.

    Rounding ``y`` directly would break the exact identity
    ``y_i = <w_bar, x_{pi_bar(i)}>`` that noiseless recovery relies on, so this
    variant rounds ``x0``, ``x`` and ``w_bar`` to the grid and rebuilds each
    response as the exact rational inner product (denominators ``2**-2p``).

    Returns ``(QuantizedAnchoredInstance, w_q)`` with ``w_q`` the quantized
    weight vector as a tuple of Fractions.
    """
    if truth.sigma != 0:
        raise ValueError("requires a noiseless ground truth (sigma = 0)")
    p = cfg.p
    w_q = tuple(quantize_value(v, p) for v in truth.w_bar)
    rows = [tuple(quantize_value(v, p) for v in inst.x0)]
    rows += [tuple(quantize_value(v, p) for v in row) for row in inst.x]
    pi = truth.pi_bar
    ys = [sum(wj * xj for wj, xj in zip(w_q, rows[pi(i)])) for i in range(len(pi))]
    return (
        QuantizedAnchoredInstance(
            x0=rows[0], y0=ys[0], x=tuple(rows[1:]), y=tuple(ys[1:])
        ),
        w_q,
    )


# ---------------------------------------------------------------------------
# JSON serialization


@dataclass(frozen=True)
class InstanceRecord:
    """Everything a file may carry: the instance plus optional metadata."""

    instance: Union[Instance, AnchoredInstance]
    truth: Optional[GroundTruth]
    p: Optional[int]


def _reject_constant(name):
    raise ParseError("non-finite literal %r not allowed" % name)


def _require(cond: bool, msg: str):
    if not cond:
        raise SchemaError(msg)


def _float_list(obj, what: str, length: int) -> list:
    _require(isinstance(obj, list) and len(obj) == length, "%s must be a list of length %d" % (what, length))
    out = []
    for v in obj:
        _require(isinstance(v, (int, float)) and not isinstance(v, bool), "%s entries must be numbers" % what)
        v = float(v)
        _require(math.isfinite(v), "%s entries must be finite" % what)
        out.append(v)
    return out


def write_instance(path, inst, *, truth: Optional[GroundTruth] = None, p: Optional[int] = None):
    """Write an instance (and optional truth / quantization metadata) as JSON."""
    anchored = isinstance(inst, AnchoredInstance)
    doc = {
        "n": inst.n,
        "d": inst.d,
        "x": [[float(v) for v in row] for row in inst.x],
        "y": [float(v) for v in inst.y],
    }
    if anchored:
        doc["anchor"] = {"x0": [float(v) for v in inst.x0], "y0": float(inst.y0)}
    if truth is not None:
        doc["truth"] = {
            "w_bar": [float(v) for v in truth.w_bar],
            "pi_bar": list(truth.pi_bar.map),
            "sigma": float(truth.sigma),
        }
    if p is not None:
        doc["quantization"] = {"p": int(p)}
    with open(path, "w") as fh:
        json.dump(doc, fh, allow_nan=False, indent=1)
        fh.write("\n")


def read_instance_record(path) -> InstanceRecord:
    """Parse an instance file, validating the schema field by field."""
    try:
        with open(path) as fh:
            doc = json.load(fh, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ParseError("invalid JSON: %s" % e) from e
    _require(isinstance(doc, dict), "top level must be an object")
    for key in ("n", "d", "x", "y"):
        _require(key in doc, "missing field %r" % key)
    n, d = doc["n"], doc["d"]
    _require(isinstance(n, int) and n >= 1, "n must be an integer >= 1")
    _require(isinstance(d, int) and d >= 1, "d must be an integer >= 1")
    _require(isinstance(doc["x"], list) and len(doc["x"]) == n, "x must have n rows")
    x = np.array([_float_list(row, "x row", d) for row in doc["x"]])
    y = np.array(_float_list(doc["y"], "y", n))

    if "anchor" in doc:
        anc = doc["anchor"]
        _require(isinstance(anc, dict) and set(anc) == {"x0", "y0"}, "anchor must hold x0 and y0")
        x0 = np.array(_float_list(anc["x0"], "x0", d))
        _require(isinstance(anc["y0"], (int, float)) and not isinstance(anc["y0"], bool), "y0 must be a number")
        y0 = float(anc["y0"])
        _require(math.isfinite(y0), "y0 must be finite")
        inst: Union[Instance, AnchoredInstance] = AnchoredInstance(x0=x0, y0=y0, x=x, y=y)
    else:
        inst = Instance(x=x, y=y)

    truth = None
    if "truth" in doc:
        t = doc["truth"]
        _require(isinstance(t, dict) and {"w_bar", "pi_bar", "sigma"} <= set(t), "truth must hold w_bar, pi_bar, sigma")
        w_bar = np.array(_float_list(t["w_bar"], "w_bar", d))
        m = n + 1 if "anchor" in doc else n
        pm = t["pi_bar"]
        _require(isinstance(pm, list) and len(pm) == m and all(isinstance(v, int) for v in pm), "pi_bar must be a list of %d integers" % m)
        try:
            pi = Permutation(tuple(pm))
        except ValueError as e:
            raise SchemaError("pi_bar: %s" % e) from e
        sigma = t["sigma"]
        _require(isinstance(sigma, (int, float)) and not isinstance(sigma, bool) and math.isfinite(float(sigma)) and sigma >= 0, "sigma must be a finite number >= 0")
        truth = GroundTruth(w_bar=w_bar, pi_bar=pi, sigma=float(sigma))

    p = None
    if "quantization" in doc:
        q = doc["quantization"]
        _require(isinstance(q, dict) and set(q) == {"p"}, "quantization must hold p")
        _require(isinstance(q["p"], int) and q["p"] >= 1, "quantization p must be an integer >= 1")
        p = q["p"]

    return InstanceRecord(instance=inst, truth=truth, p=p)


def read_instance(path) -> Union[Instance, AnchoredInstance]:
    """Parse an instance file and return just the instance."""
    return read_instance_record(path).instance
