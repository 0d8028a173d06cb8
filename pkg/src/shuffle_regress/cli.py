"""Command line front end.

Subcommands:

* ``gen``                write a random instance to a JSON file
* ``solve``              solve one instance file (``fptas``, ``brute`` or ``lattice``)
* ``sweep-snr``          Monte-Carlo error / success sweep over an SNR grid (CSV)
* ``check-order-stats``  uniform order-statistics sanity report (JSON)
* ``check-w2``           sorted-projection distance decay check (CSV)
* ``reduce``             3-partition instance -> permuted-linear-system file

Exit codes: 0 success; 2 usage or validation error (bad flags, malformed
files, refused caps or budgets); 3 declared solver failure (exact recovery
verified nothing, or a check command's assertion failed); 4 internal
invariant breach.

Determinism: every command is seeded and byte-reproducible, with one
exception: the ``wall_time_s`` column of ``sweep-snr`` measures real elapsed
time.  ``--jobs`` parallelism changes timings only, never row contents or
order.  Per-trial entropy is ``SeedSequence([seed, snr_index, trial_index])``;
spawn children 0-2 feed the instance generators (covariates, permutation,
noise) and child 3 draws the weight vector.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import lattice
from .approx import DEFAULT_BUDGET, fptas_solve
from .errors import (
    BudgetExceededError,
    CapExceededError,
    DegenerateInstanceError,
    InternalInvariantError,
    NumericalBarrierError,
    ParseError,
    RankDeficiencyError,
    SchemaError,
)
from .hardness import ThreePartitionInstance, reduce_3partition
from .model import (
    AnchoredInstance,
    GroundTruth,
    Instance,
    QuantizationConfig,
    QuantizedAnchoredInstance,
    gen_gaussian_noisy,
    gen_noiseless_anchored,
    gen_uniform_noisy,
    quantize,
    quantize_noiseless,
    quantize_value,
    random_unit_vector,
    read_instance_record,
    write_instance,
)
from .oracle import brute_force, ols_given_perm
from .perm1d import sort_match

__all__ = ["main", "run_sweep", "SweepConfig", "order_stats_report", "w2_report"]

SWEEP_COLUMNS = (
    "snr",
    "n",
    "d",
    "mean_err",
    "std_err",
    "success_rate",
    "baseline_mean_err",
    "wall_time_s",
)

_BRUTE_CAP = 8


def _w_rng(entropy) -> np.random.Generator:
    # child 3: children 0-2 belong to the instance generators
    child = np.random.SeedSequence(entropy).spawn(4)[3]
    return np.random.Generator(np.random.Philox(child))


def _exact_floats(vals) -> list:
    out = []
    for fr in vals:
        f = float(fr)
        if Fraction(f) != fr:
            raise ValueError("quantized value %s not exactly representable as a float; reduce --p" % fr)
        out.append(f)
    return out


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    if args.w_norm <= 0 or not math.isfinite(args.w_norm):
        raise ValueError("--w-norm must be finite and > 0")
    if args.model == "noiseless":
        if args.snr is not None or args.sigma is not None:
            raise ValueError("--snr/--sigma do not apply to the noiseless model")
        sigma = 0.0
    else:
        if args.unanchored:
            raise ValueError("--unanchored applies to the noiseless model only")
        if (args.snr is None) == (args.sigma is None):
            raise ValueError("give exactly one of --snr or --sigma")
        if args.snr is not None:
            if args.snr <= 0:
                raise ValueError("--snr must be > 0")
            sigma = args.w_norm / math.sqrt(args.snr)
        else:
            if args.sigma < 0 or not math.isfinite(args.sigma):
                raise ValueError("--sigma must be finite and >= 0")
            sigma = args.sigma

    w_bar = random_unit_vector(args.d, _w_rng(args.seed)) * args.w_norm

    if args.model == "gaussian":
        inst, truth = gen_gaussian_noisy(w_bar, args.n, sigma, args.seed)
    elif args.model == "uniform":
        inst, truth = gen_uniform_noisy(w_bar, args.n, sigma, args.seed)
    else:
        inst, truth = gen_noiseless_anchored(w_bar, args.n, args.seed, anchored=not args.unanchored)

    if args.p is not None:
        cfg = QuantizationConfig(p=args.p)
        if args.model == "noiseless":
            # regenerate on the grid so the exact identity survives quantization
            q, w_q = quantize_noiseless(inst, truth, cfg)
            inst = AnchoredInstance(
                x0=np.array(_exact_floats(q.x0)),
                y0=_exact_floats([q.y0])[0],
                x=np.array([_exact_floats(r) for r in q.x]),
                y=np.array(_exact_floats(q.y)),
            )
            truth = GroundTruth(
                w_bar=np.array(_exact_floats(w_q)), pi_bar=truth.pi_bar, sigma=0.0
            )
        else:
            q = quantize(inst, cfg)
            inst = Instance(
                x=np.array([_exact_floats(r) for r in q.x]),
                y=np.array(_exact_floats(q.y)),
            )

    write_instance(args.output, inst, truth=None if args.no_truth else truth, p=args.p)
    print("wrote %s (model=%s n=%d d=%d)" % (args.output, args.model, args.n, args.d))
    return 0


# ---------------------------------------------------------------------------
# solve


def _exact_anchored(inst: AnchoredInstance, p: int) -> QuantizedAnchoredInstance:
    """Exact-rational view for the lattice solver: covariates snapped to the
    2^-p grid, responses taken verbatim (floats are already exact rationals)."""
    return QuantizedAnchoredInstance(
        x0=tuple(quantize_value(float(v), p) for v in inst.x0),
        y0=Fraction(float(inst.y0)),
        x=tuple(tuple(quantize_value(float(v), p) for v in row) for row in inst.x),
        y=tuple(Fraction(float(v)) for v in inst.y),
    )


def cmd_solve(args) -> int:
    rec = read_instance_record(args.instance)
    inst = rec.instance

    if args.solver in ("fptas", "brute"):
        if isinstance(inst, AnchoredInstance):
            raise ValueError("solver %r expects an unanchored instance" % args.solver)
        if args.solver == "fptas":
            if args.eps <= 0:
                raise ValueError("--eps must be > 0")
            sol = fptas_solve(inst, args.eps, budget=args.budget)
            out = {"solver": "fptas", "eps": args.eps}
        else:
            sol = brute_force(inst, cap=args.cap)
            out = {"solver": "brute"}
        out.update(
            cost=sol.cost,
            w=[float(v) for v in sol.w],
            perm=list(sol.perm.map),
        )
        print(json.dumps(out))
        return 0

    if not isinstance(inst, AnchoredInstance):
        raise ValueError("solver lattice expects an anchored instance")
    p = args.p if args.p is not None else rec.p
    if p is None:
        raise ValueError("lattice solver needs --p or a quantization block in the file")
    q = _exact_anchored(inst, p)
    res = lattice.recover(
        q,
        args.delta,
        half_exponent=(args.beta_exponent == "half"),
        eps_override=args.eps_override,
    )
    if res is None:
        print(json.dumps({"solver": "lattice", "failure": "no anchor hypothesis verified"}))
        print("failure: no anchor hypothesis verified", file=sys.stderr)
        return 3
    print(json.dumps({"solver": "lattice", **res.as_jsonable()}))
    return 0


# ---------------------------------------------------------------------------
# sweep-snr


@dataclass(frozen=True)
class SweepConfig:
    model: str
    n: int
    d: int
    snr_grid: tuple
    trials: int
    solver: str
    eps: float = 0.5
    delta: float = 0.1
    p: int = 16
    seed: int = 0
    jobs: int = 1
    budget: int = DEFAULT_BUDGET


def _sweep_cell(cfg: SweepConfig, snr_index: int, snr: float) -> list:
    t0 = time.perf_counter()
    errs: list = []
    base_errs: list = []
    successes = 0
    for trial in range(cfg.trials):
        ent = [cfg.seed, snr_index, trial]
        w_bar = random_unit_vector(cfg.d, _w_rng(ent))
        if cfg.solver == "lattice":
            inst, truth = gen_noiseless_anchored(w_bar, cfg.n, ent, anchored=False)
            q, w_q = quantize_noiseless(inst, truth, QuantizationConfig(cfg.p))
            res = lattice.recover(q, cfg.delta)
            wq = np.array([float(v) for v in w_q])
            if res is not None:
                errs.append(float(np.linalg.norm(np.array([float(v) for v in res.w]) - wq)))
                if res.perm.map == truth.pi_bar.map and res.w == w_q:
                    successes += 1
            xa = np.vstack([inst.x0[None, :], inst.x])
            ya = np.concatenate(([inst.y0], inst.y))
            base = ols_given_perm(xa, ya, truth.pi_bar)
            base_errs.append(float(np.linalg.norm(base.w - wq)))
        else:
            sigma = 0.0 if math.isinf(snr) else 1.0 / math.sqrt(snr)
            gen = gen_gaussian_noisy if cfg.model == "gaussian" else gen_uniform_noisy
            inst, truth = gen(w_bar, cfg.n, sigma, ent)
            if cfg.solver == "fptas":
                sol = fptas_solve(inst, cfg.eps, budget=cfg.budget)
            else:
                sol = brute_force(inst, cap=_BRUTE_CAP)
            errs.append(float(np.linalg.norm(sol.w - w_bar)))
            if sol.perm.map == truth.pi_bar.map:
                successes += 1
            base = ols_given_perm(inst.x, inst.y, truth.pi_bar)
            base_errs.append(float(np.linalg.norm(base.w - w_bar)))
    wall = time.perf_counter() - t0
    mean = float(np.mean(errs)) if errs else float("nan")
    std = float(np.std(errs)) if errs else float("nan")
    return [
        snr,
        cfg.n,
        cfg.d,
        mean,
        std,
        successes / cfg.trials,
        float(np.mean(base_errs)),
        wall,
    ]


def _cell_star(t):
    return _sweep_cell(*t)


def run_sweep(cfg: SweepConfig) -> list:
    """All sweep rows, in grid order, as lists matching ``SWEEP_COLUMNS``."""
    if cfg.model not in ("gaussian", "uniform", "noiseless"):
        raise ValueError("unknown model %r" % cfg.model)
    if cfg.solver not in ("fptas", "brute", "lattice"):
        raise ValueError("unknown solver %r" % cfg.solver)
    if (cfg.solver == "lattice") != (cfg.model == "noiseless"):
        raise ValueError("the lattice solver pairs with the noiseless model only")
    if cfg.n < 1 or cfg.d < 1 or cfg.trials < 1 or cfg.jobs < 1:
        raise ValueError("n, d, trials and jobs must be >= 1")
    if cfg.model == "noiseless":
        grid = (math.inf,)
    else:
        grid = tuple(float(s) for s in cfg.snr_grid)
        if not grid or any(not s > 0 for s in grid):
            raise ValueError("snr grid values must be > 0")
    if cfg.solver == "brute" and cfg.n > _BRUTE_CAP:
        cells = ", ".join("(snr=%s, n=%d, d=%d)" % (s, cfg.n, cfg.d) for s in grid)
        raise CapExceededError(
            "brute solver capped at n <= %d; refused cells: %s" % (_BRUTE_CAP, cells)
        )
    tasks = [(cfg, i, s) for i, s in enumerate(grid)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_cell_star, tasks))
    return [_sweep_cell(*t) for t in tasks]


def _default_jobs(arg: Optional[int]) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("SHUFFLE_REGRESS_JOBS")
    if env:
        try:
            return int(env)
        except ValueError as e:
            raise ValueError("SHUFFLE_REGRESS_JOBS must be an integer") from e
    return 1


def cmd_sweep(args) -> int:
    cfg = SweepConfig(
        model=args.model,
        n=args.n,
        d=args.d,
        snr_grid=tuple(_parse_grid(args.snr_grid, float)),
        trials=args.trials,
        solver=args.solver,
        eps=args.eps,
        delta=args.delta,
        p=args.p,
        seed=args.seed,
        jobs=_default_jobs(args.jobs),
        budget=args.budget,
    )
    rows = run_sweep(cfg)
    with open(args.output, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SWEEP_COLUMNS)
        wr.writerows(rows)
    print("wrote %s (%d rows)" % (args.output, len(rows)))
    return 0


# ---------------------------------------------------------------------------
# check-order-stats


def order_stats_report(n: int, trials: int, seed: int) -> dict:
    """Empirical vs exact moments of uniform order statistics on [-1/2, 1/2].

    The pair statistic is ``sum_i (u_(i) + u_(n+1-i))^2``; its exact mean is
    ``(1 - 1/(n+1))/2`` for even ``n`` and ``(1 - 1/(n+2))/2`` for odd ``n``.
    Rank means satisfy ``E[u_(r)] = r/(n+1) - 1/2``.
    """
    if n < 2 or trials < 1:
        raise ValueError("need n >= 2 and trials >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    u = rng.random((trials, n)) - 0.5
    u.sort(axis=1)
    pair_emp = float((((u + u[:, ::-1]) ** 2).sum(axis=1)).mean())
    if n % 2 == 0:
        pair_exact = 0.5 * (1.0 - 1.0 / (n + 1))
    else:
        pair_exact = 0.5 * (1.0 - 1.0 / (n + 2))
    ranks = [
        {
            "r": r,
            "empirical": float(u[:, r - 1].mean()),
            "exact": r / (n + 1) - 0.5,
        }
        for r in range(1, n + 1)
    ]
    return {
        "n": n,
        "trials": trials,
        "seed": seed,
        "pair_sum_sq": {
            "empirical": pair_emp,
            "exact": pair_exact,
            "rel_err": abs(pair_emp - pair_exact) / pair_exact,
        },
        "rank_means": ranks,
    }


def cmd_check_order_stats(args) -> int:
    rep = order_stats_report(args.n, args.trials, args.seed)
    text = json.dumps(rep, indent=1)
    print(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    if args.tol is not None and rep["pair_sum_sq"]["rel_err"] > args.tol:
        print(
            "failure: pair statistic off by %.3g (tol %.3g)"
            % (rep["pair_sum_sq"]["rel_err"], args.tol),
            file=sys.stderr,
        )
        return 3
    return 0


# ---------------------------------------------------------------------------
# check-w2


def w2_report(n_grid, d: int, trials: int, seed: int) -> list:
    """Mean squared sorted-projection distance per sample size.

    For each ``n``, draws Gaussian covariates and two independent unit
    directions, and averages ``min_perm ||(Xu)_perm - Xv||^2`` (computed by
    sorting) over trials.  Rows are dicts with ``n``, ``mean_sq`` and
    ``mean_sq_per_n``.
    """
    if d < 1 or trials < 1 or not n_grid:
        raise ValueError("need d >= 1, trials >= 1 and a nonempty n grid")
    rows = []
    for ni, n in enumerate(n_grid):
        if n < 3:
            raise ValueError("grid entries must be >= 3")
        tot = 0.0
        for trial in range(trials):
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence([seed, ni, trial]))
            )
            x = rng.standard_normal((n, d))
            u = random_unit_vector(d, rng)
            v = random_unit_vector(d, rng)
            tot += sort_match(x @ u, x @ v).cost
        mean_sq = tot / trials
        rows.append({"n": int(n), "mean_sq": mean_sq, "mean_sq_per_n": mean_sq / n})
    return rows


def cmd_check_w2(args) -> int:
    grid = _parse_grid(args.n_grid, int)
    rows = w2_report(grid, args.d, args.trials, args.seed)
    with open(args.output, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(("n", "mean_sq", "mean_sq_per_n"))
        for row in rows:
            wr.writerow((row["n"], row["mean_sq"], row["mean_sq_per_n"]))
    print("wrote %s (%d rows)" % (args.output, len(rows)))
    per_n = [row["mean_sq_per_n"] for row in rows]
    for a, b in zip(per_n, per_n[1:]):
        if b > a:
            print("failure: per-n mean increased along the grid", file=sys.stderr)
            return 3
    if len(rows) >= 2 and rows[0]["n"] == 100 and rows[-1]["n"] == 10000:
        ratio = per_n[0] / per_n[-1]
        print("shrink factor n=100 -> n=10000: %.3f" % ratio)
        if ratio < 4.0:
            print("failure: shrink factor %.3f below 4" % ratio, file=sys.stderr)
            return 3
    return 0


# ---------------------------------------------------------------------------
# reduce


def cmd_reduce(args) -> int:
    z = _parse_grid(args.z, int)
    if args.k < 1:
        raise ValueError("--k must be >= 1")
    total = sum(z)
    if total % args.k:
        raise ValueError("sum(z) = %d is not divisible by k = %d" % (total, args.k))
    tp = ThreePartitionInstance(z=tuple(z), k=args.k, c=total // args.k)
    pls = reduce_3partition(tp)
    inst = Instance(x=np.array(pls.a, dtype=float), y=np.array(pls.b, dtype=float))
    write_instance(args.output, inst)
    print("wrote %s (n=%d d=%d); zero brute-force cost means feasible" % (args.output, pls.n, pls.d))
    return 0


# ---------------------------------------------------------------------------
# parser / entry point


def _parse_grid(text: str, typ):
    try:
        vals = [typ(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise ValueError("bad grid %r: %s" % (text, e)) from e
    if not vals:
        raise ValueError("empty grid %r" % text)
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shuffle-regress",
        description="Linear regression with an unknown row correspondence.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random instance as JSON")
    g.add_argument("--model", choices=("gaussian", "uniform", "noiseless"), required=True)
    g.add_argument("--n", type=int, required=True, help="number of shuffled measurements")
    g.add_argument("--d", type=int, required=True, help="number of covariates")
    g.add_argument("--snr", type=float, help="signal-to-noise ratio ||w||^2 / sigma^2")
    g.add_argument("--sigma", type=float, help="noise standard deviation (alternative to --snr)")
    g.add_argument("--w-norm", type=float, default=1.0, help="norm of the hidden weights (default 1)")
    g.add_argument("--p", type=int, help="store values on the 2^-p grid and record the exponent")
    g.add_argument("--unanchored", action="store_true", help="noiseless only: shuffle the anchor row too")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--no-truth", action="store_true", help="omit the ground-truth block")
    g.add_argument("--output", "-o", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("--instance", required=True)
    s.add_argument("--solver", choices=("fptas", "brute", "lattice"), required=True)
    s.add_argument("--eps", type=float, default=0.5, help="fptas accuracy (default 0.5)")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="fptas evaluation budget")
    s.add_argument("--cap", type=int, default=_BRUTE_CAP, help="brute-force size cap (default %d)" % _BRUTE_CAP)
    s.add_argument("--delta", type=float, default=0.1, help="lattice failure probability budget (default 0.1)")
    s.add_argument("--p", type=int, help="lattice grid exponent (defaults to the file's quantization block)")
    s.add_argument("--beta-exponent", choices=("full", "half"), default="full", help="lattice scaling exponent policy")
    s.add_argument("--eps-override", type=float, help="explicit separation margin for the lattice solver")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep-snr", help="Monte-Carlo sweep over an SNR grid, CSV output")
    w.add_argument("--model", choices=("gaussian", "uniform", "noiseless"), required=True)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--d", type=int, required=True)
    w.add_argument("--snr-grid", default="1,2,4,8", help="comma separated SNR values (ignored for noiseless)")
    w.add_argument("--trials", type=int, default=50)
    w.add_argument("--solver", choices=("fptas", "brute", "lattice"), required=True)
    w.add_argument("--eps", type=float, default=0.5)
    w.add_argument("--delta", type=float, default=0.1)
    w.add_argument("--p", type=int, default=16)
    w.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    w.add_argument("--seed", type=int, required=True)
    w.add_argument("--jobs", type=int, help="parallel cells (default: SHUFFLE_REGRESS_JOBS or 1)")
    w.add_argument("--output", "-o", required=True)
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("check-order-stats", help="order-statistics sanity report")
    o.add_argument("--n", type=int, default=10)
    o.add_argument("--trials", type=int, default=100000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--tol", type=float, help="fail (exit 3) if the pair statistic misses by more")
    o.add_argument("--output", "-o", help="also write the JSON report here")
    o.set_defaults(func=cmd_check_order_stats)

    c = sub.add_parser("check-w2", help="sorted-projection distance decay check")
    c.add_argument("--n-grid", default="100,1000,10000")
    c.add_argument("--d", type=int, default=20)
    c.add_argument("--trials", type=int, default=50)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--output", "-o", required=True)
    c.set_defaults(func=cmd_check_w2)

    r = sub.add_parser("reduce", help="3-partition to permuted-linear-system instance")
    r.add_argument("--z", required=True, help="comma separated values, 3k of them")
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--output", "-o", required=True)
    r.set_defaults(func=cmd_reduce)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except (
        ParseError,
        SchemaError,
        CapExceededError,
        BudgetExceededError,
        RankDeficiencyError,
        DegenerateInstanceError,
        ValueError,
        OSError,
    ) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except (InternalInvariantError, NumericalBarrierError) as e:
        print("internal error: %s" % e, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
