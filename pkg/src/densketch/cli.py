"""Command-line driver.

Every subcommand prints CSV (or JSON with ``--format json``) to stdout.  The
algorithm subcommands share one header::

    algorithm,variant,trial,seed,n,eps,alpha,solution,estimate,value,oracle,success

``value`` is the true value of the returned solution and ``oracle`` the
brute-force optimum (or exact quantity); both are empty without
``--oracle``.  With several trials a final ``summary`` row carries the
success frequency.  ``hardlab`` uses::

    experiment,trial,seed,instance,params,measured,reference,ok

Exit codes: 0 success, 2 configuration error, 3 input error, 4 cap exceeded.
The default seed comes from ``DENSKETCH_SEED`` (else 0).
"""
from __future__ import annotations

import argparse
import inspect
import itertools
import json
import math
import os
import sys
import time
from collections.abc import Callable

import numpy as np

from . import hardlab as hl
from .f0 import F0Params, F0Sketch
from .hashing import splitmix64
from .optimizers import (
    DenseRunConfig, csp_brute, csp_dense_f0, csp_dense_sampler, densest_brute,
    densest_dense_f0, densest_dense_sampler, density, maxcut_brute, maxcut_dense_f0,
    maxcut_dense_sampler,
)
from .sampler import expander_build, walk_sample
from .simrare import (
    jaccard, rarity, rarity_perm, similarity_f0, similarity_perm_tagged,
)
from .streams import GENERATORS, StreamFile, generate, parse_gen
from .universe import (
    CapExceeded, CspInstance, RejectedInput, UndefinedValue, cut_value, csp_value,
    decode_constraint,
)

SEED_ENV = "DENSKETCH_SEED"
HEADER = ["algorithm", "variant", "trial", "seed", "n", "eps", "alpha", "solution",
          "estimate", "value", "oracle", "success"]
HARDLAB_HEADER = ["experiment", "trial", "seed", "instance", "params", "measured",
                  "reference", "ok"]
EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_CAP = 0, 2, 3, 4


class ConfigError(Exception):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _emit(rows: list[dict], header: list[str], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(rows, sort_keys=True, default=_fmt) + "\n")
        return
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(_fmt(r.get(h)).replace(",", ";") for h in header) + "\n")


# ------------------------------------------------------------------ inputs


def _stream(args, trial: int) -> StreamFile:
    if args.input and args.gen:
        raise ConfigError("give either --input or --gen, not both")
    if args.input:
        return StreamFile.read(args.input)
    if not args.gen:
        raise ConfigError("one of --input or --gen is required")
    kind, params = parse_gen(args.gen)
    wanted = inspect.signature(GENERATORS[kind]).parameters
    for flag in ("n", "k", "q"):
        val = getattr(args, flag, None)
        if flag in wanted and flag not in params and val is not None:
            params[flag] = val
    return generate(kind, params, seed=args.seed + trial)


def _config(args, n: int, seed: int) -> DenseRunConfig:
    return DenseRunConfig(args.eps, args.alpha, n, variant=args.variant or "f0", seed=seed,
                          capacity=args.capacity, walk_length=args.walk_length, lam=args.lam)


def _row(args, algo: str, trial: int, seed: int, n, **kw) -> dict:
    return {"algorithm": algo, "variant": args.variant or "", "trial": trial, "seed": seed,
            "n": n, "eps": args.eps, "alpha": args.alpha, **kw}


# --------------------------------------------------------------- commands


def cmd_maxcut(args, trial, seed):
    G, back = _stream(args, trial).graph(args.n)
    cfg = _config(args, G.n, seed)
    fn = maxcut_dense_f0 if cfg.variant == "f0" else maxcut_dense_sampler
    res = fn(iter(G.edges), cfg)
    sol = " ".join(str(back[i]) for i in res.solution.members())
    row = _row(args, "maxcut", trial, seed, G.n, solution=sol, estimate=res.estimate)
    if args.oracle:
        _, opt = maxcut_brute(G)
        val = cut_value(G, res.solution)
        row.update(value=val, oracle=opt, success=val >= (1 - args.eps) * opt - 1e-12)
    return row


def cmd_densest(args, trial, seed):
    G, back = _stream(args, trial).graph(args.n)
    cfg = _config(args, G.n, seed)
    fn = densest_dense_f0 if cfg.variant == "f0" else densest_dense_sampler
    res = fn(iter(G.edges), cfg)
    row = _row(args, "densest", trial, seed, G.n,
               solution=" ".join(str(back[i]) for i in res.solution), estimate=res.estimate)
    if args.oracle:
        _, opt = densest_brute(G)
        val = density(G, res.solution)
        row.update(value=val, oracle=opt, success=val >= (1 - args.eps) * opt - 1e-12)
    return row


def cmd_csp(args, trial, seed):
    if args.n is None:
        raise ConfigError("csp needs --n")
    k, q = args.k or 2, args.q or 2
    codes = _stream(args, trial).codes()
    cfg = _config(args, args.n, seed)
    fn = csp_dense_f0 if cfg.variant == "f0" else csp_dense_sampler
    res = fn(iter(codes), cfg, k, q)
    row = _row(args, "csp", trial, seed, args.n,
               solution="".join(map(str, res.solution)), estimate=res.estimate)
    if args.oracle:
        phi = CspInstance(args.n, k, q, [decode_constraint(c, args.n, k, q) for c in codes])
        _, opt = csp_brute(phi)
        val = csp_value(phi, res.solution)
        row.update(value=val, oracle=opt, success=val >= (1 - args.eps) * opt - 1e-12)
    return row


def cmd_similarity(args, trial, seed):
    sf = _stream(args, trial)
    variant = args.variant or "perm"
    if variant == "perm":
        recs, size = sf.tagged()
        N = args.universe or size
        est = similarity_perm_tagged(recs, args.eps, args.alpha, N, seed=seed,
                                     t=args.window)
    elif variant == "f0":
        (by, size) = sf.elements("a", "b")
        recs = [(k, x) for k in ("a", "b") for x in by[k]]
        N = args.universe or size
        est = similarity_f0(by["a"], by["b"], args.eps, N, seed=seed)
    else:
        raise ConfigError(f"similarity variant must be perm or f0, got {variant!r}")
    row = _row(args, "similarity", trial, seed, N, estimate=est)
    if args.oracle:
        A = {x for k, x in recs if k == "a"}
        B = {x for k, x in recs if k == "b"}
        J = jaccard(A, B)
        row.update(oracle=J, success=abs(est - J) <= args.eps)
    return row


def cmd_rarity(args, trial, seed):
    by, size = _stream(args, trial).elements("r")
    k = args.k or 1
    N = args.universe or size
    est = rarity_perm(by["r"], k, args.eps, args.alpha, N, seed=seed, t=args.window)
    row = _row(args, "rarity", trial, seed, N, estimate=est)
    if args.oracle:
        R = rarity(by["r"], k)
        row.update(oracle=R, success=abs(est - R) <= args.eps)
    return row


def cmd_f0(args, trial, seed):
    by, size = _stream(args, trial).elements("r")
    N = args.universe or max(size, 1)
    sk = F0Sketch(F0Params(args.eps, args.delta, N), seed=splitmix64(seed),
                  capacity=args.capacity)
    sk.update(by["r"])
    est = sk.estimate()
    row = _row(args, "f0", trial, seed, N, estimate=est)
    if args.oracle:
        true = len(set(by["r"]))
        row.update(oracle=true, success=abs(est - true) <= args.eps * true)
    return row


def cmd_sample(args, trial, seed):
    sf = _stream(args, trial)
    sf.only("r")
    orig = [v[0] for _, v in sf.records]
    by, size = sf.elements("r")
    N = args.universe or max(size, 1)
    lam = args.lam if args.lam is not None else args.eps * args.alpha
    t = args.walk_length or 1000
    ws = walk_sample(expander_build(N, lam), t, seed)
    ws.insert_all(by["r"])
    # f = parity of the original id
    f_dense = np.zeros(N)
    for d, o in zip(by["r"], orig):
        f_dense[d] = o % 2 == 0
    est = float(ws.estimate_many(f_dense[None, :])[0])
    row = _row(args, "sample", trial, seed, N, estimate=est)
    if args.oracle:
        mu = float(np.mean([o % 2 == 0 for o in orig]))
        row.update(oracle=mu, success=abs(est - mu) <= args.eps + ws.expander.lam / args.alpha)
    return row


COMMANDS: dict[str, Callable] = {
    "maxcut": cmd_maxcut, "densest": cmd_densest, "csp": cmd_csp,
    "similarity": cmd_similarity, "rarity": cmd_rarity, "f0": cmd_f0, "sample": cmd_sample,
}


def run_trials(args, out) -> None:
    fn = COMMANDS[args.command]
    rows = []
    for i in range(args.trials):
        seed = args.seed + i
        t0 = time.perf_counter()
        row = fn(args, i, seed)
        if args.timing:
            row["wall_s"] = time.perf_counter() - t0
        rows.append(row)
    if args.trials > 1:
        summary = {"algorithm": args.command, "variant": args.variant or "",
                   "trial": "summary", "seed": args.seed, "n": rows[0]["n"],
                   "eps": args.eps, "alpha": args.alpha,
                   "estimate": float(np.mean([r["estimate"] for r in rows]))}
        if args.oracle:
            summary["success"] = float(np.mean([bool(r["success"]) for r in rows]))
            if args.command == "f0":
                rel = sorted(abs(r["estimate"] - r["oracle"]) / r["oracle"] for r in rows)
                summary["solution"] = " ".join(
                    f"relerr_q{q}={_fmt(float(np.quantile(rel, q / 100)))}"
                    for q in (50, 90, 100))
        rows.append(summary)
    header = HEADER + (["wall_s"] if args.timing else [])
    _emit(rows, header, args.format, out)


# ---------------------------------------------------------------- hardlab


def _hardlab_rows(args) -> list[dict]:
    exp = args.experiment
    n, k = args.n or 10, args.k or 3
    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.trials):
        s = args.seed + i
        row = {"experiment": exp, "trial": i, "seed": s, "params": f"n={n} k={k}"}
        if exp == "copt":
            G = hl.grr_sample(n, k, s)
            x = rng.choice((-1, 1), n)
            a, b = hl.copt(G, x), hl.copt_brute(G, x)
            row.update(instance=G.fingerprint(), measured=a, reference=b, ok=a == b)
        elif exp == "shared":
            G1, G2 = hl.grr_sample(n, k, 2 * s), hl.grr_sample(n, k, 2 * s + 1)
            x = rng.choice((-1, 1), n)
            tau = args.tau if args.tau is not None else hl.HardFamilyParams(n, k).tau
            r = hl.check_shared_good(G1, G2, x, tau)
            row.update(instance=G1.fingerprint() + "/" + G2.fingerprint(),
                       params=f"n={n} k={k} tau={_fmt(tau)} shared={int(r.exists)}",
                       measured=r.total_advantage, reference=4 * tau,
                       ok=(not r.exists) or r.total_advantage <= 4 * tau)
        elif exp == "gadget":
            A = hl.bipartite_as_weighted(hl.matching_union_sample(n, k, s))
            x = rng.choice((-1, 1), A.n)
            _, opt = hl.weighted_maxcut_brute(hl.gadget_det(A, x))
            pred = hl.gadget_det_prediction(A, x)
            row.update(instance=f"N={A.n}", measured=opt, reference=pred, ok=opt == pred)
        elif exp == "value-gap":
            A1, A2 = hl.matching_union_sample(n, k, 2 * s), hl.matching_union_sample(n, k, 2 * s + 1)
            r = hl.value_gap_experiment(A1, A2, s)
            ref = 0.1 * r.m / math.sqrt(k)
            row.update(instance=A1.fingerprint() + "/" + A2.fingerprint(),
                       params=f"n={n} k={k} m={r.m}", measured=r.gap, reference=ref,
                       ok=r.identity_holds and r.gap >= ref)
        elif exp == "overlap":
            G1, G2 = hl.grr_sample(n, k, 2 * s), hl.grr_sample(n, k, 2 * s + 1)
            row.update(instance=G1.fingerprint() + "/" + G2.fingerprint(),
                       measured=hl.overlap(G1, G2), reference=k * k, ok=True)
        elif exp == "rademacher":
            val = hl.rademacher_min_mean(n, 10_000, s)
            ref = hl.RADEMACHER_FLOOR * math.sqrt(n)
            row.update(instance=f"m={n}", params=f"m={n}", measured=val, reference=ref,
                       ok=val >= ref)
        elif exp == "hamming":
            delta = args.delta
            fam, st = hl.hamming_family(n, delta, 200, s)
            disjoint = all(not hl.balls_collide(a, b, delta)
                           for a, b in itertools.combinations(fam, 2))
            row.update(instance=f"n={n}", params=f"n={n} delta={_fmt(delta)}",
                       measured=st["survivors"], reference=st["entropy_bound"],
                       ok=disjoint and hl.entropy_bound_holds(n, delta))
        elif exp == "cond":
            G = hl.grr_sample(n, k, s)
            x = rng.choice((-1, 1), n)
            st = hl.cond_to_plain_experiment(G, x, args.eps, hl.HardFamilyParams(n, k))
            row.update(instance=G.fingerprint(), measured=st["rate"],
                       reference=st["near_optimal"], ok=True)
        else:
            raise ConfigError(f"unknown hardlab experiment {exp!r}")
        rows.append(row)
    return rows


HARDLAB_EXPERIMENTS = ["copt", "shared", "gadget", "value-gap", "overlap", "rademacher",
                       "hamming", "cond"]


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get(SEED_ENV, "0"))
    p = argparse.ArgumentParser(prog="densketch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--eps", type=float, default=0.2)
        sp.add_argument("--alpha", type=float, default=0.2)
        sp.add_argument("--delta", type=float, default=1 / 9)
        sp.add_argument("--n", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--q", type=int)
        sp.add_argument("--variant")
        sp.add_argument("--seed", type=int, default=default_seed)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--oracle", action="store_true")
        sp.add_argument("--input")
        sp.add_argument("--gen")
        sp.add_argument("--universe", type=int)
        sp.add_argument("--capacity", type=int, help="F0 sketch sample-size override")
        sp.add_argument("--walk-length", type=int)
        sp.add_argument("--lam", type=float)
        sp.add_argument("--window", type=int, help="similarity/rarity window length t")
        sp.add_argument("--tau", type=float)
        sp.add_argument("--format", choices=["csv", "json"], default="csv")
        sp.add_argument("--timing", action="store_true", help="add a wall_s column")

    for name in COMMANDS:
        common(sub.add_parser(name))
    hp = sub.add_parser("hardlab")
    common(hp)
    hp.add_argument("--experiment", choices=HARDLAB_EXPERIMENTS, required=True)
    gp = sub.add_parser("generate")
    gp.add_argument("--gen", required=True)
    gp.add_argument("--n", type=int)
    gp.add_argument("--k", type=int)
    gp.add_argument("--q", type=int)
    gp.add_argument("--seed", type=int, default=default_seed)
    gp.add_argument("--output")
    return p


def _validate(args) -> None:
    if args.command == "generate":
        return
    if not 0 < args.eps < 1:
        raise ConfigError("--eps must lie in (0, 1)")
    if not 0 < args.alpha <= 1:
        raise ConfigError("--alpha must lie in (0, 1]")
    if not 0 < args.delta < 1:
        raise ConfigError("--delta must lie in (0, 1)")
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if args.command in ("maxcut", "densest", "csp") and args.variant not in (None, "f0", "sampler"):
        raise ConfigError("--variant must be f0 or sampler")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        _validate(args)
        if args.command == "generate":
            kind, params = parse_gen(args.gen)
            wanted = inspect.signature(GENERATORS[kind]).parameters
            for flag in ("n", "k", "q"):
                val = getattr(args, flag)
                if flag in wanted and flag not in params and val is not None:
                    params[flag] = val
            text = generate(kind, params, seed=args.seed).write()
            if args.output:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                out.write(text)
        elif args.command == "hardlab":
            _emit(_hardlab_rows(args), HARDLAB_HEADER, args.format, out)
        else:
            run_trials(args, out)
    except ConfigError as exc:
        print(f"densketch: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceeded as exc:
        print(f"densketch: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (RejectedInput, UndefinedValue, OSError) as exc:
        print(f"densketch: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
