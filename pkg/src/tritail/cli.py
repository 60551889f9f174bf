"""Command-line runner: ``theory``, ``simulate`` and ``verify`` subcommands.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

import argparse
import os
import sys
import time

from . import mc as _mc
from .config import ConfigError, ExperimentConfig, ResultRecord, write_csv, write_jsonl
from .dist import PowerLawDist
from .theory import InfeasibleError, TheoryContext, loglog_slope, regime_exponent, single_hub_index

OVERRIDES = ("alpha", "n", "a", "theta", "gamma", "reps", "seed", "mode", "out", "threads", "subset",
             "estimator", "s", "x_min")


def _threads(cfg):
    return cfg.threads or os.cpu_count() or 1


def _regimes(cfg):
    out = {}
    alpha = cfg.alpha
    wanted = []
    if alpha > 4 / 3:
        wanted.append(("single-hub", {}))
    if alpha < 4 / 3:
        wanted.append(("many-hub", {"a": cfg.a}))
    if cfg.theta is not None:
        wanted.append(("theta", {"theta": cfg.theta}))
    if cfg.gamma is not None:
        wanted.append(("gamma", {"gamma": cfg.gamma, "a": cfg.a}))
    for name, params in wanted:
        r = regime_exponent(alpha, name, **params)
        out[name] = {"exponent": r.exponent, "beta": r.beta, "hub_scale_exponent": r.hub_scale_exponent,
                     "rate": r.rate}
    return out


def cmd_theory(cfg):
    cfg.validate()
    ctx = TheoryContext.create(cfg.alpha, cfg.x_min, cfg.rtol)
    out = {"mu": ctx.mu, "H": ctx.H, "C3H": ctx.C3H, "k": ctx.hub_count(cfg.a),
           "k_limit": ctx.hub_count_limit(cfg.a), "regimes": _regimes(cfg)}
    try:
        out["eta"] = ctx.eta_threshold(cfg.a)
    except (ValueError, InfeasibleError) as exc:
        out["eta"] = None
        out["eta_note"] = str(exc)
    out["eta_literal"] = ctx.eta_threshold_literal(cfg.a)
    if cfg.z:
        out["K_l"] = ctx.hub_payoff(cfg.z)
    rows = []
    for n in cfg.grid():
        exact, asym = ctx.mean_triangles(n)
        try:
            c = ctx.hub_threshold(n, cfg.a)
        except InfeasibleError:
            c = float("nan")
        rows.append([n, exact, asym, exact / asym, c])
    out["table"] = {"columns": ["n", "m_n_exact", "m_n_asymptotic", "ratio", "c_a"], "rows": rows}
    good = [r for r in rows if r[4] == r[4]]
    if len(good) >= 2:
        slope = loglog_slope([r[0] for r in good], [r[4] for r in good])
        out["c_a_slope"] = slope
        out["c_a_slope_minus_beta"] = abs(slope - single_hub_index(cfg.alpha))
    rec = ResultRecord("theory", cfg.to_dict(), out)
    if cfg.out:
        rec.write(cfg.out)
        if rows:
            write_csv(_sibling(cfg.out, ".csv"), out["table"]["columns"], rows)
    return rec


def _sibling(path, ext):
    root, _ = os.path.splitext(path)
    return root + ext


def cmd_simulate(cfg):
    cfg.validate()
    dist = PowerLawDist(cfg.alpha, cfg.x_min)
    th = _threads(cfg)
    est_name = cfg.estimator
    extra = {}
    if est_name in ("mean-triangles", "tail-single-hub", "tail-crude", "planted-hub", "many-hub", "hub-lln") \
            and cfg.n is None:
        raise ConfigError(f"estimator {est_name} needs n")
    if est_name == "mean-triangles":
        est = _mc.estimate_mean_triangles(dist, cfg.n, cfg.reps, cfg.mode, cfg.seed, threads=th)
        exact = TheoryContext(dist, cfg.rtol).mean_triangles(cfg.n)[0]
        extra = {"m_n_exact": exact, "within_3_stderr": abs(est.value - exact) <= 3 * est.stderr}
    elif est_name in ("tail-single-hub", "tail-crude"):
        ctx = TheoryContext(dist, cfg.rtol)
        m = ctx.mean_triangles(cfg.n)[0]
        if est_name == "tail-crude":
            est = _mc.estimate_tail_crude(dist, cfg.n, (1 + cfg.a) * m, cfg.reps, cfg.seed, threads=th)
        else:
            s = cfg.s if cfg.s is not None else 0.5 * ctx.hub_threshold(cfg.n, cfg.a)
            mode = cfg.mode if cfg.mode in ("discard", "share") else "discard"
            est = _mc.estimate_tail_single_hub(dist, cfg.n, cfg.a, s, cfg.reps, cfg.seed, m, mode=mode,
                                               threads=th)
        extra = {"m_n_exact": m}
    elif est_name == "boundary":
        est = _mc.estimate_boundary_payoff_prob(TheoryContext(dist, cfg.rtol), cfg.a, cfg.reps, cfg.seed,
                                                b=cfg.s)
    elif est_name == "hub-lln":
        ctx = TheoryContext(dist, cfg.rtol)
        z = cfg.z or [1.0]
        est = _mc.verify_hub_lln(dist, cfg.n, z, cfg.reps, cfg.seed, target=ctx.hub_payoff(z), threads=th)
    elif est_name == "planted-hub":
        est = _mc.verify_planted_single_hub(TheoryContext(dist, cfg.rtol), cfg.n, cfg.a, cfg.reps, cfg.seed,
                                            threads=th)
    elif est_name == "many-hub":
        est = _mc.verify_many_hub_lower_bound(TheoryContext(dist, cfg.rtol), cfg.n, cfg.a, cfg.reps, cfg.seed,
                                              threads=th)
    else:
        rows = _mc.verify_bound_frequencies(_mc.default_bound_checks(dist), cfg.reps, cfg.seed, threads=th)
        rec = ResultRecord("simulate", _record_config(cfg), {"bounds": rows},
                           flags={"bounds_ok": all(r["ok"] for r in rows)})
        if cfg.out:
            rec.write(cfg.out)
        return rec
    rec = ResultRecord("simulate", _record_config(cfg), {"estimate": est.to_dict(), **extra})
    if cfg.out:
        rec.write(cfg.out)
        if cfg.trace:
            write_jsonl(_sibling(cfg.out, ".jsonl"),
                        [{"rep": i, "value": v} for i, v in enumerate([] if est.samples is None else est.samples)])
    return rec


def _record_config(cfg):
    # the thread count never changes values, so it is not part of the reproducibility key
    d = cfg.to_dict()
    d.pop("threads", None)
    return d


def cmd_verify(cfg, echo=print):
    from .verify import Suite, run_suite

    suite = Suite(seed=cfg.seed, threads=_threads(cfg), tolerances=cfg.tolerances)
    results = run_suite(cfg.subset, suite, report=lambda r: echo(r.line()))
    outs = {str(r.number): {"title": r.title, "passed": r.passed, "details": r.details} for r in results}
    rec = ResultRecord("verify", cfg.to_dict(), outs, flags={str(r.number): r.passed for r in results},
                       timing={str(r.number): r.seconds for r in results})
    if cfg.out:
        rec.write(cfg.out)
    return rec, all(r.passed for r in results)


def build_parser():
    p = argparse.ArgumentParser(prog="tritail", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("theory", "simulate", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--x-min", dest="x_min", type=float)
        sp.add_argument("--n", type=int, nargs="+", metavar="N", help="one n or an n-grid")
        sp.add_argument("--a", type=float)
        sp.add_argument("--theta", type=float)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--z", type=float, nargs="+")
        sp.add_argument("--s", type=float, help="single-hub threshold (weight units)")
        sp.add_argument("--reps", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--mode")
        sp.add_argument("--estimator")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--trace", action="store_true")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--subset")
    return p


def config_from_args(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    for key in OVERRIDES:
        v = getattr(args, key, None)
        if v is None:
            continue
        if key == "n":
            if len(v) == 1:
                cfg.n, cfg.n_grid = v[0], []
            else:
                cfg.n, cfg.n_grid = None, list(v)
        else:
            setattr(cfg, key, v)
    if args.z:
        cfg.z = list(args.z)
    if args.trace:
        cfg.trace = True
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args).validate()
        if args.command == "theory":
            rec = cmd_theory(cfg)
        elif args.command == "simulate":
            rec = cmd_simulate(cfg)
        else:
            t = time.perf_counter()
            rec, ok = cmd_verify(cfg)
            print(f"{sum(rec.flags.values())}/{len(rec.flags)} items passed in {time.perf_counter() - t:.1f}s")
            if not cfg.out:
                sys.stdout.write(rec.to_json())
            return 0 if ok else 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not cfg.out:
        sys.stdout.write(rec.to_json())
    return 0


if __name__ == "__main__":
    sys.exit(main())
