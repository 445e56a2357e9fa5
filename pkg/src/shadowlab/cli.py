"""Command-line entry point for the shadowing toolkit.

Exit codes: 0 for pass/success (negative demonstrations succeed with 0:
certifying that shadowing fails is their expected result), 1 for
certified-failure outcomes (a bound or verification that did not hold),
2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .certify import (GrowthSpec, certify_gen_perturb, certify_lognorm,
                      certify_t1, certify_t2)
from .config import Config
from .errors import ShadowlabError
from .linear_dynamics import DichotomyKind, verify_dichotomy, LinearSystem
from .lognorm import NormKind, mu_closed
from .replicate import (replicate_exm_counterexample, replicate_exm_positive,
                        replicate_revisited, replicate_si)
from .shadow import relocate, shadow_dichotomy, shadow_lognorm

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def _seed_override(value):
    env = os.environ.get("SHADOWLAB_SEED")
    if env is not None:
        return int(env)
    return value


def _emit_json(payload: dict, out, no_timestamp: bool) -> None:
    if not no_timestamp:
        payload = dict(payload)
        payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_lognorm(args) -> int:
    A = np.loadtxt(args.matrix, delimiter=",", ndmin=2)
    kinds = ([NormKind.INF, NormKind.ONE, NormKind.TWO]
             if args.norm == "all" else [NormKind(args.norm)])
    for k in kinds:
        print(f"mu_{k.value} = {_fmt(mu_closed(A, k))}")
    return 0


def _build_certificate(args, cfg):
    def pick(flag, section, key, required=False, cast=float):
        if flag is not None:
            return flag
        if cfg is not None:
            getter = cfg.get_float if cast is float else cfg.get_str
            return getter(section, key, required=required)
        if required:
            raise ShadowlabError(f"missing --{key} (or a config providing "
                                 f"[{section}] {key})")
        return None

    route = args.route
    if route == "lognorm":
        m = pick(args.m, "constants", "m", required=True)
        delta = pick(args.delta, "constants", "delta", required=True)
        return certify_lognorm(m, delta)
    N = pick(args.N, "constants", "N", required=True)
    lam = pick(args.lam, "constants", "lambda", required=True)
    kind = DichotomyKind(pick(args.kind, "constants", "kind", cast=str)
                         or "dichotomy")
    if route == "t1":
        return certify_t1(N, lam, pick(args.L, "constants", "L", required=True),
                          pick(args.delta, "constants", "delta", required=True))
    if route == "t2":
        return certify_t2(N, lam, pick(args.L, "constants", "L", required=True),
                          pick(args.delta, "constants", "delta", required=True),
                          kind)
    growth = args.growth
    if growth is None and cfg is not None:
        vec = cfg.get_vector("constants", "growth", required=True)
        growth = list(vec)
    if growth is None:
        raise ShadowlabError("route gen needs --growth (L1 L2 ... coefficients)")
    rho = pick(args.rho, "constants", "rho", required=True)
    return certify_gen_perturb(N, lam, GrowthSpec(growth), rho, kind)


def _cmd_certify(args) -> int:
    cfg = Config.load(args.config) if args.config else None
    cert = _build_certificate(args, cfg)
    _emit_json(cert.as_dict(), args.out, args.no_timestamp)
    return 0


def _cmd_shadow(args) -> int:
    cfg = Config.load(args.config)
    sys_ = cfg.system()
    H = cfg.region()
    seed = _seed_override(args.seed if args.seed is not None
                          else cfg.get_int("pseudo", "seed", 0))
    y = cfg.pseudosolution(sys_, H, seed)
    tol = cfg.get_float("solver", "tol", 1e-9)
    pass_tol = cfg.get_float("solver", "pass_tol", 1e-6)

    if args.route == "dichotomy":
        d = cfg.dichotomy(sys_.n)
        route = cfg.get_str("constants", "route", "t1")

        class _Flags:
            pass

        flags = _Flags()
        flags.route = route
        flags.N = cfg.get_float("constants", "N", d.N)
        flags.lam = cfg.get_float("constants", "lambda", d.lam)
        flags.L = cfg.get_float("constants", "L")
        flags.delta = cfg.get_float("constants", "delta")
        flags.m = None
        flags.rho = cfg.get_float("constants", "rho")
        flags.kind = cfg.get_str("constants", "kind", d.kind.value)
        flags.growth = (list(cfg.get_vector("constants", "growth"))
                        if cfg.get_str("constants", "growth") else None)
        cert = _build_certificate(flags, cfg)
        res = shadow_dichotomy(sys_, d, y, cert, tol=tol, pass_tol=pass_tol,
                               max_refine=cfg.get_int("solver", "max_refine", 1),
                               max_iter=cfg.get_int("solver", "max_iter", 300))
    else:
        m = cfg.get_float("constants", "m", required=True)
        delta = cfg.get_float("constants", "delta", required=True)
        cert = certify_lognorm(m, delta)
        if H is None:
            raise ShadowlabError("shadow --route lognorm needs a [region]")
        res = shadow_lognorm(sys_, y, cert, H, tol=tol, pass_tol=pass_tol)

    payload = res.summary()
    payload["seed"] = seed
    payload["sigma"] = y.sigma
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        res.to_csv(outdir / "shadow.csv")
        y.to_csv(outdir / "pseudosolution.csv")
        _emit_json(payload, outdir / "summary.json", args.no_timestamp)
    else:
        _emit_json(payload, None, args.no_timestamp)
    return 0 if res.passed else 1


def _cmd_relocate(args) -> int:
    cfg = Config.load(args.config)
    sys_ = cfg.system()
    H = cfg.region()
    seed = _seed_override(args.seed if args.seed is not None
                          else cfg.get_int("pseudo", "seed", 0))
    y = cfg.pseudosolution(sys_, H, seed)
    d = cfg.dichotomy(sys_.n)
    rho = cfg.get_float("constants", "rho", required=True)
    z = relocate(sys_, d, y, rho,
                 tol=cfg.get_float("solver", "tol", 1e-8),
                 max_iter=cfg.get_int("solver", "max_iter", 400))
    payload = {
        "rho": rho, "seed": seed, "sigma_y": y.sigma, "sigma_z": z.sigma,
        "sup_z": z.meta["sup"], "in_ball": z.meta["in_ball"],
        "defect": z.meta["defect"], "iterations": z.meta["iterations"],
        "max_error_mismatch": float(np.max(np.abs(z.err - y.err))),
    }
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        z.to_csv(outdir / "relocated.csv")
        y.to_csv(outdir / "pseudosolution.csv")
        _emit_json(payload, outdir / "summary.json", args.no_timestamp)
    else:
        _emit_json(payload, None, args.no_timestamp)
    return 0 if z.meta["in_ball"] else 1


def _cmd_verify_dichotomy(args) -> int:
    cfg = Config.load(args.config)
    if cfg.parser.has_section("system") and cfg.get_str("system", "name", ""):
        sys_ = cfg.system()
        if sys_.split is None:
            raise ShadowlabError("verify-dichotomy needs a linear part")
        lin = sys_.split.A
    else:
        lin = LinearSystem.constant(cfg.get_matrix("dichotomy", "A",
                                                   required=True))
    d = cfg.dichotomy(lin.n)
    report = verify_dichotomy(lin, d, cfg.grid(),
                              tol=args.tol, k=cfg.norm())
    print(report.summary())
    return 0 if report.passed else 1


def _cmd_replicate(args) -> int:
    seed = _seed_override(args.seed)
    if args.example == "exm":
        report = replicate_exm_positive(args.rho, delta_nbhd=args.delta_nbhd,
                                        runs=args.runs, seed=seed)
    elif args.example == "exm-counter":
        T = args.T if args.T is not None else 10.0 / args.delta
        report = replicate_exm_counterexample(args.delta, args.kappa, T)
    elif args.example == "revisited":
        report = replicate_revisited(args.rho, runs=args.runs, seed=seed)
    else:
        T = args.T if args.T is not None else 100.0
        report = replicate_si(args.c, epsilon=args.epsilon,
                              kappa_candidate=args.kappa, T=T,
                              runs=args.runs, seed=seed)
    print(report.summary())
    if args.out:
        report.save(args.out, no_timestamp=args.no_timestamp)
        print(f"report written to {args.out}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# parser

def _make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="shadowlab",
        description="certify and demonstrate conditional Lipschitz shadowing "
                    "for nonautonomous ODEs")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("lognorm", help="logarithmic norms of a CSV matrix")
    q.add_argument("matrix")
    q.add_argument("--norm", choices=["inf", "one", "two", "all"], default="all")
    q.set_defaults(func=_cmd_lognorm)

    q = sub.add_parser("certify", help="compute a shadowing certificate")
    q.add_argument("--route", choices=["t1", "t2", "gen", "lognorm"],
                   required=True)
    q.add_argument("config", nargs="?")
    q.add_argument("--N", type=float)
    q.add_argument("--lambda", dest="lam", type=float)
    q.add_argument("--L", type=float)
    q.add_argument("--delta", type=float)
    q.add_argument("--m", type=float)
    q.add_argument("--rho", type=float)
    q.add_argument("--growth", type=float, nargs="+")
    q.add_argument("--kind", choices=["dichotomy", "contraction", "expansion"])
    q.add_argument("--out")
    q.add_argument("--no-timestamp", action="store_true")
    q.set_defaults(func=_cmd_certify)

    q = sub.add_parser("shadow", help="shadow a pseudosolution from a config")
    q.add_argument("--route", choices=["dichotomy", "lognorm"], required=True)
    q.add_argument("config")
    q.add_argument("--seed", type=int)
    q.add_argument("--out")
    q.add_argument("--no-timestamp", action="store_true")
    q.set_defaults(func=_cmd_shadow)

    q = sub.add_parser("relocate", help="relocate a pseudosolution into a ball")
    q.add_argument("config")
    q.add_argument("--seed", type=int)
    q.add_argument("--out")
    q.add_argument("--no-timestamp", action="store_true")
    q.set_defaults(func=_cmd_relocate)

    q = sub.add_parser("verify-dichotomy",
                       help="grid-check dichotomy data for a linear system")
    q.add_argument("config")
    q.add_argument("--tol", type=float, default=1e-8)
    q.set_defaults(func=_cmd_verify_dichotomy)

    q = sub.add_parser("replicate", help="reproduce a bundled demonstration")
    q.add_argument("example", choices=["exm", "exm-counter", "revisited", "si"])
    q.add_argument("--rho", type=float, default=0.3)
    q.add_argument("--delta", type=float, default=0.01)
    q.add_argument("--delta-nbhd", type=float, default=None)
    q.add_argument("--kappa", type=float, default=10.0)
    q.add_argument("--epsilon", type=float, default=1e-4)
    q.add_argument("--c", type=float, default=0.2)
    q.add_argument("--T", type=float, default=None)
    q.add_argument("--runs", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.add_argument("--no-timestamp", action="store_true")
    q.set_defaults(func=_cmd_replicate)

    return p


def run(argv) -> int:
    """Dispatch a CLI invocation; returns the process exit code."""
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ShadowlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
