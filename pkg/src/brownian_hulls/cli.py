"""Command line interface: exact formula evaluation, simulation, verification.

Subcommands
-----------

``exact <law> [flags]``
    Print a closed-form value with 15 significant digits.  Flag names
    mirror the usual symbols (--r, --lambda, --mu, --ell, ...).  Exit 2 on
    a domain error.

``simulate {csbp | boundary | hull | quad | bm-functional} [flags]``
    Run a seeded simulator and write its output atomically (temp file,
    then rename).  Exit 2 on a configuration error, 3 on an I/O error.

``verify <suite> [--n N] [--seed S] [--out report.json] [--csv checks.csv]``
    Run a named verification suite, print one line per check, write the
    JSON report (always, also on statistical failure).  Exit 0 when every
    check passes, 1 on a statistical failure, 2 for an unknown suite.

File formats: CSV files use '.' decimals, no thousands separators, LF line
endings, and a mandatory header row.  JSON reports carry
``"schema": "1"``.  Path exports: columns ``time,value`` (boundary paths:
``time`` is the radius); hull samples: ``sample,r,boundary,volume``; hull
series: ``k,ball_faces,hull_faces,hull_vertices,boundary_edges``.

Every run echoes its fully resolved configuration (including the defaulted
seed) as a ``# config`` line, from which the run can be replayed verbatim.
The BROWNIAN_HULLS_THREADS environment variable sets the worker count used
when several suites run in one invocation.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import formulas as F
from .csbp import simulate_csbp, simulate_reversed_boundary, bm_exit_functional
from .errors import ConfigError, DomainError, HullError
from .harness import SUITES, SuiteSpec, run_suite
from .hulls import decorate, write_hull_csv
from .maps import hull_series, sample_labeled_tree, schaeffer
from .rng import DEFAULT_SEED

_EXACT_LAWS = {
    "boundary-laplace": (("r", "lam"), lambda a: F.boundary_length_laplace(a.r, a.lam)),
    "hull-laplace": (("r", "mu"), lambda a: F.hull_volume_laplace(a.r, a.mu)),
    "hull-laplace-given-boundary": (
        ("r", "ell", "mu"),
        lambda a: F.hull_volume_laplace_given_boundary(a.r, a.ell, a.mu),
    ),
    "csbp-laplace": (("x", "t", "lam"), lambda a: F.csbp_laplace(a.x, a.t, a.lam, a.c)),
    "extinction-density": (("x", "t"), lambda a: F.extinction_density(a.x, a.t, a.c)),
    "extinction-cdf": (("x", "t"), lambda a: F.extinction_cdf(a.t, a.x, a.c)),
    "conditioned-kernel": (
        ("x", "s", "t", "rho", "lam"),
        lambda a: F.conditioned_kernel_laplace(a.x, a.s, a.t, a.rho, a.lam, a.c),
    ),
    "snake-min-tail": (("x", "y"), lambda a: F.snake_min_tail(a.x, a.y)),
    "exit-laplace": (("x", "a", "mu"), lambda a: F.exit_laplace(a.x, a.a, a.mu)),
    "truncated-exit-laplace": (
        ("x", "a", "lam"),
        lambda a: F.truncated_exit_laplace(a.x, a.a, a.lam),
    ),
    "u-joint": (("x", "lam", "mu"), lambda a: F.u_joint(a.x, a.lam, a.mu)),
    "u-inf": (("x", "mu"), lambda a: F.u_inf(a.x, a.mu)),
    "theta": (("mu", "lam"), lambda a: F.theta(a.mu, a.lam)),
    "conditional-boundary-laplace": (
        ("a", "b", "zb", "lam"),
        lambda a: F.conditional_boundary_laplace(a.a, a.b, a.zb, a.lam),
    ),
    "xi-laplace": (("beta",), lambda a: F.xi_laplace(a.beta)),
    "levy-density": (("y",), lambda a: F.levy_measure_density(a.y)),
    "psi": (("u",), lambda a: F.psi_of(a.u, a.c)),
    "w-derivative": (("lam", "mu"), lambda a: F.w_derivative_at_zero(a.lam, a.mu)),
}


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="brownian-hulls",
        description="Brownian-plane hull laws: exact values, simulators, verification suites.",
    )
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exact", help="evaluate a closed-form law")
    ex.add_argument("law", choices=sorted(_EXACT_LAWS))
    for flag, dest in [
        ("--r", "r"), ("--lambda", "lam"), ("--mu", "mu"), ("--ell", "ell"),
        ("--x", "x"), ("--y", "y"), ("--a", "a"), ("--b", "b"), ("--zb", "zb"),
        ("--t", "t"), ("--s", "s"), ("--rho", "rho"), ("--beta", "beta"),
        ("--u", "u"), ("--c", "c"),
    ]:
        default = F.CANONICAL_C if dest == "c" else None
        ex.add_argument(flag, dest=dest, type=float, default=default)

    sim = sub.add_parser("simulate", help="run a seeded simulator and export files")
    simsub = sim.add_subparsers(dest="target", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = simsub.add_parser("csbp", help="one branching-process path")
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--c", type=float, default=F.CANONICAL_C)
    common(p)

    p = simsub.add_parser("boundary", help="one reversed boundary-length path")
    p.add_argument("--rmax", type=float, default=1.0)
    p.add_argument("--xstart", type=float, default=None)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--eps", type=float, default=None)
    common(p)

    p = simsub.add_parser("hull", help="decorated boundary+volume samples")
    p.add_argument("--rmax", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1, help="number of independent hull samples")
    p.add_argument("--xstart", type=float, default=None)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--eps", type=float, default=None)
    common(p)

    p = simsub.add_parser("quad", help="hull series of one random quadrangulation")
    p.add_argument("--faces", type=int, default=1000)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument(
        "--variant", choices=("free-pointed", "well-labeled"), default="free-pointed"
    )
    common(p)

    p = simsub.add_parser("bm-functional", help="Brownian exit-functional estimate")
    p.add_argument("--start", type=float, default=2.0)
    p.add_argument("--stop", type=float, default=1.0)
    p.add_argument("--coeff", type=float, default=6.0)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--n", type=int, default=10_000)
    common(p)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite")
    ver.add_argument("--n", type=int, default=None)
    ver.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ver.add_argument("--out", default=None, help="JSON report path (default <suite>-report.json)")
    ver.add_argument("--csv", default=None, help="optional flat CSV of checks")
    return top


def _echo_config(args: argparse.Namespace) -> None:
    shown = {k: v for k, v in vars(args).items() if v is not None and k != "command"}
    print(f"# config: {json.dumps(shown, sort_keys=True, default=str)}")


def _cmd_exact(args) -> int:
    fields, fn = _EXACT_LAWS[args.law]
    missing = [f for f in fields if getattr(args, f) is None]
    if missing:
        flag = {"lam": "--lambda", "zb": "--zb"}
        names = ", ".join(flag.get(m, f"--{m}") for m in missing)
        print(f"error: {args.law} requires {names}", file=sys.stderr)
        return 2
    value = fn(args)
    print(f"{value:.15g}")
    return 0


def _cmd_simulate(args) -> int:
    seed = args.seed
    if args.target == "csbp":
        path = simulate_csbp(args.x0, params=args.c, horizon=args.horizon,
                             dt=args.dt, eps=args.eps, seed=seed)
        path.write_csv(args.out) if args.format == "csv" else path.write_json(args.out)
    elif args.target == "boundary":
        path = simulate_reversed_boundary(args.rmax, x_start=args.xstart,
                                          dt=args.dt, eps=args.eps, seed=seed)
        path.write_csv(args.out) if args.format == "csv" else path.write_json(args.out)
    elif args.target == "hull":
        samples = []
        for i in range(args.n):
            boundary = simulate_reversed_boundary(
                args.rmax, x_start=args.xstart, dt=args.dt, eps=args.eps, seed=seed + i
            )
            samples.append(decorate(boundary, seed=seed + i + 1_000_003))
        if args.format == "csv":
            write_hull_csv(samples, args.out)
        else:
            if args.n == 1:
                samples[0].write_json(args.out)
            else:
                raise ConfigError("json export supports a single hull sample (--n 1)")
    elif args.target == "quad":
        tree = sample_labeled_tree(args.faces, variant=args.variant, seed=seed)
        quad = schaeffer(tree)
        series = hull_series(quad, args.kmax)
        if args.format != "csv":
            raise ConfigError("hull series export is CSV only")
        series.write_csv(args.out)
    elif args.target == "bm-functional":
        est = bm_exit_functional(args.start, args.stop, args.coeff,
                                 dt=args.dt, n=args.n, seed=seed)
        payload = {
            "schema": 1, "mean": est.mean, "stderr": est.stderr,
            "n": est.n, "bias_bound": est.bias_bound,
        }
        from .csbp import _atomic_write

        _atomic_write(args.out, (json.dumps(payload, indent=1) + "\n").encode())
    else:  # pragma: no cover - argparse enforces choices
        return 2
    print(f"wrote {args.out}")
    return 0


def _cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; known: {', '.join(sorted(SUITES))}",
              file=sys.stderr)
        return 2
    report = run_suite(SuiteSpec(args.suite, n=args.n, seed=args.seed))
    out = args.out or f"{args.suite}-report.json"
    report.write_json(out)
    if args.csv:
        report.write_csv(args.csv)
    for line in report.summary_lines():
        print(line)
    print(f"report written to {out}")
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _echo_config(args)
    try:
        if args.command == "exact":
            return _cmd_exact(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except (DomainError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except HullError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
