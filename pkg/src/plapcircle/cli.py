"""Command line entry point.

Subcommands mirror the library layers: constants, orbit, branch, verify,
flow, figures.  Output is CSV (comma separated, header row, LF endings,
17 significant digits) or JSON with a meta header.  Exit codes: 0 on
success, 1 when an asserted inequality fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .branch import thresholds, trace_branch
from .constants import Params, eigen_constants
from .errors import PlapError
from .flow import FlowConfig, perturbed_constant, run
from .functional import (
    GridFunction,
    check_appendixA,
    check_klt,
    check_lemma_cs,
    check_theorem1,
    check_theorem2,
    random_positive_trig,
)
from .orbit import norm_integrals, profile

_FMT = "%.17g"

USAGE_ERROR = 2
CHECK_FAILED = 1


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return _FMT % v
    return str(v)


def _usage_error(msg: str):
    print(f"usage error: {msg}", file=sys.stderr)
    raise SystemExit(USAGE_ERROR)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        _usage_error(f"bad grid '{spec}', expected lo:hi:n")


def _open_output(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    outdir = os.environ.get("PLAPCIRCLE_OUTDIR")
    if outdir and not os.path.isabs(path):
        os.makedirs(outdir, exist_ok=True)
        path = os.path.join(outdir, path)
    return open(path, "w", newline="\n"), True


def _emit(args, header, rows, meta, trailer_comments=()):
    """Write rows as CSV or flat JSON records with a meta object."""
    fh, owned = _open_output(args.output)
    try:
        if args.format == "csv":
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
            for comment in trailer_comments:
                fh.write(f"# {comment}\n")
        else:
            payload = {
                "meta": meta,
                "records": [dict(zip(header, row)) for row in rows],
            }
            json.dump(payload, fh, indent=1, default=float)
            fh.write("\n")
    finally:
        if owned:
            fh.close()


def _meta(params=None, **extra):
    meta = {"version": __version__}
    if params is not None:
        meta["p"] = params.p
        meta["q"] = params.q
    meta.update(extra)
    return meta


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_constants(args) -> int:
    if args.sweep:
        ps = _parse_grid(args.sweep)
    elif args.p is not None:
        ps = [args.p]
    else:
        _usage_error("constants: need --p or --sweep")
    rows = []
    for p in ps:
        ec = eigen_constants(float(p))
        rows.append((ec.p, ec.lambda1, ec.lambda1_star, ec.Lambda1, ec.pi_p))
    _emit(args, ("p", "lambda1", "lambda1_star", "Lambda1", "pi_p"), rows,
          _meta(tolerance=1e-13))
    return 0


def _cmd_orbit(args) -> int:
    params = Params(args.p, args.q)
    if args.mode == "sweep":
        grid = _parse_grid(args.a)
        rows = []
        for a in grid:
            orb = norm_integrals(float(a), params)
            rows.append((orb.a, orb.T, orb.b, orb.Ip_prime, orb.Ip, orb.Iq))
        _emit(args, ("a", "T", "b", "Ip_prime", "Ip", "Iq"), rows, _meta(params))
        return 0
    a = float(args.a)
    orb = norm_integrals(a, params)
    rows = [(orb.a, orb.T, orb.b, orb.Ip_prime, orb.Ip, orb.Iq)]
    _emit(args, ("a", "T", "b", "Ip_prime", "Ip", "Iq"), rows, _meta(params))
    if args.samples:
        f = profile(a, params, args.samples)
        fh, owned = _open_output(args.profile_output)
        try:
            fh.write("r,f\n")
            for j, v in enumerate(f):
                fh.write(f"{_FMT % (j * orb.T / args.samples)},{_FMT % v}\n")
        finally:
            if owned:
                fh.close()
    return 0


def _cmd_branch(args) -> int:
    params = Params(args.p, args.q)
    grid = _parse_grid(args.a_grid)
    trace = trace_branch(params, grid)
    th = thresholds(params)
    rows = [(pt.a, pt.T, pt.lam, pt.mu, pt.lam - pt.mu) for pt in trace.points]
    trailer = [
        f"thresholds,rigidity={_FMT % th.rigidity},bifurcation={_FMT % th.bifurcation}",
    ]
    for a, msg in trace.failures:
        trailer.append(f"failed,a={_FMT % a},{msg}")
    _emit(args, ("a", "T", "lambda", "mu", "lambda_minus_mu"), rows,
          _meta(params, rigidity=th.rigidity, bifurcation=th.bifurcation,
                failures=len(trace.failures)),
          trailer_comments=trailer)
    off = [pt for pt in trace.points if pt.gap < -1e-9 * max(pt.lam, pt.mu)]
    return CHECK_FAILED if off else 0


_SUITES = ("thm1", "thm2", "lemma22", "appendixA", "klt")


def _cmd_verify(args) -> int:
    params = Params(args.p, args.q)
    rng = np.random.default_rng(args.seed)
    rows = []
    failures = 0
    trace = None
    if args.suite == "klt":
        V = GridFunction(np.full(args.n, 0.9 * thresholds(params).rigidity))
    for k in range(args.draws):
        u = random_positive_trig(rng, args.n)
        if args.suite == "thm1":
            rep = check_theorem1(u, params)
            rows.append((k, rep.margin, rep.star_margin, rep.ok))
        elif args.suite == "thm2":
            rep = check_theorem2(u, params)
            rows.append((k, rep.margin, rep.improvement, rep.ok))
        elif args.suite == "lemma22":
            rep = check_lemma_cs(u, params.p)
            rows.append((k, rep.margin, rep.ratio, rep.ok))
        elif args.suite == "appendixA":
            rep = check_appendixA(u, params.p)
            rows.append((k, rep.margin_weighted, rep.margin_mean, rep.ok))
        else:
            rep = check_klt(u, V, params, trace)
            rows.append((k, rep.margin, rep.lam, rep.ok))
        failures += 0 if rep.ok else 1
    header = {
        "thm1": ("draw", "margin", "star_margin", "ok"),
        "thm2": ("draw", "margin", "improvement", "ok"),
        "lemma22": ("draw", "margin", "ratio", "ok"),
        "appendixA": ("draw", "margin_weighted", "margin_mean", "ok"),
        "klt": ("draw", "margin", "lambda", "ok"),
    }[args.suite]
    _emit(args, header, rows,
          _meta(params, suite=args.suite, draws=args.draws, n=args.n,
                seed=args.seed, failures=failures,
                passed=failures == 0))
    return CHECK_FAILED if failures else 0


def _cmd_flow(args) -> int:
    params = Params(args.p, args.q)
    cfg = FlowConfig(params=params, n=args.n, epsilon=args.eps, t_end=args.t_end)
    if args.init == "perturbed-constant":
        u0 = perturbed_constant(params, args.n, amplitude=args.amplitude)
    elif args.init.startswith("csv:"):
        u0 = GridFunction.from_csv(args.init[4:])
    else:
        _usage_error(f"unknown initial datum '{args.init}'")
    state = run(u0, cfg)
    rows = [(r.t, r.e, r.i, r.q_mass, r.lyapunov)
            for r in state.series[:: args.every]]
    _emit(args, ("t", "e", "i", "q_mass", "lyapunov"), rows,
          _meta(params, n=args.n, eps=args.eps, t_end=args.t_end,
                steps=len(state.series),
                drift_pre_correction=state.drift_pre_correction))
    e = [r.e for r in state.series]
    i = [r.i for r in state.series]
    monotone = all(b < a for a, b in zip(e, e[1:])) and \
        all(b < a for a, b in zip(i, i[1:]))
    return 0 if monotone or len(e) < 2 else CHECK_FAILED


def _cmd_figures(args) -> int:
    from .figures import figure_bundle  # defers the matplotlib import

    outdir = args.outdir or os.environ.get("PLAPCIRCLE_OUTDIR", ".")
    paths = figure_bundle(args.which, outdir)
    for path in paths:
        print(path)
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plapcircle",
        description="optimal constants, orbits, branches and flows of the "
                    "periodic p-Laplacian interpolation problem",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(sp, fmt_default="csv"):
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        sp.add_argument("--output", default=None,
                        help="output file (default stdout; relative paths land "
                             "in $PLAPCIRCLE_OUTDIR when set)")

    sp = sub.add_parser("constants", help="spectral constants at one p or a sweep")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--sweep", default=None, metavar="lo:hi:n")
    add_common(sp)
    sp.set_defaults(func=_cmd_constants)

    sp = sub.add_parser("orbit", help="one closed orbit, or 'sweep' for a grid")
    sp.add_argument("mode", nargs="?", choices=("sweep",), default=None)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--a", required=True, help="seed amplitude, or lo:hi:n in sweep mode")
    sp.add_argument("--samples", type=int, default=0,
                    help="also emit this many profile samples")
    sp.add_argument("--profile-output", default=None)
    add_common(sp)
    sp.set_defaults(func=_cmd_orbit)

    sp = sub.add_parser("branch", help="trace the minimizer branch over a seed grid")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--a-grid", required=True, metavar="lo:hi:n")
    add_common(sp)
    sp.set_defaults(func=_cmd_branch)

    sp = sub.add_parser("verify", help="property suites over random positive draws")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--suite", choices=_SUITES, required=True)
    sp.add_argument("--draws", type=int, default=50)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    add_common(sp, fmt_default="json")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("flow", help="evolve the nonlocal flow and emit diagnostics")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--eps", type=float, default=1e-3)
    sp.add_argument("--t-end", type=float, default=20.0)
    sp.add_argument("--init", default="perturbed-constant",
                    help="'perturbed-constant' or csv:<path>")
    sp.add_argument("--amplitude", type=float, default=0.1)
    sp.add_argument("--every", type=int, default=1,
                    help="thin the emitted series to every k-th step")
    add_common(sp)
    sp.set_defaults(func=_cmd_flow)

    sp = sub.add_parser("figures", help="write CSV + PNG bundles of the key displays")
    sp.add_argument("--which", choices=("fig1", "fig2", "fig3", "fig5", "all"),
                    default="all")
    sp.add_argument("--outdir", default=None)
    sp.set_defaults(func=_cmd_figures)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except PlapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CHECK_FAILED
    except SystemExit:
        raise
    except (ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
