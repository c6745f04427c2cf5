"""Figure bundle: delimited data plus rendered PNGs for the four displays.

Each bundle writes one CSV (the data of record, 17 significant digits) and
one PNG rendered from exactly those arrays.  The CSV carries a one-line
column legend as a leading comment.
"""

from __future__ import annotations

import os
from typing import Iterable, List

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .branch import thresholds, trace_branch
from .constants import Params, eigen_constants, lambda1_star
from .orbit import Potential, period, shoot_orbit

__all__ = ["figure_bundle", "FIGURES"]

FIGURES = ("fig1", "fig2", "fig3", "fig5")

_FMT = "%.17g"


def _write_csv(path, header: str, legend: str, rows: Iterable[Iterable]) -> str:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {legend}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_FMT % v if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")
    return path


def _phase_portrait(outdir: str) -> List[str]:
    """Vector field and closed trajectories of the turning-point system."""
    params = Params(2.5, 3.0)
    p, q = params.p, params.q
    rows = []
    orbits = {}
    for a in (1.35, 1.8):
        shot = shoot_orbit(a, params)
        label = f"orbit_a={a:g}"
        orbits[label] = shot
        for t, y in shot.trajectory:
            rows.append((label, float(t), float(y[0]), float(y[1])))
    # zero-energy level through the origin: (p-1)|Y|^(p/(p-1)) = |X|^p - (p/q)|X|^q
    x_max = Potential(params).x_max
    xs = np.linspace(-x_max, x_max, 401)
    for x in xs:
        r = (abs(x) ** p - (p / q) * abs(x) ** q) / (p - 1.0)
        y = max(r, 0.0) ** ((p - 1.0) / p)
        rows.append(("zero_level_upper", 0.0, float(x), float(y)))
    for x in xs:
        r = (abs(x) ** p - (p / q) * abs(x) ** q) / (p - 1.0)
        y = max(r, 0.0) ** ((p - 1.0) / p)
        rows.append(("zero_level_lower", 0.0, float(x), float(-y)))

    csv_path = os.path.join(outdir, "fig1_phase_portrait.csv")
    _write_csv(csv_path, "series,t,X,Y",
               "series,t,X,Y per sample; orbits at a=1.35 (positive) and a=1.8 "
               "(sign-changing) for p=2.5, q=3, plus the zero-energy level",
               rows)

    fig, ax = plt.subplots(figsize=(7, 5.5))
    gx, gy = np.meshgrid(np.linspace(-2.0, 2.0, 25), np.linspace(-1.6, 1.6, 21))
    e = p / (p - 1.0) - 1.0
    U = np.sign(gy) * np.abs(gy) ** e
    W = np.sign(gx) * (np.abs(gx) ** (p - 1.0) - np.abs(gx) ** (q - 1.0))
    ax.quiver(gx, gy, U, W, color="0.75", angles="xy", width=2.2e-3)
    for label, shot in orbits.items():
        xy = np.array([[y[0], y[1]] for _, y in shot.trajectory])
        ax.plot(xy[:, 0], xy[:, 1], lw=1.6, label=label)
    zl = [max((abs(x) ** p - (p / q) * abs(x) ** q) / (p - 1.0), 0.0) ** ((p - 1.0) / p)
          for x in xs]
    ax.plot(xs, zl, "k--", lw=1.0, label="zero energy")
    ax.plot(xs, [-v for v in zl], "k--", lw=1.0)
    ax.set_xlabel("X")
    ax.set_ylabel("Y")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"phase portrait, p={p:g}, q={q:g}")
    png_path = os.path.join(outdir, "fig1_phase_portrait.png")
    fig.savefig(png_path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return [csv_path, png_path]


def _period_curve(outdir: str) -> List[str]:
    params = Params(3.0, 5.0)
    a_grid = np.linspace(0.02, 0.98, 60)
    Ts = [period(float(a), params) for a in a_grid]
    csv_path = os.path.join(outdir, "fig2_period.csv")
    _write_csv(csv_path, "a,T",
               "orbit period versus seed amplitude for p=3, q=5",
               zip(map(float, a_grid), map(float, Ts)))
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot(a_grid, Ts, lw=1.6)
    ax.set_xlabel("a")
    ax.set_ylabel("T(a)")
    ax.set_title("period of the closed orbit, p=3, q=5")
    png_path = os.path.join(outdir, "fig2_period.png")
    fig.savefig(png_path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return [csv_path, png_path]


def _branch_curve(outdir: str) -> List[str]:
    params = Params(3.0, 5.0)
    trace = trace_branch(params, np.linspace(0.02, 0.995, 80))
    th = thresholds(params)
    pts = sorted(trace.points, key=lambda pt: pt.lam)
    csv_path = os.path.join(outdir, "fig3_branch.csv")
    legend = ("a,T,lambda,mu,lambda_minus_mu; diagonal departs at the "
              "bifurcation abscissa; thresholds in the trailing comment")
    path = _write_csv(csv_path, "a,T,lambda,mu,lambda_minus_mu", legend,
                      ((pt.a, pt.T, pt.lam, pt.mu, pt.lam - pt.mu) for pt in pts))
    with open(path, "a", newline="\n") as fh:
        fh.write(f"# thresholds,rigidity={_FMT % th.rigidity},"
                 f"bifurcation={_FMT % th.bifurcation},"
                 f"lambda1_star={_FMT % lambda1_star(params.p)}\n")

    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
    lam = [pt.lam for pt in pts]
    mu = [pt.mu for pt in pts]
    axes[0].plot(lam, mu, lw=1.6, label="branch")
    lo = min(lam + mu)
    hi = max(lam)
    axes[0].plot([lo, hi], [lo, hi], "k:", lw=1.0, label="diagonal")
    axes[1].plot(lam, [l - m for l, m in zip(lam, mu)], lw=1.6)
    for ax in axes:
        ax.axvline(th.bifurcation, color="crimson", lw=1.0,
                   label="bifurcation abscissa")
        ax.axvline(lambda1_star(params.p), color="gray", lw=1.0, ls="--",
                   label="mixed-norm constant")
        ax.set_xlabel("lambda")
    axes[0].set_ylabel("mu(lambda)")
    axes[1].set_ylabel("lambda - mu(lambda)")
    axes[0].legend(fontsize=8)
    fig.suptitle("minimizer branch, p=3, q=5")
    png_path = os.path.join(outdir, "fig3_branch.png")
    fig.savefig(png_path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return [path, png_path]


def _constants_curves(outdir: str) -> List[str]:
    ps = np.linspace(2.0, 5.0, 61)
    rows = []
    for p in ps:
        ec = eigen_constants(float(p))
        rows.append((float(p), ec.lambda1, ec.lambda1_star, ec.Lambda1, ec.pi_p))
    csv_path = os.path.join(outdir, "fig5_constants.csv")
    _write_csv(csv_path, "p,lambda1,lambda1_star,Lambda1,pi_p",
               "both optimal constants over the exponent sweep; they touch "
               "only at p=2", rows)
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot(ps, [r[1] for r in rows], ":", lw=1.8, label="lambda1")
    ax.plot(ps, [r[2] for r in rows], "-", lw=1.6, label="lambda1_star")
    ax.set_xlabel("p")
    ax.legend()
    ax.set_title("optimal constants versus p")
    png_path = os.path.join(outdir, "fig5_constants.png")
    fig.savefig(png_path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return [csv_path, png_path]


_BUILDERS = {
    "fig1": _phase_portrait,
    "fig2": _period_curve,
    "fig3": _branch_curve,
    "fig5": _constants_curves,
}


def figure_bundle(which: str, outdir: str) -> List[str]:
    """Write the CSV + PNG pair(s) for one figure, or all of them."""
    os.makedirs(outdir, exist_ok=True)
    if which == "all":
        out = []
        for name in FIGURES:
            out.extend(_BUILDERS[name](outdir))
        return out
    if which not in _BUILDERS:
        raise ValueError(f"unknown figure {which!r}; pick from {FIGURES} or 'all'")
    return _BUILDERS[which](outdir)
