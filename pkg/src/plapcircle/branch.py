"""Bifurcation branch: orbits mapped to points on the quotient-minimizer curve.

Every closed orbit of period T yields a pair (lambda, mu) through the
rescaling of the periodic profile onto the circle:

    lambda = (T / 2 pi)^2 * (||f||_{p,[0,T]} / ||f'||_{p,[0,T]})^(p-2)
    mu     = lambda * T^(2/q - 2/p) * ||f||_{q,[0,T]}^(q-2) / ||f||_{p,[0,T]}^(p-2)

For p < q the curve is the branch lambda -> mu(lambda) of minimizers below
the diagonal; for q < p the same formulas read as mu -> lambda(mu).  The
branch emanates from the diagonal at the bifurcation threshold
lambda1_star / |q - p| and rigidity pins the diagonal up to
lambda1 / |q - p|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .constants import Params, lambda1, lambda1_star
from .errors import BranchRangeExceeded, InsufficientBranch, OutOfRange
from .orbit import Orbit, norm_integrals

__all__ = [
    "BranchPoint",
    "BranchTrace",
    "Thresholds",
    "thresholds",
    "branch_point",
    "trace_branch",
    "rigidity_period_bound",
    "optimal_constant_estimate",
    "departure_abscissa",
    "scaling_from_norms",
    "lambda_of_mu",
]


@dataclass(frozen=True)
class BranchPoint:
    a: float
    lam: float
    mu: float
    T: float
    regime: str          # "sub" for p < q, "super" for q < p
    orbit: Orbit

    @property
    def gap(self) -> float:
        """Distance to the diagonal, nonnegative along the true branch."""
        return self.lam - self.mu if self.regime == "sub" else self.mu - self.lam


@dataclass(frozen=True)
class BranchTrace:
    points: List[BranchPoint]
    failures: List[Tuple[float, str]]


@dataclass(frozen=True)
class Thresholds:
    bifurcation: float
    rigidity: float


def thresholds(params: Params) -> Thresholds:
    gap = abs(params.q - params.p)
    if gap == 0.0:
        raise OutOfRange("thresholds undefined at p = q")
    return Thresholds(
        bifurcation=lambda1_star(params.p) / gap,
        rigidity=lambda1(params.p) / gap,
    )


def _regime(params: Params) -> str:
    return "sub" if params.q > params.p else "super"


def branch_point(a: float, params: Params, abs_tol: float = 1e-11,
                 rel_tol: float = 1e-11) -> BranchPoint:
    """One point of the branch from the orbit seeded at a."""
    params.require_theorem_scope()
    orb = norm_integrals(a, params, abs_tol=abs_tol, rel_tol=rel_tol)
    lam, mu = point_from_orbit(orb)
    return BranchPoint(a=a, lam=lam, mu=mu, T=orb.T, regime=_regime(params), orbit=orb)


def point_from_orbit(orb: Orbit) -> Tuple[float, float]:
    p, q = orb.params.p, orb.params.q
    norm_fp = orb.Ip ** (1.0 / p)        # ||f||_{p,[0,T]}
    norm_fq = orb.Iq ** (1.0 / q)
    norm_dfp = orb.Ip_prime ** (1.0 / p)
    lam = (orb.T / (2.0 * math.pi)) ** 2 * (norm_fp / norm_dfp) ** (p - 2.0)
    mu = lam * orb.T ** (2.0 / q - 2.0 / p) * norm_fq ** (q - 2.0) / norm_fp ** (p - 2.0)
    return lam, mu


def scaling_from_norms(lam: float, mu: float, norm_du: float, norm_up: float,
                       norm_uq: float, params: Params) -> Tuple[float, float]:
    """Recover (T, K) of the rescaling from the circle norms of u.

    Closes the loop with point_from_orbit: feeding back the norms of the
    rescaled profile returns the original period and amplitude factor.
    """
    p, q = params.p, params.q
    T = 2.0 * math.pi * lam ** (1.0 / p) * (norm_du / norm_up) ** (1.0 - 2.0 / p)
    K = (lam / mu * norm_uq ** (q - 2.0) / norm_up ** (p - 2.0)) ** (1.0 / (q - p))
    return T, K


def trace_branch(params: Params, a_grid: Sequence[float], abs_tol: float = 1e-9,
                 rel_tol: float = 1e-9) -> BranchTrace:
    """Branch points over a seed grid; per-point failures are collected."""
    params.require_theorem_scope()
    points: List[BranchPoint] = []
    failures: List[Tuple[float, str]] = []
    for a in a_grid:
        try:
            points.append(branch_point(float(a), params, abs_tol=abs_tol, rel_tol=rel_tol))
        except Exception as exc:  # pragma: no cover - defensive per-point isolation
            failures.append((float(a), f"{type(exc).__name__}: {exc}"))
    return BranchTrace(points=points, failures=failures)


def rigidity_period_bound(a: float, params: Params) -> Tuple[float, float]:
    """Orbit period and its rigidity lower bound (non-constant orbits only)."""
    params.require_theorem_scope()
    if not params.q > params.p:
        raise OutOfRange("period bound stated for p < q")
    orb = norm_integrals(a, params)
    ratio = (orb.Ip_prime ** (1.0 / params.p) / orb.Ip ** (1.0 / params.p))
    bound = 2.0 * math.pi * math.sqrt(lambda1(params.p) / (params.q - params.p)) \
        * ratio ** (params.p / 2.0 - 1.0)
    return orb.T, bound


def optimal_constant_estimate(params: Params, a_grid: Sequence[float],
                              rel_slack: float = 0.05) -> Tuple[float, float]:
    """Bracket for the sharp interpolation constant from the traced branch.

    Returns (lambda1, |q - p| * smallest branch abscissa strictly off the
    diagonal).  The upper end approaches lambda1_star as the grid approaches
    the constant state.
    """
    params.require_theorem_scope()
    if params.p == params.q:
        raise OutOfRange("estimate undefined at p = q")
    gap = abs(params.q - params.p)
    trace = trace_branch(params, a_grid)
    off_diagonal = [pt for pt in trace.points if pt.gap > 0.0]
    if not off_diagonal:
        raise InsufficientBranch("no traced point leaves the diagonal")
    abscissa = min(pt.lam if pt.regime == "sub" else pt.mu for pt in off_diagonal)
    low = lambda1(params.p)
    high = gap * abscissa
    if high < low * (1.0 - rel_slack) or high > lambda1_star(params.p) * (1.0 + rel_slack):
        raise InsufficientBranch(
            f"estimate {high:.6g} outside [{low:.6g}, {lambda1_star(params.p):.6g}]"
        )
    return low, high


def departure_abscissa(params: Params, delta0: float = 0.125, levels: int = 7) -> Tuple[float, float]:
    """Extrapolated diagonal-departure abscissa and the measured order.

    Evaluates the branch abscissa at seeds 1 - delta0 * 2^-k and removes the
    leading power of the defect by Richardson extrapolation with the order
    estimated from consecutive differences (the defect closes like
    (1 - a)^2, but the order is measured rather than assumed).
    """
    params.require_theorem_scope()
    vals = []
    for k in range(levels):
        a = 1.0 - delta0 * 2.0 ** (-k)
        # the defect under extrapolation is >= 1e-5, so moderate quadrature
        # tolerances avoid chasing cancellation noise in the shrinking well
        pt = branch_point(a, params, abs_tol=1e-9, rel_tol=1e-9)
        vals.append(pt.lam if pt.regime == "sub" else pt.mu)
    d1 = vals[-2] - vals[-3]
    d2 = vals[-1] - vals[-2]
    if d2 == 0.0 or d1 / d2 <= 1.2:
        # differences already at the noise floor: the last value is converged
        return vals[-1], float("nan")
    rho = d1 / d2
    order = math.log(rho, 2.0)
    extrapolated = vals[-1] + d2 / (rho - 1.0)
    return extrapolated, order


def lambda_of_mu(mu: float, params: Params, trace: BranchTrace | None = None) -> float:
    """Inverse branch map used by the spectral estimates.

    Inside the rigidity window the map is the identity.  Beyond it the value
    is interpolated from a traced branch; a missing or too-short trace
    raises BranchRangeExceeded.
    """
    params.require_theorem_scope()
    gap = abs(params.q - params.p)
    if mu < 0:
        raise OutOfRange("potential norm must be nonnegative")
    if mu <= lambda1(params.p) / gap:
        return mu
    if trace is None:
        raise BranchRangeExceeded(
            f"{mu:.6g} exceeds the rigidity window; supply a traced branch"
        )
    # knots (mu_j, lambda_j) off the diagonal, plus the diagonal at the onset
    pts = sorted((pt for pt in trace.points if pt.gap >= 0.0),
                 key=lambda pt: pt.mu if pt.regime == "sub" else pt.lam)
    if params.q > params.p:
        knots = [(pt.mu, pt.lam) for pt in pts]
    else:
        knots = [(pt.lam, pt.mu) for pt in pts]
    if not knots or mu > knots[-1][0]:
        raise BranchRangeExceeded(f"{mu:.6g} beyond the traced branch")
    if mu <= knots[0][0]:
        # between the rigidity window and the first traced point the branch
        # numerically still sits on the diagonal
        return mu
    for (m0, l0), (m1, l1) in zip(knots, knots[1:]):
        if m0 <= mu <= m1:
            w = 0.0 if m1 == m0 else (mu - m0) / (m1 - m0)
            return l0 + w * (l1 - l0)
    raise BranchRangeExceeded(f"{mu:.6g} not bracketed by the trace")
