"""Periodic orbits of the turning-point system behind the rescaled problem.

A positive T-periodic solution of  -(|f'|^{p-2} f')' + f^{p-1} = f^{q-1}
oscillates between a seed amplitude a in (0, 1) and its conjugate amplitude
b(a) on the far side of the well minimum at 1.  The conserved energy pins
|f'| as an explicit function of f, so the period and the three norm
integrals reduce to endpoint-singular quadratures over [a, b(a)].  An
independent shooting route integrates the first-order system and detects the
closure of the orbit; the two routes cross-validate each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .constants import Params
from .errors import NonPeriodic, OutOfRange
from .numerics import (
    QuadRule,
    RootBracket,
    find_root,
    integrate,
    integrate_ode,
    invert_travel_times,
)

__all__ = [
    "Potential",
    "PhasePoint",
    "Orbit",
    "ShotOrbit",
    "energy",
    "conjugate_point",
    "period",
    "norm_integrals",
    "shoot_period",
    "shoot_orbit",
    "profile",
]

_TIME_CAP = 1.0e4


@dataclass(frozen=True)
class Potential:
    """V(X) = |X|^q / q - |X|^p / p and the orientation of its well.

    For p < q the well of V itself sits at X = 1; for q < p the orbits live
    on the level sets of -V, whose well is at 1.  well() returns the
    orientation-corrected potential so that every downstream formula can
    assume a single shape: zero at 0, negative minimum at 1, zero again at
    x_max = (q/p)^(1/(q-p)).
    """

    params: Params

    def value(self, X: float) -> float:
        p, q = self.params.p, self.params.q
        return abs(X) ** q / q - abs(X) ** p / p

    @property
    def orientation(self) -> float:
        return 1.0 if self.params.q > self.params.p else -1.0

    def well(self, X: float) -> float:
        return self.orientation * self.value(X)

    @property
    def x_max(self) -> float:
        p, q = self.params.p, self.params.q
        return (q / p) ** (1.0 / (q - p))


@dataclass(frozen=True)
class PhasePoint:
    X: float
    Y: float


@dataclass(frozen=True)
class Orbit:
    """One closed positive orbit and its quadrature data over a full period."""

    a: float
    b: float
    T: float
    Ip_prime: float   # int_0^T |f'|^p dr
    Ip: float         # int_0^T |f|^p dr
    Iq: float         # int_0^T |f|^q dr
    params: Params


@dataclass(frozen=True)
class ShotOrbit:
    period: float
    trajectory: List[Tuple[float, Tuple[float, ...]]]
    positive: bool
    seed: float


def energy(pt: PhasePoint, params: Params) -> float:
    """Conserved energy (p-1)|Y|^(p/(p-1)) + (p/q)|X|^q - |X|^p.

    Over states with Y = 0 the minimum is p/q - 1, attained at |X| = 1
    (for p < q).
    """
    p, q = params.p, params.q
    return (p - 1.0) * abs(pt.Y) ** (p / (p - 1.0)) + (p / q) * abs(pt.X) ** q - abs(pt.X) ** p


def _phi_ratio(y: float) -> float:
    """expm1(y) / y, continuous through y = 0."""
    if abs(y) < 1e-8:
        return 1.0 + 0.5 * y + y * y / 6.0
    return math.expm1(y) / y


def level_gap(a: float, X: float, params: Params) -> float:
    """well(a) - well(X) without the level cancellation.

    The naive difference of potential values loses all digits once the orbit
    shrinks into the well bottom (both levels agree to O((1-a)^2)); factoring
    the difference through expm1/log1p keeps one digit per digit of 1 - a.
    """
    p, q = params.p, params.q
    s = 1.0 if q > p else -1.0
    ell = math.log1p((a - X) / X)
    bracket = math.exp((q - p) * math.log(X)) * _phi_ratio(q * ell) - _phi_ratio(p * ell)
    return s * ell * X ** p * bracket


def conjugate_point(a: float, params: Params) -> float:
    """The other positive amplitude with the same potential level as a."""
    if not 0.0 < a < 1.0:
        raise OutOfRange(f"seed amplitude must lie in (0, 1), got {a}")
    pot = Potential(params)
    # pad the upper end past the potential zero: the gap there only vanishes
    # up to rounding, which can flip the bracket sign for a -> 0
    hi = pot.x_max * (1.0 + 1e-12)

    def g(X):
        return -level_gap(a, X, params)

    delta = min(0.5 * (1.0 - a), 0.25 * (hi - 1.0))
    g_lo = g(1.0 + delta)
    while g_lo >= 0.0 and delta > 1e-300:
        delta *= 0.25
        g_lo = g(1.0 + delta)
    bracket = RootBracket(1.0 + delta, hi, g_lo, g(hi))
    # terminate on bracket width: the g-values themselves shrink with 1 - a
    scale = max(abs(g_lo), abs(bracket.f_hi))
    return min(find_root(g, bracket, tol=1e-15 * max(scale, 1e-30)), pot.x_max)


def _orbit_rule(abs_tol, rel_tol, p):
    return QuadRule(kind="singular-endpoint", abs_tol=abs_tol, rel_tol=rel_tol,
                    alpha_lo=1.0 / p, alpha_hi=1.0 / p)


def _speed_factor(params: Params):
    """X -> (p/(p-1) (well(a) - well(X)))^(1/p) bits shared by the integrals."""
    p = params.p
    c = p / (p - 1.0)

    def gap(a):
        def d(X):
            return max(c * level_gap(a, X, params), 1e-300)

        return d

    return gap


def period(a: float, params: Params, abs_tol: float = 1e-11, rel_tol: float = 1e-11) -> float:
    """Orbit period from the turning-point quadrature.

    The integrand blows up like distance^(-1/p) at both turning points; the
    full period is twice the rising-leg travel time from a to b(a).
    """
    p = params.p
    b = conjugate_point(a, params)
    d = _speed_factor(params)(a)
    rule = _orbit_rule(abs_tol, rel_tol, p)
    return 2.0 * integrate(lambda X: d(X) ** (-1.0 / p), (a, b), rule)


def norm_integrals(a: float, params: Params, abs_tol: float = 1e-11,
                   rel_tol: float = 1e-11) -> Orbit:
    """The period and the three full-period integrals of the orbit."""
    p, q = params.p, params.q
    b = conjugate_point(a, params)
    d = _speed_factor(params)(a)
    rule = _orbit_rule(abs_tol, rel_tol, p)
    inv = lambda X: d(X) ** (-1.0 / p)
    T = 2.0 * integrate(inv, (a, b), rule)
    ip_prime = 2.0 * integrate(lambda X: d(X) ** (1.0 - 1.0 / p), (a, b), rule)
    ip = 2.0 * integrate(lambda X: X ** p * inv(X), (a, b), rule)
    iq = 2.0 * integrate(lambda X: X ** q * inv(X), (a, b), rule)
    return Orbit(a=a, b=b, T=T, Ip_prime=ip_prime, Ip=ip, Iq=iq, params=params)


# --------------------------------------------------------------------------
# shooting
# --------------------------------------------------------------------------


def _hamiltonian_rhs(params: Params):
    p, q = params.p, params.q
    s = 1.0 if q > p else -1.0
    e = p / (p - 1.0) - 1.0  # exponent of |Y| in X'

    def rhs(t, y):
        X, Y = y
        dX = math.copysign(abs(Y) ** e, Y) if Y != 0.0 else 0.0
        force = math.copysign(abs(X) ** (p - 1.0), X) - math.copysign(abs(X) ** (q - 1.0), X)
        return (dX, s * force)

    return rhs


def _normalize_seed(a: float, params: Params) -> Tuple[float, bool]:
    """Map far-side seeds onto (0, 1); flag sign-changing orbits."""
    pot = Potential(params)
    if 0.0 < a < 1.0:
        return a, True
    if 1.0 < a < pot.x_max:
        level = pot.well(a)

        def g(X):
            return pot.well(X) - level

        # g > 0 near 0 (well vanishes there, level < 0) and g < 0 at 1
        root = find_root(g, RootBracket.from_function(g, 1e-12, 1.0 - 1e-12), tol=1e-14)
        return root, True
    if a > pot.x_max:
        return a, False
    raise OutOfRange(f"seed {a} does not generate a closed orbit")


def _refine_crossing(rhs, t_lo, y_lo, t_hi, step_tol):
    """Polish the Y = 0 crossing inside (t_lo, t_hi] by Newton on Y(t)."""
    t_guess = t_hi
    t_base, y_base = t_lo, y_lo
    for _ in range(8):
        seg = integrate_ode(rhs, y_base, (t_base, t_guess), step_tol)
        t_base, y_base = seg[-1]
        Y = y_base[1]
        dY = rhs(t_base, y_base)[1]
        if dY == 0.0 or abs(Y) < 1e-14 * (1.0 + abs(y_base[0])):
            break
        t_guess = t_base - Y / dY
    return t_base, y_base


def shoot_orbit(a: float, params: Params, step_tol: float = 1e-12) -> ShotOrbit:
    """Integrate the first-order system from (a, 0) until the orbit closes.

    The orbit closes at the second sign change of Y.  A rough pass fixes
    the step ceiling, a tight pass collects the trajectory, and the closure
    time is polished by Newton on Y(t).
    """
    seed = a
    if a <= 0.0:
        raise OutOfRange(f"seed must be positive, got {a}")
    pot = Potential(params)
    if abs(a - 1.0) < 1e-12 or (a > 1.0 and abs(pot.well(a)) < 1e-14):
        raise OutOfRange("degenerate seed: no closed orbit through the equilibrium")
    start, positive = _normalize_seed(a, params)

    rhs = _hamiltonian_rhs(params)
    rough, _ = _find_period(rhs, start, step_tol=1e-6, max_step=0.1)
    T, traj = _find_period(rhs, start, step_tol=step_tol,
                           max_step=min(0.25, max(rough / 64.0, 1e-4)),
                           t_cap=min(4.0 * rough, _TIME_CAP), collect=True)
    return ShotOrbit(period=T, trajectory=traj, positive=positive, seed=seed)


def _find_period(rhs, a, step_tol, max_step, t_cap=_TIME_CAP, collect=False):
    """Integrate in growing windows until the second Y sign change."""
    prev_t, prev_y = 0.0, (float(a), 0.0)
    traj_all = [(prev_t, prev_y)]
    crossings = []
    window = max(64.0 * max_step, 1.0)
    while prev_t < t_cap and len(crossings) < 2:
        t_end = min(prev_t + window, t_cap)
        seg = integrate_ode(rhs, prev_y, (prev_t, t_end), step_tol, max_step=max_step)
        for k in range(len(seg) - 1):
            ta, ya = seg[k]
            tb, yb = seg[k + 1]
            if ya[1] == 0.0 and ta > 0.0:
                crossings.append((ta, ya))
            elif ya[1] * yb[1] < 0.0:
                crossings.append(_refine_crossing(rhs, ta, ya, tb, step_tol))
            if len(crossings) >= 2:
                break
        if collect:
            traj_all.extend(seg[1:])
        prev_t, prev_y = seg[-1]
        window *= 2.0
    if len(crossings) < 2:
        raise NonPeriodic(f"no closure within t = {t_cap}")
    T, y_T = crossings[1]
    if collect:
        clipped = [(t, y) for (t, y) in traj_all if t <= T]
        clipped.append((T, y_T))
        return T, clipped
    return T, None


def shoot_period(a: float, params: Params, step_tol: float = 1e-12) -> float:
    """Closure time of the shot orbit; the oracle for period()."""
    return shoot_orbit(a, params, step_tol).period


# --------------------------------------------------------------------------
# profile reconstruction
# --------------------------------------------------------------------------


def profile(a: float, params: Params, n: int) -> np.ndarray:
    """n samples of the orbit profile f_a over one period [0, T_a).

    f(0) = a, f(T/2) = b(a), even about both turning instants.  Sampling
    inverts the travel-time map on the rising leg instead of time stepping,
    so no error accumulates at the degenerate turning points.
    """
    if not 0.0 < a < 1.0:
        raise OutOfRange(f"seed amplitude must lie in (0, 1), got {a}")
    if n < 8:
        raise OutOfRange("need at least 8 samples")
    p = params.p
    b = conjugate_point(a, params)
    d = _speed_factor(params)(a)

    def speed(X):
        return d(X) ** (1.0 / p)

    half = integrate(lambda X: 1.0 / speed(X), (a, b),
                     _orbit_rule(1e-13, 1e-12, p))
    T = 2.0 * half
    t = T * np.arange(n) / n
    red = np.mod(t, T)
    red = np.where(red > half, T - red, red)

    order = np.argsort(red, kind="stable")
    xs = invert_travel_times(speed, a, b, red[order], half,
                             alpha_lo=1.0 / p, alpha_hi=1.0 / p)
    out = np.empty(n)
    out[order] = np.asarray(xs)
    return out
