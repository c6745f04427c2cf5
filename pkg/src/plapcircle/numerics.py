"""One-dimensional quadrature, root finding and ODE integration.

Everything downstream (constants, orbits, branches, flow diagnostics) sits on
these three primitives.  The quadrature knows how to neutralise integrable
power singularities at the interval endpoints, which is the only non-standard
requirement of this project: every period-type integral blows up like
(x - endpoint)^(-1/p) at one or both turning points.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable, List, Sequence, Tuple

from .errors import (
    InvalidBracket,
    NonConvergent,
    NonIntegrable,
    StepUnderflow,
)

__all__ = [
    "QuadRule",
    "RootBracket",
    "integrate",
    "find_root",
    "integrate_ode",
    "invert_travel_times",
]


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

# Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
_GK_NODES = (
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
)
_K15_WEIGHTS = (
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
)
_G7_WEIGHTS = (
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
)


@dataclass(frozen=True)
class QuadRule:
    """Quadrature configuration.

    kind is "adaptive-panel" for smooth integrands or "singular-endpoint"
    when the integrand blows up like (x-lo)^(-alpha_lo) or (hi-x)^(-alpha_hi)
    with orders in (0, 1).  Orders may be supplied analytically; if left None
    they are probed from the integrand, and an order >= 1 raises
    NonIntegrable.
    """

    kind: str = "adaptive-panel"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 48
    alpha_lo: float | None = None
    alpha_hi: float | None = None

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.kind not in ("adaptive-panel", "singular-endpoint"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")


DEFAULT_RULE = QuadRule()


def _gk15(f, lo, hi):
    """One Gauss-Kronrod panel; returns (K15, |K15 - G7|)."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    fc = f(c)
    k15 = _K15_WEIGHTS[7] * fc
    g7 = _G7_WEIGHTS[3] * fc
    for j in range(7):
        x = h * _GK_NODES[j]
        fa = f(c - x)
        fb = f(c + x)
        k15 += _K15_WEIGHTS[j] * (fa + fb)
        if j % 2 == 1:
            g7 += _G7_WEIGHTS[j // 2] * (fa + fb)
    return h * k15, h * abs(k15 - g7)


def _adaptive(f, lo, hi, abs_tol, rel_tol, max_depth):
    """Globally adaptive bisection on the worst active panel.

    Panels whose split no longer shrinks the error estimate are parked as
    noise-floor panels (the estimate is then dominated by roundoff in f, not
    by truncation); when only such panels remain, the accumulated value is
    the best attainable and is returned.
    """
    val, err = _gk15(f, lo, hi)
    # heap of active panels: (-err, a, b, val, depth, stall_count)
    active = [(-err, lo, hi, val, 0, 0)]
    total = val
    total_err = err
    while True:
        if total_err <= max(abs_tol, rel_tol * abs(total)):
            return total
        if not active:
            return total  # tolerance met up to the roundoff floor
        neg_err, a, b, v, depth, stall = heapq.heappop(active)
        err = -neg_err
        if depth >= max_depth:
            raise NonConvergent(
                f"quadrature depth {max_depth} exhausted, residual {total_err:.3e}"
            )
        m = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        total += (v1 + v2) - v
        total_err += (e1 + e2) - err
        # a split that fails to shrink the estimate at all is refining noise,
        # not truncation (even an order-0.95 endpoint still shrinks by 3.5%)
        stall = stall + 1 if (e1 + e2) > 0.98 * err else 0
        for child in ((e1, a, m, v1), (e2, m, b, v2)):
            ce, ca, cb, cv = child
            if stall < 4 and ce > 1e-17 * abs(total):
                heapq.heappush(active, (-ce, ca, cb, cv, depth + 1, stall))


def _probe_order(f, x0, x1):
    """Estimate the blow-up order of f at x0 from two nearby samples."""
    d = abs(x1 - x0) * 1e-6
    s = 1.0 if x1 > x0 else -1.0
    try:
        f1 = f(x0 + s * d)
        f2 = f(x0 + 2 * s * d)
    except (ZeroDivisionError, OverflowError, ValueError):
        return 1.0
    if not (math.isfinite(f1) and math.isfinite(f2)) or f1 * f2 <= 0:
        return 1.0
    return math.log(abs(f1 / f2)) / math.log(2.0)


def _substituted(f, lo, hi, alpha, side):
    """Map out a power singularity of order alpha at one endpoint.

    Uses x = lo + (hi-lo) s^(1/(1-alpha)) on s in [0,1] (mirrored for the
    right endpoint), so the transformed integrand is bounded at s = 0.
    Once the distance to the endpoint underflows the float grid, f is
    sampled at the closest representable offset and rescaled with the known
    order, which keeps the transformed integrand continuous there.
    """
    gamma = 1.0 / (1.0 - alpha)
    width = hi - lo
    endpoint = lo if side == "lo" else hi
    sgn = 1.0 if side == "lo" else -1.0
    # below d_min the integrand is continued by its known power law: closer
    # to the endpoint a direct evaluation of f returns cancellation noise,
    # while the local power model is still accurate to ~d_min relative
    d_min = 1e-10 * max(abs(endpoint), width)

    def g(s):
        d = width * s ** gamma
        corr = 1.0
        if d < d_min:
            corr = (d / d_min) ** (-alpha) if d > 0.0 else 0.0
            d = d_min
        return f(endpoint + sgn * d) * corr * width * gamma * s ** (gamma - 1.0)

    return g


def integrate(f: Callable[[float], float], interval, rule: QuadRule = DEFAULT_RULE) -> float:
    """Integrate f over [lo, hi] to the rule's tolerance.

    With the singular-endpoint kind, endpoint blow-ups of order alpha in
    (0, 1) are removed by substitution before paneling; f is never evaluated
    at the endpoints themselves.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if lo == hi:
        return 0.0
    if lo > hi:
        return -integrate(f, (hi, lo), rule)

    if rule.kind == "adaptive-panel":
        return _adaptive(f, lo, hi, rule.abs_tol, rule.rel_tol, rule.max_depth)

    a_lo = rule.alpha_lo if rule.alpha_lo is not None else max(_probe_order(f, lo, hi), 0.0)
    a_hi = rule.alpha_hi if rule.alpha_hi is not None else max(_probe_order(f, hi, lo), 0.0)
    if a_lo >= 1.0 or a_hi >= 1.0:
        raise NonIntegrable(f"endpoint order ({a_lo:.3f}, {a_hi:.3f}) not below 1")

    mid = 0.5 * (lo + hi)
    # halve the tolerances so the two halves meet the combined budget
    half = replace(rule, kind="adaptive-panel", abs_tol=0.5 * rule.abs_tol)
    left = (
        _adaptive(_substituted(f, lo, mid, a_lo, "lo"), 0.0, 1.0,
                  half.abs_tol, half.rel_tol, half.max_depth)
        if a_lo > 0.0
        else _adaptive(f, lo, mid, half.abs_tol, half.rel_tol, half.max_depth)
    )
    right = (
        _adaptive(_substituted(f, mid, hi, a_hi, "hi"), 0.0, 1.0,
                  half.abs_tol, half.rel_tol, half.max_depth)
        if a_hi > 0.0
        else _adaptive(f, mid, hi, half.abs_tol, half.rel_tol, half.max_depth)
    )
    return left + right


# --------------------------------------------------------------------------
# root finding
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RootBracket:
    """A sign-changing bracket lo < hi with cached endpoint values."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidBracket(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0:
            raise InvalidBracket(
                f"no sign change: f({self.lo}) = {self.f_lo}, f({self.hi}) = {self.f_hi}"
            )

    @classmethod
    def from_function(cls, f, lo, hi):
        return cls(lo, hi, f(lo), f(hi))


def find_root(f: Callable[[float], float], bracket: RootBracket, tol: float = 1e-13) -> float:
    """Bracketed root via the Illinois variant of regula falsi.

    Never leaves the bracket, so it tolerates the flat endpoints that defeat
    pure Newton iterations on turning-point equations.  Terminates when
    |f(x)| <= tol or the bracket width drops below tol.
    """
    a, b = bracket.lo, bracket.hi
    fa, fb = bracket.f_lo, bracket.f_hi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    side = 0
    x = 0.5 * (a + b)
    for _ in range(300):
        if (b - a) <= tol:
            return 0.5 * (a + b)
        x = (fa * b - fb * a) / (fa - fb)
        if not (a < x < b):
            x = 0.5 * (a + b)
            if not (a < x < b):
                return x  # bracket has collapsed to adjacent floats
        fx = f(x)
        if abs(fx) <= tol:
            return x
        if fx * fa < 0:
            b, fb = x, fx
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = x, fx
            if side == +1:
                fb *= 0.5
            side = +1
    return x


# --------------------------------------------------------------------------
# ODE integration (Dormand-Prince 5(4), adaptive)
# --------------------------------------------------------------------------

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)

_MIN_STEP_FRACTION = 1e-14


def integrate_ode(
    rhs: Callable[[float, Sequence[float]], Sequence[float]],
    y0: Sequence[float],
    t_span: Tuple[float, float],
    step_tol: float = 1e-10,
    max_step: float = math.inf,
) -> List[Tuple[float, Tuple[float, ...]]]:
    """Adaptive explicit integration of y' = rhs(t, y) over t_span.

    Returns the accepted (t, state) samples, dense enough for sign-change
    event detection by the caller.  Local error per step is controlled at
    step_tol (mixed absolute/relative).
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = tuple(float(v) for v in y0)
    n = len(y)
    out = [(t0, y)]
    if t1 == t0:
        return out

    t = t0
    span = t1 - t0
    h = min(max_step, abs(span) * 0.01, 0.1)
    h = math.copysign(max(h, 1e-8), span)
    f0 = tuple(rhs(t, y))
    min_step = abs(span) * _MIN_STEP_FRACTION

    while (t1 - t) * math.copysign(1.0, span) > 0:
        if abs(h) > abs(t1 - t):
            h = t1 - t
        if abs(h) < min_step:
            raise StepUnderflow(f"step collapsed to {h:.3e} at t = {t:.6g}")

        k = [f0]
        for i in range(1, 7):
            yi = list(y)
            ai = _DP_A[i]
            for m in range(n):
                acc = 0.0
                for j, aij in enumerate(ai):
                    acc += aij * k[j][m]
                yi[m] += h * acc
            k.append(tuple(rhs(t + _DP_C[i] * h, yi)))

        y5 = list(y)
        err = 0.0
        for m in range(n):
            acc5 = 0.0
            acc_err = 0.0
            for i in range(7):
                acc5 += _DP_B5[i] * k[i][m]
                acc_err += (_DP_B5[i] - _DP_B4[i]) * k[i][m]
            y5[m] += h * acc5
            scale = step_tol * (1.0 + max(abs(y[m]), abs(y5[m])))
            err += (h * acc_err / scale) ** 2
        err = math.sqrt(err / n)

        if err <= 1.0:
            t += h
            y = tuple(y5)
            f0 = k[6]  # FSAL: stage 7 is the derivative at the new point
            out.append((t, y))
        elif abs(h) <= 2 * min_step:
            raise StepUnderflow(f"error control rejected the minimal step at t = {t:.6g}")
        factor = 0.9 * (1.0 / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if abs(h) > max_step:
            h = math.copysign(max_step, span)
    return out


# --------------------------------------------------------------------------
# monotone time-map inversion (profile reconstruction)
# --------------------------------------------------------------------------


def invert_travel_times(
    speed: Callable[[float], float],
    lo: float,
    hi: float,
    times: Sequence[float],
    leg_time: float,
    alpha_lo: float,
    alpha_hi: float | None = None,
    tol: float = 1e-12,
) -> List[float]:
    """Positions along a monotone leg x: lo -> hi with dx/dt = speed(x) > 0.

    times must be sorted inside [0, leg_time]; leg_time is the full traversal
    time.  speed may vanish like a power at either endpoint (the travel-time
    integrand then has the given singular orders there).  Newton in x with
    the analytic derivative 1/speed, warm-started from the previous sample,
    with incremental quadrature for the cumulative travel time.
    """
    if alpha_hi is None:
        alpha_hi = alpha_lo
    rule = QuadRule(kind="singular-endpoint", abs_tol=1e-13, rel_tol=1e-12,
                    alpha_lo=alpha_lo, alpha_hi=alpha_hi)
    smooth = QuadRule(abs_tol=1e-13, rel_tol=1e-12)

    def inv_speed(x):
        return 1.0 / speed(x)

    width = hi - lo
    base_x = None      # anchor position with known cumulative time
    base_t = None
    out = []
    for target in times:
        if target <= 0.0:
            out.append(lo)
            continue
        if target >= leg_time:
            out.append(hi)
            continue
        if base_x is None:
            # first interior sample: one singular quadrature from lo
            guess = lo + width * min(0.5, (target / leg_time))
            x = _invert_single(inv_speed, speed, lo, hi, lo, 0.0, target, guess,
                               rule, smooth, tol)
        else:
            x = _invert_single(inv_speed, speed, lo, hi, base_x, base_t, target,
                               min(max(base_x, lo + 1e-15 * width), hi), rule, smooth, tol)
        out.append(x)
        base_x, base_t = x, target
    return out


def _invert_single(inv_speed, speed, lo, hi, anchor_x, anchor_t, target, guess,
                   sing_rule, smooth_rule, tol):
    """Solve t(x) = target on (lo, hi) given t(anchor_x) = anchor_t."""

    def travel(x_from, x_to):
        if x_to == x_from:
            return 0.0
        sgn = 1.0
        xa, xb = x_from, x_to
        if xa > xb:
            xa, xb = xb, xa
            sgn = -1.0
        near_lo = (xa - lo) < 1e-3 * (hi - lo)
        near_hi = (hi - xb) < 1e-3 * (hi - lo)
        if near_lo or near_hi:
            r = replace(sing_rule,
                        alpha_lo=sing_rule.alpha_lo if near_lo else 0.0,
                        alpha_hi=sing_rule.alpha_hi if near_hi else 0.0)
            return sgn * integrate(inv_speed, (xa, xb), r)
        return sgn * integrate(inv_speed, (xa, xb), smooth_rule)

    x = min(max(guess, lo + 1e-14 * (hi - lo)), hi - 1e-14 * (hi - lo))
    t_x = anchor_t + travel(anchor_x, x)
    a, b = lo, hi
    for _ in range(80):
        resid = t_x - target
        if abs(resid) <= tol:
            return x
        if resid > 0:
            b = min(b, x)
        else:
            a = max(a, x)
        step = -resid * speed(x)
        x_new = x + step
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        t_x += travel(x, x_new)
        x = x_new
    return x
