"""Spectral constants of the periodic p-Laplacian and their eigenprofiles.

All four constants reduce to explicit one-dimensional quadratures over the
conserved-energy relation of a Cauchy problem:

    lambda1(p)      = ((2/pi) * int_0^1 ((p-1)/(1-X^p))^(1/p) dX)^2
    pi_p(p)         = 2       * int_0^1 ((p-1)/(1-X^p))^(1/p) dX
    Lambda1(p)      = lambda1(p)^(p/2)  (= (pi_p/pi)^p)
    lambda1_star(p) = J1^(2/p-1) * J2^(3-2/p)

with J1, J2 the analogous quadratures for the problem whose restoring force
is linear.  The two eigenprofiles (the minimizer of the p-norm quotient and
the minimizer of the 2-norm quotient) are reconstructed by inverting the
travel-time map of the same energy relation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidExponent, OutOfRange
from .numerics import QuadRule, integrate, invert_travel_times

__all__ = [
    "Params",
    "EigenConstants",
    "pi_p",
    "lambda1",
    "lambda1_star",
    "Lambda1",
    "eigen_constants",
    "lambda1_profile",
    "lambda1_star_profile",
]

_RULE = QuadRule(kind="singular-endpoint", abs_tol=1e-13, rel_tol=1e-13)


@dataclass(frozen=True)
class Params:
    """Exponent pair (p, q).

    The constants accept any p > 1.  Operations that rely on the rigidity
    theory additionally require p > 2 and q > p - 1; callers guard that with
    require_theorem_scope().
    """

    p: float
    q: float

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidExponent(f"p must exceed 1, got {self.p}")
        if not self.q > 0:
            raise InvalidExponent(f"q must be positive, got {self.q}")

    @property
    def is_log_case(self) -> bool:
        return self.p == self.q

    @property
    def theorem_scope(self) -> bool:
        return self.p > 2 and self.q > self.p - 1

    def require_theorem_scope(self):
        if not self.theorem_scope:
            raise OutOfRange(
                f"(p, q) = ({self.p}, {self.q}) outside the range p > 2, q > p - 1"
            )
        return self


@dataclass(frozen=True)
class EigenConstants:
    """The four constants at one exponent, tagged with the theory range."""

    p: float
    lambda1: float
    lambda1_star: float
    Lambda1: float
    pi_p: float
    theorem_scope: bool


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 1:
        raise InvalidExponent(f"p must exceed 1, got {p}")
    return p


@lru_cache(maxsize=None)
def _quarter_integral_p(p: float) -> float:
    """int_0^1 ((p-1)/(1-X^p))^(1/p) dX, blow-up of order 1/p at X = 1."""
    rule = QuadRule(kind="singular-endpoint", abs_tol=1e-13, rel_tol=1e-13,
                    alpha_lo=0.0, alpha_hi=1.0 / p)
    return integrate(
        lambda X: ((p - 1.0) / max(1.0 - X ** p, 5e-324)) ** (1.0 / p),
        (0.0, 1.0),
        rule,
    )


@lru_cache(maxsize=None)
def _star_integrals(p: float):
    """The two quadratures J1, J2 behind lambda1_star."""
    c = 2.0 * (p - 1.0) / p
    rule = QuadRule(kind="singular-endpoint", abs_tol=1e-13, rel_tol=1e-13,
                    alpha_lo=0.0, alpha_hi=1.0 / p)
    two_over_pi = 2.0 / math.pi
    j2 = two_over_pi * integrate(
        lambda X: (c / max(1.0 - X * X, 5e-324)) ** (1.0 / p), (0.0, 1.0), rule
    )
    # exponent 1/p - 1 < 0 flips the blow-up into a fractional-power zero;
    # the same substitution removes the corner
    j1 = two_over_pi * integrate(
        lambda X: (c / max(1.0 - X * X, 5e-324)) ** (1.0 / p - 1.0), (0.0, 1.0), rule
    )
    return j1, j2


def pi_p(p: float) -> float:
    """Half-period of the unit-amplitude free oscillation; pi at p = 2."""
    p = _check_p(p)
    return 2.0 * _quarter_integral_p(p)


def lambda1(p: float) -> float:
    """Optimal constant of the p-norm Poincare quotient on zero-mean functions."""
    p = _check_p(p)
    return ((2.0 / math.pi) * _quarter_integral_p(p)) ** 2


def Lambda1(p: float) -> float:
    """Lowest positive eigenvalue of the p-Laplacian; equals lambda1^(p/2)."""
    p = _check_p(p)
    return lambda1(p) ** (p / 2.0)


def lambda1_star(p: float) -> float:
    """Optimal constant of the mixed quotient (gradient p-norm over 2-norm)."""
    p = _check_p(p)
    j1, j2 = _star_integrals(p)
    return j1 ** (2.0 / p - 1.0) * j2 ** (3.0 - 2.0 / p)


def eigen_constants(p: float) -> EigenConstants:
    p = _check_p(p)
    return EigenConstants(
        p=p,
        lambda1=lambda1(p),
        lambda1_star=lambda1_star(p),
        Lambda1=Lambda1(p),
        pi_p=pi_p(p),
        theorem_scope=p > 2,
    )


# --------------------------------------------------------------------------
# eigenprofiles
# --------------------------------------------------------------------------
#
# Both Cauchy problems conserve an energy that pins |u'| as a function of u
# on each monotone quarter of the oscillation:
#
#   p-norm profile:  |u'| = ((1 - u^p) / (p - 1))^(1/p),  quarter = pi_p / 2
#   2-norm profile:  |u'| = (p (1 - u^2) / (2 (p-1)))^(1/p)
#
# The full period is assembled from the descending quarter u: 1 -> 0 by odd
# reflection about the zero and sign flip over the half period.


@lru_cache(maxsize=None)
def _star_quarter(p: float) -> float:
    c = 2.0 * (p - 1.0) / p
    rule = QuadRule(kind="singular-endpoint", abs_tol=1e-13, rel_tol=1e-13,
                    alpha_lo=0.0, alpha_hi=1.0 / p)
    return integrate(
        lambda X: (c / max(1.0 - X * X, 5e-324)) ** (1.0 / p), (0.0, 1.0), rule
    )


def _fold_quarter(r: np.ndarray, quarter: float):
    """Fold times on [0, 4*quarter) onto the descending quarter with signs."""
    period = 4.0 * quarter
    red = np.mod(r, period)
    sign = np.ones_like(red)
    half = 2.0 * quarter
    flip = red >= half
    red = np.where(flip, red - half, red)
    sign = np.where(flip, -sign, sign)
    mirror = red > quarter
    red = np.where(mirror, half - red, red)
    sign = np.where(mirror, -sign, sign)
    return red, sign


def _profile_samples(p: float, x: np.ndarray, speed_u, quarter: float) -> np.ndarray:
    """Sample the 2pi-periodic rescaled profile at angles x."""
    period = 4.0 * quarter
    r = (period / (2.0 * math.pi)) * np.asarray(x, dtype=float)
    red, sign = _fold_quarter(r, quarter)

    # descending leg in w = 1 - u so the speed vanishes at the left endpoint
    def speed_w(w):
        return speed_u(1.0 - w)

    order = np.argsort(red, kind="stable")
    sorted_times = red[order]
    w_sorted = invert_travel_times(
        speed_w, 0.0, 1.0, sorted_times, quarter, alpha_lo=1.0 / p, alpha_hi=0.0
    )
    w = np.empty_like(red)
    w[order] = np.asarray(w_sorted)
    return sign * (1.0 - w)


@lru_cache(maxsize=None)
def _lambda1_profile_cached(p: float, n: int):
    x = 2.0 * math.pi * np.arange(n) / n
    quarter = _quarter_integral_p(p)

    def speed(u):
        return (max(1.0 - u ** p, 0.0) / (p - 1.0)) ** (1.0 / p)

    vals = _profile_samples(p, x, speed, quarter)
    vals.setflags(write=False)
    return vals


@lru_cache(maxsize=None)
def _lambda1_star_profile_cached(p: float, n: int):
    x = 2.0 * math.pi * np.arange(n) / n
    quarter = _star_quarter(p)
    c = p / (2.0 * (p - 1.0))

    def speed(u):
        return (c * max(1.0 - u * u, 0.0)) ** (1.0 / p)

    vals = _profile_samples(p, x, speed, quarter)
    vals.setflags(write=False)
    return vals


def lambda1_profile(p: float, n: int) -> np.ndarray:
    """The 2pi-periodic eigenprofile attaining lambda1, on n uniform points.

    Unit amplitude, zero mean, antiperiodic over half the circle.
    """
    p = _check_p(p)
    return _lambda1_profile_cached(p, int(n))


def lambda1_star_profile(p: float, n: int) -> np.ndarray:
    """The 2pi-periodic optimal mode for lambda1_star, on n uniform points."""
    p = _check_p(p)
    return _lambda1_star_profile_cached(p, int(n))
