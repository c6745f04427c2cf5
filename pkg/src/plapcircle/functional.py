"""Discrete calculus on positive 2pi-periodic grid functions.

Norms are averages against the uniform probability measure on the circle, so
a constant c has every norm equal to |c| and the interpolation entropy
vanishes exactly at constants.  Differentiation is spectral; the weighted
curvature integrals of the sharper inequalities are instead evaluated with
conservative flux differencing, which stays accurate on the extremal
profiles (their second derivative blows up at the turning points and ruins
double spectral differentiation there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import branch as _branch
from .constants import Params, lambda1, lambda1_star
from .errors import (
    DomainError,
    NonPositive,
    OutOfRange,
    ZeroFunction,
)

__all__ = [
    "GridFunction",
    "Functionals",
    "PsiFunction",
    "norm",
    "derivative",
    "p_laplacian",
    "fisher",
    "entropy",
    "functionals",
    "check_theorem1",
    "check_theorem2",
    "check_lemma_cs",
    "check_appendixA",
    "check_klt",
    "els_residual",
    "random_positive_trig",
]


@dataclass(frozen=True)
class GridFunction:
    """Samples at x_j = 2 pi j / n with periodic indexing."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 16 or v.size % 2 != 0:
            raise OutOfRange("grid must be one-dimensional, even, with n >= 16")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n) / self.n

    @property
    def positive(self) -> bool:
        return bool(np.min(self.values) > 0.0)

    @classmethod
    def from_callable(cls, f, n: int) -> "GridFunction":
        x = 2.0 * math.pi * np.arange(n) / n
        return cls(np.asarray([f(xi) for xi in x], dtype=float))

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        vals = np.loadtxt(path, dtype=float, delimiter=",", ndmin=1)
        return cls(np.atleast_1d(vals).ravel())

    def require_positive(self, what: str) -> "GridFunction":
        if not self.positive:
            raise NonPositive(f"{what} requires strictly positive samples")
        return self


def norm(u: GridFunction, r: float) -> float:
    """Probability-measure r-norm: (mean |u|^r)^(1/r)."""
    if r < 1:
        raise OutOfRange(f"norm exponent must be >= 1, got {r}")
    return float(np.mean(np.abs(u.values) ** r)) ** (1.0 / r)


def derivative(u: GridFunction) -> GridFunction:
    """Spectral derivative, exact on trigonometric polynomials below Nyquist."""
    return GridFunction(_sder(u.values))


def _sder(v: np.ndarray) -> np.ndarray:
    m = v.size
    k = np.fft.rfftfreq(m, d=1.0 / m)
    U = np.fft.rfft(v)
    dU = 1j * k * U
    dU[-1] = 0.0  # even n: the Nyquist mode has no odd derivative
    return np.fft.irfft(dU, m)


def _phi(v: np.ndarray, r: float) -> np.ndarray:
    """Odd power |v|^(r-1) sign(v)."""
    return np.sign(v) * np.abs(v) ** (r - 1.0)


def p_laplacian(u: GridFunction, p: float) -> GridFunction:
    """(|u'|^(p-2) u')' with both derivatives spectral."""
    return GridFunction(_sder(_phi(_sder(u.values), p)))


def _lp_flux_diff(v: np.ndarray, p: float) -> np.ndarray:
    """Conservative second-order form of the p-Laplacian.

    Differences the flux |u'|^(p-2) u' of one-sided slopes; on profiles with
    the turning-point cusp the flux is locally linear, so the stencil keeps
    its second order where spectral differentiation degrades.
    """
    h = 2.0 * math.pi / v.size
    slope = (np.roll(v, -1) - v) / h
    flux = _phi(slope, p)
    return (flux - np.roll(flux, 1)) / h


def fisher(u: GridFunction, p: float) -> float:
    """Squared gradient p-norm."""
    return norm(derivative(u), p) ** 2


def entropy(u: GridFunction, params: Params) -> float:
    """Interpolation entropy; the log form at p = q.

    Nonnegative on the probability space, zero exactly at constants.
    """
    if not np.any(u.values):
        raise ZeroFunction("entropy undefined on the zero function")
    p, q = params.p, params.q
    if params.is_log_case:
        u.require_positive("log-form entropy")
        np_norm = norm(u, p)
        w = np.abs(u.values) ** p
        return float(2.0 / p * np_norm ** (2.0 - p)
                     * np.mean(w * np.log(np.abs(u.values) / np_norm)))
    return (norm(u, p) ** 2 - norm(u, q) ** 2) / (p - q)


@dataclass(frozen=True)
class Functionals:
    norm_p: float
    norm_q: float
    norm_2: float
    fisher: float
    entropy: float


def functionals(u: GridFunction, params: Params) -> Functionals:
    return Functionals(
        norm_p=norm(u, params.p),
        norm_q=norm(u, params.q),
        norm_2=norm(u, 2.0),
        fisher=fisher(u, params.p),
        entropy=entropy(u, params),
    )


# --------------------------------------------------------------------------
# the convexity profile of the improved inequality
# --------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)


@dataclass(frozen=True)
class PsiFunction:
    """Psi(z) = z + kappa lambda1^(p-2) int_0^z s^(p-1) / (1 + (p-q) s) ds.

    Convex on its domain with Psi(0) = 0 and Psi'(0) = 1, so the improved
    bound always dominates the plain entropy bound.
    """

    params: Params
    lam1: float = field(default=0.0)

    def __post_init__(self):
        if self.lam1 == 0.0:
            object.__setattr__(self, "lam1", lambda1(self.params.p))

    @property
    def kappa(self) -> float:
        p, q = self.params.p, self.params.q
        return (p - 1.0) ** 2 * (1.0 + q - p) / (2.0 * (2.0 * p - 1.0))

    def domain_cap(self) -> float:
        """Upper end of the admissible z-range (inf when p >= q)."""
        p, q = self.params.p, self.params.q
        return math.inf if q <= p else 1.0 / (q - p)

    def __call__(self, z: float) -> float:
        p, q = self.params.p, self.params.q
        if z < 0.0:
            raise DomainError(f"negative entropy argument {z}")
        if z == 0.0:
            return 0.0
        if 1.0 + (p - q) * z <= 0.0:
            raise DomainError(f"argument {z} at or past the domain cap {self.domain_cap()}")
        if p == q:
            integral = z ** p / p
        else:
            s = 0.5 * z * (_GL_X + 1.0)
            w = 0.5 * z * _GL_W
            integral = float(np.sum(w * s ** (p - 1.0) / (1.0 + (p - q) * s)))
        return z + self.kappa * self.lam1 ** (p - 2.0) * integral


# --------------------------------------------------------------------------
# inequality checkers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Theorem1Report:
    i: float
    e: float
    rhs_at_lambda1: float
    rhs_at_lambda1_star: float
    margin: float          # i - lambda1 e, proved nonnegative
    star_margin: float     # i - lambda1_star e, recorded only
    scale: float

    @property
    def ok(self) -> bool:
        return self.margin >= -1e-12 * self.scale


def check_theorem1(u: GridFunction, params: Params) -> Theorem1Report:
    """Entropy - production bound with the proved constant; the sharp
    candidate margin is recorded without being asserted."""
    if params.is_log_case:
        u.require_positive("log-form check")
    i = fisher(u, params.p)
    e = entropy(u, params)
    lam1 = lambda1(params.p)
    lam1s = lambda1_star(params.p)
    scale = max(i, abs(lam1 * e), 1e-30)
    return Theorem1Report(
        i=i,
        e=e,
        rhs_at_lambda1=lam1 * e,
        rhs_at_lambda1_star=lam1s * e,
        margin=i - lam1 * e,
        star_margin=i - lam1s * e,
        scale=scale,
    )


@dataclass(frozen=True)
class Theorem2Report:
    i: float
    z: float
    psi: float
    rhs: float
    margin: float
    improvement: float          # psi(z) - z >= 0
    log_form_identity: Optional[float]  # p = q only: Psi-form vs explicit form
    scale: float

    @property
    def ok(self) -> bool:
        return self.margin >= -1e-11 * self.scale and self.improvement >= -1e-14

    @property
    def improves_plain_bound(self) -> bool:
        return self.improvement >= -1e-14


def check_theorem2(u: GridFunction, params: Params) -> Theorem2Report:
    """Improved bound through the convexity profile."""
    if params.is_log_case:
        u.require_positive("log-form check")
    p, q = params.p, params.q
    psi_fn = PsiFunction(params)
    i = fisher(u, p)
    e = entropy(u, params)
    nq = norm(u, q)
    z = e / nq ** 2
    psi = psi_fn(z)
    rhs = psi_fn.lam1 * nq ** 2 * psi
    identity = None
    if params.is_log_case:
        # explicit polynomial form, stated for unit p-norm
        w = GridFunction(u.values / norm(u, p))
        e1 = entropy(w, params)
        a_const = (p - 1.0) ** 2 * (1.0 + q - p) / (2.0 * p * (2.0 * p - 1.0)) \
            * psi_fn.lam1 ** (p - 2.0)
        explicit = psi_fn.lam1 * e1 + psi_fn.lam1 * a_const * e1 ** p
        psi_form = psi_fn.lam1 * norm(w, q) ** 2 * psi_fn(e1 / norm(w, q) ** 2)
        identity = abs(explicit - psi_form)
    scale = max(i, abs(rhs), 1e-30)
    return Theorem2Report(
        i=i, z=z, psi=psi, rhs=rhs, margin=i - rhs,
        improvement=psi - z, log_form_identity=identity, scale=scale,
    )


@dataclass(frozen=True)
class WeightedPoincareReport:
    lhs: float
    rhs: float
    ratio: float
    margin: float
    degenerate: bool

    @property
    def ok(self) -> bool:
        return self.degenerate or self.margin >= -1e-10 * max(self.lhs, self.rhs)


def check_lemma_cs(u: GridFunction, p: float) -> WeightedPoincareReport:
    """Weighted curvature bound: int |u|^(2-p) (Lp u)^2 against the gradient term.

    Near-equality is attained at the p-norm eigenprofile, so the left side is
    evaluated with the conservative stencil (see module docstring).  The
    weight is read as |u|^(2-p): the equality profile changes sign, and on
    its zeros the integrand extends by zero (the curvature factor vanishes
    one power faster than the weight blows up).
    """
    if p <= 2:
        raise OutOfRange("stated for p > 2")
    v = u.values
    if not np.any(v):
        raise ZeroFunction("curvature bound undefined on the zero function")
    du = _sder(v)
    i_p = float(np.mean(np.abs(du) ** p))
    vmax = float(np.max(np.abs(v)))
    if i_p ** (1.0 / p) < 1e-13 * vmax:
        return WeightedPoincareReport(0.0, 0.0, 1.0, 0.0, degenerate=True)
    lp = _lp_flux_diff(v, p)
    absv = np.abs(v)
    safe = absv > 1e-9 * vmax
    integrand = np.zeros_like(v)
    integrand[safe] = absv[safe] ** (2.0 - p) * lp[safe] ** 2
    lhs = float(np.mean(integrand))
    norm_p = float(np.mean(absv ** p)) ** (1.0 / p)
    rhs = lambda1(p) * (i_p ** (1.0 / p)) ** (2.0 * (p - 1.0)) / norm_p ** (p - 2.0)
    return WeightedPoincareReport(lhs=lhs, rhs=rhs, ratio=lhs / rhs,
                                  margin=lhs - rhs, degenerate=False)


@dataclass(frozen=True)
class AveragedPoincareReport:
    lhs: float
    rhs_mean: float        # weighted quadratic around the plain average
    rhs_weighted: float    # around the weighted average, the optimal center
    ubar: float
    ubar_p: float
    margin_mean: float
    margin_weighted: float
    center_is_minimal: bool
    degenerate: bool

    @property
    def ok(self) -> bool:
        if self.degenerate:
            return True
        s = max(self.lhs, self.rhs_weighted, 1e-30)
        return (self.margin_mean >= -1e-10 * s
                and self.margin_weighted >= -1e-10 * s
                and self.center_is_minimal)


def check_appendixA(u: GridFunction, p: float) -> AveragedPoincareReport:
    """Gradient bound on the weighted distance to the two natural averages."""
    if p <= 2:
        raise OutOfRange("stated for p > 2")
    v = u.values
    w = np.abs(v) ** (p - 2.0)
    ubar = float(np.mean(v))
    den = float(np.mean(w))
    if den == 0.0:
        raise NonPositive("weight vanishes identically")
    ubar_p = float(np.mean(w * v)) / den

    du = _sder(v)
    norm_du_p = float(np.mean(np.abs(du) ** p)) ** (1.0 / p)
    norm_p = float(np.mean(np.abs(v) ** p)) ** (1.0 / p)
    lhs = norm_du_p ** 2 * norm_p ** (p - 2.0)
    lam1 = lambda1(p)

    def quad(center):
        return float(np.mean(w * (v - center) ** 2))

    rhs_mean = lam1 * quad(ubar)
    rhs_weighted = lam1 * quad(ubar_p)
    degenerate = norm_du_p < 1e-13 * max(1.0, norm_p)
    center_ok = quad(ubar_p) <= min(quad(ubar_p - 0.1), quad(ubar_p + 0.1)) + 1e-14
    return AveragedPoincareReport(
        lhs=lhs, rhs_mean=rhs_mean, rhs_weighted=rhs_weighted,
        ubar=ubar, ubar_p=ubar_p,
        margin_mean=lhs - rhs_mean, margin_weighted=lhs - rhs_weighted,
        center_is_minimal=center_ok, degenerate=degenerate,
    )


@dataclass(frozen=True)
class KltReport:
    potential_norm: float
    lam: float
    margin: float
    holder_slack: Optional[float]
    in_rigidity_window: bool
    scale: float

    @property
    def ok(self) -> bool:
        holder_ok = self.holder_slack is None or self.holder_slack >= -1e-11 * self.scale
        return self.margin >= -1e-10 * self.scale and holder_ok


def check_klt(u: GridFunction, V: GridFunction, params: Params,
              trace: Optional["_branch.BranchTrace"] = None) -> KltReport:
    """Ground-state energy bound for the potential V.

    The estimate is two-homogeneous only after fixing the q-norm of u, so
    the check normalizes u accordingly.  Inside the rigidity window the
    spectral function is the identity; beyond it the traced branch supplies
    the inverse map.
    """
    params.require_theorem_scope()
    p, q = params.p, params.q
    if u.n != V.n:
        raise OutOfRange("u and V must share one grid")
    w = GridFunction(u.values / norm(u, q))
    i = fisher(w, p)
    vterm = float(np.mean(V.values * np.abs(w.values) ** p))
    np2 = norm(w, p) ** 2
    rigidity = lambda1(p) / abs(q - p)

    if q > p:
        mu = norm(V, q / (q - p))
        lam = _branch.lambda_of_mu(mu, params, trace)
        margin = i - vterm + lam * np2
        holder = mu * norm(w, q) ** p - vterm
    else:
        V.require_positive("reversed-Holder route")
        mu = 1.0 / norm(GridFunction(1.0 / V.values), q / (p - q))
        lam = _branch.lambda_of_mu(mu, params, trace)
        margin = i + vterm - lam * np2
        holder = vterm - mu * norm(w, q) ** p
    scale = max(i, abs(vterm), lam * np2, 1e-30)
    return KltReport(
        potential_norm=mu, lam=lam, margin=margin, holder_slack=holder,
        in_rigidity_window=mu <= rigidity, scale=scale,
    )


# --------------------------------------------------------------------------
# residual of the nonlocal critical-point equation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    rms: float
    median: float
    sup: float


def els_residual(u: GridFunction, lam: float, mu: float, params: Params) -> ResidualReport:
    """Residual statistics of the rescaled critical-point equation.

    -||u'||^(2-p) Lp u + lam ||u||_p^(2-p) u^(p-1) = mu ||u||_q^(2-q) u^(q-1)

    The p-Laplacian is evaluated with the conservative stencil.  The median
    residual of reconstructed orbit profiles decays at second order; the sup
    sits at the two degenerate turning samples and does not.
    """
    p, q = params.p, params.q
    v = u.values
    du = _sder(v)
    ndu = float(np.mean(np.abs(du) ** p)) ** (1.0 / p)
    npn = norm(u, p)
    nqn = norm(u, q)
    res = (-(ndu ** (2.0 - p)) * _lp_flux_diff(v, p)
           + lam * npn ** (2.0 - p) * _phi(v, p)
           - mu * nqn ** (2.0 - q) * _phi(v, q))
    absres = np.abs(res)
    return ResidualReport(rms=float(np.sqrt(np.mean(res ** 2))),
                          median=float(np.median(absres)),
                          sup=float(np.max(absres)))


# --------------------------------------------------------------------------
# random draws for the property suites
# --------------------------------------------------------------------------


def random_positive_trig(rng: np.random.Generator, n: int, degree: int = 8,
                         floor: float = 0.2) -> GridFunction:
    """Random positive trigonometric polynomial on the n-point grid.

    Coefficients decay like 1/k^2; the sample is lifted so its minimum sits
    at `floor` times its oscillation, keeping it a trigonometric polynomial.
    """
    x = 2.0 * math.pi * np.arange(n) / n
    v = np.zeros(n)
    for k in range(1, degree + 1):
        ak, bk = rng.normal(size=2) / k ** 2
        v += ak * np.cos(k * x) + bk * np.sin(k * x)
    osc = float(np.max(v) - np.min(v))
    if osc == 0.0:
        osc = 1.0
    return GridFunction(v - np.min(v) + floor * osc)
