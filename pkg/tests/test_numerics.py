import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import beta

from plapcircle.errors import InvalidBracket, NonIntegrable, NonPeriodic
from plapcircle.numerics import (
    QuadRule,
    RootBracket,
    find_root,
    integrate,
    integrate_ode,
    invert_travel_times,
)

RULE = QuadRule(abs_tol=1e-12, rel_tol=1e-12)
SING = QuadRule(kind="singular-endpoint", abs_tol=1e-12, rel_tol=1e-12,
                alpha_lo=0.0, alpha_hi=0.5)


class TestIntegrate:
    def test_polynomial(self):
        assert integrate(lambda x: 2 * x, (0, 1), RULE) == pytest.approx(1.0, abs=1e-13)

    def test_arcsine(self):
        val = integrate(lambda x: 1.0 / math.sqrt(1 - x * x), (0, 1), SING)
        assert val == pytest.approx(math.pi / 2, abs=1e-12)

    def test_polynomial_exactness_on_panels(self):
        # the base rule integrates low-degree polynomials to machine precision
        coeffs = [3.0, -2.0, 0.5, 1.25, -0.75, 0.1, 2.0, -0.3, 0.05, 1.0, -0.2]
        f = np.polynomial.Polynomial(coeffs)
        exact = f.integ()(2.5) - f.integ()(-1.0)
        val = integrate(f, (-1.0, 2.5), RULE)
        assert val == pytest.approx(exact, rel=1e-14)

    def test_orientation(self):
        assert integrate(lambda x: x, (1, 0), RULE) == pytest.approx(-0.5)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
    def test_singular_rule_accuracy(self, alpha):
        f = lambda x: x ** (-alpha) * (1 + x)
        exact = 1 / (1 - alpha) + 1 / (2 - alpha)
        r_sing = QuadRule(kind="singular-endpoint", abs_tol=1e-11, rel_tol=1e-11,
                          alpha_lo=alpha, alpha_hi=0.0)
        assert integrate(f, (0, 1), r_sing) == pytest.approx(exact, rel=1e-10)

    @pytest.mark.parametrize("alpha", [0.2, 0.45])
    def test_singular_matches_adaptive(self, alpha):
        # plain bisection can still resolve mild orders; the two kinds agree
        f = lambda x: x ** (-alpha) * (1 + x)
        r_sing = QuadRule(kind="singular-endpoint", abs_tol=1e-11, rel_tol=1e-11,
                          alpha_lo=alpha, alpha_hi=0.0)
        got = integrate(f, (0, 1), r_sing)
        r_plain = QuadRule(abs_tol=1e-7, rel_tol=1e-7, max_depth=46)
        got_plain = integrate(lambda x: f(max(x, 1e-300)), (0, 1), r_plain)
        assert got_plain == pytest.approx(got, rel=2e-6)

    def test_probed_orders(self):
        rule = QuadRule(kind="singular-endpoint", abs_tol=1e-10, rel_tol=1e-10)
        val = integrate(lambda x: x ** -0.3 * (1 - x) ** -0.6, (0, 1), rule)
        assert val == pytest.approx(beta(0.7, 0.4), rel=1e-7)

    def test_non_integrable(self):
        rule = QuadRule(kind="singular-endpoint", abs_tol=1e-10, rel_tol=1e-10)
        with pytest.raises(NonIntegrable):
            integrate(lambda x: 1.0 / x, (0, 1), rule)

    def test_scipy_cross_check(self):
        f = lambda x: math.exp(-x) * math.cos(5 * x)
        ref, _ = quad(f, 0.0, 3.0, epsabs=1e-13, epsrel=1e-13)
        assert integrate(f, (0.0, 3.0), RULE) == pytest.approx(ref, abs=1e-11)


class TestFindRoot:
    def test_sqrt2(self):
        b = RootBracket.from_function(lambda x: x * x - 2, 1, 2)
        x = find_root(lambda x: x * x - 2, b, 1e-14)
        assert x == pytest.approx(math.sqrt(2), abs=1e-13)

    def test_odd(self):
        b = RootBracket.from_function(lambda x: x, -1, 1)
        assert find_root(lambda x: x, b, 1e-14) == pytest.approx(0.0, abs=1e-13)

    def test_residual_bound(self):
        f = lambda x: math.tanh(3 * (x - 0.3)) + 0.1
        b = RootBracket.from_function(f, -1, 1)
        x = find_root(f, b, 1e-13)
        assert abs(f(x)) <= 10 * 1e-13

    def test_invalid_bracket(self):
        with pytest.raises(InvalidBracket):
            RootBracket.from_function(lambda x: x * x + 1, -1, 1)
        with pytest.raises(InvalidBracket):
            RootBracket(2.0, 1.0, -1.0, 1.0)

    def test_flat_endpoint(self):
        # derivative vanishes at the left endpoint, as for the level equation
        f = lambda x: (x - 0.5) ** 3 - 1e-4
        b = RootBracket.from_function(f, 0.5, 1.0)
        x = find_root(f, b, 1e-15)
        assert x == pytest.approx(0.5 + 1e-4 ** (1 / 3), rel=1e-9)


class TestIntegrateOde:
    def test_harmonic_oscillator(self):
        traj = integrate_ode(lambda t, y: (y[1], -y[0]), (1.0, 0.0),
                             (0.0, 2 * math.pi), 1e-10)
        _, yf = traj[-1]
        assert abs(yf[0] - 1.0) < 1e-8 and abs(yf[1]) < 1e-8

    def test_fixed_point(self):
        traj = integrate_ode(lambda t, y: (0.0, 0.0), (0.3, -0.2), (0.0, 5.0), 1e-10)
        for _, y in traj:
            assert y == (0.3, -0.2)

    def test_closed_orbit_energy(self):
        # turning-point system at p=2.5, q=3: the invariant must track step_tol
        p, q = 2.5, 3.0
        pp = p / (p - 1.0)

        def rhs(t, y):
            X, Y = y
            dX = math.copysign(abs(Y) ** (pp - 1.0), Y) if Y else 0.0
            dY = math.copysign(abs(X) ** (p - 1.0), X) - math.copysign(abs(X) ** (q - 1.0), X)
            return (dX, dY)

        def H(X, Y):
            return (p - 1) * abs(Y) ** pp + (p / q) * abs(X) ** q - abs(X) ** p

        tol = 1e-10
        traj = integrate_ode(rhs, (1.35, 0.0), (0.0, 10.0), tol, max_step=0.05)
        drift = max(abs(H(*y) - H(1.35, 0.0)) for _, y in traj)
        assert drift <= 1e3 * tol * 10.0

    def test_backward_span(self):
        traj = integrate_ode(lambda t, y: (math.cos(t),), (0.0,), (2.0, 0.0), 1e-10)
        _, yf = traj[-1]
        assert yf[0] == pytest.approx(-math.sin(2.0), abs=1e-8)

    def test_step_underflow(self):
        from plapcircle.errors import StepUnderflow

        # finite-time blow-up forces the step below the machine threshold
        with pytest.raises(StepUnderflow):
            integrate_ode(lambda t, y: (y[0] * y[0],), (1.0,), (0.0, 2.0), 1e-10)


class TestInvertTravelTimes:
    def test_arcsine_leg(self):
        ts = np.linspace(0.0, math.pi / 2, 33)
        xs = invert_travel_times(lambda x: math.sqrt(max(1 - x * x, 5e-324)),
                                 0.0, 1.0, ts, math.pi / 2,
                                 alpha_lo=0.0, alpha_hi=0.5)
        err = max(abs(x - math.sin(t)) for x, t in zip(xs, ts))
        assert err < 1e-10

    def test_endpoints(self):
        xs = invert_travel_times(lambda x: math.sqrt(max(1 - x * x, 5e-324)),
                                 0.0, 1.0, [0.0, math.pi / 2 + 1e-9], math.pi / 2,
                                 alpha_lo=0.0, alpha_hi=0.5)
        assert xs == [0.0, 1.0]
