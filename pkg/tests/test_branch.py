import math

import numpy as np
import pytest

from plapcircle.branch import (
    branch_point,
    departure_abscissa,
    lambda_of_mu,
    optimal_constant_estimate,
    point_from_orbit,
    rigidity_period_bound,
    scaling_from_norms,
    thresholds,
    trace_branch,
)
from plapcircle.constants import Params, lambda1, lambda1_star
from plapcircle.errors import BranchRangeExceeded, OutOfRange
from plapcircle.functional import GridFunction, els_residual
from plapcircle.orbit import profile

P35 = Params(3.0, 5.0)


def test_thresholds_ordering():
    th = thresholds(P35)
    assert th.rigidity <= th.bifurcation
    assert th.rigidity == pytest.approx(lambda1(3.0) / 2.0)
    assert th.bifurcation == pytest.approx(lambda1_star(3.0) / 2.0)


def test_theorem_scope_required():
    with pytest.raises(OutOfRange):
        branch_point(0.5, Params(2.0, 3.0))


class TestBranchPoint:
    def test_below_diagonal(self):
        for a in (0.2, 0.5, 0.8):
            pt = branch_point(a, P35)
            assert pt.mu < pt.lam
            assert pt.regime == "sub"

    def test_roundtrip_scaling(self):
        # orbit -> (lam, mu) -> circle norms of the rescaled profile -> (T, K)
        pt = branch_point(0.5, P35)
        orb = pt.orbit
        p, q = 3.0, 5.0
        norm_du = (1.0 / (2 * math.pi)) * orb.T ** (1 - 1 / p) * orb.Ip_prime ** (1 / p)
        norm_up = orb.T ** (-1 / p) * orb.Ip ** (1 / p)
        norm_uq = orb.T ** (-1 / q) * orb.Iq ** (1 / q)
        T2, K2 = scaling_from_norms(pt.lam, pt.mu, norm_du, norm_up, norm_uq, P35)
        assert T2 == pytest.approx(orb.T, rel=1e-8)
        assert K2 == pytest.approx(1.0, rel=1e-8)

    def test_norm_conversion_identities(self):
        # the discrete circle norms of the sampled rescaled profile converge
        # to the closed-form conversions of the interval integrals
        pt = branch_point(0.5, P35)
        orb = pt.orbit
        p, q = 3.0, 5.0
        errs = []
        for n in (256, 1024):
            u = GridFunction(profile(0.5, P35, n))
            disc_up = float(np.mean(np.abs(u.values) ** p)) ** (1 / p)
            disc_uq = float(np.mean(np.abs(u.values) ** q)) ** (1 / q)
            errs.append(abs(disc_up - orb.T ** (-1 / p) * orb.Ip ** (1 / p))
                        + abs(disc_uq - orb.T ** (-1 / q) * orb.Iq ** (1 / q)))
        assert errs[0] < 2e-5 and errs[1] < errs[0] / 4

    def test_rescaled_profile_solves_equation(self):
        pt = branch_point(0.5, P35)
        meds = []
        for n in (256, 512, 1024):
            u = GridFunction(profile(0.5, P35, n))
            meds.append(els_residual(u, pt.lam, pt.mu, P35).median)
        assert meds[1] < meds[0] / 3 and meds[2] < meds[1] / 3  # second order


class TestTrace:
    def test_shape_and_concavity(self):
        trace = trace_branch(P35, np.linspace(0.05, 0.95, 60))
        assert not trace.failures
        pts = sorted(trace.points, key=lambda pt: pt.lam)
        lam = np.array([pt.lam for pt in pts])
        mu = np.array([pt.mu for pt in pts])
        assert np.all(mu <= lam + 1e-12)
        assert np.all(np.diff(mu) > -1e-12)
        slopes = np.diff(mu) / np.diff(lam)
        assert np.all(np.diff(slopes) <= 1e-8)

    def test_departure_matches_bifurcation(self):
        absc, order = departure_abscissa(P35)
        th = thresholds(P35)
        assert absc == pytest.approx(th.bifurcation, rel=0.02)
        assert order == pytest.approx(2.0, abs=0.2)

    def test_dual_regime(self):
        params = Params(4.0, 3.5)
        trace = trace_branch(params, np.linspace(0.2, 0.9, 10))
        assert all(pt.regime == "super" for pt in trace.points)
        assert all(pt.lam <= pt.mu + 1e-12 for pt in trace.points)
        absc, _ = departure_abscissa(params)
        assert absc == pytest.approx(thresholds(params).bifurcation, rel=0.02)


class TestRigidityBound:
    @pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
    def test_period_above_bound(self, a):
        T, bound = rigidity_period_bound(a, P35)
        assert T > bound

    def test_ratio_bounded_near_constant(self):
        for a in (0.99, 0.999):
            T, bound = rigidity_period_bound(a, P35)
            assert bound < T
            assert bound / T > 0.8  # the bound saturates as the orbit shrinks

    def test_rejects_constant_seed(self):
        with pytest.raises(OutOfRange):
            rigidity_period_bound(1.0, P35)


class TestOptimalConstant:
    def test_bracket(self):
        lo, hi = optimal_constant_estimate(P35, np.linspace(0.1, 0.995, 40))
        assert lo == pytest.approx(lambda1(3.0))
        assert lo <= hi <= lambda1_star(3.0) * 1.001

    def test_dual_range(self):
        params = Params(4.0, 3.5)
        lo, hi = optimal_constant_estimate(params, np.linspace(0.1, 0.995, 30))
        assert lo == pytest.approx(lambda1(4.0))
        assert lo <= hi <= lambda1_star(4.0) * 1.001


class TestLambdaOfMu:
    def test_identity_inside_window(self):
        th = thresholds(P35)
        assert lambda_of_mu(0.5 * th.rigidity, P35) == 0.5 * th.rigidity

    def test_needs_trace_beyond_window(self):
        th = thresholds(P35)
        with pytest.raises(BranchRangeExceeded):
            lambda_of_mu(2.0 * th.bifurcation, P35)

    def test_interpolation_monotone(self):
        trace = trace_branch(P35, np.linspace(0.2, 0.99, 30))
        mus = np.linspace(0.5, 0.9, 9)
        lams = [lambda_of_mu(float(m), P35, trace) for m in mus]
        assert all(l1 >= l0 for l0, l1 in zip(lams, lams[1:]))
        assert all(l >= m for l, m in zip(lams, mus))
