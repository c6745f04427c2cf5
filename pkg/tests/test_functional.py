import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plapcircle.constants import (
    Params,
    lambda1,
    lambda1_profile,
    lambda1_star,
    lambda1_star_profile,
)
from plapcircle.branch import thresholds, trace_branch
from plapcircle.errors import DomainError, NonPositive, OutOfRange, ZeroFunction
from plapcircle.functional import (
    GridFunction,
    PsiFunction,
    check_appendixA,
    check_klt,
    check_lemma_cs,
    check_theorem1,
    check_theorem2,
    derivative,
    entropy,
    fisher,
    functionals,
    norm,
    p_laplacian,
    random_positive_trig,
)

P35 = Params(3.0, 5.0)
P33 = Params(3.0, 3.0)
N = 256
X = 2 * np.pi * np.arange(N) / N


def grid(values):
    return GridFunction(np.asarray(values, dtype=float))


class TestGridFunction:
    def test_invariants(self):
        with pytest.raises(OutOfRange):
            grid(np.ones(8))
        with pytest.raises(OutOfRange):
            grid(np.ones(17))

    def test_positivity_flag(self):
        assert grid(np.ones(16)).positive
        assert not grid(np.linspace(-1, 1, 16)).positive

    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "u.csv"
        vals = 1.0 + 0.3 * np.sin(X)
        np.savetxt(path, vals, delimiter=",")
        u = GridFunction.from_csv(path)
        assert np.allclose(u.values, vals)


class TestNorm:
    def test_constant(self):
        c = grid(np.full(N, -2.5))
        for r in (1.0, 2.0, 3.7):
            assert norm(c, r) == pytest.approx(2.5)

    def test_cosine(self):
        assert norm(grid(np.cos(X)), 2.0) == pytest.approx(1 / math.sqrt(2), abs=1e-14)

    def test_refinement_oracle(self):
        # norm of a fixed smooth function converges as the grid refines
        f = lambda x: 1 + 0.3 * np.sin(x)
        vals = []
        for n in (256, 4096):
            x = 2 * np.pi * np.arange(n) / n
            vals.append(norm(grid(f(x)), 3.0))
        assert vals[0] == pytest.approx(vals[1], abs=1e-10)

    def test_exponent_range(self):
        with pytest.raises(OutOfRange):
            norm(grid(np.ones(N)), 0.5)

    @given(st.lists(st.floats(-1, 1), min_size=4, max_size=4),
           st.floats(1.0, 4.0), st.floats(0.1, 3.0))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_exponent(self, coeffs, r, dr):
        v = np.full(N, 1.5)
        for k, c in enumerate(coeffs, start=1):
            v += c / k * np.sin(k * X + k)
        u = grid(v)
        assert norm(u, r) <= norm(u, r + dr) + 1e-12


class TestDerivative:
    def test_spectral_exactness(self):
        assert np.max(np.abs(derivative(grid(np.sin(X))).values - np.cos(X))) < 1e-12

    def test_constant(self):
        assert np.max(np.abs(derivative(grid(np.full(N, 4.0))).values)) < 1e-13


class TestPLaplacian:
    def test_constant(self):
        assert np.max(np.abs(p_laplacian(grid(np.full(N, 2.0)), 3.0).values)) < 1e-13

    def test_zero_mean(self):
        u = grid(1 + 0.4 * np.sin(X) + 0.2 * np.cos(3 * X))
        assert abs(np.mean(p_laplacian(u, 3.0).values)) < 1e-12

    def test_integration_by_parts(self):
        u = grid(1 + 0.4 * np.sin(X) + 0.2 * np.cos(3 * X))
        lp = p_laplacian(u, 3.0)
        du = derivative(u)
        lhs = float(np.mean(u.values * lp.values))
        rhs = -float(np.mean(np.abs(du.values) ** 3))
        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestEntropy:
    def test_constant(self):
        assert entropy(grid(np.full(N, 5.0)), P35) == pytest.approx(0.0, abs=1e-13)

    def test_quadratic_vanishing(self):
        v = np.sin(X)
        es = [entropy(grid(1 + eps * v), P35) / eps ** 2 for eps in (1e-2, 1e-3, 1e-4)]
        assert es[0] == pytest.approx(0.5, rel=2e-2)
        assert es[2] == pytest.approx(0.5, rel=1e-4)

    def test_log_case_continuity(self):
        u = grid(1 + 0.2 * np.sin(X))
        e0 = entropy(u, P33)
        for dq in (1e-4, 1e-5):
            e_near = entropy(u, Params(3.0, 3.0 + dq))
            assert abs(e_near - e0) <= 5.0 * dq * (1.0 + e0)

    def test_nonnegative_random(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            u = random_positive_trig(rng, N)
            assert entropy(u, P35) >= 0.0
            assert entropy(u, P33) >= 0.0

    def test_zero_function(self):
        with pytest.raises(ZeroFunction):
            entropy(grid(np.zeros(N)), P35)

    def test_log_case_needs_positive(self):
        with pytest.raises(NonPositive):
            entropy(grid(np.sin(X)), P33)

    def test_functionals_bundle(self):
        u = grid(1 + 0.1 * np.sin(X))
        f = functionals(u, P35)
        # p-norm vs 2-norm ordering carries the sign of p - 2
        assert f.norm_p >= f.norm_2
        assert f.fisher == pytest.approx(fisher(u, 3.0))


class TestPsi:
    def test_anchor_and_slope(self):
        psi = PsiFunction(P35)
        assert psi(0.0) == 0.0
        h = 1e-7
        assert psi(h) / h == pytest.approx(1.0, abs=1e-6)

    def test_convex_and_above_identity(self):
        psi = PsiFunction(P35)
        zs = np.linspace(0.0, 0.45, 40)
        vals = [psi(z) for z in zs]
        assert all(v > z for v, z in zip(vals[1:], zs[1:]))
        second = np.diff(vals, 2)
        assert np.all(second >= -1e-14)

    def test_kappa_value(self):
        # (p-1)^2 (1+q-p) / (2 (2p-1)) at p=3, q=5
        assert PsiFunction(P35).kappa == pytest.approx(4.0 * 3.0 / 10.0)

    def test_domain(self):
        psi = PsiFunction(P35)
        with pytest.raises(DomainError):
            psi(0.51)  # past 1/(q-p)
        with pytest.raises(DomainError):
            psi(-0.1)


class TestTheorem1:
    def test_constant_equality(self):
        rep = check_theorem1(grid(np.full(N, 2.0)), P35)
        assert rep.i == pytest.approx(0.0, abs=1e-13)
        assert rep.margin == pytest.approx(0.0, abs=1e-13)

    def test_ratio_approaches_sharp_constant(self):
        n = 1024
        v = lambda1_star_profile(3.0, n)
        errs = []
        for eps in (1e-2, 1e-3, 1e-4):
            rep = check_theorem1(GridFunction(1 + eps * v), P35)
            errs.append(abs(rep.i / rep.e - lambda1_star(3.0)))
        assert errs[1] < errs[0] / 5
        assert errs[2] <= errs[1]
        c = 1.5 * errs[0] / 1e-2
        assert all(err <= c * eps for err, eps in zip(errs, (1e-2, 1e-3, 1e-4)))

    @pytest.mark.parametrize("params", [P35, P33, Params(4.0, 3.5)])
    def test_random_suite(self, params):
        rng = np.random.default_rng(5)
        for _ in range(40):
            rep = check_theorem1(random_positive_trig(rng, N), params)
            assert rep.margin >= -1e-12 * rep.scale


class TestTheorem2:
    def test_constant_equality(self):
        rep = check_theorem2(grid(np.full(N, 3.0)), P35)
        assert rep.margin == pytest.approx(0.0, abs=1e-13)
        assert rep.psi == 0.0

    def test_improves_plain_bound(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            rep = check_theorem2(random_positive_trig(rng, N), P35)
            assert rep.ok
            assert rep.improvement >= 0.0

    def test_log_form_identity(self):
        u = grid(1 + 0.3 * np.sin(X) + 0.1 * np.cos(2 * X))
        rep = check_theorem2(u, P33)
        assert rep.log_form_identity is not None
        assert rep.log_form_identity <= 1e-12
        assert rep.ok


class TestLemmaCS:
    def test_near_equality_at_eigenprofile(self):
        ratios = []
        for n in (1024, 2048):
            rep = check_lemma_cs(GridFunction(lambda1_profile(3.0, n)), 3.0)
            ratios.append(abs(rep.ratio - 1.0))
        assert ratios[0] <= 1e-4
        assert ratios[1] < ratios[0]

    def test_random_strict_margin(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            rep = check_lemma_cs(random_positive_trig(rng, N), 3.0)
            assert rep.margin > 0.0

    def test_constant_degenerate(self):
        assert check_lemma_cs(grid(np.full(N, 2.0)), 3.0).degenerate

    def test_requires_p_above_two(self):
        with pytest.raises(OutOfRange):
            check_lemma_cs(grid(np.ones(N)), 2.0)


class TestAppendixA:
    def test_near_equality_at_eigenprofile(self):
        rep = check_appendixA(GridFunction(lambda1_profile(3.0, 1024)), 3.0)
        assert rep.lhs / rep.rhs_weighted == pytest.approx(1.0, abs=1e-4)
        finer = check_appendixA(GridFunction(lambda1_profile(3.0, 2048)), 3.0)
        assert abs(finer.lhs / finer.rhs_weighted - 1) < abs(rep.lhs / rep.rhs_weighted - 1)

    def test_random(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            rep = check_appendixA(random_positive_trig(rng, N), 3.0)
            assert rep.ok
            assert rep.center_is_minimal

    def test_constant_degenerate(self):
        rep = check_appendixA(grid(np.full(N, 1.5)), 3.0)
        assert rep.degenerate
        assert rep.lhs == pytest.approx(0.0, abs=1e-13)

    def test_weighted_average(self):
        u = grid(1 + 0.5 * np.sin(X))
        rep = check_appendixA(u, 3.0)
        assert rep.ubar == pytest.approx(float(np.mean(u.values)))
        assert rep.ubar_p != rep.ubar


class TestKlt:
    def test_equality_for_constant_potential(self):
        level = 0.9 * thresholds(P35).rigidity
        rep = check_klt(grid(np.ones(N)), grid(np.full(N, level)), P35)
        assert rep.in_rigidity_window
        assert rep.margin == pytest.approx(0.0, abs=1e-10)

    def test_random_margins(self):
        rng = np.random.default_rng(31)
        V = grid(np.full(N, 0.8 * thresholds(P35).rigidity))
        for _ in range(25):
            rep = check_klt(random_positive_trig(rng, N), V, P35)
            assert rep.margin >= -1e-10 * rep.scale
            assert rep.holder_slack >= -1e-11 * rep.scale

    def test_beyond_window_needs_trace(self):
        from plapcircle.errors import BranchRangeExceeded
        V = grid(np.full(N, 2.0 * thresholds(P35).bifurcation))
        with pytest.raises(BranchRangeExceeded):
            check_klt(grid(np.ones(N)), V, P35)

    def test_beyond_window_with_trace(self):
        trace = trace_branch(P35, np.linspace(0.3, 0.99, 25))
        rng = np.random.default_rng(37)
        V = grid(np.full(N, 0.62) + 0.01 * np.cos(3 * X))
        for _ in range(10):
            rep = check_klt(random_positive_trig(rng, N), V, P35, trace=trace)
            assert rep.margin >= -1e-10 * rep.scale

    def test_dual_regime(self):
        params = Params(4.0, 3.5)
        rng = np.random.default_rng(41)
        V = grid(np.full(N, 0.8 * thresholds(params).rigidity))
        for _ in range(10):
            rep = check_klt(random_positive_trig(rng, N), V, params)
            assert rep.margin >= -1e-10 * rep.scale

    def test_dual_regime_requires_positive_potential(self):
        with pytest.raises(NonPositive):
            check_klt(grid(np.ones(N)), grid(np.sin(X)), Params(4.0, 3.5))
