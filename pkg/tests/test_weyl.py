"""Bumps, the co-convolution operator and its right inverses."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ccf.gridfn import Grid, GridFunction, from_callable, sup_norm, zeros
from ccf.kernels import CharInterval, JAlpha, KDelta
from ccf.weyl import (
    TestFunction,
    UnsupportedKernelError,
    WeylOperator,
    roundtrip_check,
    t_prime,
    weyl_apply,
)

from conftest import assert_calibrated_decay


def bump_quad(f: TestFunction, lo: float, hi: float) -> float:
    v, _ = quad(lambda t: float(f.evaluate(np.array([t]))[0].real), lo, hi, limit=200)
    return v


class TestBump:
    def test_support_and_peak(self):
        f = TestFunction(0.2, 0.8, 5)
        t = np.linspace(0, 2, 401)
        vals = f.evaluate(t).real
        assert np.all(vals[(t <= 0.2) | (t >= 0.8)] == 0)
        assert abs(vals[t == 0.5][0] - 1.0) < 1e-12

    def test_derivatives_match_differences(self):
        f = TestFunction(0.2, 1.1, 6)
        t = np.linspace(0.25, 1.05, 101)
        eps = 1e-6
        d1 = (f.evaluate(t + eps) - f.evaluate(t - eps)) / (2 * eps)
        assert np.max(np.abs(d1 - f.evaluate(t, 1))) < 1e-4
        d2 = (f.evaluate(t + eps) - 2 * f.evaluate(t) + f.evaluate(t - eps)) / eps**2
        assert np.max(np.abs(d2 - f.evaluate(t, 2))) < 1e-2

    def test_unit_mass(self):
        f = TestFunction.unit_mass(0.2, 0.8, 5)
        assert abs(bump_quad(f, 0.2, 0.8) - 1.0) < 1e-10

    def test_degree_floor(self):
        with pytest.raises(ValueError):
            TestFunction(0.0, 1.0, 3)

    def test_negative_left_end_has_origin_values(self):
        f = TestFunction(-0.3, 0.8, 5)
        assert abs(f.evaluate(np.array([0.0]))[0]) > 0
        assert abs(f.evaluate(np.array([0.0]), 1)[0]) > 0

    def test_sample_support_hint(self):
        g = Grid(2.0, 128)
        s = TestFunction(0.2, 0.8, 5).sample(g)
        lo, hi = s.support_hint
        assert np.all(s.values[:lo] == 0) and np.all(s.values[hi + 1 :] == 0)
        assert s.values[lo] != 0 or s.values[hi] != 0


class TestTPrime:
    def test_constant_kernel_integrates_tail(self):
        # k = 1: (k o f)(t) = int_t^inf f; at t = 0 the full mass
        g = Grid(2.0, 256)
        f = TestFunction(0.2, 0.8, 5)
        out = t_prime(JAlpha(1.0), f.sample(g))
        assert abs(out.values[0] - bump_quad(f, 0.2, 0.8)) < 1e-6
        i = g.index_of(0.5)
        assert abs(out.values[i] - bump_quad(f, 0.5, 0.8)) < 1e-6

    def test_interval_kernel_is_sliding_window(self):
        g = Grid(4.0, 512)
        f = TestFunction(0.4, 1.7, 5)
        out = t_prime(CharInterval(), f.sample(g))
        for t0 in (0.0, 0.5, 1.0):
            ref = bump_quad(f, t0, t0 + 1.0)
            assert abs(out.values[g.index_of(t0)] - ref) < 5e-5

    def test_zero_input(self):
        g = Grid(2.0, 64)
        assert sup_norm(t_prime(JAlpha(0.5), zeros(g))) == 0.0


class TestWeylApply:
    def test_integer_order_is_signed_derivative(self):
        g = Grid(2.0, 256)
        f = TestFunction(0.2, 0.8, 5)
        out = weyl_apply(WeylOperator(JAlpha(1.0)), f, g)
        ref = -f.evaluate(g.nodes, 1)
        assert np.max(np.abs(out.values - ref)) < 1e-12

    def test_exponential_eigenfunction(self):
        # the decaying exponential reproduces itself under every order
        errs, hs = [], []
        for M in (512, 1024):
            g = Grid(16.0, M)
            f = from_callable(g, lambda t: np.exp(-t))
            out = weyl_apply(WeylOperator(JAlpha(0.5)), f)
            keep = g.nodes <= g.T / 3
            tail = math.erfc(math.sqrt(g.T / 2))
            errs.append(max(float(np.max(np.abs(out.values[keep] - np.exp(-g.nodes[keep])))) - tail, 1e-16))
            hs.append(g.h)
        assert errs[0] < 5e-3 and errs[1] < errs[0]

    def test_interval_inverse_single_term(self):
        # support inside [0, 1): only the unshifted term survives
        g = Grid(2.0, 256)
        f = TestFunction(0.1, 0.9, 5)
        out = weyl_apply(WeylOperator(CharInterval()), f, g)
        ref = -f.evaluate(g.nodes, 1)
        assert np.max(np.abs(out.values - ref)) < 1e-12

    def test_interval_inverse_shifted_terms(self):
        g = Grid(4.0, 256)
        f = TestFunction(0.3, 2.6, 5)
        out = weyl_apply(WeylOperator(CharInterval()), f, g)
        t = g.nodes
        ref = -(f.evaluate(t, 1) + f.evaluate(t + 1, 1) + f.evaluate(t + 2, 1)
                + f.evaluate(t + 3, 1))
        assert np.max(np.abs(out.values - ref)) < 1e-12

    def test_unsupported_kernel(self):
        with pytest.raises(UnsupportedKernelError):
            WeylOperator(KDelta(0.5))

    @given(c1=st.floats(-2, 2), c2=st.floats(-2, 2))
    @settings(max_examples=20, deadline=None)
    def test_linearity(self, c1, c2):
        # hints stripped so all paths integrate over identical windows
        g = Grid(2.0, 128)
        w = WeylOperator(JAlpha(0.5))
        f1 = GridFunction(g, TestFunction(0.2, 0.8, 5).sample(g).values)
        f2 = GridFunction(g, TestFunction(0.4, 1.1, 5).sample(g).values)
        lhs = weyl_apply(w, c1 * f1 + c2 * f2)
        rhs = c1 * weyl_apply(w, f1) + c2 * weyl_apply(w, f2)
        assert sup_norm(lhs - rhs) < 1e-9 * (abs(c1) + abs(c2) + 1)


class TestRoundtrip:
    @pytest.mark.parametrize("kern", [JAlpha(1.0), JAlpha(0.5), JAlpha(1.5), CharInterval()])
    def test_bump_roundtrip_decays(self, kern):
        f = TestFunction(0.21, 0.86, 5)
        errs, hs = [], []
        for M in (128, 256, 512):
            g = Grid(2.0, M)
            errs.append(roundtrip_check(kern, f, g))
            hs.append(g.h)
        assert_calibrated_decay(hs, errs)

    def test_zero_function(self):
        g = Grid(2.0, 128)
        assert roundtrip_check(JAlpha(0.5), zeros(g)) < 1e-14


class TestInversePowers:
    def test_support_containment(self):
        # the inverse never extends the support past the bump, up to a cell
        g = Grid(2.0, 256)
        f = TestFunction(0.21, 0.86, 5)
        for kern in (JAlpha(0.5), JAlpha(1.0), CharInterval()):
            out = weyl_apply(WeylOperator(kern), f, g)
            hi = f.sample(g).support_hint[1]
            assert np.max(np.abs(out.values[hi + 2 :])) < 1e-12 * max(sup_norm(out), 1.0)

    @pytest.mark.parametrize("n,m,alpha", [(2, 1, 0.5), (2, 1, 1.0), (3, 2, 0.5)])
    def test_power_chain(self, n, m, alpha):
        # W for the m-th power factors through co-convolution with the
        # complementary power of the n-th
        f = TestFunction(0.21, 0.86, 5)
        errs, hs = [], []
        for M in (128, 256, 512):
            g = Grid(2.0, M)
            lhs = weyl_apply(WeylOperator(JAlpha(m * alpha)), f, g)
            rhs = t_prime(JAlpha((n - m) * alpha),
                          weyl_apply(WeylOperator(JAlpha(n * alpha)), f, g))
            errs.append(sup_norm(lhs - rhs))
            hs.append(g.h)
        assert_calibrated_decay(hs, errs, scale=max(errs) * 1e3)
