"""Grid calculus: convolution products, antiderivatives, transforms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccf.gridfn import (
    PRODUCT_INTEGRATION,
    TRAPEZOID,
    Grid,
    GridFunction,
    GridMismatchError,
    QuadratureUsageError,
    antiderivative,
    convolution_power,
    convolve,
    cosine_convolve,
    derivative,
    dual_convolve,
    from_callable,
    laplace_transform,
    read_csv,
    second_antiderivative,
    sup_norm,
    write_csv,
    zeros,
)
from ccf.kernels import JAlpha, CharInterval, sample
from ccf.weyl import TestFunction

from conftest import assert_calibrated_decay, assert_order_window


def ones(grid):
    return from_callable(grid, lambda t: np.ones_like(t))


class TestGrid:
    def test_nodes_and_step(self):
        g = Grid(2.0, 8)
        assert g.h == 0.25
        assert np.allclose(g.nodes, np.arange(9) * 0.25)

    def test_invalid(self):
        with pytest.raises(ValueError):
            Grid(2.0, 1)
        with pytest.raises(ValueError):
            Grid(-1.0, 8)

    def test_index_of(self):
        g = Grid(2.0, 8)
        assert g.index_of(0.75) == 3
        with pytest.raises(ValueError):
            g.index_of(0.3)


class TestGridFunction:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            GridFunction(Grid(1.0, 4), np.zeros(4))

    def test_support_hint_enforced(self):
        g = Grid(1.0, 4)
        with pytest.raises(ValueError):
            GridFunction(g, np.ones(5), support_hint=(1, 3))

    def test_singular_exponent_bounds(self):
        g = Grid(1.0, 4)
        with pytest.raises(ValueError):
            GridFunction(g, np.zeros(5), singular_exponent=1.0)
        with pytest.raises(ValueError):
            GridFunction(g, np.zeros(5), singular_exponent=2.5)


class TestConvolve:
    def test_ones_convolved_is_identity_ramp(self):
        # the constant-one function convolved with itself gives t
        g = Grid(2.0, 256)
        c = convolve(ones(g), ones(g))
        assert abs(c.values[g.index_of(1.5)] - 1.5) < 1e-13
        assert np.max(np.abs(c.values - g.nodes)) < 1e-12

    def test_annihilator(self):
        g = Grid(2.0, 64)
        f = TestFunction(0.2, 0.8, 5).sample(g)
        assert sup_norm(convolve(f, zeros(g))) == 0.0

    def test_half_power_square(self):
        # the half-order power kernel squares to the constant one
        g = Grid(2.0, 256)
        j = sample(JAlpha(0.5), g)
        c = convolve(j, j)
        assert abs(c.values[g.index_of(1.0)] - 1.0) < 1e-12
        assert np.max(np.abs(c.values[1:] - 1.0)) < 1e-12

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            convolve(ones(Grid(2.0, 64)), ones(Grid(2.0, 128)))

    def test_product_rule_requires_singular_factor(self):
        g = Grid(2.0, 64)
        with pytest.raises(QuadratureUsageError):
            convolve(ones(g), ones(g), rule=PRODUCT_INTEGRATION)
        # fine when a factor is singular
        convolve(sample(JAlpha(0.5), g), ones(g), rule=PRODUCT_INTEGRATION)

    def test_fft_matches_direct(self):
        g = Grid(2.0, 512)
        rng = np.random.default_rng(7)
        f = GridFunction(g, rng.normal(size=513) + 1j * rng.normal(size=513))
        h = GridFunction(g, rng.normal(size=513) + 1j * rng.normal(size=513))
        a = convolve(f, h, rule=TRAPEZOID, fft=False)
        b = convolve(f, h, rule=TRAPEZOID, fft=True)
        bound = 1e-12 * sup_norm(f) * sup_norm(h) * g.T
        assert sup_norm(a - b) <= bound

    def test_exponential_pair_order(self):
        # e^-2t * e^-t = e^-t - e^-2t; trapezoid converges at second order
        errs, hs = [], []
        for M in (128, 256, 512):
            g = Grid(2.0, M)
            f = from_callable(g, lambda t: np.exp(-2 * t))
            h = from_callable(g, lambda t: np.exp(-t))
            c = convolve(f, h)
            ref = np.exp(-g.nodes) - np.exp(-2 * g.nodes)
            errs.append(float(np.max(np.abs(c.values - ref))))
            hs.append(g.h)
        assert_order_window(hs, errs)
        assert_calibrated_decay(hs, errs)

    @given(a=st.floats(0.05, 0.6), width=st.floats(0.2, 0.8), p=st.integers(4, 7))
    @settings(max_examples=25, deadline=None)
    def test_commutative(self, a, width, p):
        g = Grid(2.0, 128)
        f = TestFunction(a, a + width, p).sample(g)
        h = TestFunction(0.1, 1.0, 5).sample(g)
        lhs = convolve(f, h)
        rhs = convolve(h, f)
        assert sup_norm(lhs - rhs) <= 1e-10 * max(sup_norm(lhs), 1e-30)

    @given(a=st.floats(0.05, 0.5), b=st.floats(0.9, 1.4))
    @settings(max_examples=25, deadline=None)
    def test_support_start_adds(self, a, b):
        g = Grid(4.0, 128)
        f = TestFunction(a, b, 4).sample(g)
        h = TestFunction(0.5, 1.5, 5).sample(g)
        c = convolve(f, h)
        assert c.support_hint is not None
        lo = c.support_hint[0]
        assert lo >= f.support_hint[0] + h.support_hint[0] - 1
        assert np.all(c.values[:lo] == 0)


class TestDualConvolve:
    def test_zero_past_support(self):
        g = Grid(2.0, 128)
        f = TestFunction(0.2, 0.8, 5).sample(g)
        d = dual_convolve(f, f)
        hi = f.support_hint[1]
        assert np.all(d.values[hi + 1 :] == 0)

    def test_exponential_pair_at_origin(self):
        # int_0^inf e^-s e^-s ds = 1/2, truncation negligible at T=12
        g = Grid(12.0, 2048)
        f = from_callable(g, lambda t: np.exp(-t))
        d = dual_convolve(f, f)
        assert abs(d.values[0] - 0.5) < 2e-5
        # closed form e^-t / 2 on the first half of the window
        half = g.M // 2
        assert np.max(np.abs(d.values[:half] - 0.5 * np.exp(-g.nodes[:half]))) < 2e-5

    def test_interval_indicator_pair(self):
        # for the unit-interval indicator the dual product is 1 - t on [0, 1];
        # jump-node sampling costs one first-order cell at the window edges
        g = Grid(2.0, 256)
        chi = sample(CharInterval(), g)
        d = dual_convolve(chi, chi)
        assert abs(d.values[g.index_of(0.25)] - 0.75) <= 0.6 * g.h


class TestCosineConvolve:
    def test_composition(self):
        g = Grid(2.0, 128)
        f = TestFunction(0.2, 0.8, 5).sample(g)
        h = TestFunction(0.3, 1.1, 5).sample(g)
        c = cosine_convolve(f, h)
        ref = 0.5 * (convolve(f, h).values + dual_convolve(f, h).values
                     + dual_convolve(h, f).values)
        assert np.array_equal(c.values, ref)

    def test_interval_indicator_value(self):
        g = Grid(2.0, 256)
        chi = sample(CharInterval(), g)
        c = cosine_convolve(chi, chi)
        assert abs(c.values[g.index_of(1.0)] - 0.5) <= 1.5 * g.h

    def test_at_origin_gives_squared_mass(self):
        g = Grid(2.0, 256)
        f = TestFunction(0.2, 0.8, 5).sample(g)
        c = cosine_convolve(f, f)
        ref = laplace_transform(f * f, 0.0)
        assert abs(c.values[0] - ref) < 1e-13

    def test_zero_factor(self):
        g = Grid(2.0, 64)
        f = TestFunction(0.2, 0.8, 5).sample(g)
        assert sup_norm(cosine_convolve(zeros(g), f)) == 0.0


class TestConvolutionPower:
    def test_first_power_is_identity(self):
        g = Grid(2.0, 128)
        f = TestFunction(0.2, 0.8, 5).sample(g)
        assert np.array_equal(convolution_power(f, 1).values, f.values)

    def test_half_power_fourth(self):
        # fourth power of the half-order kernel is the ramp t
        g = Grid(2.0, 256)
        j = sample(JAlpha(0.5), g)
        p4 = convolution_power(j, 4)
        assert abs(p4.values[g.index_of(1.0)] - 1.0) < 1e-10

    def test_ones_square_is_ramp(self):
        g = Grid(2.0, 128)
        c = convolution_power(ones(g), 2)
        assert np.max(np.abs(c.values - g.nodes)) < 1e-12

    def test_zeroth_power_rejected(self):
        g = Grid(2.0, 64)
        with pytest.raises(ValueError):
            convolution_power(ones(g), 0)


class TestAntiderivatives:
    def test_ones(self):
        g = Grid(2.0, 128)
        F = antiderivative(ones(g))
        assert np.max(np.abs(F.values - g.nodes)) < 1e-14

    def test_second_of_ones(self):
        g = Grid(2.0, 128)
        F2 = second_antiderivative(ones(g))
        assert abs(F2.values[g.index_of(2.0)] - 2.0) < 1e-13

    def test_zero(self):
        g = Grid(2.0, 64)
        assert sup_norm(antiderivative(zeros(g))) == 0.0

    def test_second_matches_ramp_convolution(self):
        g = Grid(2.0, 256)
        f = from_callable(g, lambda t: np.exp(-t) * np.sin(t))
        ramp = from_callable(g, lambda t: t)
        a = second_antiderivative(f)
        b = convolve(ramp, f)
        assert sup_norm(a - b) < 5e-5

    def test_singular_moment_path_exact_on_powers(self):
        g = Grid(2.0, 128)
        j = sample(JAlpha(0.5), g)
        F = antiderivative(j)
        ref = sample(JAlpha(1.5), g)
        assert np.max(np.abs(F.values - ref.values)) < 1e-13


class TestDerivative:
    def test_quadratic_first(self):
        g = Grid(2.0, 64)
        f = from_callable(g, lambda t: t**2)
        d = derivative(f, 1)
        assert abs(d.values[g.index_of(1.0)] - 2.0) < 1e-12
        assert np.max(np.abs(d.values - 2 * g.nodes)) < 1e-11

    def test_constant(self):
        g = Grid(2.0, 64)
        assert sup_norm(derivative(ones(g), 1)) < 1e-13

    def test_quadratic_second(self):
        g = Grid(2.0, 64)
        f = from_callable(g, lambda t: t**2)
        d = derivative(f, 2)
        assert np.max(np.abs(d.values - 2.0)) < 1e-9

    def test_bad_order(self):
        g = Grid(2.0, 64)
        with pytest.raises(ValueError):
            derivative(ones(g), 3)


class TestLaplace:
    def test_zero_argument_is_mass(self):
        g = Grid(2.0, 256)
        f = TestFunction(0.2, 0.8, 5).sample(g)
        v = laplace_transform(f, 0.0)
        F = antiderivative(f)
        assert abs(v - F.values[-1]) < 1e-14

    def test_ones_closed_form(self):
        g = Grid(20.0, 2048)
        v = laplace_transform(ones(g), 1.0)
        assert abs(v - (1 - math.exp(-20.0))) < 1e-5

    def test_convolution_theorem(self):
        errs, hs = [], []
        for M in (256, 512, 1024):
            g = Grid(4.0, M)
            f = TestFunction(0.2, 0.8, 5).sample(g)
            h = TestFunction(0.3, 1.2, 5).sample(g)
            lam = 1.0 + 0.5j
            lhs = laplace_transform(convolve(f, h), lam)
            rhs = laplace_transform(f, lam) * laplace_transform(h, lam)
            errs.append(abs(lhs - rhs))
            hs.append(g.h)
        assert_calibrated_decay(hs, errs)

    def test_nonfinite_rejected(self):
        g = Grid(2.0, 64)
        with pytest.raises(ValueError):
            laplace_transform(ones(g), complex("inf"))


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        g = Grid(2.0, 32)
        f = from_callable(g, lambda t: np.exp(1j * t))
        path = tmp_path / "f.csv"
        write_csv(f, path)
        back = read_csv(path)
        assert back.grid == g
        assert np.max(np.abs(back.values - f.values)) < 1e-15
        first = path.read_text().splitlines()[0]
        assert first.startswith("# T=") and "M=32" in first

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,re,im\n0,1,0\n")
        with pytest.raises(ValueError):
            read_csv(path)
