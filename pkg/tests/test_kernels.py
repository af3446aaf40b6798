"""Kernel zoo: closed forms, transforms, stable density, subordination."""

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ccf.gridfn import Grid, GridFunction, laplace_transform, sup_norm, zeros
from ccf.kernels import (
    CharInterval,
    JAlpha,
    KDelta,
    SampledKernel,
    Subordinated,
    kernel_convolve,
    kernel_laplace,
    kernel_power,
    parse_kernel,
    sample,
    subordinate,
)

from conftest import assert_calibrated_decay


def stable_half_closed_form(t):
    # inverse transform of exp(-sqrt(lam)) in closed form
    return t**-1.5 * np.exp(-1.0 / (4.0 * t)) / (2.0 * math.sqrt(math.pi))


class TestSampling:
    def test_j1_is_ones(self):
        g = Grid(2.0, 64)
        s = sample(JAlpha(1.0), g)
        assert np.array_equal(s.values, np.ones(65))

    def test_j2_is_ramp(self):
        g = Grid(2.0, 64)
        s = sample(JAlpha(2.0), g)
        assert np.max(np.abs(s.values - g.nodes)) < 1e-15

    def test_singular_origin_convention(self):
        g = Grid(2.0, 64)
        s = sample(JAlpha(0.5), g)
        assert s.values[0] == 0
        assert s.singular_exponent == 0.5

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            JAlpha(0.0)
        with pytest.raises(ValueError):
            KDelta(1.0)


class TestStableDensity:
    def test_half_value(self):
        k = KDelta(0.5)
        v = complex(k.evaluate(np.array([0.25]))[0]).real
        assert abs(v - stable_half_closed_form(0.25)) < 1e-10 * stable_half_closed_form(0.25)

    def test_half_closed_form_range(self):
        k = KDelta(0.5)
        t = np.linspace(0.05, 5.0, 199)
        got = k.evaluate(t).real
        ref = stable_half_closed_form(t)
        assert np.max(np.abs(got - ref) / ref) < 1e-10

    @pytest.mark.parametrize("delta", [0.3, 0.7])
    @pytest.mark.parametrize("t", [0.08, 0.4, 1.3, 4.0])
    def test_against_numeric_inversion(self, delta, t):
        # independent oracle: Talbot inversion of the transform
        k = KDelta(delta)
        got = complex(k.evaluate(np.array([t]))[0]).real
        mpmath.mp.dps = 30
        ref = float(mpmath.invertlaplace(
            lambda s: mpmath.exp(-(s**delta)), t, method="talbot"))
        assert abs(got - ref) < 1e-9 * max(abs(ref), 1e-6)

    @pytest.mark.parametrize("delta", [0.3, 0.5, 0.7])
    def test_positivity(self, delta):
        k = KDelta(delta)
        g = Grid(4.0, 257)
        vals = sample(k, g).values.real
        assert np.all(vals >= 0)
        floor = k.positivity_floor()
        live = g.nodes > max(2 * floor, g.h)
        assert np.all(vals[live] > 0)

    @given(delta=st.floats(0.15, 0.85), t=st.floats(0.3, 6.0))
    @settings(max_examples=30, deadline=None)
    def test_positivity_property(self, delta, t):
        v = complex(KDelta(delta).evaluate(np.array([t]))[0]).real
        assert v > 0


class TestTransforms:
    def test_stable_transform_value(self):
        assert abs(kernel_laplace(KDelta(0.5), 1.0) - math.exp(-1.0)) < 1e-14

    def test_power_transform_value(self):
        assert abs(kernel_laplace(JAlpha(2.0), 2.0) - 0.25) < 1e-15

    def test_interval_transform_small_argument(self):
        v = kernel_laplace(CharInterval(), 1e-9)
        assert abs(v - 1.0) < 1e-8

    def test_fractional_power_needs_right_half_plane(self):
        with pytest.raises(ValueError):
            kernel_laplace(JAlpha(0.5), -1.0)

    @pytest.mark.parametrize("spec", ["jalpha:0.5", "jalpha:2", "chi01", "kdelta:0.5"])
    @pytest.mark.parametrize("lam", [1.0, 2.0, 1.0 + 1.0j])
    def test_truncated_transform_consistency(self, spec, lam):
        # numeric transform of the samples vs the closed form, within the
        # analytic truncation tail plus a calibrated quadrature term
        kern = parse_kernel(spec)
        T = 4.0
        mpmath.mp.dps = 30

        def closed_tail():
            if spec == "chi01":
                return 0.0
            if spec.startswith("jalpha"):
                a = kern.alpha
                val = mpmath.gammainc(a, lam * T, mpmath.inf) / mpmath.gamma(a)
                return abs(complex(val) * lam ** (-a))
            val, _ = quad(lambda t: math.exp(-lam.real * t)
                          * complex(kern.evaluate(np.array([t]))[0]).real, T, T + 60.0,
                          limit=200)
            return abs(val) * 1.5 + 1e-12

        tail = closed_tail()
        errs, hs = [], []
        for M in (256, 512):
            g = Grid(T, M)
            v = laplace_transform(sample(kern, g), lam)
            errs.append(max(abs(v - kernel_laplace(kern, lam)) - tail, 1e-16))
            hs.append(g.h)
        assert_calibrated_decay(hs, errs, scale=1.0)


class TestSemigroup:
    @pytest.mark.parametrize("a,b", [(0.5, 0.5), (0.3, 0.7), (1.0, 1.0)])
    def test_power_kernels_compose(self, a, b):
        from ccf.gridfn import convolve

        g = Grid(2.0, 256)
        lhs = convolve(sample(JAlpha(a), g), sample(JAlpha(b), g))
        rhs = sample(JAlpha(a + b), g)
        assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10

    def test_kernel_convolve_analytic(self):
        k = kernel_convolve(JAlpha(0.5), JAlpha(1.0))
        assert isinstance(k, JAlpha) and k.alpha == 1.5

    def test_interval_power_closed_form(self):
        g = Grid(4.0, 256)
        tent = kernel_power(CharInterval(), 2).sample(g)
        ref = np.maximum(0.0, 1.0 - np.abs(g.nodes - 1.0))
        assert np.max(np.abs(tent.values - ref)) < 1e-14

    def test_interval_power_mass(self):
        g = Grid(6.0, 512)
        k3 = kernel_power(CharInterval(), 3)
        F = k3.cumulative(g)
        assert abs(F.values[-1] - 1.0) < 1e-13


class TestSupportAtOrigin:
    @pytest.mark.parametrize("spec", ["jalpha:0.5", "jalpha:1", "chi01", "kdelta:0.5"])
    def test_initial_mass_is_positive(self, spec):
        # grid-level surrogate for 0 being in the kernel's support
        kern = parse_kernel(spec)
        g = Grid(4.0, 512)
        F = kern.cumulative(g)
        eps_idx = max(1, int(0.25 * g.M))
        assert np.all(np.abs(F.values[eps_idx:]) > 0)


class TestSubordination:
    def test_constant_one_gives_half_power(self):
        # the Gaussian average of the constant kernel is the half-order kernel
        g = Grid(2.0, 128)
        got = subordinate(JAlpha(1.0), g)
        ref = sample(JAlpha(0.5), g)
        assert got.singular_exponent == 0.5
        assert np.max(np.abs(got.values[1:] - ref.values[1:])) < 1e-9

    def test_zero_kernel(self):
        g = Grid(2.0, 64)
        zk = SampledKernel(zeros(g))
        assert sup_norm(subordinate(zk, g)) == 0.0

    def test_transform_cross_check(self):
        g = Grid(6.0, 512)
        ksub = subordinate(JAlpha(1.0), g)
        v = laplace_transform(ksub, 1.0)
        # truncation tail of the half-power kernel at T
        tail = float(mpmath.gammainc(0.5, 6.0, mpmath.inf) / mpmath.gamma(0.5))
        assert abs(v - 1.0) < tail + 1e-4

    def test_ramp_gives_constant(self):
        # the second-order power kernel subordinates to the constant one
        g = Grid(2.0, 64)
        got = subordinate(JAlpha(2.0), g)
        assert np.max(np.abs(got.values[1:] - 1.0)) < 1e-9

    def test_interval_indicator(self):
        # closed form: (pi t)^(-1/2) (1 - exp(-1/(4t)))
        g = Grid(2.0, 64)
        got = subordinate(CharInterval(), g)
        t = g.nodes[1:]
        ref = (np.pi * t) ** -0.5 * (1.0 - np.exp(-1.0 / (4.0 * t)))
        assert np.max(np.abs(got.values[1:] - ref)) < 1e-9

    def test_transform_rule(self):
        # subordination takes the transform argument to its square root
        k = Subordinated(KDelta(0.5))
        lam = 2.0 + 1.0j
        assert abs(k.laplace(lam) - cmath.exp(-(lam**0.25))) < 1e-13

    def test_sampled_range_guard(self):
        gk = Grid(40.0, 64)
        data = GridFunction(gk, np.ones(65))
        with pytest.raises(ValueError):
            subordinate(SampledKernel(data), Grid(2.0, 32))


class TestParsing:
    @pytest.mark.parametrize("spec", ["jalpha:0.5", "chi01", "kdelta:0.3", "subord:jalpha:1"])
    def test_roundtrip(self, spec):
        k = parse_kernel(spec)
        assert parse_kernel(k.spec() if not spec.startswith("subord") else spec) is not None

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_kernel("nope:1")

    def test_file_spec(self, tmp_path):
        from ccf.gridfn import write_csv

        g = Grid(2.0, 32)
        write_csv(GridFunction(g, np.ones(33)), tmp_path / "k.csv")
        k = parse_kernel(f"file:{tmp_path / 'k.csv'}")
        assert isinstance(k, SampledKernel)
