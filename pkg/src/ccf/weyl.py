"""Co-convolution operators and their right inverses on smooth bumps.

``t_prime(k, f)`` realises f -> k o f = int_t^inf k(s-t) f(s) ds on the
grid.  ``weyl_apply`` realises the right inverse W_k for the two kernel
families with a closed form:

* power kernels: W for order a is (-d/dt)^m composed with co-convolution
  against the complementary power kernel of order m - a, m = ceil(a).
  On a TestFunction the derivative is moved onto the bump first (its
  derivatives are exact), so only the co-convolution is discretised.
* the unit-interval indicator: W f(t) = -sum_n f'(t + n), a finite sum
  once t + n leaves the support of f.

A TestFunction is the polynomial bump c (t-a)^p (b-t)^p on [a, b] and 0
outside; with p >= 4 it is C^(p-1) with exact derivatives up to second
order and exact support bounds.  ``a`` may be negative, in which case
the restriction to [0, inf) has nonzero boundary values at the origin,
which is what exercises the boundary terms of the convolution
identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn

from .gridfn import Grid, GridFunction, derivative, sup_norm
from .kernels import CharInterval, JAlpha, Kernel


class UnsupportedKernelError(ValueError):
    """The kernel has no closed-form right inverse here."""


@dataclass(frozen=True)
class TestFunction:
    """Polynomial bump c (t-a)^p (b-t)^p on [a, b], zero outside.

    The default scale normalises the peak to 1.  Use ``unit_mass`` for
    bumps with integral 1.
    """

    a: float
    b: float
    p: int = 5
    scale: float | None = None

    __test__ = False  # not a pytest class despite the name

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError(f"empty support [{self.a}, {self.b}]")
        if int(self.p) != self.p or self.p < 4:
            raise ValueError(f"bump degree must be an integer >= 4, got {self.p}")

    @property
    def c(self) -> float:
        if self.scale is not None:
            return self.scale
        return ((self.b - self.a) / 2.0) ** (-2.0 * self.p)

    @property
    def mass(self) -> float:
        """int_a^b f; the part on t < 0 is not removed for a < 0."""
        w = self.b - self.a
        return self.c * w ** (2 * self.p + 1) * beta_fn(self.p + 1, self.p + 1)

    @classmethod
    def unit_mass(cls, a: float, b: float, p: int = 5) -> "TestFunction":
        raw = cls(a, b, p, scale=1.0)
        return cls(a, b, p, scale=1.0 / raw.mass)

    def evaluate(self, t, order: int = 0) -> np.ndarray:
        """Exact values of the order-th derivative (closed Leibniz sum)."""
        if order < 0:
            raise ValueError(f"derivative order must be nonnegative, got {order}")
        t = np.asarray(t, dtype=float)
        u = t - self.a
        v = self.b - t
        p = self.p
        inside = (t > self.a) & (t < self.b)
        out = np.zeros_like(t)
        with np.errstate(invalid="ignore"):
            for j in range(order + 1):
                if j > p or order - j > p:
                    continue
                coef = (math.comb(order, j) * math.perm(p, j)
                        * math.perm(p, order - j) * (-1.0) ** (order - j))
                out = out + coef * u ** (p - j) * v ** (p - order + j)
        out = np.where(inside, out, 0.0)
        return (self.c * out).astype(np.complex128)

    def sample(self, grid: Grid, order: int = 0) -> GridFunction:
        return _sample_bump(self, grid, order)


def _sample_bump(f, grid: Grid, order: int) -> GridFunction:
    vals = f.evaluate(grid.nodes, order)
    lo = max(0, int(math.floor(f.a / grid.h)) + 1) if f.a > 0 else 0
    hi = min(grid.M, int(math.ceil(f.b / grid.h)) - 1)
    hi = max(hi, lo)
    vals[:lo] = 0.0
    vals[hi + 1 :] = 0.0
    return GridFunction(grid, vals, support_hint=(lo, hi))


@dataclass(frozen=True)
class DifferentiatedBump:
    """A bump's k-th derivative, still with exact derivatives of every order."""

    base: TestFunction
    k: int

    @property
    def a(self) -> float:
        return self.base.a

    @property
    def b(self) -> float:
        return self.base.b

    def evaluate(self, t, order: int = 0) -> np.ndarray:
        return self.base.evaluate(t, order + self.k)

    def sample(self, grid: Grid, order: int = 0) -> GridFunction:
        return _sample_bump(self, grid, order)


@dataclass(frozen=True)
class WeylOperator:
    """Right inverse of f -> k o f for kernels with a closed form."""

    kernel: Kernel

    def __post_init__(self) -> None:
        if not isinstance(self.kernel, (JAlpha, CharInterval)):
            raise UnsupportedKernelError(
                f"no closed-form right inverse for kernel {self.kernel.spec()}"
            )


def t_prime(k: Kernel, f: GridFunction) -> GridFunction:
    """(k o f)(t_i) = int_{t_i}^{T} k(s - t_i) f(s) ds on the grid of f.

    Kernel cell moments make this exact on the kernel side; f must be
    compactly supported (or the truncation at the grid end accepted).
    """
    grid = f.grid
    M = grid.M
    A, B = k.cell_weights(grid)
    fv = f.values
    out = np.zeros(M + 1, dtype=np.complex128)
    e_idx = f.support_hint[1] if f.support_hint is not None else M
    for i in range(e_idx):
        n = e_idx - i
        out[i] = A[:n] @ fv[i : i + n] + B[:n] @ fv[i + 1 : i + n + 1]
    hint = (0, e_idx) if f.support_hint is not None else None
    return GridFunction(grid, out, support_hint=hint)


def _weyl_char_interval(f, grid: Grid) -> GridFunction:
    if isinstance(f, (TestFunction, DifferentiatedBump)):
        t = grid.nodes
        out = np.zeros(grid.M + 1, dtype=np.complex128)
        n_max = int(math.ceil(f.b)) + 1
        for n in range(n_max + 1):
            out -= f.evaluate(t + n, order=1)
        hi = min(grid.M, int(math.ceil(f.b / grid.h)))
        out[hi + 1 :] = 0.0
        return GridFunction(grid, out, support_hint=(0, hi))
    shift = 1.0 / grid.h
    k1 = int(round(shift))
    if abs(shift - k1) > 1e-9:
        raise ValueError("unit shifts must land on grid nodes for sampled input")
    d = derivative(f, 1)
    out = np.zeros(grid.M + 1, dtype=np.complex128)
    dv = d.values
    n = 0
    while n * k1 <= grid.M:
        out[: grid.M + 1 - n * k1] -= dv[n * k1 :]
        n += 1
    return GridFunction(grid, out)


def weyl_apply(w: WeylOperator, f, grid: Grid | None = None) -> GridFunction:
    """Apply W_k to a TestFunction (exact derivatives) or GridFunction."""
    if isinstance(f, GridFunction):
        grid = f.grid
    elif grid is None:
        raise ValueError("a grid is required when applying W to a TestFunction")

    k = w.kernel
    if isinstance(k, CharInterval):
        return _weyl_char_interval(f, grid)

    alpha = k.alpha
    m = int(math.ceil(alpha))
    beta = m - alpha
    if isinstance(f, (TestFunction, DifferentiatedBump)):
        g = ((-1.0) ** m) * f.sample(grid, order=m)
    else:
        g = f
        for _ in range(m):
            g = derivative(g, 1)
        g = ((-1.0) ** m) * g
    if beta > 0:
        return t_prime(JAlpha(beta), g)
    return g


def roundtrip_check(k: Kernel, f, grid: Grid | None = None) -> float:
    """sup-norm of T'_k(W_k f) - f; O(h^2) for bumps and supported kernels."""
    w = WeylOperator(k)
    wf = weyl_apply(w, f, grid)
    back = t_prime(k, wf)
    ref = f if isinstance(f, GridFunction) else f.sample(back.grid)
    return sup_norm(back - ref)
