"""Uniform-grid calculus for complex-valued functions on [0, T].

This module provides the discrete carriers and the three half-line
convolution products everything else is built on:

* ``convolve``        -- (f * g)(t) = int_0^t f(t-s) g(s) ds
* ``dual_convolve``   -- (f o g)(t) = int_t^E f(s-t) g(s) ds, the adjoint
  product; the upper limit is truncated at the support end of ``g`` (or
  at T when no support hint is given)
* ``cosine_convolve`` -- the symmetrised product (f *_c g) =
  (f*g + f o g + g o f) / 2

plus convolution powers, antiderivatives, finite differences and a
truncated Laplace transform.

Quadrature is trapezoidal by default.  A GridFunction may carry a
``singular_exponent`` e, asserting that its samples behave like
t**(e-1) * phi(t) near the origin with phi smooth.  All integrals then
switch to product integration: the smooth part of the integrand is
interpolated linearly on each cell and integrated against the exact
moments of the power weight.  Plain trapezoid loses its second order at
a power endpoint; the moment rule keeps the global error at O(h^2).

Every operation is a pure function of immutable inputs, so values can be
shared freely across threads and mapped in parallel over nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import beta as beta_fn, betainc


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class QuadratureUsageError(ValueError):
    """A quadrature rule was requested that the inputs do not support."""


#: below this size the direct O(M^2) sum is as fast as the FFT anyway
_FFT_MIN_SIZE = 192


@dataclass(frozen=True)
class Grid:
    """Uniform nodes t_i = i*h on [0, T] with h = T/M, M >= 2."""

    T: float
    M: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"interval length must be positive and finite, got {self.T}")
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"need an integer number of subintervals >= 2, got {self.M}")

    @property
    def h(self) -> float:
        return self.T / self.M

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.M + 1)

    def index_of(self, t: float) -> int:
        """Index of the node equal to t; raises if t is not on the grid."""
        i = int(round(t / self.h))
        if not 0 <= i <= self.M or abs(t - i * self.h) > 1e-9 * max(1.0, self.T):
            raise ValueError(f"t={t} is not a node of Grid(T={self.T}, M={self.M})")
        return i


def _same_grid(f: "GridFunction", g: "GridFunction") -> Grid:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")
    return f.grid


@dataclass
class QuadratureRule:
    """Quadrature selector: 'trapezoid' or 'product-integration'.

    ``order`` is the expected convergence exponent (2 for both rules on
    data they are meant for).  Product integration is only valid when a
    factor carries a power singularity t**(alpha-1) with 0 < alpha < 1.
    """

    kind: str
    order: int = 2

    def __post_init__(self) -> None:
        if self.kind not in ("trapezoid", "product-integration"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")


TRAPEZOID = QuadratureRule("trapezoid")
PRODUCT_INTEGRATION = QuadratureRule("product-integration")


@dataclass
class GridFunction:
    """Complex samples of a function on a uniform grid.

    ``support_hint = (lo, hi)`` asserts that samples outside the index
    range [lo, hi] are exactly zero.

    ``singular_exponent = e`` (0 < e < 2, e != 1) marks samples behaving
    like t**(e-1) * phi(t) near the origin with phi smooth; the t=0
    sample is stored as 0 by convention and quadrature never uses it,
    working with exact power moments instead.
    """

    grid: Grid
    values: np.ndarray
    support_hint: tuple[int, int] | None = None
    singular_exponent: float | None = None

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.M + 1,):
            raise ValueError(
                f"expected {self.grid.M + 1} samples, got shape {self.values.shape}"
            )
        if self.support_hint is not None:
            lo, hi = self.support_hint
            if not (0 <= lo <= hi <= self.grid.M):
                raise ValueError(f"support hint {self.support_hint} out of range")
            if np.any(self.values[:lo] != 0) or np.any(self.values[hi + 1 :] != 0):
                raise ValueError("samples outside the support hint must be exactly zero")
            self.support_hint = (int(lo), int(hi))
        e = self.singular_exponent
        if e is not None:
            if not (0 < e < 2) or e == 1:
                raise ValueError(f"singular exponent must lie in (0,2)\\{{1}}, got {e}")
            self.values[0] = 0.0

    # -- light arithmetic used when assembling identities -----------------

    def _binop(self, other: "GridFunction", op) -> "GridFunction":
        _same_grid(self, other)
        return GridFunction(self.grid, op(self.values, other.values))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self._binop(other, np.add)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self._binop(other, np.subtract)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            # pointwise product; support is the intersection
            _same_grid(self, other)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(
            self.grid,
            self.values * complex(other),
            support_hint=self.support_hint,
            singular_exponent=self.singular_exponent,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self * (-1.0)


def zeros(grid: Grid) -> GridFunction:
    return GridFunction(grid, np.zeros(grid.M + 1), support_hint=(0, 0))


def from_callable(grid, fn, support=None, singular_exponent=None) -> GridFunction:
    """Sample ``fn`` at the nodes; optionally clamp outside [a, b] to zero."""
    vals = np.asarray(fn(grid.nodes), dtype=np.complex128)
    hint = None
    if support is not None:
        a, b = support
        t = grid.nodes
        mask = (t >= a - 1e-12) & (t <= b + 1e-12)
        vals = np.where(mask, vals, 0.0)
        nz = np.nonzero(mask)[0]
        hint = (int(nz[0]), int(nz[-1])) if nz.size else (0, 0)
    return GridFunction(grid, vals, support_hint=hint, singular_exponent=singular_exponent)


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


# ---------------------------------------------------------------------------
# cell weights: every integral below is assembled from per-cell pairs
# (A_j, B_j) such that  int_{t_j}^{t_{j+1}} f(u) y(u) du ~ A_j y_j + B_j y_{j+1}
# with y the smooth factor.  Trapezoid uses the raw samples of f; the
# singular path extracts phi = f * t**(1-e) and integrates the power
# weight exactly.
# ---------------------------------------------------------------------------


def _phi_values(values: np.ndarray, e: float, nodes: np.ndarray) -> np.ndarray:
    phi = np.empty_like(values)
    phi[1:] = values[1:] * nodes[1:] ** (1.0 - e)
    if len(phi) >= 4:
        # quadratic extrapolation to the origin; exact for pure powers
        phi[0] = 3.0 * phi[1] - 3.0 * phi[2] + phi[3]
    else:
        phi[0] = phi[1]
    return phi


def _power_cell_moments(e: float, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(m0_j, m1_j) = cell integrals of u**(e-1) and u**e."""
    m0 = np.diff(nodes**e) / e
    m1 = np.diff(nodes ** (e + 1.0)) / (e + 1.0)
    return m0, m1


def _singular_cell_weights(values, e, grid) -> tuple[np.ndarray, np.ndarray]:
    t = grid.nodes
    h = grid.h
    phi = _phi_values(values, e, t)
    m0, m1 = _power_cell_moments(e, t)
    A = (m0 * t[1:] - m1) / h * phi[:-1]
    B = (m1 - m0 * t[:-1]) / h * phi[1:]
    return A, B


def _trapezoid_cell_weights(values, h) -> tuple[np.ndarray, np.ndarray]:
    return 0.5 * h * values[:-1], 0.5 * h * values[1:]


def cell_weights(f: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell weight pairs for integrating f against linear interpolants."""
    if f.singular_exponent is not None:
        return _singular_cell_weights(f.values, f.singular_exponent, f.grid)
    return _trapezoid_cell_weights(f.values, f.grid.h)


def integrate_against(f: GridFunction, y: np.ndarray) -> complex:
    """int_0^T f(t) y(t) dt with y sampled at the nodes of f's grid."""
    A, B = cell_weights(f)
    y = np.asarray(y)
    return complex(A @ y[:-1] + B @ y[1:])


def _apply_convolution(A, B, g, use_fft) -> np.ndarray:
    """out[i] = sum_{j<i} A[j] g[i-j] + B[j] g[i-j-1]."""
    M = g.size - 1
    if use_fft:
        cA = fftconvolve(A, g)[: M + 1]
        cB = fftconvolve(B, g)[:M]
    else:
        cA = np.convolve(A, g)[: M + 1]
        cB = np.convolve(B, g)[:M]
    out = np.zeros(M + 1, dtype=np.complex128)
    out[1:] = cA[1:] + cB
    out[1:M] -= A[1:M] * g[0]  # drop the unwanted j=i term of cA
    return out


def _convolve_two_singular(f: GridFunction, g: GridFunction) -> np.ndarray:
    """Convolution with power behaviour at both endpoints of the range.

    Both smooth parts phi are interpolated linearly per cell and the
    resulting quadratic is integrated against the exact two-power weight
    u**(a-1) (t-u)**(b-1) via regularized incomplete Beta differences.
    Exact for pure power data at every node, O(h^2) otherwise.
    """
    grid = f.grid
    M, h = grid.M, grid.h
    a, b = f.singular_exponent, g.singular_exponent
    t = grid.nodes
    phif = _phi_values(f.values, a, t)
    phig = _phi_values(g.values, b, t)
    P1 = np.diff(phif) / h
    P0 = phif[:-1] - P1 * t[:-1]
    B0, B1, B2 = beta_fn(a, b), beta_fn(a + 1, b), beta_fn(a + 2, b)
    out = np.zeros(M + 1, dtype=np.complex128)
    for i in range(1, M + 1):
        x = np.arange(i + 1) / i
        ti = t[i]
        mu0 = ti ** (a + b - 1.0) * B0 * np.diff(betainc(a, b, x))
        mu1 = ti ** (a + b) * B1 * np.diff(betainc(a + 1, b, x))
        mu2 = ti ** (a + b + 1.0) * B2 * np.diff(betainc(a + 2, b, x))
        gl = phig[i:0:-1]
        gr = phig[i - 1 :: -1]
        Q1 = (gr - gl) / h
        Q0 = gl - Q1 * t[:i]
        out[i] = (
            (P0[:i] * Q0) @ mu0 + (P0[:i] * Q1 + P1[:i] * Q0) @ mu1 + (P1[:i] * Q1) @ mu2
        )
    return out


def _resolve_rule(f, g, rule):
    if rule is not None and rule.kind == "product-integration":
        fe, ge = f.singular_exponent, g.singular_exponent
        if (fe is None or fe >= 1) and (ge is None or ge >= 1):
            raise QuadratureUsageError(
                "product integration requires a factor with a power singularity"
            )
    if rule is not None and rule.kind == "trapezoid":
        return "trapezoid"
    if f.singular_exponent is not None or g.singular_exponent is not None:
        return "product-integration"
    return "trapezoid"


def convolve(f: GridFunction, g: GridFunction, rule: QuadratureRule | None = None,
             fft: bool | None = None) -> GridFunction:
    """(f * g)(t_i) = int_0^{t_i} f(t_i - s) g(s) ds.

    The rule defaults to trapezoid, switching to product integration
    whenever a factor carries a singular exponent.  The FFT path and the
    direct O(M^2) sum use identical weights and agree to rounding.
    """
    grid = _same_grid(f, g)
    kind = _resolve_rule(f, g, rule)
    use_fft = fft if fft is not None else grid.M >= _FFT_MIN_SIZE

    exponent = None
    if kind == "product-integration" and f.singular_exponent is not None \
            and g.singular_exponent is not None:
        out = _convolve_two_singular(f, g)
        ab = f.singular_exponent + g.singular_exponent
        exponent = ab if (0 < ab < 2 and ab != 1) else None
        if abs(ab - 1.0) < 1e-12:
            # the product of the powers is regular with a nonzero limit
            phif = _phi_values(f.values, f.singular_exponent, grid.nodes)
            phig = _phi_values(g.values, g.singular_exponent, grid.nodes)
            out[0] = phif[0] * phig[0] * beta_fn(f.singular_exponent, g.singular_exponent)
    else:
        a, b = f, g
        if kind == "product-integration" and a.singular_exponent is None:
            a, b = g, f
        if kind == "trapezoid":
            A, B = _trapezoid_cell_weights(a.values, grid.h)
        else:
            A, B = cell_weights(a)
            # the result behaves like t**(e_a) near 0 (conservatively: its
            # smooth part may vanish there), so keep the power marker
            ea = a.singular_exponent + 1.0
            exponent = ea if (0 < ea < 2 and ea != 1) else None
        out = _apply_convolution(A, B, b.values, use_fft)

    hint = None
    if f.support_hint is not None and g.support_hint is not None:
        lo = min(grid.M, f.support_hint[0] + g.support_hint[0])
        hi = min(grid.M, f.support_hint[1] + g.support_hint[1])
        out[:lo] = 0.0
        out[hi + 1 :] = 0.0
        hint = (lo, hi)
    return GridFunction(grid, out, support_hint=hint, singular_exponent=exponent)


def dual_convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """(f o g)(t_i) = int_{t_i}^{E} f(s - t_i) g(s) ds.

    E is the support end of g when hinted, else T (the caller accepts
    truncation of the half-line integral there).
    """
    grid = _same_grid(f, g)
    M = grid.M
    e_idx = g.support_hint[1] if g.support_hint is not None else M
    A, B = cell_weights(f)
    gv = g.values
    out = np.zeros(M + 1, dtype=np.complex128)
    for i in range(e_idx):
        n = e_idx - i
        out[i] = A[:n] @ gv[i : i + n] + B[:n] @ gv[i + 1 : i + n + 1]
    if g.singular_exponent is not None and f.singular_exponent is None:
        # only the t=0 node sees g's origin singularity
        Ag, Bg = cell_weights(g)
        out[0] = Ag[:e_idx] @ f.values[:e_idx] + Bg[:e_idx] @ f.values[1 : e_idx + 1]
    hint = None
    if f.support_hint is not None and g.support_hint is not None:
        hi = max(0, e_idx - f.support_hint[0])
        out[hi + 1 :] = 0.0
        hint = (0, hi)
    return GridFunction(grid, out, support_hint=hint)


def cosine_convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """(f *_c g) = (f*g + f o g + g o f) / 2, node by node."""
    c = convolve(f, g)
    d1 = dual_convolve(f, g)
    d2 = dual_convolve(g, f)
    out = 0.5 * (c.values + d1.values + d2.values)
    hint = None
    hints = [c.support_hint, d1.support_hint, d2.support_hint]
    if all(h is not None for h in hints):
        hint = (0, max(h[1] for h in hints))
    return GridFunction(f.grid, out, support_hint=hint)


def convolution_power(k: GridFunction, n: int) -> GridFunction:
    """n-fold convolution power k * k * ... * k, n >= 1."""
    if int(n) != n or n < 1:
        raise ValueError(f"convolution power needs an integer n >= 1, got {n}")
    out = k
    for _ in range(int(n) - 1):
        out = convolve(out, k)
    return out


def antiderivative(f: GridFunction) -> GridFunction:
    """F(t_i) = int_0^{t_i} f, cumulative by cells (moment-exact when singular)."""
    A, B = cell_weights(f)
    F = np.concatenate(([0.0], np.cumsum(A + B)))
    e = f.singular_exponent
    new_e = None
    if e is not None and 0 < e + 1 < 2:
        new_e = e + 1.0
    hint = (f.support_hint[0], f.grid.M) if f.support_hint is not None else None
    return GridFunction(f.grid, F, support_hint=hint, singular_exponent=new_e)


def second_antiderivative(f: GridFunction) -> GridFunction:
    """(I * f)(t) = int_0^t (t - s) f(s) ds, as antiderivative applied twice."""
    return antiderivative(antiderivative(f))


def derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """O(h^2) finite differences: central interior, one-sided second order at the ends."""
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    v = f.values
    h = f.grid.h
    M = f.grid.M
    out = np.empty_like(v)
    if order == 1:
        out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    else:
        out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
        out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h**2
        out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2
    hint = None
    if f.support_hint is not None:
        lo, hi = f.support_hint
        lo = 0 if lo <= 3 else lo - 1
        hi = M if hi >= M - 3 else hi + 1
        hint = (lo, hi)
    return GridFunction(f.grid, out, support_hint=hint)


def laplace_transform(f: GridFunction, lam: complex) -> complex:
    """int_0^T exp(-lam t) f(t) dt, truncated at the grid end."""
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValueError(f"Laplace argument must be finite, got {lam}")
    y = np.exp(-lam * f.grid.nodes)
    return integrate_against(f, y)


# ---------------------------------------------------------------------------
# serialization: CSV with columns t, re, im and a `# T=.. M=..` header line
# ---------------------------------------------------------------------------


def write_csv(f: GridFunction, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# T={f.grid.T!r} M={f.grid.M}\n")
        fh.write("t,re,im\n")
        for t, v in zip(f.grid.nodes, f.values):
            fh.write(f"{float(t)!r},{float(v.real)!r},{float(v.imag)!r}\n")


def read_csv(path) -> GridFunction:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# T="):
            raise ValueError(f"{path}: missing '# T=.. M=..' header line")
        parts = dict(p.split("=", 1) for p in header[2:].split())
        grid = Grid(T=float(parts["T"]), M=int(parts["M"]))
        fh.readline()  # column header
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (grid.M + 1, 3):
        raise ValueError(f"{path}: expected {grid.M + 1} rows of t,re,im")
    return GridFunction(grid, data[:, 1] + 1j * data[:, 2])
