"""The operator calculus induced by a local convoluted cosine family.

For a power kernel of order alpha and a test function f supported in
[0, n tau], the calculus applies the diagonal operator

    C(f) x = int_0^{n tau} W_n f(t) E_n(t) x dt

where E_n is the extended table of the n-fold kernel power on [0, n tau]
and W_n is the Weyl-type inverse of that power's co-convolution
operator.  The smallest admissible n is used; changing n is a tested
property, not an assumption (quadrature breaks exact equality).

The calculus is linear, multiplicative for the cosine convolution
product, and reproduces the generator through

    a_m^2 C(f) = C(f'') + f'(0)

mode by mode.  Only power kernels are supported: the calculus needs the
closed-form inverse for every power, which is what the fractional family
provides.

Contexts are immutable after construction and calculus applications are
pure; modes are independent throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .extend import extend_full_detailed
from .gridfn import Grid, GridFunction, integrate_against
from .kernels import JAlpha
from .propagator import DiagonalGenerator, PropagatorTable, base_cosine
from .weyl import DifferentiatedBump, TestFunction, WeylOperator, weyl_apply


@dataclass
class CalculusContext:
    """Cached extended tables E_n on [0, n tau] for n = 1 .. n_max."""

    kernel: JAlpha
    generator: DiagonalGenerator
    tau: float
    m_per_tau: int
    n_max: int
    tables: dict[int, PropagatorTable]


def make_context(kernel: JAlpha, generator: DiagonalGenerator, tau: float = 1.0,
                 m_per_tau: int = 128, n_max: int = 4) -> CalculusContext:
    if not isinstance(kernel, JAlpha):
        raise ValueError("the calculus needs a power kernel (closed-form inverses)")
    base = base_cosine(generator, Grid(tau, m_per_tau))
    if base.log_scale:
        raise ValueError("spectrum too large for linear-scale tables on [0, tau]")
    tables, _ = extend_full_detailed(base, kernel, tau, n_max - 1, powers="analytic")
    return CalculusContext(kernel, generator, tau, m_per_tau, n_max, tables)


def _support_end(f, default: float) -> float:
    if isinstance(f, (TestFunction, DifferentiatedBump)):
        return f.b
    if f.support_hint is not None:
        return f.grid.nodes[f.support_hint[1]]
    return default


def _fit_to(f: GridFunction, grid: Grid) -> GridFunction:
    if f.grid == grid:
        return f
    if abs(f.grid.h - grid.h) > 1e-12 * grid.h:
        raise ValueError("grids must share the step to transfer samples")
    vals = np.zeros(grid.M + 1, dtype=np.complex128)
    n = min(grid.M, f.grid.M) + 1
    vals[:n] = f.values[:n]
    if f.grid.M > grid.M and np.any(f.values[grid.M + 1 :] != 0):
        raise ValueError("samples extend past the target grid")
    hint = None
    if f.support_hint is not None:
        hint = (min(f.support_hint[0], grid.M), min(f.support_hint[1], grid.M))
    return GridFunction(grid, vals, support_hint=hint)


def calculus_apply(ctx: CalculusContext, f, n: int | None = None) -> np.ndarray:
    """The diagonal operator C(f) as one complex value per mode."""
    b = _support_end(f, ctx.n_max * ctx.tau)
    n_min = max(1, int(math.ceil(b / ctx.tau - 1e-9)))
    if n is None:
        n = n_min
    elif n < n_min:
        raise ValueError(f"support [0, {b:g}] does not fit in [0, {n}*tau]")
    if n > ctx.n_max:
        raise ValueError(f"support needs n={n} > n_max={ctx.n_max} cached tables")
    table = ctx.tables[n]
    if table.log_scale:
        raise ValueError("calculus integrals need linear-scale tables")
    w = WeylOperator(JAlpha(n * ctx.kernel.alpha))
    if isinstance(f, (TestFunction, DifferentiatedBump)):
        wf = weyl_apply(w, f, table.grid)
    else:
        wf = weyl_apply(w, _fit_to(f, table.grid))
    out = np.empty(ctx.generator.N, dtype=np.complex128)
    for m in range(ctx.generator.N):
        out[m] = integrate_against(table.column(m), wf.values)
    return out


def multiplicativity_residual(ctx: CalculusContext, phi: TestFunction,
                              psi: TestFunction) -> float:
    """max over modes of |C(phi *_c psi) - C(phi) C(psi)|."""
    from .gridfn import cosine_convolve

    b = phi.b + psi.b
    n2 = max(1, int(math.ceil(b / ctx.tau - 1e-9)))
    if n2 > ctx.n_max:
        raise ValueError(f"product support needs n={n2} > n_max={ctx.n_max}")
    grid = ctx.tables[n2].grid
    prod = cosine_convolve(phi.sample(grid), psi.sample(grid))
    lhs = calculus_apply(ctx, prod)
    rhs = calculus_apply(ctx, phi) * calculus_apply(ctx, psi)
    return float(np.max(np.abs(lhs - rhs)))


def generator_residual(ctx: CalculusContext, f: TestFunction) -> float:
    """max over modes of |a_m^2 C(f) - C(f'') - f'(0)|.

    f'(0) comes from the closed form of the bump, never from
    differencing: it multiplies the identity and any noise there would
    be systematic.
    """
    cf = calculus_apply(ctx, f)
    cf2 = calculus_apply(ctx, DifferentiatedBump(f, 2))
    fp0 = complex(f.evaluate(np.array([0.0]), order=1)[0])
    a = np.asarray(ctx.generator.spectrum)
    return float(np.max(np.abs(a * a * cf - cf2 - fp0)))


def kernel_smoothing_invariance(ctx: CalculusContext, smoothing: JAlpha, f) -> float:
    """max-mode difference between the calculus on k and on k * l.

    Convolving the family with a further power kernel l leaves the
    calculus unchanged; for power kernels k * l stays in the family with
    order alpha + beta.
    """
    if not isinstance(smoothing, JAlpha):
        raise ValueError("smoothing kernel must stay in the power family")
    thick = make_context(
        JAlpha(ctx.kernel.alpha + smoothing.alpha), ctx.generator,
        ctx.tau, ctx.m_per_tau, ctx.n_max,
    )
    return float(np.max(np.abs(calculus_apply(ctx, f) - calculus_apply(thick, f))))
