"""Sharp extension of local convoluted cosine propagators.

Given the k-convoluted family on [0, nu] and the k^{*n}-convoluted
family on [0, n nu], the two-branch formula produces the
k^{*(n+1)}-convoluted family on [0, (n+1) nu]:

* on [0, n nu] it is the entrywise convolution (k * prev)(t);
* on [n nu, (n+1) nu] it is the five-term expression

      2 prev(n nu) base(t - n nu)
    + int_0^{n nu}    k(t - r)              prev(r) dr
    + int_0^{t-n nu}  k^{*n}(t - r)         base(r) dr
    - int_{2n nu - t}^{n nu} k(r + t - 2n nu) prev(r) dr
    - int_0^{t-n nu}  k^{*n}(r - t + 2n nu)  base(r) dr.

nu must be a whole number of grid cells so every integration limit
lands on a node.  The two branches coincide at t = n nu by construction
(base(0) = 0 collapses the junction to the branch-1 convolution).

Quadrature: kernel factors integrate by exact cell moments.  For
fractional power kernels the tables behave like t**(e-1) near the
origin; wherever such a table is swept across its origin the leading
power is split off and integrated in closed form (elementary or
incomplete-Beta), with only the smoother remainder discretised.  This
keeps the whole construction at O(h^2).

Each extension step is a barrier: step n+1 reads the completed step-n
table; within a step all modes are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, hyp2f1
from scipy.special import gamma as gamma_fn

from . import gridfn as _gridfn
from . import kernels as _kernels
from .gridfn import Grid, GridFunction
from .kernels import JAlpha, Kernel
from .propagator import (
    PropagatorTable,
    _convolve_kernel_values,
    _result_tag,
    _split_leading_power,
    base_cosine,
    convolve_family,
)


@dataclass
class ExtensionInput:
    """Everything one extension step consumes.

    base       -- C_k on [0, nu]
    prev       -- C_{k^{*n}} on [0, n nu]
    kernel     -- k
    kernel_fn  -- k sampled on the output grid [0, (n+1) nu]
    power_fn   -- k^{*n} sampled on the output grid
    power_kernel -- analytic k^{*n} when available (None if numeric only)
    """

    base: PropagatorTable
    prev: PropagatorTable
    kernel: Kernel
    kernel_fn: GridFunction
    power_fn: GridFunction
    power_kernel: Kernel | None
    nu: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"extension step index must be >= 1, got {self.n}")
        if self.base.log_scale or self.prev.log_scale:
            raise ValueError("extension needs linear-scale tables")
        if self.base.generator != self.prev.generator:
            raise ValueError("base and prev were built from different generators")
        h = self.base.grid.h
        if abs(self.prev.grid.h - h) > 1e-12 * h:
            raise ValueError("base and prev grids have different steps")
        if abs(self.base.grid.T - self.nu) > 1e-9 * self.nu:
            raise ValueError("base table must cover exactly [0, nu]")
        if abs(self.prev.grid.T - self.n * self.nu) > 1e-9 * self.nu:
            raise ValueError(f"prev table must cover exactly [0, {self.n}*nu]")
        big = self.kernel_fn.grid
        if self.power_fn.grid != big:
            raise ValueError("kernel and kernel-power samples live on different grids")
        if big.M != (self.n + 1) * self.base.grid.M or \
                abs(big.T - (self.n + 1) * self.nu) > 1e-9 * self.nu:
            raise ValueError("kernel samples must cover [0, (n+1) nu] at the shared step")


def make_extension_input(base: PropagatorTable, prev: PropagatorTable, kernel: Kernel,
                         n: int, nu: float, powers: str = "auto") -> ExtensionInput:
    """Sample k and k^{*n} on the output grid and bundle the step input.

    powers: 'auto' uses the analytic n-fold self-convolution when the
    kernel family has one, 'analytic' requires it, 'numeric' forces the
    n-fold grid convolution.
    """
    mnu = base.grid.M
    big = Grid((n + 1) * nu, (n + 1) * mnu)
    kernel_fn = kernel.sample(big)
    if powers == "numeric":
        power_kernel: Kernel | None = kernel if n == 1 else None
        power_fn = kernel_fn if n == 1 else _gridfn.convolution_power(kernel_fn, n)
    elif powers in ("auto", "analytic"):
        power_kernel = kernel.power(n)
        if power_kernel is None:
            if powers == "analytic":
                raise ValueError(f"kernel {kernel.spec()} has no analytic powers")
            power_fn = _kernels.kernel_power(kernel, n, big).sample(big)
        else:
            power_fn = power_kernel.sample(big)
    else:
        raise ValueError(f"unknown power mode {powers!r}")
    return ExtensionInput(base, prev, kernel, kernel_fn, power_fn, power_kernel, nu, n)


def _weights_for_kernel(k: Kernel | None, fn: GridFunction):
    if k is not None:
        return k.cell_weights(fn.grid)
    from .gridfn import cell_weights

    return cell_weights(fn)


def _maybe_split(table: PropagatorTable):
    """Per-mode leading-power coefficients and remainders, or None."""
    e = table.origin_power
    if e is None:
        return None
    N = table.generator.N
    c = np.empty(N, dtype=np.complex128)
    rho = np.empty_like(table.entries)
    for m in range(N):
        c[m], rho[:, m], _ = _split_leading_power(table.entries[:, m], e, table.grid)
    return e, c, rho


def _shifted_power_integral(a: float, b: float, s: float, L: float) -> float:
    """int_0^L u**(a-1) (u+s)**(b-1) du, a > 0, b > 0, s >= 0."""
    if L <= 0:
        return 0.0
    if s == 0.0:
        return L ** (a + b - 1.0) / (a + b - 1.0)
    return L**a * s ** (b - 1.0) / a * hyp2f1(1.0 - b, a, a + 1.0, -L / s)


def extend_step_detailed(inp: ExtensionInput, _drop_term: int | None = None):
    """One extension step; returns (table on [0,(n+1)nu], seam mismatch).

    _drop_term (1..5) zeroes one term of the second branch; negative
    control only, it breaks the construction by design.
    """
    n, nu = inp.n, inp.nu
    grid_out = inp.kernel_fn.grid
    mnu = inp.base.grid.M
    jn = n * mnu
    h = grid_out.h
    N = inp.base.generator.N
    P = inp.prev.entries
    Cb = inp.base.entries

    Ak, Bk = _weights_for_kernel(inp.kernel, inp.kernel_fn)
    An, Bn = _weights_for_kernel(inp.power_kernel, inp.power_fn)

    # branch 1: (k * prev) on [0, n nu]
    branch1 = np.empty((jn + 1, N), dtype=np.complex128)
    for m in range(N):
        branch1[:, m] = _convolve_kernel_values(
            inp.kernel, P[:, m], inp.prev.origin_power, inp.prev.grid
        )

    alpha = inp.kernel.alpha if isinstance(inp.kernel, JAlpha) else None
    nalpha = inp.power_kernel.alpha if isinstance(inp.power_kernel, JAlpha) else None
    split_p = _maybe_split(inp.prev) if alpha is not None else None
    split_b = _maybe_split(inp.base) if nalpha is not None else None

    if split_p is not None:
        e_p, c_p, rho_p = split_p
        y2, y4 = rho_p, rho_p
        g2 = gamma_fn(alpha + e_p)
        g4 = gamma_fn(alpha) * gamma_fn(e_p)
    else:
        y2, y4 = P, P
    if split_b is not None:
        e_b, c_b, rho_b = split_b
        y3, y5 = rho_b, rho_b
        g3 = gamma_fn(nalpha + e_b)
        g5 = gamma_fn(nalpha) * gamma_fn(e_b)
    else:
        y3, y5 = Cb, Cb
    y2flip = y2[1 : jn + 1][::-1]
    y2flip0 = y2[0:jn][::-1]

    seg = np.zeros((mnu + 1, N), dtype=np.complex128)
    for ell in range(mnu + 1):
        it = jn + ell
        t = it * h
        t1 = 2.0 * P[jn] * Cb[ell]

        t2 = Ak[ell : ell + jn] @ y2flip + Bk[ell : ell + jn] @ y2flip0
        if split_p is not None:
            t2 = t2 + c_p * (t ** (alpha + e_p - 1.0) * (1.0 - betainc(alpha, e_p, ell / it)) / g2)

        if ell == 0:
            t3 = np.zeros(N, dtype=np.complex128)
            t4 = np.zeros(N, dtype=np.complex128)
            t5 = np.zeros(N, dtype=np.complex128)
        else:
            s = (jn - ell) * h
            t3 = An[jn:it] @ y3[1 : ell + 1][::-1] + Bn[jn:it] @ y3[0:ell][::-1]
            if split_b is not None:
                t3 = t3 + c_b * (
                    t ** (nalpha + e_b - 1.0) * (1.0 - betainc(nalpha, e_b, jn / it)) / g3
                )

            t4 = Ak[:ell] @ y4[jn - ell : jn] + Bk[:ell] @ y4[jn - ell + 1 : jn + 1]
            if split_p is not None:
                t4 = t4 + c_p * (_shifted_power_integral(alpha, e_p, s, ell * h) / g4)

            t5 = An[jn - ell : jn] @ y5[0:ell] + Bn[jn - ell : jn] @ y5[1 : ell + 1]
            if split_b is not None:
                t5 = t5 + c_b * (_shifted_power_integral(e_b, nalpha, s, ell * h) / g5)

        terms = [t1, t2, t3, t4, t5]
        if _drop_term is not None:
            terms[_drop_term - 1] = np.zeros(N, dtype=np.complex128)
        seg[ell] = terms[0] + terms[1] + terms[2] - terms[3] - terms[4]

    seam = float(np.max(np.abs(seg[0] - branch1[jn])))
    out = np.empty((grid_out.M + 1, N), dtype=np.complex128)
    out[: jn + 1] = branch1
    out[jn:] = seg
    out[jn] = branch1[jn]
    out[0] = 0.0

    out_kernel = _kernels.kernel_power(inp.kernel, n + 1, grid_out)
    tag = _result_tag(out_kernel, None)
    table = PropagatorTable(
        inp.base.generator, grid_out, out, kernel=out_kernel, origin_power=tag
    )
    return table, seam


def extend_step(inp: ExtensionInput, _drop_term: int | None = None) -> PropagatorTable:
    return extend_step_detailed(inp, _drop_term)[0]


def extend_full_detailed(base: PropagatorTable, kernel: Kernel, nu: float, n_max: int,
                         powers: str = "auto", _drop_term: int | None = None):
    """Iterate the extension from the raw cosine table on [0, nu].

    Returns (tables, seams): tables[n] is the k^{*n}-convoluted family on
    [0, n nu] for n = 1 .. n_max + 1; seams[i] is the branch mismatch of
    step i+1 at its junction.
    """
    if base.kernel is not None:
        raise ValueError("extend_full expects the raw cosine table on [0, nu]")
    ck = convolve_family(base, kernel)
    tables = {1: ck}
    seams: list[float] = []
    prev = ck
    for n in range(1, n_max + 1):
        inp = make_extension_input(ck, prev, kernel, n, nu, powers)
        prev, seam = extend_step_detailed(inp, _drop_term)
        tables[n + 1] = prev
        seams.append(seam)
    return tables, seams


def extend_full(base: PropagatorTable, kernel: Kernel, nu: float, n_max: int,
                powers: str = "auto") -> PropagatorTable:
    """C_{k^{*(n_max+1)}} on [0, (n_max+1) nu] built from the cosine table."""
    tables, _ = extend_full_detailed(base, kernel, nu, n_max, powers)
    return tables[n_max + 1]


def fractional_extend(base: PropagatorTable, alpha: float, nu: float,
                      n_max: int) -> PropagatorTable:
    """extend_full specialised to power kernels with analytic powers."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return extend_full(base, JAlpha(alpha), nu, n_max, powers="analytic")


def doubling_extend(base: PropagatorTable, kernel: Kernel, nu: float, m: int) -> PropagatorTable:
    """Apply the n=1 step m times, doubling the window each time.

    After m rounds this is the k^{*2^m}-convoluted family on
    [0, 2^m nu]; the incremental path reaches the same family as
    extend_full with n_max = 2^m - 1, and the two agree up to
    quadrature error by uniqueness of the extended solution.
    """
    if base.kernel is not None:
        raise ValueError("doubling_extend expects the raw cosine table on [0, nu]")
    cur = convolve_family(base, kernel)
    cur_kernel = kernel
    length = nu
    for _ in range(m):
        if cur_kernel.power(2) is None:
            raise ValueError(f"kernel {cur_kernel.spec()} has no analytic square")
        inp = make_extension_input(cur, cur, cur_kernel, 1, length, powers="analytic")
        cur, _ = extend_step_detailed(inp)
        cur_kernel = cur_kernel.power(2)
        length *= 2.0
    return cur


def direct_reference(gen, kernel: Kernel, nu: float, n: int, mnu: int) -> PropagatorTable:
    """(k^{*n} * cosh(a .)) on [0, n nu] computed in one convolution.

    The uniqueness of the extended solution makes this the ground truth
    the extension output must match.
    """
    big = Grid(n * nu, n * mnu)
    kn = _kernels.kernel_power(kernel, n, big)
    return convolve_family(base_cosine(gen, big), kn)
