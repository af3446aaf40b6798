"""Convoluted cosine propagators for diagonal generators.

A DiagonalGenerator is a finite list of complex spectral parameters a_m,
standing for the operator diag(a_m^2) on a truncated sequence space.
Its cosine family is cosh(a_m t) entrywise; convolving the family with a
kernel k yields the k-convoluted family, stored as a PropagatorTable
with one column per mode.  Columns never mix, so commutation with the
generator is structural and all verification weight falls on the
Duhamel residual

    | a_m^2 (I * E_m)(t) - E_m(t) + (chi * k)(t) |

which is O(h^2) exactly when the table is a genuine convoluted
propagator.

Entries switch to log storage (complex log: log-magnitude plus phase)
whenever max |a_m| T > 500, ahead of double-precision overflow; log
tables support norms and export but not quadrature.

Fractional kernels leave tables with a t**(e-1) leading behaviour at the
origin (e = alpha + 1 for the first convolution).  Tables carry that
exponent and kernel convolutions against them split off the leading
power analytically, keeping everything at second order; see
``_convolve_kernel_values``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from . import kernels as _kernels
from .gridfn import Grid, GridFunction, _apply_convolution, antiderivative, second_antiderivative
from .kernels import CharInterval, JAlpha, Kernel

_LOG_SWITCH = 500.0


@dataclass(frozen=True)
class DiagonalGenerator:
    """Spectral parameters a_m; the generator is diag(a_m^2)."""

    spectrum: tuple[complex, ...]

    def __post_init__(self) -> None:
        spec = tuple(complex(a) for a in self.spectrum)
        if len(spec) < 1:
            raise ValueError("need at least one mode")
        if any(not (math.isfinite(a.real) and math.isfinite(a.imag)) for a in spec):
            raise ValueError("spectral parameters must be finite")
        object.__setattr__(self, "spectrum", spec)

    @property
    def N(self) -> int:
        return len(self.spectrum)


@dataclass
class PropagatorTable:
    """Per-node diagonal operator values E[i, m].

    kernel is None for the raw cosine table and the convolving kernel
    otherwise (convoluted tables vanish at t = 0).  origin_power tags a
    fractional t**(e-1) leading behaviour of the columns at the origin.
    """

    generator: DiagonalGenerator
    grid: Grid
    entries: np.ndarray
    kernel: Kernel | None = None
    log_scale: bool = False
    origin_power: float | None = field(default=None)

    def __post_init__(self) -> None:
        self.entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if self.entries.shape != (self.grid.M + 1, self.generator.N):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match grid/generator"
            )
        if self.kernel is not None and not self.log_scale:
            if np.any(self.entries[0, :] != 0):
                raise ValueError("a convoluted family must vanish at t = 0")

    def column(self, m: int) -> GridFunction:
        return GridFunction(
            self.grid, self.entries[:, m], singular_exponent=self.origin_power
        )


def _log_cosh(z: np.ndarray) -> np.ndarray:
    w = np.where(z.real >= 0, z, -z)
    return w - math.log(2.0) + np.log(1.0 + np.exp(-2.0 * w))


def base_cosine(gen: DiagonalGenerator, grid: Grid) -> PropagatorTable:
    """Entries cosh(a_m t_i); switches to log storage ahead of overflow."""
    a = np.asarray(gen.spectrum, dtype=np.complex128)
    z = np.multiply.outer(grid.nodes.astype(np.complex128), a)
    if np.max(np.abs(a)) * grid.T > _LOG_SWITCH:
        return PropagatorTable(gen, grid, _log_cosh(z), log_scale=True)
    return PropagatorTable(gen, grid, np.cosh(z))


def _split_leading_power(vals: np.ndarray, e: float, grid: Grid):
    """vals = c * t**(e-1)/Gamma(e) + rho with rho one power smoother."""
    t = grid.nodes
    phi = vals[1:4] * t[1:4] ** (1.0 - e)
    phi0 = 3.0 * phi[0] - 3.0 * phi[1] + phi[2]
    c = phi0 * gamma_fn(e)
    lead = np.zeros_like(vals)
    lead[1:] = t[1:] ** (e - 1.0) / gamma_fn(e)
    return c, vals - c * lead, lead


def _convolve_kernel_values(k: Kernel, vals: np.ndarray, tag: float | None,
                            grid: Grid) -> np.ndarray:
    """(k * vals) on the grid, exact on the tagged leading power.

    For a power kernel and a column behaving like t**(tag-1) near 0 the
    leading part convolves in closed form (power kernels compose by
    adding orders); only the smoother remainder is discretised.
    """
    if tag is not None and isinstance(k, JAlpha):
        c, rho, _ = _split_leading_power(vals, tag, grid)
        A, B = k.cell_weights(grid)
        out = _apply_convolution(A, B, rho, use_fft=True)
        s = k.alpha + tag
        t = grid.nodes
        out[1:] += c * t[1:] ** (s - 1.0) / gamma_fn(s)
        return out
    if tag is not None and isinstance(k, CharInterval):
        F = antiderivative(GridFunction(grid, vals, singular_exponent=tag)).values
        k1 = int(round(1.0 / grid.h))
        if abs(1.0 / grid.h - k1) > 1e-9:
            raise ValueError("unit-interval kernel needs 1 to be a grid multiple here")
        out = F.copy()
        if k1 <= grid.M:
            out[k1:] = F[k1:] - F[:-k1]
        return out
    A, B = k.cell_weights(grid)
    return _apply_convolution(A, B, vals, use_fft=True)


def _result_tag(k: Kernel, base_tag: float | None) -> float | None:
    if isinstance(k, JAlpha):
        inc = k.alpha
    elif isinstance(k, (CharInterval, _kernels._UnitIntervalPower)):
        inc = 1.0
    else:
        return None
    e = inc + (base_tag if base_tag is not None else 1.0)
    return e if (0 < e < 2 and abs(e - round(e)) > 1e-12) else None


def convolve_family(base: PropagatorTable, k: Kernel) -> PropagatorTable:
    """Entrywise (k * E_m)(t_i): the k-convoluted family built on base."""
    if base.log_scale:
        raise ValueError("cannot convolve a log-scale table")
    grid = base.grid
    out = np.empty_like(base.entries)
    for m in range(base.generator.N):
        out[:, m] = _convolve_kernel_values(k, base.entries[:, m], base.origin_power, grid)
    out[0, :] = 0.0
    if base.kernel is None:
        new_kernel: Kernel = k
    else:
        new_kernel = _kernels.kernel_convolve(base.kernel, k, grid)
    return PropagatorTable(
        base.generator, grid, out, kernel=new_kernel,
        origin_power=_result_tag(k, base.origin_power),
    )


def duhamel_residual(table: PropagatorTable, m: int, t: float) -> float:
    """| a_m^2 (I * E_m)(t) - E_m(t) + (chi * k)(t) |."""
    if table.log_scale:
        raise ValueError("residuals are meaningless near overflow; table is log-scale")
    if table.kernel is None:
        raise ValueError("raw cosine table is not a convoluted family")
    i = table.grid.index_of(t)
    col = table.column(m)
    iterated = second_antiderivative(col).values
    chik = table.kernel.cumulative(table.grid).values
    a = table.generator.spectrum[m]
    return float(abs(a * a * iterated[i] - table.entries[i, m] + chik[i]))


def family_norm(table: PropagatorTable, t: float) -> float:
    """sup over modes of |E[t, m]| (log-domain max for log tables)."""
    i = table.grid.index_of(t)
    row = table.entries[i, :]
    if table.log_scale:
        with np.errstate(over="ignore"):
            return float(np.exp(np.max(row.real)))
    return float(np.max(np.abs(row)))


def export_csv(table: PropagatorTable, path) -> None:
    """Columns t, m, re, im (t, m, logmag, phase for log tables)."""
    cols = "t,m,logmag,phase" if table.log_scale else "t,m,re,im"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# T={table.grid.T!r} M={table.grid.M} N={table.generator.N} "
                 f"log_scale={int(table.log_scale)}\n")
        fh.write(cols + "\n")
        for i, t in enumerate(table.grid.nodes):
            for m in range(table.generator.N):
                v = table.entries[i, m]
                fh.write(f"{float(t)!r},{m},{float(v.real)!r},{float(v.imag)!r}\n")
