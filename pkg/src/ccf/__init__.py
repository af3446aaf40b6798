"""Half-line convolution calculus and convoluted cosine propagators.

The package realises three convolution products on a uniform grid, an
analytic kernel zoo with exact transforms, Weyl-type right inverses on
smooth bumps, k-convoluted cosine propagators for diagonal generators,
the sharp two-branch extension of a local propagator, the induced
multiplicative operator calculus, and a verification harness with a CLI.
"""

from .gridfn import (
    Grid,
    GridFunction,
    GridMismatchError,
    QuadratureRule,
    QuadratureUsageError,
    antiderivative,
    convolution_power,
    convolve,
    cosine_convolve,
    derivative,
    dual_convolve,
    laplace_transform,
    second_antiderivative,
    sup_norm,
)
from .kernels import (
    CharInterval,
    JAlpha,
    KDelta,
    Kernel,
    SampledKernel,
    Subordinated,
    kernel_laplace,
    parse_kernel,
    sample,
    subordinate,
)
from .weyl import TestFunction, UnsupportedKernelError, WeylOperator, roundtrip_check, t_prime, weyl_apply
from .propagator import (
    DiagonalGenerator,
    PropagatorTable,
    base_cosine,
    convolve_family,
    duhamel_residual,
    family_norm,
)
from .extend import (
    ExtensionInput,
    doubling_extend,
    extend_full,
    extend_step,
    fractional_extend,
    make_extension_input,
)
from .homomorphism import (
    CalculusContext,
    calculus_apply,
    generator_residual,
    kernel_smoothing_invariance,
    make_context,
    multiplicativity_residual,
)

__version__ = "0.1.0"
