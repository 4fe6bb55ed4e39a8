"""Jacobi heat kernels on double cones and hyperboloids, with their sharp estimates."""
from .errors import (
    CapacityError,
    ConicHeatError,
    DomainError,
    LogUnderflowError,
    TruncationError,
    UnsupportedError,
)
from .special import UltrasphericalBasis, eval_pnn, get_basis, norm_h, zfun
from .quadrature import DIRAC_ETA, SymmetricRule, build_rule, integrate, matched_node_count
from .geometry import (
    DomainPoint,
    Kind,
    PairInvariants,
    check_point,
    invariants_arrays,
    invariants_from_coords,
    invariants_of,
    sample_batch,
    sample_random,
    to_cone,
    validate,
    xi,
)
from .kernels import (
    EvalConfig,
    KernelParams,
    STRATEGIES,
    evaluate_invariants,
    evaluate_pairs,
    g_heat,
    heat_kernel,
    heat_kernel_odd,
    repro_kernel,
)
from .envelopes import (
    EnvelopeValue,
    envelope_even,
    envelope_g,
    envelope_odd,
    lnss2_check,
    lnss3_lhs,
    lnss3_rhs,
    log_envelope_g,
)
from .estimators import HeatKernelEnvelope, JacobiHeatKernel, check_points

__version__ = "0.1.0"
