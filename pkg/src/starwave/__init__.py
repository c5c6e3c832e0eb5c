"""Spectral representation of the Klein-Gordon operator on star networks.

The operator acts as -c_k u'' + a_k u on each of n half-line branches glued
at one node, with continuity and a weighted flux (Kirchhoff) condition
there.  The package provides its generalized eigenfunctions, resolvent
kernel, forward and inverse spectral transforms, functional calculus and
wave evolution, a symmetrization verification engine for the spectral
weight matrix, and an independent time-domain finite-difference solver used
as a cross-check oracle.
"""

__version__ = "0.1.0"

from .eigenbasis import (
    EigenParams,
    bound_M,
    branch_sqrt,
    eigen_params,
    eval_F,
    eval_F_branch,
    eval_F_deriv,
    eval_F_deriv_branch,
    eval_F_second,
)
from .fdtd import (
    FdtdConfig,
    FdtdState,
    causality_window,
    dalembert_reference,
    fdtd_energy,
    fdtd_init,
    fdtd_run,
    fdtd_step,
)
from .network import (
    BandEdgeError,
    BranchPoint,
    NetworkError,
    NetworkFunction,
    QuadratureRule,
    StarNetwork,
    band_index,
    integrate_network,
    norm_h,
    reference_network,
    transmission_residual,
    validate_network,
)
from .resolvent import (
    KernelQuery,
    LimitingAbsorptionReport,
    SingularWronskianError,
    absorption_constants,
    apply_resolvent,
    kernel_K,
    kernel_params,
    limiting_absorption_check,
)
from .spectral import (
    KAPPA_DEFAULT,
    DecayReport,
    SpectralFunction,
    SpectralGrid,
    SpectralWeights,
    apply_function,
    choose_cutoff,
    domain_decay_diagnostic,
    evolution_multipliers,
    evolve_klein_gordon,
    forward_V,
    inner_q,
    inverse_Z,
    norm_q,
    q_weights,
    spectral_weights,
)
from .symmetrize import (
    AnchorError,
    AnchorFrame,
    QMatrix,
    assemble_system,
    closed_form_q,
    direct_eval_im_kernel,
    im_kernel_cases,
    make_anchor_frame,
    q_direct,
    solve_q_leastsquares,
)

__all__ = [
    "__version__",
    "AnchorError",
    "AnchorFrame",
    "BandEdgeError",
    "BranchPoint",
    "DecayReport",
    "EigenParams",
    "FdtdConfig",
    "FdtdState",
    "KAPPA_DEFAULT",
    "KernelQuery",
    "LimitingAbsorptionReport",
    "NetworkError",
    "NetworkFunction",
    "QMatrix",
    "QuadratureRule",
    "SingularWronskianError",
    "SpectralFunction",
    "SpectralGrid",
    "SpectralWeights",
    "StarNetwork",
    "absorption_constants",
    "apply_function",
    "apply_resolvent",
    "assemble_system",
    "band_index",
    "bound_M",
    "branch_sqrt",
    "causality_window",
    "choose_cutoff",
    "closed_form_q",
    "dalembert_reference",
    "direct_eval_im_kernel",
    "domain_decay_diagnostic",
    "eigen_params",
    "eval_F",
    "eval_F_branch",
    "eval_F_deriv",
    "eval_F_deriv_branch",
    "eval_F_second",
    "evolution_multipliers",
    "evolve_klein_gordon",
    "fdtd_energy",
    "fdtd_init",
    "fdtd_run",
    "fdtd_step",
    "forward_V",
    "im_kernel_cases",
    "inner_q",
    "integrate_network",
    "inverse_Z",
    "kernel_K",
    "kernel_params",
    "limiting_absorption_check",
    "make_anchor_frame",
    "norm_h",
    "norm_q",
    "q_direct",
    "q_weights",
    "reference_network",
    "solve_q_leastsquares",
    "spectral_weights",
    "transmission_residual",
    "validate_network",
]
