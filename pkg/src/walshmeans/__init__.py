"""Averaging of Walsh-Fourier partial sums along growth-constrained subsequences.

Exact desk-scale implementations of the dyadic analysis toolbox (fast Walsh
transform, kernels, conditional expectations, maximal function), the two-sided
Dirichlet kernel decompositions with their frequency blocks, growth-checked
index sequences with shell/residue combinatorics, the averaged means with
their three-way splitting, stopping times, stopped block sums and shell
martingales, plus a command-line experiment harness (see
:mod:`walshmeans.cli`).
"""

from .core import (
    MAX_RESOLUTION,
    BitProfile,
    Spectrum,
    StepFunction,
    analyze,
    bit_profile,
    cond_expect,
    dirichlet_kernel,
    dyadic_add,
    dyadic_convolve,
    dyadic_maximal,
    fejer_kernel,
    partial_sum,
    synthesize,
    truncate,
    walsh_eval,
    walsh_values,
)
from .decomposition import (
    Block,
    DirichletDecomposition,
    block,
    blocks,
    d_kernel,
    decompose_dirichlet,
    decompose_partial_sum,
    dirichlet_standard_identity,
    lambda_coeff,
    spectrum_support,
)
from .errors import (
    ArgumentError,
    ConfigError,
    GenerationError,
    IdentityError,
    ResolutionError,
    WalshMeansError,
)
from .means import (
    MartingaleReport,
    ShellDiagnostics,
    SigmaParts,
    StoppingProfile,
    WeakTypeRow,
    martingale_suite,
    maximal_sigma,
    maximal_sigma_tilde,
    shell_diagnostics,
    sigma_mean,
    sigma_parts,
    stopped_block_sum,
    stopped_mean_max,
    stopped_square_ratio,
    stopping_time,
    weak_type_scan,
)
from .sequences import (
    LacunarityReport,
    ShellPartition,
    Subsequence,
    check_growth,
    gen_sequence,
    load_sequence,
    save_sequence,
    shell_partition,
    shell_step,
    verify_shell_lacunarity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
