"""Partition-indexed tensor norms, concentration-bound functionals for
polynomials of independent coordinates, and Monte Carlo verification tools."""

__version__ = "0.1.0"

from .partitions import SetPartition, SplitPartition, enumerate_partitions, enumerate_splits
from .tensor import IndexMask, Tensor, apply_mask, contract, hadamard, hadamard_rank_one, symmetrize
from .norms import NormOptions, NormResult, mixed_norm, norm_J, norm_J_bruteforce
from .poly import (
    HermiteCoeffs,
    Polynomial,
    ProductDistribution,
    expected_derivative_tensor,
    expected_value,
    hermite,
    hermite_expansion,
)
from .bounds import (
    BoundReport,
    BoundTerm,
    additive_functional_tail,
    eta_tail,
    gaussian_moment_bound,
    sobolev_moment_bound,
    weibull_moment_bound,
)
from .montecarlo import (
    MCConfig,
    MomentEstimate,
    TailEstimate,
    chaos_moment,
    empirical_moment,
    empirical_tail,
    hermite_tetrahedral_convergence,
    sample_vector,
    sandwich_check,
    sobolev_check,
)
from .graphs import (
    EdgeIndex,
    GraphSpec,
    counting_polynomial,
    cycle_norm_bound,
    er_tail_experiment,
    indicator_norm_check,
    triangle_norms_exact,
)
from .rmt import (
    WignerSpec,
    eigenvalues_symmetric,
    hoffman_wielandt_gap,
    linear_statistic,
    linstat_tail_bound,
    semicircle_integral,
    wigner_experiment,
)
