"""losdof: spectra and degrees of freedom of line-of-sight MIMO channels.

The package builds the channel matrices of a two-cluster line-of-sight
network, computes their Gram spectra and log-det capacities, realizes the
sinc-kernel integral operator whose eigenvalues govern the capacity upper
bound, and cross-checks the two routes by Monte Carlo experiments.  The
``losdof`` command line drives the experiments and serializes results as
CSV + JSON.
"""

from .backend import backend_name
from .channel import (
    ComplexMatrix,
    MatrixKind,
    PhaseFactors,
    build_g_matrix,
    build_los_matrix,
    build_phase_factored,
    build_random_dft_variant,
    build_vandermonde_variant,
    g_from_coords,
    normalize_los,
)
from .fredholm import (
    DecayFit,
    FredholmTable,
    NystromDiscretization,
    SincKernel,
    build_table,
    decay_fit,
    default_quadrature_n,
    discretize,
    dk_tail_bound,
    elementary_symmetric,
    elementary_symmetric_all,
    fredholm_coefficients,
    iterated_traces,
    kernel_value,
    logdet_upper_bound,
    operator_eigenvalues,
)
from .model import (
    ClusterParams,
    DerivedParams,
    NodePositions,
    derive,
    distance_matrix,
    pairwise_distance,
    rng_from,
    sample_network,
)
from .montecarlo import (
    ClaimReport,
    ConcentrationReport,
    IdentityCheck,
    McEstimate,
    SweepRecord,
    SweepResult,
    bound_sweep,
    claim_sim_experiment,
    concentration_experiment,
    expected_subdeterminant_mc,
    fredholm_identity_check,
    grid_from_m_law,
)
from .spectra import (
    ComparisonReport,
    Spectrum,
    compare_spectra,
    effective_dof,
    gram_spectrum,
    log_det_capacity,
    scaled_spectrum,
)

__version__ = "0.1.0"
