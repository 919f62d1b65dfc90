"""Monte Carlo toolkit for non-intersecting bridge ensembles.

Subpackages cover bridge sampling and closed-form bridge laws, lattice
Glauber dynamics with monotone coupling, conditioned line ensembles and
edge scaling, Gibbs block resampling, concave majorants with stopping
domains, geometric last passage percolation, a Tracy-Widom matrix-model
oracle, and the statistics utilities shared by the experiment CLI.
"""

from .boundary import BoundaryData, constant_floor
from .bridge import (
    GridPath,
    bridge_max_law,
    modulus_of_continuity,
    refine_bridge,
    sample_bridge,
    sample_bridges,
    stay_positive_upper_bound,
)
from .ensemble import (
    LineEnsemble,
    edge_scale,
    edge_unscale,
    ensemble_from_lattice,
    height_extremes,
    hypothesis_h3_statistic,
    min_gap,
    parabolic_shift,
    parabolic_unshift,
    sample_nonintersecting,
    sample_watermelon,
)
from .geometry import (
    PiecewiseLinear,
    least_concave_majorant,
    majorant_slope_bound,
    stopping_domain,
)
from .lattice import (
    FlipEvent,
    InfeasibleBoundaryError,
    LatticeBridgeSystem,
    glauber_step,
    lowest_initial_configuration,
    run_chain,
    run_coupled_chains,
)
from .lpp import (
    LppField,
    RescaledProfile,
    ScalingConstants,
    endpoint,
    endpoint_tail_report,
    passage_profile,
    rescale_profile,
    sample_edge_statistics,
    sample_field,
    scaling_constants,
)
from .resample import (
    AcceptanceEstimate,
    ResampleTimeoutError,
    accept,
    estimate_acceptance_probability,
    gibbs_resample,
    propose_resample,
    sample_avoiding_rejection,
    strong_gibbs_check,
)
from .rmt import largest_eigenvalue_tridiagonal, sample_tw_gue
from .rng import RngSeed, as_generator

__version__ = "0.1.0"
