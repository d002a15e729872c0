"""Generalised (gap) diffusions with a prescribed law at an exponential time.

Pipeline: a probability measure (atoms + constant-density segments) yields a
potential profile, the profile yields a speed measure, and the speed measure
drives three interchangeable realizations of the diffusion — an exact
birth-death chain (atomic case), an SDE (density case), and a local-time
random walk (general case) — all of which put the original measure back as
the law at an independent exponential time.
"""

from .chain import (
    BirthDeathChain,
    build_chain,
    exact_law,
    simulate_chain,
    simulate_chain_batch,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .measure import (
    Atom,
    Measure,
    PotentialProfile,
    Segment,
    atomic_measure,
    discretize_density,
    excess_potential,
    measure_from_dict,
    measure_to_dict,
    potential,
    potential_profile,
    truncate_measure,
    uniform_measure,
    validate_measure,
    vhat_ratio,
)
from .resolvent import check_main_identity, green_function, solve_eigenfunctions
from .speed import (
    BoundaryClass,
    SpeedMeasure,
    build_speed_measure,
    classify_boundary,
    scale_for_rate,
    sigma_m,
)
from .stats import EmpiricalLaw, ks_distance, tv_atomic, wasserstein1

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "BirthDeathChain",
    "BoundaryClass",
    "DEFAULT_TOLERANCES",
    "EmpiricalLaw",
    "Measure",
    "PotentialProfile",
    "Segment",
    "SpeedMeasure",
    "Tolerances",
    "atomic_measure",
    "build_chain",
    "build_speed_measure",
    "check_main_identity",
    "classify_boundary",
    "discretize_density",
    "exact_law",
    "excess_potential",
    "green_function",
    "ks_distance",
    "measure_from_dict",
    "measure_to_dict",
    "potential",
    "potential_profile",
    "scale_for_rate",
    "sigma_m",
    "simulate_chain",
    "simulate_chain_batch",
    "solve_eigenfunctions",
    "truncate_measure",
    "tv_atomic",
    "uniform_measure",
    "validate_measure",
    "vhat_ratio",
    "wasserstein1",
    "__version__",
]
