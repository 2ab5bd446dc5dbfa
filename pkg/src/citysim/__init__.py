"""Co-evolution simulator: a trait-vector population and a society vector
shaping each other through matchmaking and gradient ascent."""

from .analysis import KMeansResult, PointSet, classical_mds, kmeans
from .core import (
    INDIVIDUAL_TRAITS,
    SOCIETY_TRAITS,
    CitySimError,
    ConfigurationError,
    ConsistencyError,
    EmptyPopulationError,
    InteractionMatrix,
    Person,
    Sex,
    TraitVector,
    happiness,
    mean_traits,
    total_happiness,
)
from .demographics import (
    DemographicsParams,
    born,
    born_batch,
    expected_child,
    lifespan,
    mating_gap,
    mating_success_threshold,
)
from .engine import (
    MatchingConfig,
    PopulationGroup,
    SimConfig,
    TimeSeriesLog,
    init_population,
    named_stream,
    run,
    write_run_outputs,
)
from .equilibrium import (
    BimatrixGame,
    DegeneracyReport,
    Equilibrium,
    pure_nash,
    support_enumeration,
    support_enumeration_report,
    verify_equilibrium,
)
from .matching import (
    MatchMode,
    MatchPlan,
    MatchWeights,
    build_weights,
    expected_pair_weights,
    grid_distances,
    plan_matings,
    rank_pair_indices,
    solve_assignment,
)
from .presets import PRESETS, get_preset, preset_names
from .scenario import (
    Scenario,
    dump_scenario,
    load_scenario,
    normalize_scenario,
    scenario_from_mapping,
)
from .society import (
    LearningRateSchedule,
    effective_lambda,
    effective_lambda_value,
    society_gradient,
    society_update,
)

__version__ = "0.1.0"

__all__ = [
    "INDIVIDUAL_TRAITS",
    "SOCIETY_TRAITS",
    "PRESETS",
    "BimatrixGame",
    "CitySimError",
    "ConfigurationError",
    "ConsistencyError",
    "DegeneracyReport",
    "DemographicsParams",
    "EmptyPopulationError",
    "Equilibrium",
    "InteractionMatrix",
    "KMeansResult",
    "LearningRateSchedule",
    "MatchMode",
    "MatchPlan",
    "MatchWeights",
    "MatchingConfig",
    "Person",
    "PointSet",
    "PopulationGroup",
    "Scenario",
    "Sex",
    "SimConfig",
    "TimeSeriesLog",
    "TraitVector",
    "born",
    "born_batch",
    "build_weights",
    "classical_mds",
    "dump_scenario",
    "effective_lambda",
    "effective_lambda_value",
    "expected_child",
    "expected_pair_weights",
    "get_preset",
    "grid_distances",
    "happiness",
    "init_population",
    "kmeans",
    "lifespan",
    "load_scenario",
    "mating_gap",
    "mating_success_threshold",
    "mean_traits",
    "named_stream",
    "normalize_scenario",
    "plan_matings",
    "preset_names",
    "pure_nash",
    "rank_pair_indices",
    "run",
    "scenario_from_mapping",
    "society_gradient",
    "society_update",
    "solve_assignment",
    "support_enumeration",
    "support_enumeration_report",
    "total_happiness",
    "verify_equilibrium",
    "write_run_outputs",
]
