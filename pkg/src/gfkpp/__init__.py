"""Traveling-wave analysis for the generalized FKPP equation with
frequency-dependent diffusion and advection."""

from .errors import GfkppError
from .model import (
    Equilibrium,
    GfkppModel,
    PotentialFn,
    ReactionFn,
    apply_sym1,
    apply_sym2,
    cubic,
    equilibria,
    linearize,
    make_model,
    model_from_config,
    model_to_config,
    polynomial,
    quadratic,
    reaction_from_growth_rates,
    reaction_from_logistic,
    restrict_model,
)
from .pdesim import (
    FieldFrame,
    FrontTrace,
    Grid1D,
    consistency_deviation,
    measure_front_speed,
    simulate_gfkpp,
    simulate_two_species,
    smoothed_step,
)
from .shooting import (
    ManifoldSpec,
    PhasePoint,
    ShootResult,
    SeparatrixOrdering,
    section_gap,
    separatrix_compare,
    shoot,
)
from .speed import (
    CascadeNode,
    SpeedSet,
    TransitionResult,
    asymptotic_slope,
    cascade_speeds,
    classify_existence,
    closed_form_cubic,
    closed_form_quadratic,
    minimal_speed_numeric,
    pulled_speed,
    solve_speed_set,
    transition_scan,
    type_b_speed_set,
    unique_speed_bistable,
)

__version__ = "0.1.0"
