"""Catalan percolation: exact triangulation oracle, greedy and better ear
clipping, gambler's ruin analytics and a Monte Carlo harness."""

from .beca import (
    CompiledTable,
    MoveTable,
    bta,
    default_move_table,
    load_table,
    table_distribution,
    validate_table,
)
from .clip import GtaParams, TriangulationResult, geca_run, gta, list_length_walk
from .edges import EdgeSampler, ExplicitEdgeSet, materialize, mix64
from .harness import ExperimentConfig, TrialSummary, emit, estimate_p_half, run_trials
from .oracle import (
    Triangulation,
    can_triangulate,
    closure,
    enumerate_triangulations,
    validate_triangulation,
    witness,
)
from .ruin import (
    JumpDistribution,
    char_root,
    classical_ruin,
    drift,
    exact_absorption,
    feller_bounds,
    p_star,
)

__version__ = "0.1.0"
