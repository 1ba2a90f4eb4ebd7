"""Q-learning agents in the three-option ultimatum game.

Deterministic, seedable simulation of the two-player repeated game and
its ring-population extension, with the full observable layer (option
and state fractions, deal statistics, transition matrices and networks,
Q-table preferences), closed-form stationary values, and an experiment
CLI writing CSV plus metadata sidecars.
"""

from .core import (
    Agent,
    GameParams,
    Level,
    LearningParams,
    QTable,
    Role,
    SimState,
    deal_succeeds,
    init_qtable,
    payoff,
    q_update,
    select_action,
)
from .lattice import EdgeContext, LatticeConfig, lattice_fractions, lattice_step, run_lattice
from .metrics import (
    DealStats,
    EnsembleAverage,
    PreferenceStats,
    TransitionStats,
    deal_stats_update,
    ensemble_average,
    fractions,
    joint_probabilities,
    net_flow,
    preference_snapshot,
    transition_network,
)
from .rng import derive_seed, make_generator
from .theory import boundary_alpha, boundary_curve, fixed_points
from .two_player import RoleScheme, RoundRecord, RunConfig, run, run_reference, step

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "DealStats",
    "EdgeContext",
    "EnsembleAverage",
    "GameParams",
    "LatticeConfig",
    "LearningParams",
    "Level",
    "PreferenceStats",
    "QTable",
    "Role",
    "RoleScheme",
    "RoundRecord",
    "RunConfig",
    "SimState",
    "TransitionStats",
    "boundary_alpha",
    "boundary_curve",
    "deal_stats_update",
    "deal_succeeds",
    "derive_seed",
    "ensemble_average",
    "fixed_points",
    "fractions",
    "init_qtable",
    "joint_probabilities",
    "lattice_fractions",
    "lattice_step",
    "make_generator",
    "net_flow",
    "payoff",
    "preference_snapshot",
    "q_update",
    "run",
    "run_lattice",
    "run_reference",
    "select_action",
    "step",
    "transition_network",
]
