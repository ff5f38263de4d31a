"""Network protection game: mechanics, solvers, agents, sessions, statistics."""

from .game import (
    Action,
    BallBox,
    GameError,
    GameParameters,
    Position,
    Topology,
    Treatment,
    apply_profile,
    default_topology,
    expected_payoff,
    initial_box,
    loss_probability,
    realize_round,
)
from .equilibrium import SolverReport, UtilitySpec, best_responses, enumerate_profiles, pure_nash, social_optimum
from .agents import AgentSpec, Observation, choice_probabilities, decide
from .engine import HumanSeat, RoundRecord, SessionConfig, batch, run_session
from .refdata import ChoiceCounts, reference_counts, round1_degree_counts
from .stats import (
    ComparisonResult,
    clustered_comparison,
    proportions,
    reproduce_tables,
    two_proportion_test,
)

__version__ = "0.1.0"
