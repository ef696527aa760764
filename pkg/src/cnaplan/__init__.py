"""Path planning for a cooperative navigation aid that aids N agents in turn."""

__version__ = "0.1.0"

from .kinematics import AgentSpec, CnaSpec, InterceptSolution, Vec2, discretize_arrival, propagate_track, solve_intercept
from .planner import (
    PRESETS,
    BudgetExceeded,
    PlanResult,
    RewardWeights,
    count_sequences,
    evaluate_sequence,
    exhaustive_plan,
    greedy_plan,
)
from .simulator import MissionResult, Scenario, TaskSequence, mission_cost, run_mission
from .uncertainty import (
    NoiseParams,
    agent_cost,
    agent_variance_trace,
    cna_variance_trace,
    cost_bounds,
    matrix_kf_oracle,
    max_cost,
    min_cost_remaining,
    optimal_aid_step,
    optimal_aid_time,
    posterior_variance,
)
