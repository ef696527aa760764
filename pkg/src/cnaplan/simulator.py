"""Turn a task sequence into a CNA path, variance traces and a mission cost.

Task ids: ``0`` surfaces the CNA, ``i >= 1`` intercepts and aids agent ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kinematics import AgentSpec, CnaSpec, Vec2, agent_position, discretize_arrival, solve_intercept
from .uncertainty import (
    NoiseParams,
    _agent_cost,
    agent_variance_trace,
    cna_variance_at,
    cna_variance_trace,
    max_cost,
    posterior_variance,
)

SURFACE = 0


@dataclass(frozen=True)
class Scenario:
    """Agents, CNA and mission constants.

    ``horizon`` is the number of steps T; ``t_max`` the mission time in TU.
    ``D`` caps the number of tasks and defaults to N + 1.
    """

    agents: tuple[AgentSpec, ...]
    cna: CnaSpec
    noise: NoiseParams = field(default_factory=NoiseParams)
    t_max: float = 2000.0
    horizon: Optional[int] = None
    D: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        ids = [a.id for a in self.agents]
        if sorted(ids) != list(range(1, len(ids) + 1)):
            raise ValueError(f"agent ids must be 1..N without gaps, got {ids}")
        if list(ids) != sorted(ids):
            object.__setattr__(self, "agents", tuple(sorted(self.agents, key=lambda a: a.id)))
        if not math.isfinite(self.t_max) or self.t_max < 0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")
        T = round(self.t_max / self.noise.dt)
        if self.horizon is None:
            object.__setattr__(self, "horizon", T)
        elif self.horizon != T:
            raise ValueError(f"horizon {self.horizon} != t_max / dt = {self.t_max / self.noise.dt}")
        if self.D is None:
            object.__setattr__(self, "D", len(self.agents) + 1)
        if not 0 <= self.D <= len(self.agents) + 1:
            raise ValueError(f"D={self.D} outside [0, N+1={len(self.agents) + 1}]")
        for a in self.agents:
            if a.speed >= self.cna.speed:
                raise ValueError(f"agent {a.id} speed {a.speed} >= CNA speed {self.cna.speed}")

    @property
    def N(self) -> int:
        return len(self.agents)

    def agent(self, i: int) -> AgentSpec:
        return self.agents[i - 1]


@dataclass(frozen=True)
class TaskSequence:
    """Ordered, duplicate-free task ids plus feasibility metadata.

    ``completion_time`` is in TU. For an infeasible sequence
    ``infeasible_index`` is the position of the first task that does not
    fit and ``overrun`` is by how many steps it misses the horizon.
    """

    tasks: tuple[int, ...]
    completion_time: float = 0.0
    feasible: bool = True
    infeasible_index: Optional[int] = None
    overrun: int = 0

    def __len__(self):
        return len(self.tasks)


@dataclass(frozen=True)
class MissionResult:
    sequence: TaskSequence
    cna_path: np.ndarray
    agent_traces: tuple[np.ndarray, ...]
    cna_trace: np.ndarray
    aiding_steps: dict[int, int]
    surfacing_step: Optional[int]
    cost: float

    @property
    def cost_J(self) -> float:
        return 2.0 * self.cost


@dataclass
class _State:
    # mutable cursor shared by run_mission and the planners
    k: int
    pos: Vec2
    S: Optional[int] = None


def validate_tasks(scenario: Scenario, tasks: Sequence[int]) -> tuple[int, ...]:
    tasks = tuple(int(t) for t in tasks)
    if len(set(tasks)) != len(tasks):
        raise ValueError(f"duplicate task ids in {tasks}")
    bad = [t for t in tasks if not 0 <= t <= scenario.N]
    if bad:
        raise ValueError(f"task ids {bad} outside [0, {scenario.N}]")
    return tasks


def aid_step(scenario: Scenario, state: _State, agent: AgentSpec):
    """Intercept ``agent`` from ``state``; returns (aiding step, position there, solution).

    The aiding step is at least 1 so every fix follows a prediction step.
    """
    dt = scenario.noise.dt
    here = agent_position(agent, state.k, dt)
    sol = solve_intercept(state.pos, scenario.cna.speed, here, agent.heading, agent.speed)
    Z = max(discretize_arrival(sol.tau, state.k, dt), 1)
    return Z, agent_position(agent, Z, dt), sol


def aided_cost(scenario: Scenario, agent: AgentSpec, Z: int, S: Optional[int]) -> float:
    """Average variance of ``agent`` when aided at step ``Z`` with surfacing history ``S``."""
    nu_c = cna_variance_at(Z, S, scenario.noise)
    return _agent_cost(agent.nu0, Z, nu_c, scenario.noise, scenario.horizon)


def no_aid_costs(scenario: Scenario) -> list[float]:
    return [max_cost(a.nu0, scenario.noise, scenario.horizon) for a in scenario.agents]


def combine_costs(per_agent: Sequence[float]) -> float:
    """Mission cost J' from per-agent averages; exact summation keeps it order-free."""
    return math.fsum(per_agent) / len(per_agent) if per_agent else 0.0


@dataclass(frozen=True)
class _Outcome:
    sequence: TaskSequence
    per_agent: tuple[float, ...]
    aiding_steps: dict[int, int]
    surfacing_step: Optional[int]
    legs: tuple  # (task, start step, end step, start pos, end pos, heading)


def execute(scenario: Scenario, tasks: Sequence[int]) -> _Outcome:
    """Walk the task list without building traces."""
    tasks = validate_tasks(scenario, tasks)
    T = scenario.horizon
    M = scenario.noise.surface_steps
    state = _State(0, scenario.cna.start)
    per_agent = no_aid_costs(scenario)
    aiding: dict[int, int] = {}
    legs = []
    bad_index, overrun = None, 0
    for idx, task in enumerate(tasks):
        if task == SURFACE:
            end = state.k + M
            if end > T:
                bad_index, overrun = idx, end - T
                break
            legs.append((SURFACE, state.k, end, state.pos, state.pos, None))
            state.S = state.k
            state.k = end
        else:
            agent = scenario.agent(task)
            Z, there, sol = aid_step(scenario, state, agent)
            if Z > T:
                bad_index, overrun = idx, Z - T
                break
            legs.append((task, state.k, Z, state.pos, there, sol.heading))
            aiding[task] = Z
            per_agent[task - 1] = aided_cost(scenario, agent, Z, state.S)
            state.k, state.pos = Z, there
    seq = TaskSequence(
        tasks,
        completion_time=state.k * scenario.noise.dt,
        feasible=bad_index is None,
        infeasible_index=bad_index,
        overrun=overrun,
    )
    return _Outcome(seq, tuple(per_agent), aiding, state.S, tuple(legs))


def _cna_path(scenario: Scenario, legs) -> np.ndarray:
    T = scenario.horizon
    step = scenario.cna.speed * scenario.noise.dt
    path = np.empty((T + 1, 2))
    path[:] = scenario.cna.start
    last_k = 0
    for task, k0, k1, p0, p1, heading in legs:
        if task == SURFACE:
            path[k0:k1] = p0
        else:
            c, s = math.cos(heading), math.sin(heading)
            for j in range(k0 + 1, k1):
                path[j] = (p0.x + (j - k0) * step * c, p0.y + (j - k0) * step * s)
        # the last step of a leg goes straight onto the agent (it is never longer than a full step)
        path[k1] = p1
        last_k = k1
    path[last_k:] = path[last_k]
    return path


def run_mission(scenario: Scenario, tasks: Sequence[int] | TaskSequence) -> MissionResult:
    """Simulate a task sequence over the whole horizon.

    An infeasible sequence is simulated up to (not including) the task
    that does not fit; ``result.sequence.feasible`` reports it.
    """
    if isinstance(tasks, TaskSequence):
        tasks = tasks.tasks
    out = execute(scenario, tasks)
    T = scenario.horizon
    noise = scenario.noise
    cna_trace = cna_variance_trace(out.surfacing_step, noise, T)
    traces = []
    for a in scenario.agents:
        Z = out.aiding_steps.get(a.id)
        if Z is None:
            traces.append(agent_variance_trace(a.nu0, None, 0.0, noise, T))
        else:
            post = posterior_variance(a.nu0 + Z * noise.nu_w, noise.nu_y, float(cna_trace[Z]))
            traces.append(agent_variance_trace(a.nu0, Z, post, noise, T))
    traces = tuple(traces)
    result = MissionResult(
        sequence=out.sequence,
        cna_path=_cna_path(scenario, out.legs),
        agent_traces=traces,
        cna_trace=cna_trace,
        aiding_steps=dict(out.aiding_steps),
        surfacing_step=out.surfacing_step,
        cost=0.0,
    )
    object.__setattr__(result, "cost", mission_cost(result))
    return result


def mission_cost(result: MissionResult) -> float:
    """J': mean over agents of each agent's time-averaged variance."""
    if not result.agent_traces:
        return 0.0
    return float(np.mean([tr.mean() for tr in result.agent_traces]))
