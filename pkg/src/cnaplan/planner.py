"""Task-sequence planners: the greedy reward heuristic and exhaustive enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .simulator import (
    SURFACE,
    Scenario,
    TaskSequence,
    _State,
    aid_step,
    aided_cost,
    combine_costs,
    execute,
    no_aid_costs,
)
from .uncertainty import max_cost, min_cost_remaining

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    """Raised when exhaustive enumeration would need more sequences than allowed."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"exhaustive enumeration needs up to {required} sequences, budget is {budget}"
        )
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class RewardWeights:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        w = (self.alpha, self.beta, self.gamma)
        if any(not math.isfinite(v) or v < 0 for v in w):
            raise ValueError(f"reward weights must be finite and >= 0, got {w}")
        if not any(w):
            raise ValueError("reward weights cannot all be zero")


PRESETS = {
    "G1": RewardWeights(1.0, 0.0, 0.0),
    "G2": RewardWeights(0.0, 1.0, 0.0),
    "G3": RewardWeights(0.0, 0.0, 1.0),
    "G4": RewardWeights(1.0, 0.5, 0.5),
}


def parse_weights(text: str) -> RewardWeights:
    """``"G1".."G4"`` or ``"a,b,c"``."""
    key = text.strip().upper()
    if key in PRESETS:
        return PRESETS[key]
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"weights must be G1..G4 or 'alpha,beta,gamma', got {text!r}")
    return RewardWeights(*(float(p) for p in parts))


@dataclass(frozen=True)
class PlanResult:
    sequence: TaskSequence
    cost: float
    per_agent_costs: tuple[float, ...]
    aiding_steps: dict[int, int]
    surfacing_step: Optional[int]
    n_evaluated: Optional[int] = None

    @property
    def cost_J(self) -> float:
        return 2.0 * self.cost

    @property
    def tasks(self) -> tuple[int, ...]:
        return self.sequence.tasks


def evaluate_sequence(scenario: Scenario, tasks: Sequence[int] | TaskSequence) -> PlanResult:
    """Cost of a task sequence by re-simulating it from the start."""
    if isinstance(tasks, TaskSequence):
        tasks = tasks.tasks
    out = execute(scenario, tasks)
    return PlanResult(
        sequence=out.sequence,
        cost=combine_costs(out.per_agent),
        per_agent_costs=out.per_agent,
        aiding_steps=dict(out.aiding_steps),
        surfacing_step=out.surfacing_step,
    )


def count_sequences(n_tasks: int, max_len: int) -> int:
    """Ordered duplicate-free selections of length ``0..max_len`` from ``n_tasks`` items."""
    total, term = 0, 1
    for f in range(min(max_len, n_tasks) + 1):
        total += term
        term *= n_tasks - f
    return total


def candidate_rewards(scenario: Scenario, state: _State, candidates, weights: RewardWeights):
    """Score every candidate agent from the current CNA state.

    Returns ``(scores, unreachable)`` where ``scores`` maps agent id to
    ``(reward, Z, arrival position)``.
    """
    T = scenario.horizon
    noise = scenario.noise
    scores, unreachable = {}, []
    for i in candidates:
        agent = scenario.agent(i)
        Z, there, sol = aid_step(scenario, state, agent)
        if Z > T:
            unreachable.append(i)
            continue
        j_cand = aided_cost(scenario, agent, Z, state.S)
        j_max = max_cost(agent.nu0, noise, T)
        j_floor = min_cost_remaining(agent.nu0, state.k, noise, T)
        d_max = (j_max - j_cand) / j_max if j_max > 0 else 0.0
        # penalty for aiding away from the best achievable time; >= 0
        d_opt = (j_cand - j_floor) / j_cand if j_cand > 0 else 0.0
        transit = sol.tau / scenario.t_max if scenario.t_max > 0 else 0.0
        r = weights.alpha * d_max - weights.beta * d_opt - weights.gamma * transit
        scores[i] = (r, Z, there)
    return scores, unreachable


def greedy_plan(scenario: Scenario, weights: RewardWeights, D: Optional[int] = None) -> PlanResult:
    """Greedy task sequence with a surfacing post-pass.

    Agents are added one at a time by highest reward. Afterwards a single
    surfacing task is tried at every insertion point (if the sequence is
    shorter than ``D``) or in place of every agent task (if it is full),
    and the cheapest simulated variant wins, the unmodified sequence
    included.
    """
    D = scenario.D if D is None else D
    if not 0 <= D <= scenario.N + 1:
        raise ValueError(f"D={D} outside [0, N+1]")
    state = _State(0, scenario.cna.start)
    remaining = [a.id for a in scenario.agents]
    seq: list[int] = []
    while len(seq) < min(D, scenario.N) and remaining:
        scores, unreachable = candidate_rewards(scenario, state, remaining, weights)
        for i in unreachable:
            remaining.remove(i)
        if not scores:
            break
        best = None
        for i in sorted(scores):
            if best is None or scores[i][0] > scores[best][0]:
                best = i
        _, Z, there = scores[best]
        seq.append(best)
        remaining.remove(best)
        state.k, state.pos = Z, there

    variants = [list(seq)]
    if len(seq) < D:
        variants += [seq[:j] + [SURFACE] + seq[j:] for j in range(len(seq) + 1)]
    else:
        variants += [seq[:j] + [SURFACE] + seq[j + 1:] for j in range(len(seq))]

    chosen = None
    for v in variants:
        res = evaluate_sequence(scenario, v)
        if res.sequence.feasible and (chosen is None or res.cost < chosen.cost):
            chosen = res
    return chosen


def exhaustive_plan(
    scenario: Scenario,
    D: Optional[int] = None,
    budget: Optional[int] = DEFAULT_BUDGET,
    prune: bool = True,
) -> tuple[PlanResult, PlanResult]:
    """Best and worst feasible sequences by full enumeration.

    Every ordered duplicate-free selection of tasks ``{0..N}`` with at most
    ``D`` entries is costed, the empty sequence included. A prefix that
    already overruns the horizon cuts off all of its extensions unless
    ``prune`` is False (then each extension is still visited and
    rejected). Ties keep the sequence visited first (depth-first, lower ids
    first).

    Returns
    -------
    (best, worst) : tuple of PlanResult
        Both carry ``n_evaluated``, the number of feasible sequences costed.
    """
    D = scenario.D if D is None else D
    if not 0 <= D <= scenario.N + 1:
        raise ValueError(f"D={D} outside [0, N+1]")
    required = count_sequences(scenario.N + 1, D)
    if budget is not None and required > budget:
        raise BudgetExceeded(required, budget)

    T = scenario.horizon
    M = scenario.noise.surface_steps
    n = scenario.N
    per_agent = no_aid_costs(scenario)
    used = [False] * (n + 1)
    prefix: list[int] = []
    best = [math.inf, ()]
    worst = [-math.inf, ()]
    count = [0]

    def visit():
        cost = combine_costs(per_agent)
        count[0] += 1
        if cost < best[0]:
            best[0], best[1] = cost, tuple(prefix)
        if cost > worst[0]:
            worst[0], worst[1] = cost, tuple(prefix)

    def extend(state: _State, feasible: bool):
        if feasible:
            visit()
        if len(prefix) == D:
            return
        for task in range(n + 1):
            if used[task]:
                continue
            if task == SURFACE:
                end = state.k + M
                ok = feasible and end <= T
                if not ok and prune:
                    continue
                nxt = _State(end, state.pos, state.k)
                saved = None
            else:
                agent = scenario.agents[task - 1]
                Z, there, _ = aid_step(scenario, state, agent)
                ok = feasible and Z <= T
                if not ok and prune:
                    continue
                nxt = _State(Z, there, state.S)
                saved = per_agent[task - 1]
                if ok:
                    per_agent[task - 1] = aided_cost(scenario, agent, Z, state.S)
            used[task] = True
            prefix.append(task)
            extend(nxt, ok)
            prefix.pop()
            used[task] = False
            if saved is not None:
                per_agent[task - 1] = saved

    extend(_State(0, scenario.cna.start), True)

    results = []
    for seq in (best[1], worst[1]):
        r = evaluate_sequence(scenario, seq)
        results.append(
            PlanResult(r.sequence, r.cost, r.per_agent_costs, r.aiding_steps, r.surfacing_step, count[0])
        )
    return results[0], results[1]
