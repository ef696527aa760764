"""Randomized scenario generation and planner comparison runs."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kinematics import AgentSpec, CnaSpec, Vec2
from .planner import DEFAULT_BUDGET, PRESETS, BudgetExceeded, exhaustive_plan, greedy_plan
from .simulator import Scenario
from .uncertainty import NoiseParams, cost_bounds

RNG_ALGORITHM = "numpy.random.PCG64 seeded by SeedSequence(seed, spawn_key=(N, trial))"
STRATEGIES = ("interior", "boundary", "circle")
PLANNERS = ("G1", "G2", "G3", "G4", "exhaustive")


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo experiment settings.

    ``planners`` may contain the greedy presets ``G1``..``G4`` and
    ``exhaustive``; the latter reports two rows per trial
    (``exhaustive_best`` and ``exhaustive_worst``) and only runs for
    ``N <= exhaustive_n_cap``.
    """

    n_values: tuple[int, ...] = tuple(range(3, 15))
    trials: int = 100
    box_side: float = 1000.0
    strategies: tuple[str, ...] = STRATEGIES
    nu0_max: float = 3000.0
    seed: int = 0
    planners: tuple[str, ...] = PLANNERS
    exhaustive_n_cap: int = 7
    budget: int = DEFAULT_BUDGET
    circle_radius: Optional[float] = None  # defaults to box_side / 4
    noise: NoiseParams = field(default_factory=NoiseParams)
    t_max: float = 2000.0
    cna_speed: float = 1.0
    agent_speed: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(self, "planners", tuple(self.planners))
        if self.trials < 0 or any(n < 1 for n in self.n_values):
            raise ValueError("trials must be >= 0 and every N >= 1")
        bad = set(self.strategies) - set(STRATEGIES)
        if bad or not self.strategies:
            raise ValueError(f"unknown or empty strategies: {sorted(bad)}")
        bad = set(self.planners) - set(PLANNERS)
        if bad:
            raise ValueError(f"unknown planners: {sorted(bad)}")
        if not 0 < self.nu0_max:
            raise ValueError("nu0_max must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def radius(self) -> float:
        return self.box_side / 4 if self.circle_radius is None else self.circle_radius


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, N, trial), so scheduling order is irrelevant."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(n, trial))))


def _boundary_point(rng: np.random.Generator, L: float) -> tuple[float, float]:
    # uniform over the perimeter of the origin-centred box
    s = rng.uniform(0.0, 4.0 * L)
    side, u = int(s // L), s % L - L / 2
    h = L / 2
    return [(u, -h), (h, u), (-u, h), (-h, -u)][min(side, 3)]


def generate_scenario(
    strategy: str,
    N: int,
    L: float,
    rng: np.random.Generator,
    *,
    nu0_max: float = 3000.0,
    circle_radius: Optional[float] = None,
    noise: Optional[NoiseParams] = None,
    t_max: float = 2000.0,
    cna_speed: float = 1.0,
    agent_speed: float = 0.5,
) -> Scenario:
    """Random scenario with the CNA at the centre of an ``L x L`` box.

    ``interior``: uniform positions and headings. ``boundary``: uniform on
    the box edge, heading at the centre plus up to +-30 degrees.
    ``circle``: evenly spaced on a circle (radius ``L/4`` by default) whose
    centre is uniform on the box edge, all heading at the box centre.
    Initial variances are uniform on ``(0, nu0_max]``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    positions, headings = [], []
    if strategy == "interior":
        for _ in range(N):
            positions.append((rng.uniform(-L / 2, L / 2), rng.uniform(-L / 2, L / 2)))
            headings.append(rng.uniform(0.0, 2.0 * math.pi))
    elif strategy == "boundary":
        for _ in range(N):
            x, y = _boundary_point(rng, L)
            positions.append((x, y))
            headings.append(math.atan2(-y, -x) + math.radians(rng.uniform(-30.0, 30.0)))
    elif strategy == "circle":
        r = L / 4 if circle_radius is None else circle_radius
        cx, cy = _boundary_point(rng, L)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        heading = math.atan2(-cy, -cx)
        for j in range(N):
            a = phase + 2.0 * math.pi * j / N
            positions.append((cx + r * math.cos(a), cy + r * math.sin(a)))
            headings.append(heading)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    # (0, nu0_max]: flip the half-open interval of uniform()
    nu0 = [nu0_max - rng.uniform(0.0, nu0_max) for _ in range(N)]
    agents = [
        AgentSpec(i + 1, Vec2(*positions[i]), headings[i] % (2.0 * math.pi), agent_speed, nu0[i])
        for i in range(N)
    ]
    return Scenario(agents, CnaSpec(Vec2(0.0, 0.0), cna_speed), noise or NoiseParams(), t_max)


def strategy_schedule(trials: int, strategies: Sequence[str]) -> list[str]:
    """Even split of trials over strategies; the remainder goes to the first."""
    base, extra = divmod(trials, len(strategies))
    out = []
    for j, s in enumerate(strategies):
        out += [s] * (base + (extra if j == 0 else 0))
    return out


@dataclass(frozen=True)
class TrialRow:
    N: int
    trial: int
    strategy: str
    planner: str
    status: str
    cost: float
    lower: float
    upper: float
    tasks: tuple[int, ...]
    plan_time: float


@dataclass(frozen=True)
class AggregateRow:
    N: int
    planner: str
    n_trials: int
    mean_cost: float
    mean_lower: float
    mean_upper: float
    mean_plan_time: float


@dataclass(frozen=True)
class McReport:
    config: McConfig
    rows: tuple[TrialRow, ...]
    aggregates: tuple[AggregateRow, ...]

    def aggregate(self, N: int, planner: str) -> AggregateRow:
        for a in self.aggregates:
            if a.N == N and a.planner == planner:
                return a
        raise KeyError((N, planner))


def run_trial(config: McConfig, N: int, trial: int, strategy: str) -> list[TrialRow]:
    rng = trial_rng(config.seed, N, trial)
    sc = generate_scenario(
        strategy,
        N,
        config.box_side,
        rng,
        nu0_max=config.nu0_max,
        circle_radius=config.radius,
        noise=config.noise,
        t_max=config.t_max,
        cna_speed=config.cna_speed,
        agent_speed=config.agent_speed,
    )
    lower, upper = cost_bounds(sc.agents, sc.noise, sc.horizon)
    rows = []

    def row(planner, status, cost, tasks, dt):
        return TrialRow(N, trial, strategy, planner, status, cost, lower, upper, tuple(tasks), dt)

    for name in config.planners:
        if name == "exhaustive":
            if N > config.exhaustive_n_cap:
                continue
            t0 = time.perf_counter()
            try:
                best, worst = exhaustive_plan(sc, budget=config.budget)
            except BudgetExceeded as exc:
                dt = time.perf_counter() - t0
                for p in ("exhaustive_best", "exhaustive_worst"):
                    rows.append(row(p, f"skipped: budget {exc.required}", math.nan, (), dt))
                continue
            dt = time.perf_counter() - t0
            rows.append(row("exhaustive_best", "ok", best.cost, best.tasks, dt))
            rows.append(row("exhaustive_worst", "ok", worst.cost, worst.tasks, dt))
        else:
            t0 = time.perf_counter()
            res = greedy_plan(sc, PRESETS[name])
            dt = time.perf_counter() - t0
            rows.append(row(name, "ok", res.cost, res.tasks, dt))
    return rows


def _run_trial_args(args):
    return run_trial(*args)


def aggregate(rows: Sequence[TrialRow]) -> tuple[AggregateRow, ...]:
    groups: dict[tuple[int, str], list[TrialRow]] = {}
    for r in rows:
        if r.status == "ok":
            groups.setdefault((r.N, r.planner), []).append(r)
    out = []
    for (N, planner), rs in sorted(groups.items()):
        n = len(rs)
        out.append(
            AggregateRow(
                N,
                planner,
                n,
                math.fsum(r.cost for r in rs) / n,
                math.fsum(r.lower for r in rs) / n,
                math.fsum(r.upper for r in rs) / n,
                math.fsum(r.plan_time for r in rs) / n,
            )
        )
    return tuple(out)


def run_experiment(config: McConfig, workers: int = 1) -> McReport:
    """Run every planner on every trial; results do not depend on ``workers``."""
    jobs = []
    for N in config.n_values:
        for trial, strategy in enumerate(strategy_schedule(config.trials, config.strategies)):
            jobs.append((config, N, trial, strategy))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_trial_args, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        chunks = [run_trial(*j) for j in jobs]
    rows = tuple(r for chunk in chunks for r in chunk)
    return McReport(config, rows, aggregate(rows))

