"""Constant-bearing intercepts and straight-line agent tracks.

Both vehicles move at constant speed in the plane. The CNA picks a single
heading that brings it onto the agent's path at the same instant the agent
gets there; with the CNA strictly faster than the agent that heading always
exists and is unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# |theta_i - phi| below this (mod 2*pi) is treated as a tail chase or head-on
DEGENERATE_ANGLE_TOL = 1e-9
# absorbs float noise in tau/dt before taking the ceiling
ARRIVAL_STEP_TOL = 1e-9


class Vec2(NamedTuple):
    x: float
    y: float


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.remainder(angle, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class AgentSpec:
    """Nominal initial state of one agent.

    Attributes
    ----------
    id : int
        Positive agent id (task id used by the planners).
    start : Vec2
        Position at step 0 [LU].
    heading : float
        Travel direction [rad].
    speed : float
        Speed [LU/TU], strictly positive.
    nu0 : float
        Initial scalar position variance [LU^2].
    """

    id: int
    start: Vec2
    heading: float
    speed: float
    nu0: float

    def __post_init__(self):
        object.__setattr__(self, "start", Vec2(float(self.start[0]), float(self.start[1])))
        if not isinstance(self.id, (int, np.integer)) or self.id < 1:
            raise ValueError(f"agent id must be a positive integer, got {self.id!r}")
        if not all(math.isfinite(v) for v in (*self.start, self.heading, self.speed, self.nu0)):
            raise ValueError(f"agent {self.id}: non-finite field")
        if self.speed <= 0:
            raise ValueError(f"agent {self.id}: speed must be > 0, got {self.speed}")
        if self.nu0 < 0:
            raise ValueError(f"agent {self.id}: initial variance must be >= 0, got {self.nu0}")


@dataclass(frozen=True)
class CnaSpec:
    start: Vec2
    speed: float

    def __post_init__(self):
        object.__setattr__(self, "start", Vec2(float(self.start[0]), float(self.start[1])))
        if not all(math.isfinite(v) for v in (*self.start, self.speed)):
            raise ValueError("CNA: non-finite field")
        if self.speed <= 0:
            raise ValueError(f"CNA speed must be > 0, got {self.speed}")


@dataclass(frozen=True)
class InterceptSolution:
    """Result of :func:`solve_intercept`.

    ``beta_i`` is the interior angle at the agent, ``beta_c`` the one at the
    CNA and ``alpha`` the one at the intercept point.
    """

    heading: float
    tau: float
    point: Vec2
    beta_i: float
    beta_c: float
    alpha: float
    distance: float


def solve_intercept(
    cna_pos: tuple[float, float],
    cna_speed: float,
    agent_pos: tuple[float, float],
    agent_heading: float,
    agent_speed: float,
) -> InterceptSolution:
    """Minimum-time constant-heading intercept of a moving agent.

    Parameters
    ----------
    cna_pos, agent_pos : (x, y)
        Current positions [LU].
    cna_speed, agent_speed : float
        Speeds [LU/TU]; ``cna_speed`` must exceed ``agent_speed``.
    agent_heading : float
        Agent travel direction [rad].

    Returns
    -------
    InterceptSolution
        CNA heading, time to intercept ``tau`` and the intercept point.
    """
    xc, yc = float(cna_pos[0]), float(cna_pos[1])
    xa, ya = float(agent_pos[0]), float(agent_pos[1])
    vals = (xc, yc, xa, ya, cna_speed, agent_speed, agent_heading)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("solve_intercept: non-finite input")
    if agent_speed < 0:
        raise ValueError("solve_intercept: agent speed must be >= 0")
    if cna_speed <= agent_speed:
        raise ValueError(
            f"intercept not guaranteed: CNA speed {cna_speed} <= agent speed {agent_speed}"
        )

    dx, dy = xa - xc, ya - yc
    d = math.hypot(dx, dy)
    if d == 0.0:
        return InterceptSolution(agent_heading, 0.0, Vec2(xa, ya), 0.0, 0.0, math.pi, 0.0)

    phi = math.atan2(dy, dx)
    rel = wrap_angle(agent_heading - phi)
    abs_rel = abs(rel)

    if abs_rel <= DEGENERATE_ANGLE_TOL:
        # agent running directly away
        tau = d / (cna_speed - agent_speed)
        heading, beta_i, beta_c, alpha = agent_heading, math.pi, 0.0, 0.0
    elif abs_rel >= math.pi - DEGENERATE_ANGLE_TOL:
        # agent running straight at the CNA
        tau = d / (agent_speed + cna_speed)
        heading, beta_i, beta_c, alpha = phi, 0.0, 0.0, math.pi
    else:
        eta = agent_speed / cna_speed
        # angle between -phi and theta_i is pi - |rel|. Trig is taken from
        # whichever of |rel|, beta_i is small so beta_c and alpha stay
        # consistent with it near the degenerate branches.
        beta_i = math.pi - abs_rel
        if abs_rel < math.pi / 2:
            beta_c = math.asin(eta * math.sin(abs_rel))
            sin_alpha = math.sin(abs_rel - beta_c)
        else:
            beta_c = math.asin(eta * math.sin(beta_i))
            sin_alpha = math.sin(beta_i + beta_c)
        alpha = math.pi - beta_i - beta_c
        if agent_speed > 0:
            tau = d * math.sin(beta_c) / (agent_speed * sin_alpha)
        else:
            tau = d * math.sin(beta_i) / (cna_speed * sin_alpha)
        delta = 1.0 if rel >= 0 else -1.0
        heading = phi + delta * beta_c

    heading = wrap_angle(heading)
    px = xa + tau * agent_speed * math.cos(agent_heading)
    py = ya + tau * agent_speed * math.sin(agent_heading)
    return InterceptSolution(heading, tau, Vec2(px, py), beta_i, beta_c, alpha, d)


def agent_position(spec: AgentSpec, k: int, dt: float) -> Vec2:
    """Nominal position of an agent at step ``k``."""
    step = k * dt * spec.speed
    return Vec2(
        spec.start.x + step * math.cos(spec.heading),
        spec.start.y + step * math.sin(spec.heading),
    )


def propagate_track(spec: AgentSpec, horizon: int, dt: float) -> np.ndarray:
    """Noise-free straight-line track, shape ``(horizon + 1, 2)``."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    return np.array([agent_position(spec, k, dt) for k in range(horizon + 1)], dtype=float)


def discretize_arrival(tau: float, current_step: int, dt: float) -> int:
    """First step at or after a continuous arrival time ``tau``.

    The CNA's last motion step is shortened so it sits exactly on the agent
    at the returned step.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    return current_step + max(0, math.ceil(tau / dt - ARRIVAL_STEP_TOL))
