"""Scalar variance recursions for agents and the CNA, and the single-aid cost.

All system matrices in the underlying Kalman filter are multiples of the
identity, so every covariance stays ``nu * I`` and the filter collapses to
scalar arithmetic. :func:`matrix_kf_oracle` runs the full 2x2 filter and is
kept only to cross-check that shortcut.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class NoiseParams:
    """Noise and timing constants. Defaults are the reference mission values.

    Attributes
    ----------
    nu_w : float
        Agent process variance per step [LU^2].
    nu_c : float
        CNA process variance per step [LU^2].
    nu_y : float
        Constant part of the aiding measurement variance [LU^2].
    nu_G : float
        CNA variance at start and right after a GPS fix [LU^2].
    surface_steps : int
        Steps spent surfacing (M).
    dt : float
        Timestep [TU].
    """

    nu_w: float = 1.0
    nu_c: float = 0.1
    nu_y: float = 10.0
    nu_G: float = 10.0
    surface_steps: int = 60
    dt: float = 1.0

    def __post_init__(self):
        for name in ("nu_w", "nu_c", "nu_y", "nu_G"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if int(self.surface_steps) != self.surface_steps or self.surface_steps < 0:
            raise ValueError(f"surface_steps must be a non-negative integer, got {self.surface_steps}")
        object.__setattr__(self, "surface_steps", int(self.surface_steps))
        if not math.isfinite(self.dt) or self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.nu_c > self.nu_w:
            warnings.warn(
                f"CNA process variance {self.nu_c} exceeds agent process variance {self.nu_w}",
                stacklevel=2,
            )


def posterior_variance(nu_prior: float, nu_y: float, nu_cna: float) -> float:
    """Variance after one position fix with noise variance ``nu_y + nu_cna``."""
    if nu_prior < 0 or nu_y < 0 or nu_cna < 0:
        raise ValueError("variances must be >= 0")
    r = nu_y + nu_cna
    s = r + nu_prior
    if s == 0.0:
        return 0.0
    # (1 - gain) * prior with gain = prior / s, written without the cancellation
    return nu_prior * (r / s)


def agent_variance_trace(
    nu0: float,
    Z: Optional[int],
    nu_post: float,
    params: NoiseParams,
    T: int,
) -> np.ndarray:
    """Agent variance at steps ``0..T`` with at most one fix at step ``Z``.

    ``nu_post`` is the variance right after the fix; it is ignored when
    ``Z`` is None.
    """
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    k = np.arange(T + 1, dtype=float)
    if Z is None:
        return nu0 + k * params.nu_w
    if not 0 <= Z <= T:
        raise ValueError(f"aiding step Z={Z} outside [0, {T}]")
    if nu_post < 0:
        raise ValueError("nu_post must be >= 0")
    return np.where(k < Z, nu0 + k * params.nu_w, nu_post + (k - Z) * params.nu_w)


def cna_variance_at(k: int, S: Optional[int], params: NoiseParams) -> float:
    """CNA variance at step ``k`` given an optional surfacing start ``S``."""
    if S is not None and k >= S + params.surface_steps:
        return params.nu_G + (k - (S + params.surface_steps)) * params.nu_c
    return params.nu_G + k * params.nu_c


def cna_variance_trace(S: Optional[int], params: NoiseParams, T: int) -> np.ndarray:
    """CNA variance at steps ``0..T``; the GPS reset lands at step ``S + M``."""
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    k = np.arange(T + 1, dtype=float)
    if S is None:
        return params.nu_G + k * params.nu_c
    end = S + params.surface_steps
    if S < 0 or end > T:
        raise ValueError(f"surfacing [{S}, {end}] does not fit in horizon {T}")
    return np.where(k < end, params.nu_G + k * params.nu_c, params.nu_G + (k - end) * params.nu_c)


def _agent_cost(nu0: float, Z: int, nu_cna: float, params: NoiseParams, T: int) -> float:
    # closed form of the trace average; no argument checks (hot path)
    nu_w = params.nu_w
    nu_zz = posterior_variance(nu0 + Z * nu_w, params.nu_y, nu_cna)
    return nu_w * T / 2.0 + (
        Z * nu0 + (nu_zz - Z * nu_w) * (T + 1) - nu_zz * Z + nu_w * Z * Z
    ) / (T + 1)


def agent_cost(nu0: float, Z: int, nu_cna_at_Z: float, params: NoiseParams, T: int) -> float:
    """Time-averaged variance of one agent aided once at step ``Z``.

    Equal to ``agent_variance_trace(...).mean()`` with the post-fix
    variance from :func:`posterior_variance`, but evaluated in closed form.
    """
    if not 1 <= Z <= T:
        raise ValueError(f"aiding step Z={Z} outside [1, {T}]")
    return _agent_cost(nu0, Z, nu_cna_at_Z, params, T)


def optimal_aid_time(nu0: float, nu_cna: float, params: NoiseParams, T: int) -> float:
    """Continuous stationary point of the single-aid cost in ``Z``."""
    nu_w = params.nu_w
    if nu_w <= 0:
        raise ValueError("optimal aid time needs nu_w > 0; with nu_w = 0 the cost is monotone in Z")
    zstar_beta = params.nu_y + nu_cna
    base = T * nu_w + nu0 + nu_w
    zstar_alpha = math.sqrt((base + zstar_beta) * (base + 9.0 * zstar_beta))
    return (zstar_alpha + (T + 1) * nu_w - 3.0 * nu0 - 3.0 * zstar_beta) / (4.0 * nu_w)


def optimal_aid_step(nu0: float, nu_cna: float, params: NoiseParams, T: int) -> int:
    """Integer aiding step in ``[1, T]`` minimizing :func:`agent_cost`.

    Compares the floor and ceiling of the continuous optimum (clipped to
    the horizon); ties go to the earlier step.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    z = optimal_aid_time(nu0, nu_cna, params, T)
    lo = min(max(math.floor(z), 1), T)
    hi = min(max(math.ceil(z), 1), T)
    if hi == lo:
        return lo
    j_lo = _agent_cost(nu0, lo, nu_cna, params, T)
    j_hi = _agent_cost(nu0, hi, nu_cna, params, T)
    return hi if j_hi < j_lo else lo


def max_cost(nu0: float, params: NoiseParams, T: int) -> float:
    """Average variance with no aiding at all."""
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    return nu0 + params.nu_w * T / 2.0


def min_cost(nu0: float, params: NoiseParams, T: int) -> float:
    """Best single-aid cost, with the CNA at its post-fix variance."""
    if params.nu_w == 0:
        # cost is non-decreasing in Z; earliest aid is best
        return _agent_cost(nu0, 1, params.nu_G, params, T)
    z = optimal_aid_step(nu0, params.nu_G, params, T)
    return _agent_cost(nu0, z, params.nu_G, params, T)


def min_cost_remaining(nu0: float, k: int, params: NoiseParams, T: int) -> float:
    """Lower bound on the single-aid cost if the agent is still unaided at step ``k``."""
    if not 0 <= k <= T:
        raise ValueError(f"step k={k} outside [0, {T}]")
    z = 1 if params.nu_w == 0 else optimal_aid_step(nu0, params.nu_G, params, T)
    if k <= z:
        return _agent_cost(nu0, z, params.nu_G, params, T)
    return _agent_cost(nu0, k, params.nu_G, params, T)


def cost_bounds(agents: Sequence, params: NoiseParams, T: int) -> tuple[float, float]:
    """Agent-averaged lower and upper bounds on the mission cost.

    ``agents`` is any sequence of objects with an ``nu0`` attribute.
    """
    if len(agents) == 0:
        raise ValueError("cost_bounds needs at least one agent")
    lower = math.fsum(min_cost(a.nu0, params, T) for a in agents) / len(agents)
    upper = math.fsum(max_cost(a.nu0, params, T) for a in agents) / len(agents)
    return lower, upper


def matrix_kf_oracle(
    nu0: float,
    schedule: Iterable[int],
    params: NoiseParams,
    T: int,
    surface_step: Optional[int] = None,
) -> list[np.ndarray]:
    """Full 2x2 covariance filter for one agent, for cross-checking.

    The CNA covariance is propagated alongside as a matrix (including the
    GPS reset after surfacing) and enters the measurement noise at the aid.

    Parameters
    ----------
    nu0 : float
        Initial agent variance.
    schedule : iterable of int
        Aiding steps for this agent; at most one.
    surface_step : int, optional
        Step at which the CNA starts surfacing.

    Returns
    -------
    list of ndarray
        ``P[k|k]`` for ``k = 0..T``.
    """
    steps = list(schedule)
    if len(steps) > 1:
        raise ValueError(f"agent aided more than once: {steps}")
    aid = steps[0] if steps else None
    if aid is not None and not 1 <= aid <= T:
        raise ValueError(f"aiding step {aid} outside [1, {T}]")

    eye = np.eye(2)
    F = G = H = eye  # noqa: F841  (G only drives the mean)
    Q = params.nu_w * eye
    Qc = params.nu_c * eye
    reset = None if surface_step is None else surface_step + params.surface_steps

    P = nu0 * eye
    Pc = params.nu_G * eye
    out = [P.copy()]
    for k in range(1, T + 1):
        Pc = F @ Pc @ F.T + Qc
        if reset is not None and k == reset:
            Pc = params.nu_G * eye
        P_pred = F @ P @ F.T + Q
        if k == aid:
            R = params.nu_y * eye + Pc
            S = R + H @ P_pred @ H.T
            if np.all(S == 0):
                K = np.zeros((2, 2))
            else:
                K = P_pred @ H.T @ np.linalg.inv(S)
            P = (eye - K @ H) @ P_pred
        else:
            P = P_pred
        out.append(P)
    return out
