"""Discrete-time model of the linear-motor wafer stage.

Dynamics (acceleration form):

    p_ddot = A_nom*(1 + delta_a)*v + B_nom*(1 + delta_b)*u + d

where ``u`` is the drive current and ``d`` is the generalized disturbance:
an external term plus a position-periodic force-ripple surrogate plus an
optional Coulomb friction term.  Integration is classical fixed-step RK4
with the control held constant over the step (zero-order hold).

Units: position m, velocity m/s, current A, disturbances m/s^2.
Note: the external sinusoidal disturbance amplitude is interpreted in
generalized-disturbance units (m/s^2); the benchmark default of 0.03 is
applied in these units.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import math


@dataclass(frozen=True)
class PlantParams:
    """Nominal stage parameters plus the true (hidden) uncertainty terms."""

    a_nom: float = -1.092      # viscous term, 1/s
    b_nom: float = 3.9124      # current-to-acceleration gain, m/(s^2*A)
    delta_a: float = 0.0       # relative error on a_nom, |.| < 1
    delta_b: float = 0.0       # relative error on b_nom, |.| < 1
    ripple_amp: float = 0.0    # force-ripple surrogate amplitude, m/s^2
    ripple_period: float = 0.01   # spatial period of the ripple, m
    coulomb_amp: float = 0.0   # Coulomb friction level, m/s^2 (off by default)

    def __post_init__(self):
        if self.b_nom == 0.0:
            raise ValueError("b_nom must be nonzero")
        if 1.0 + self.delta_b == 0.0:
            raise ValueError("1 + delta_b must be nonzero (control gain vanishes)")
        if abs(self.delta_a) >= 1.0 or abs(self.delta_b) >= 1.0:
            raise ValueError("uncertainty magnitudes must be < 1")
        if self.ripple_period <= 0.0:
            raise ValueError("ripple_period must be positive")
        if self.ripple_amp < 0.0 or self.coulomb_amp < 0.0:
            raise ValueError("ripple_amp and coulomb_amp must be >= 0")


@dataclass(frozen=True)
class PlantState:
    p: float = 0.0
    v: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class DisturbanceSpec:
    """External disturbance injected at the acceleration level."""

    kind: str = "none"         # "none" or "sinusoid"
    amplitude: float = 0.0     # m/s^2
    frequency: float = 0.0     # Hz

    def __post_init__(self):
        if self.kind not in ("none", "sinusoid"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be >= 0")
        if self.kind == "sinusoid" and self.frequency <= 0.0:
            raise ValueError("sinusoid frequency must be > 0")


def sample_disturbance(dist: DisturbanceSpec, t: float) -> float:
    """External disturbance value at time t, m/s^2."""
    if dist.kind == "none":
        return 0.0
    return dist.amplitude * math.sin(2.0 * math.pi * dist.frequency * t)


def internal_disturbance(params: PlantParams, p: float, v: float) -> float:
    """Ripple plus Coulomb contribution to the generalized disturbance."""
    d = 0.0
    if params.ripple_amp != 0.0:
        d += params.ripple_amp * math.sin(2.0 * math.pi * p / params.ripple_period)
    if params.coulomb_amp != 0.0:
        if v > 0.0:
            d -= params.coulomb_amp
        elif v < 0.0:
            d += params.coulomb_amp
    return d


def accel(params: PlantParams, state: PlantState, u: float, d_ext: float = 0.0) -> float:
    """Acceleration of the stage for the given state, current and external disturbance."""
    d = d_ext + internal_disturbance(params, state.p, state.v)
    return (params.a_nom * (1.0 + params.delta_a) * state.v
            + params.b_nom * (1.0 + params.delta_b) * u
            + d)


def _accel_raw(params: PlantParams, p: float, v: float, u: float, d_ext: float) -> float:
    return (params.a_nom * (1.0 + params.delta_a) * v
            + params.b_nom * (1.0 + params.delta_b) * u
            + d_ext + internal_disturbance(params, p, v))


def rk4_substeps(params: PlantParams, p: float, v: float, t: float, u: float,
                 dist: DisturbanceSpec, h: float, n: int) -> tuple[float, float, float]:
    """Advance (p, v, t) by n RK4 steps of size h with u held constant.

    Returns the new (p, v, t).  The external disturbance is sampled at the
    RK4 stage times; ripple and Coulomb terms at the stage states.
    """
    for _ in range(n):
        d0 = sample_disturbance(dist, t)
        dh = sample_disturbance(dist, t + 0.5 * h)
        d1 = sample_disturbance(dist, t + h)
        k1v = _accel_raw(params, p, v, u, d0)
        k1p = v
        p2 = p + 0.5 * h * k1p
        v2 = v + 0.5 * h * k1v
        k2v = _accel_raw(params, p2, v2, u, dh)
        k2p = v2
        p3 = p + 0.5 * h * k2p
        v3 = v + 0.5 * h * k2v
        k3v = _accel_raw(params, p3, v3, u, dh)
        k3p = v3
        p4 = p + h * k3p
        v4 = v + h * k3v
        k4v = _accel_raw(params, p4, v4, u, d1)
        k4p = v4
        p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t += h
    return p, v, t


def step(params: PlantParams, state: PlantState, u: float,
         dist: DisturbanceSpec = DisturbanceSpec(), h_phys: float = 1e-4) -> PlantState:
    """One RK4 step of size h_phys; non-finite u holds the state (caller flags the fault)."""
    if h_phys <= 0.0:
        raise ValueError("h_phys must be positive")
    if not math.isfinite(u):
        return state
    p, v, t = rk4_substeps(params, state.p, state.v, state.t, u, dist, h_phys, 1)
    return replace(state, p=p, v=v, t=t)
