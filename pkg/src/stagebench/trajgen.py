"""Scan reference trajectory: trapezoidal-velocity strokes with dwells.

One cycle is dwell at 0, forward stroke to ``scan_length``, dwell, return
stroke back to 0, repeated ``cycles`` times.  Each stroke ramps at
``accel_limit`` to ``scan_velocity``, cruises, and ramps back down.  The
position is continuous and C1 everywhere; acceleration is piecewise
constant with jumps at phase boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ScanProfile:
    scan_length: float = 0.04     # m
    scan_velocity: float = 0.032  # m/s
    accel_limit: float = 1.0      # m/s^2
    dwell: float = 0.1            # s
    cycles: int = 2

    def __post_init__(self):
        if self.scan_length <= 0.0:
            raise ValueError("scan_length must be > 0")
        if self.scan_velocity <= 0.0:
            raise ValueError("scan_velocity must be > 0")
        if self.accel_limit <= 0.0:
            raise ValueError("accel_limit must be > 0")
        if self.dwell < 0.0:
            raise ValueError("dwell must be >= 0")
        if self.cycles < 0:
            raise ValueError("cycles must be >= 0")
        if self.cruise_distance < 0.0:
            raise ValueError(
                "profile has no cruise phase: scan_length < scan_velocity^2/accel_limit")

    @property
    def t_accel(self) -> float:
        return self.scan_velocity / self.accel_limit

    @property
    def cruise_distance(self) -> float:
        return self.scan_length - self.scan_velocity**2 / self.accel_limit

    @property
    def t_cruise(self) -> float:
        return self.cruise_distance / self.scan_velocity

    @property
    def stroke_time(self) -> float:
        """Dwell plus one full move (ramp, cruise, ramp)."""
        return self.dwell + 2.0 * self.t_accel + self.t_cruise

    @property
    def cycle_time(self) -> float:
        return 2.0 * self.stroke_time


@dataclass(frozen=True)
class RefSample:
    r: float       # m
    r_dot: float   # m/s
    r_ddot: float  # m/s^2
    t: float       # s


def duration(profile: ScanProfile) -> float:
    """Total episode length for the configured number of cycles."""
    return profile.cycles * profile.cycle_time


def _stroke(profile: ScanProfile, tau: float, start: float, sign: float):
    """Reference within one stroke-local time tau in [0, stroke_time)."""
    a = profile.accel_limit
    vs = profile.scan_velocity
    L = profile.scan_length
    td = profile.dwell
    ta = profile.t_accel
    tc = profile.t_cruise
    end = start + sign * L
    if tau < td:
        return start, 0.0, 0.0
    tau -= td
    if tau < ta:
        return (start + sign * 0.5 * a * tau * tau, sign * a * tau, sign * a)
    if tau < ta + tc:
        d_acc = 0.5 * a * ta * ta
        return (start + sign * (d_acc + vs * (tau - ta)), sign * vs, 0.0)
    # deceleration; anchored at the stroke end so the endpoint is exact
    rem = (ta + tc + ta) - tau
    return (end - sign * 0.5 * a * rem * rem, sign * a * rem, -sign * a)


def ref_at(profile: ScanProfile, t: float) -> RefSample:
    """Reference sample at time t; holds the final rest state past the last cycle."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    total = duration(profile)
    if profile.cycles == 0 or t >= total:
        return RefSample(0.0, 0.0, 0.0, t)
    tau = t % profile.cycle_time
    if tau < profile.stroke_time:
        r, v, a = _stroke(profile, tau, 0.0, 1.0)
    else:
        r, v, a = _stroke(profile, tau - profile.stroke_time, profile.scan_length, -1.0)
    return RefSample(r, v, a, t)


def stroke_windows(profile: ScanProfile) -> list[tuple[float, float]]:
    """Time windows [start, end) of every stroke (dwell included), in order."""
    out = []
    ts = profile.stroke_time
    for c in range(profile.cycles):
        base = c * profile.cycle_time
        out.append((base, base + ts))
        out.append((base + ts, base + 2.0 * ts))
    return out
