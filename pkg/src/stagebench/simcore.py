"""Fixed-step closed-loop engine: reference -> controller -> plant, with
runtime monitors for the sliding-state quadratic form and the convergence
region of the super-twisting family.

Each control tick samples the reference and the (optionally noisy) position,
asks the controller for a current, then advances the plant through
``h_ctrl / h_phys`` RK4 substeps with the current held (zero-order hold).
Episodes are deterministic functions of (config, seed); the seed only
matters when measurement noise is enabled.

Two flavors of the lumped uncertainty are logged per tick:

* ``f_true``   -- the exact term entering the sliding-variable drift,
                  a_nom*delta_a*v + b_nom*delta_b*u_applied + d.  This is the
                  quantity the neural compensator is trying to cancel and is
                  used for the region monitor and learning metrics.
* ``f_static``   -- the closed-form estimate from :func:`f_oracle`, which drops
                  the drift term and rescales the tail; kept as a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np

from .controllers import (
    FostaController,
    FostaGains,
    GainCheckResult,
    PidController,
    RbfNetwork,
    SmcController,
    convergence_bound,
    gain_check,
    phi1,
)
from .plant import (
    DisturbanceSpec,
    PlantParams,
    internal_disturbance,
    rk4_substeps,
    sample_disturbance,
)
from .trajgen import ScanProfile, duration, ref_at


# ---------------------------------------------------------------------------
# controller selection

@dataclass(frozen=True)
class PidSpec:
    kp: float = 8000.0
    ki: float = 80000.0
    kd: float = 320.0
    n_filter: float = 100.0

    kind = "pid"


@dataclass(frozen=True)
class SmcSpec:
    lam: float = 175.0
    k_s: float = 2.0
    phi_layer: float = 1e-4

    kind = "smc"


@dataclass(frozen=True)
class FostaSpec:
    gains: FostaGains = field(default_factory=FostaGains)

    kind = "fosta"


@dataclass(frozen=True)
class RbfSpec:
    centers_z: tuple = (-3.0, -1.0, 0.0, 1.0, 3.0)
    centers_zdot: tuple = (-7.0, -3.0, 0.0, 3.0, 7.0)
    widths: tuple = (50.0, 50.0, 50.0, 50.0, 50.0)
    w_max: float = 100.0


@dataclass(frozen=True)
class AnnFsaSpec:
    gains: FostaGains = field(default_factory=FostaGains)
    rbf: RbfSpec = field(default_factory=RbfSpec)

    kind = "annfsa"


ControllerSpec = PidSpec | SmcSpec | FostaSpec | AnnFsaSpec

CONTROLLER_LABELS = {"pid": "PID", "smc": "SMC", "fosta": "FOSTA", "annfsa": "ANN-FSA"}


def make_controller(spec: ControllerSpec, plant: PlantParams, h_ctrl: float,
                    u_max: float, n_mem: int):
    if isinstance(spec, PidSpec):
        return PidController(spec.kp, spec.ki, spec.kd, spec.n_filter,
                             h_ctrl=h_ctrl, u_max=u_max)
    if isinstance(spec, SmcSpec):
        return SmcController(spec.lam, spec.k_s, spec.phi_layer,
                             a_nom=plant.a_nom, b_nom=plant.b_nom,
                             h_ctrl=h_ctrl, u_max=u_max)
    if isinstance(spec, FostaSpec):
        return FostaController(spec.gains, a_nom=plant.a_nom, b_nom=plant.b_nom,
                               h_ctrl=h_ctrl, u_max=u_max, n_mem=n_mem)
    if isinstance(spec, AnnFsaSpec):
        net = RbfNetwork(np.column_stack([spec.rbf.centers_z, spec.rbf.centers_zdot]),
                         np.asarray(spec.rbf.widths), w_max=spec.rbf.w_max)
        return FostaController(spec.gains, a_nom=plant.a_nom, b_nom=plant.b_nom,
                               h_ctrl=h_ctrl, u_max=u_max, n_mem=n_mem, rbf=net)
    raise TypeError(f"unknown controller spec {spec!r}")


# ---------------------------------------------------------------------------
# configuration and trace

@dataclass(frozen=True)
class SimConfig:
    controller: ControllerSpec = field(default_factory=FostaSpec)
    plant: PlantParams = field(default_factory=PlantParams)
    dist: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    profile: ScanProfile = field(default_factory=ScanProfile)
    h_ctrl: float = 1e-3
    h_phys: float = 1e-4
    duration: float | None = None   # None: full profile duration
    seed: int = 0
    noise_std: float = 0.0          # position measurement noise, m
    n_mem: int = 2000
    u_max: float = 10.0
    oracle_compensation: bool = False   # replace u_nn by the exact-cancellation term
    transient_cutoff: float | None = None   # None: first stroke of the profile
    static_oracle_velocity_tail: bool = False

    def __post_init__(self):
        if self.h_ctrl <= 0.0 or self.h_phys <= 0.0:
            raise ValueError("h_ctrl and h_phys must be > 0")
        ratio = self.h_ctrl / self.h_phys
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ValueError("h_ctrl must be an integer multiple of h_phys")
        if self.duration is not None and self.duration < 0.0:
            raise ValueError("duration must be >= 0")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")

    @property
    def substeps(self) -> int:
        return round(self.h_ctrl / self.h_phys)

    def episode_duration(self) -> float:
        return self.duration if self.duration is not None else duration(self.profile)

    def transient_time(self) -> float:
        if self.transient_cutoff is not None:
            return self.transient_cutoff
        return self.profile.stroke_time


TRACE_COLUMNS = (
    "t", "r", "p", "v", "e", "z", "omega",
    "u_eq", "u_st", "u_nn", "u_total",
    "f_true", "f_static", "f_hat", "v_quad",
    "region_flag", "sat_flag", "clamp_flag", "fault_flag",
)


@dataclass
class SimTrace:
    """Per-tick log; one equal-length float array per column in TRACE_COLUMNS
    (flags stored as 0.0/1.0)."""

    data: dict
    h_ctrl: float
    controller_kind: str
    rho: float | None = None
    h1: float | None = None

    def __len__(self) -> int:
        return len(self.data["t"])

    def column(self, name: str) -> np.ndarray:
        return self.data[name]

    def truncate(self, n: int) -> None:
        for k in list(self.data):
            self.data[k] = self.data[k][:n]


@dataclass(frozen=True)
class MonitorReport:
    region_bound: float
    frac_outside_region_after_transient: float
    frac_vquad_increase_while_outside: float
    transient_cutoff: float
    bound_eps: float
    n_post_transient: int
    n_outside: int


@dataclass(frozen=True)
class FaultInfo:
    tick: int
    t: float
    reason: str


@dataclass
class EpisodeResult:
    cfg: SimConfig
    trace: SimTrace
    gain: GainCheckResult | None
    monitor: MonitorReport | None
    fault: FaultInfo | None
    sat_count: int
    clamp_count: int

    @property
    def faulted(self) -> bool:
        return self.fault is not None


# ---------------------------------------------------------------------------
# lumped-uncertainty oracles

def lumped_true(params: PlantParams, u_applied: float, v: float, d: float) -> float:
    """Exact lumped uncertainty entering the sliding-variable drift."""
    return (params.a_nom * params.delta_a * v
            + params.b_nom * params.delta_b * u_applied
            + d)


def f_oracle(params: PlantParams, gains: FostaGains, r_ddot: float,
             frac_der_val: float, e_dot: float, v: float, d: float,
             pdot_corrected: bool = False) -> float:
    """Closed-form lumped-uncertainty expression (diagnostic flavor).

    Evaluates, with A = a_nom*(1+delta_a):

        delta_b/(1+delta_b) * (r_ddot - alpha1*Dval - alpha2*e_dot - A*v - d)
        - (a_nom*delta_a [*v] + d) / b_nom

    where Dval is the order-eta operator value on sig^a(e) shared with the
    controller.  The velocity factor in the tail is applied only when
    ``pdot_corrected`` is set; the default keeps the dimensionally odd plain
    form (see docs) and both differ from :func:`lumped_true`, which is the
    exactly-cancelling quantity.
    """
    a_true = params.a_nom * (1.0 + params.delta_a)
    lead = params.delta_b / (1.0 + params.delta_b)
    core = r_ddot - gains.alpha1 * frac_der_val - gains.alpha2 * e_dot - a_true * v - d
    tail = params.a_nom * params.delta_a * (v if pdot_corrected else 1.0) + d
    return lead * core - tail / params.b_nom


def oracle_cancellation_term(params: PlantParams, u_model: float, v: float,
                             d: float) -> float:
    """Current that exactly cancels the lumped uncertainty when added to the
    model-based current ``u_model`` (equivalent + super-twisting parts).

    Solves b*(1+delta_b)*u_c + delta_b*b*u_model + a*delta_a*v + d = 0 for u_c,
    accounting for the compensation current passing through the uncertain gain.
    """
    num = params.b_nom * params.delta_b * u_model + params.a_nom * params.delta_a * v + d
    return -num / (params.b_nom * (1.0 + params.delta_b))


def lyapunov_quad(z: float, omega: float, rho: float) -> float:
    """Quadratic form chi' P chi with chi = [phi1(z), omega] and
    P = [[rho + rho^2, -rho], [-rho, 1]] (positive definite for rho > 0)."""
    if rho <= 0.0:
        raise ValueError("rho must be > 0")
    c = phi1(z)
    return (rho + rho * rho) * c * c - 2.0 * rho * c * omega + omega * omega


# ---------------------------------------------------------------------------
# episode loop

def run_episode(cfg: SimConfig) -> EpisodeResult:
    """Simulate one closed-loop episode; deterministic given (cfg, cfg.seed)."""
    total = cfg.episode_duration()
    ticks = int(math.floor(total / cfg.h_ctrl + 1e-9))
    n_sub = cfg.substeps
    params = cfg.plant
    ctl = make_controller(cfg.controller, params, cfg.h_ctrl, cfg.u_max, cfg.n_mem)
    is_fosta = isinstance(ctl, FostaController)
    gains = cfg.controller.gains if is_fosta else None
    gain_res = gain_check(gains.rho, gains.h1, gains.h2) if is_fosta else None

    rng = np.random.default_rng(cfg.seed) if cfg.noise_std > 0.0 else None

    cols = {name: np.zeros(ticks) for name in TRACE_COLUMNS}
    trace = SimTrace(cols, cfg.h_ctrl, cfg.controller.kind,
                     rho=gains.rho if gains else None,
                     h1=gains.h1 if gains else None)

    p = v = 0.0
    t = 0.0
    sat_count = clamp_count = 0
    fault: FaultInfo | None = None
    n_logged = 0

    for k in range(ticks):
        t = k * cfg.h_ctrl
        ref = ref_at(cfg.profile, t)
        p_meas = p + (rng.normal(0.0, cfg.noise_std) if rng is not None else 0.0)
        res = ctl.step(t, p_meas, v, ref)
        dec = res.decomposition

        d_now = sample_disturbance(cfg.dist, t) + internal_disturbance(params, p, v)
        u_nn_val = dec.u_nn
        u_total = dec.u_total
        saturated = dec.saturated
        if cfg.oracle_compensation and is_fosta:
            u_model = dec.u_eq + dec.u_st
            u_nn_val = oracle_cancellation_term(params, u_model, v, d_now)
            u_raw = u_model + u_nn_val
            saturated = abs(u_raw) > cfg.u_max
            u_total = min(max(u_raw, -cfg.u_max), cfg.u_max)

        f_true = lumped_true(params, u_total, v, d_now)
        f_static = 0.0
        v_quad = 0.0
        if is_fosta:
            f_static = f_oracle(params, gains, ref.r_ddot, res.frac_der_val,
                              v - ref.r_dot, v, d_now,
                              pdot_corrected=cfg.static_oracle_velocity_tail)
            v_quad = lyapunov_quad(res.z, res.omega, gains.rho)

        row_fault = not math.isfinite(u_total)
        c = cols
        c["t"][k] = t
        c["r"][k] = ref.r
        c["p"][k] = p
        c["v"][k] = v
        c["e"][k] = p - ref.r
        c["z"][k] = res.z
        c["omega"][k] = res.omega
        c["u_eq"][k] = dec.u_eq
        c["u_st"][k] = dec.u_st
        c["u_nn"][k] = u_nn_val
        c["u_total"][k] = u_total
        c["f_true"][k] = f_true
        c["f_static"][k] = f_static
        c["f_hat"][k] = res.f_hat
        c["v_quad"][k] = v_quad
        c["sat_flag"][k] = 1.0 if saturated else 0.0
        c["clamp_flag"][k] = 1.0 if res.weight_clamped else 0.0
        c["fault_flag"][k] = 1.0 if row_fault else 0.0
        n_logged = k + 1

        if saturated:
            sat_count += 1
        if res.weight_clamped:
            clamp_count += 1
        if row_fault:
            fault = FaultInfo(k, t, "non-finite control")
            break

        p, v, _ = rk4_substeps(params, p, v, t, u_total, cfg.dist, cfg.h_phys, n_sub)
        if not (math.isfinite(p) and math.isfinite(v)):
            fault = FaultInfo(k, t, "non-finite plant state")
            cols["fault_flag"][k] = 1.0
            break

    if n_logged < ticks:
        trace.truncate(n_logged)

    mon = None
    if is_fosta and fault is None and len(trace) > 0:
        mon = monitor(trace, bound_eps=None, transient_cutoff=cfg.transient_time())

    return EpisodeResult(cfg=cfg, trace=trace, gain=gain_res, monitor=mon,
                         fault=fault, sat_count=sat_count, clamp_count=clamp_count)


def monitor(trace: SimTrace, bound_eps: float | None,
            transient_cutoff: float) -> MonitorReport | None:
    """Convergence-region statistics over the post-transient window.

    ``bound_eps`` defaults (None) to the empirical max |f_true - f_hat| over
    the window.  Fills the trace's region_flag column.  Returns None when the
    trace carries no super-twisting gains or the region bound is undefined
    for them.
    """
    if trace.rho is None or trace.h1 is None:
        return None
    ts = trace.column("t")
    post = ts >= transient_cutoff
    n_post = int(np.count_nonzero(post))
    if n_post == 0:
        return MonitorReport(0.0, 0.0, 0.0, transient_cutoff, 0.0, 0, 0)
    if bound_eps is None:
        gap = trace.column("f_true") - trace.column("f_hat")
        bound_eps = float(np.max(np.abs(gap[post])))
    try:
        bound = convergence_bound(trace.rho, trace.h1, bound_eps)
    except ValueError:
        return None
    z = trace.column("z")
    phi1_abs = np.sqrt(np.abs(z))
    outside = post & (phi1_abs > bound)
    trace.data["region_flag"] = outside.astype(float)
    n_outside = int(np.count_nonzero(outside))
    frac_outside = n_outside / n_post
    if n_outside == 0:
        frac_incr = 0.0
    else:
        vq = trace.column("v_quad")
        dv = np.diff(vq, prepend=vq[0])
        n_incr = int(np.count_nonzero(outside & (dv > 0.0)))
        frac_incr = n_incr / n_outside
    return MonitorReport(
        region_bound=bound,
        frac_outside_region_after_transient=frac_outside,
        frac_vquad_increase_while_outside=frac_incr,
        transient_cutoff=transient_cutoff,
        bound_eps=bound_eps,
        n_post_transient=n_post,
        n_outside=n_outside,
    )
