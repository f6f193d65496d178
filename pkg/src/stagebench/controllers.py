"""The four stage controllers: PID, boundary-layer SMC, the fractional-order
super-twisting controller (FOSTA), and its neural-compensated variant (ANN-FSA).

FOSTA tracks a fractional-order sliding variable

    z = e_dot + alpha1 * D^(eta-1)(sig^a(e)) + alpha2 * e,      e = p - r,

with a model-based equivalent term, a super-twisting term built from
phi1(z) = |z|^(1/2) sgn(z) and phi2(z) = sgn(z)/2, and (ANN-FSA only) a
radial-basis network that estimates the lumped uncertainty entering the
z dynamics and cancels it through the drive current.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .fracops import FracEvaluator, sig_pow
from .trajgen import RefSample

# regularization floor for d(phi1)/dz, which is singular at z = 0
Z_FLOOR = 1e-6


def phi1(z: float) -> float:
    """|z|^(1/2) * sgn(z); odd, zero at zero."""
    if z > 0.0:
        return math.sqrt(z)
    if z < 0.0:
        return -math.sqrt(-z)
    return 0.0


def phi2(z: float) -> float:
    """sgn(z)/2 with sgn(0) = 0."""
    if z > 0.0:
        return 0.5
    if z < 0.0:
        return -0.5
    return 0.0


def dphi1_dz(z: float, z_floor: float = Z_FLOOR) -> float:
    """Regularized derivative of phi1: 1 / (2 * sqrt(max(|z|, z_floor)))."""
    return 1.0 / (2.0 * math.sqrt(max(abs(z), z_floor)))


def sat(x: float) -> float:
    """Unit saturation: clip to [-1, 1]."""
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


@dataclass(frozen=True)
class FostaGains:
    alpha1: float = 0.001
    alpha2: float = 175.0
    eta: float = 0.5
    a_exp: float = 0.5
    h1: float = 500.0
    h2: float = 30.0
    rho: float = 0.2

    def __post_init__(self):
        # alpha1 = 0 is allowed: it disables the fractional term (ablation)
        if self.alpha1 < 0.0 or self.alpha2 <= 0.0:
            raise ValueError("alpha1 must be >= 0 and alpha2 > 0")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must be in (0, 1)")
        if not 0.0 < self.a_exp <= 1.0:
            raise ValueError("a_exp must be in (0, 1]")
        if self.h1 <= 0.0 or self.h2 <= 0.0:
            raise ValueError("h1 and h2 must be > 0")
        if self.rho <= 0.0:
            raise ValueError("rho must be > 0")


@dataclass
class SlidingState:
    """Mutable super-twisting state carried across control ticks."""

    z: float = 0.0
    omega: float = 0.0        # integral term: omega_dot = -h2 * phi2(z)
    z_dot_est: float = 0.0    # low-pass filtered backward difference of z
    dphi1_dz: float = 0.0


@dataclass(frozen=True)
class ControlDecomposition:
    u_eq: float
    u_st: float
    u_nn: float
    u_total: float
    saturated: bool


@dataclass(frozen=True)
class GainCheckResult:
    h1_min: float
    h2_required: float
    satisfied: bool


def gain_check(rho: float, h1: float, h2: float) -> GainCheckResult:
    """Check the super-twisting gain pair against the stability conditions.

    h1 must be at least max(rho^2 + rho + 1/2, (rho^2 + 3 rho + 1)/2) and h2
    must equal rho^2 + rho*(1 + h1) (to 1e-9 relative) for the convergence
    guarantee to apply.
    """
    if rho <= 0.0 or not math.isfinite(rho):
        raise ValueError(f"rho must be > 0, got {rho!r}")
    h1_min = max(rho * rho + rho + 0.5, (rho * rho + 3.0 * rho + 1.0) / 2.0)
    h2_required = rho * rho + rho * (1.0 + h1)
    ok = h1 >= h1_min and math.isclose(h2, h2_required, rel_tol=1e-9, abs_tol=0.0)
    return GainCheckResult(h1_min=h1_min, h2_required=h2_required, satisfied=ok)


def required_h2(rho: float, h1: float) -> float:
    return rho * rho + rho * (1.0 + h1)


def convergence_bound(rho: float, h1: float, eps_abs: float) -> float:
    """Radius of the residual region for |phi1(z)| given the uncertainty
    estimation error magnitude ``eps_abs``.

    Undefined (raises) when the gain margin terms are not both positive.
    """
    if rho <= 0.0:
        raise ValueError("rho must be > 0")
    if 2.0 * h1 <= rho:
        raise ValueError("requires 2*h1 > rho")
    d1 = math.sqrt(2.0 * h1 - rho) - 1.0 - rho
    d2 = -rho + (2.0 * h1 - 1.0) / (2.0 * (rho + 1.0))
    denom = min(d1, d2)
    if denom <= 0.0:
        raise ValueError(f"bound undefined: nonpositive denominator {denom}")
    return abs(eps_abs) / denom


class RbfNetwork:
    """Single-hidden-layer Gaussian network over the input x = [z, z_dot].

    Activation h_j = exp(-||x - c_j||^2 / (2 b_j^2)), output f_hat = W . h.
    Weights adapt online; the infinity norm of W is clamped to ``w_max`` and
    clamp events are reported so nominal runs can assert none occurred.
    """

    def __init__(self, centers, widths, weights=None, w_max: float = 100.0):
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        if self.centers.shape[1] != 2:
            raise ValueError("centers must be a (J, 2) array")
        self.widths = np.asarray(widths, dtype=float)
        if self.widths.shape != (self.centers.shape[0],):
            raise ValueError("widths must have one entry per node")
        if np.any(self.widths <= 0.0):
            raise ValueError("all widths must be > 0")
        self.weights = (np.zeros(self.centers.shape[0]) if weights is None
                        else np.asarray(weights, dtype=float).copy())
        if self.weights.shape != (self.centers.shape[0],):
            raise ValueError("weights must have one entry per node")
        if w_max <= 0.0:
            raise ValueError("w_max must be > 0")
        self.w_max = float(w_max)

    @classmethod
    def five_node_default(cls, w_max: float = 100.0) -> "RbfNetwork":
        """Five nodes spanning small sliding-variable excursions."""
        cz = [-3.0, -1.0, 0.0, 1.0, 3.0]
        czd = [-7.0, -3.0, 0.0, 3.0, 7.0]
        centers = np.column_stack([cz, czd])
        widths = np.full(5, 50.0)
        return cls(centers, widths, w_max=w_max)

    @property
    def n_nodes(self) -> int:
        return self.centers.shape[0]

    def forward(self, x) -> tuple[float, np.ndarray]:
        """Return (f_hat, activation vector) at input x = [z, z_dot]."""
        xv = np.asarray(x, dtype=float)
        diff = self.centers - xv
        h_vec = np.exp(-np.einsum("ij,ij->i", diff, diff) / (2.0 * self.widths**2))
        return float(self.weights @ h_vec), h_vec

    def adapt(self, phi2_z: float, dphi1: float, omega: float,
              h_vec: np.ndarray, h_ctrl: float, rho: float) -> bool:
        """One Euler step of the adaptive law; returns True if the clamp hit.

        W += h * [ (1+rho) * phi2(z) * h_vec  -  dphi1 * omega * ones ]
        The second term is a scalar rate applied uniformly to every node.
        """
        self.weights += h_ctrl * ((1.0 + rho) * phi2_z * h_vec - dphi1 * omega)
        peak = float(np.max(np.abs(self.weights)))
        if peak > self.w_max:
            np.clip(self.weights, -self.w_max, self.w_max, out=self.weights)
            return True
        return False


def sliding_z(e: float, e_dot: float, frac_int: FracEvaluator, gains: FostaGains) -> float:
    """Push sig^a(e) into the order (eta-1) evaluator and form the sliding variable."""
    frac_val = frac_int.step(sig_pow(e, gains.a_exp))
    return e_dot + gains.alpha1 * frac_val + gains.alpha2 * e


def u_equivalent(ref: RefSample, e: float, e_dot: float, v: float,
                 frac_der: FracEvaluator, a_nom: float, b_nom: float,
                 gains: FostaGains) -> float:
    """Model-based term holding the sliding variable's drift at zero.

    ``frac_der`` must be configured with net order eta (the derivative of the
    order eta-1 term, composed as a single operator).
    """
    d_val = frac_der.step(sig_pow(e, gains.a_exp))
    return (ref.r_ddot - gains.alpha1 * d_val - gains.alpha2 * e_dot - a_nom * v) / b_nom


def u_supertwist(ss: SlidingState, gains: FostaGains, b_nom: float, h_ctrl: float) -> float:
    """Super-twisting current from the present z and integral state, then
    advance the integral by one explicit Euler step."""
    u = -(gains.h1 / b_nom) * phi1(ss.z) + ss.omega / b_nom
    ss.omega += -gains.h2 * phi2(ss.z) * h_ctrl
    return u


def u_nn(f_hat: float, b_nom: float) -> float:
    """Compensation current canceling an uncertainty estimate f_hat."""
    return -f_hat / b_nom


@dataclass(frozen=True)
class StepResult:
    decomposition: ControlDecomposition
    z: float = 0.0
    omega: float = 0.0
    z_dot_est: float = 0.0
    f_hat: float = 0.0
    frac_der_val: float = 0.0   # raw D^eta(sig^a(e)) value, for diagnostics
    weight_clamped: bool = False


def _clamp(u_raw: float, u_max: float) -> tuple[float, bool]:
    if u_raw > u_max:
        return u_max, True
    if u_raw < -u_max:
        return -u_max, True
    return u_raw, False


class PidController:
    """Position PID on e' = r - p with filtered derivative and conditional
    anti-windup (the integrator freezes while pushing further into saturation)."""

    def __init__(self, kp: float = 8000.0, ki: float = 80000.0, kd: float = 320.0,
                 n_filter: float = 100.0, h_ctrl: float = 1e-3, u_max: float = 10.0):
        self.kp, self.ki, self.kd = kp, ki, kd
        self.n_filter = n_filter
        self.h = h_ctrl
        self.u_max = u_max
        # backward-Euler low-pass on the raw derivative, cutoff n_filter rad/s
        self._alpha = n_filter * h_ctrl / (1.0 + n_filter * h_ctrl)
        self.reset()

    def reset(self):
        self._integ = 0.0
        self._e_prev = 0.0
        self._d_filt = 0.0
        self._primed = False

    def step(self, t: float, p_meas: float, v_meas: float, ref: RefSample) -> StepResult:
        e = ref.r - p_meas
        raw_d = (e - self._e_prev) / self.h if self._primed else 0.0
        self._d_filt += self._alpha * (raw_d - self._d_filt)
        integ_try = self._integ + e * self.h
        u_raw = self.kp * e + self.ki * integ_try + self.kd * self._d_filt
        u, saturated = _clamp(u_raw, self.u_max)
        if saturated and u_raw * e > 0.0:
            # windup guard: keep the old integral
            u_raw = self.kp * e + self.ki * self._integ + self.kd * self._d_filt
            u, saturated = _clamp(u_raw, self.u_max)
        else:
            self._integ = integ_try
        self._e_prev = e
        self._primed = True
        return StepResult(ControlDecomposition(u, 0.0, 0.0, u, saturated))


class SmcController:
    """First-order sliding mode with feedforward and a boundary-layer switch.

    s = e_dot' + lam * e' on e' = r - p;
    u = (r_ddot - a_nom*v + lam*e_dot')/b_nom + k_s * sat(s/phi_layer).
    """

    def __init__(self, lam: float = 175.0, k_s: float = 2.0, phi_layer: float = 1e-4,
                 a_nom: float = -1.092, b_nom: float = 3.9124,
                 h_ctrl: float = 1e-3, u_max: float = 10.0):
        if phi_layer <= 0.0:
            raise ValueError("phi_layer must be > 0")
        self.lam, self.k_s, self.phi_layer = lam, k_s, phi_layer
        self.a_nom, self.b_nom = a_nom, b_nom
        self.h = h_ctrl
        self.u_max = u_max
        self.last_s = 0.0

    def reset(self):
        self.last_s = 0.0

    def step(self, t: float, p_meas: float, v_meas: float, ref: RefSample) -> StepResult:
        e = ref.r - p_meas
        e_dot = ref.r_dot - v_meas
        s = e_dot + self.lam * e
        self.last_s = s
        u_ff = (ref.r_ddot - self.a_nom * v_meas + self.lam * e_dot) / self.b_nom
        u_sw = self.k_s * sat(s / self.phi_layer)
        u, saturated = _clamp(u_ff + u_sw, self.u_max)
        return StepResult(ControlDecomposition(u_ff, u_sw, 0.0, u, saturated), z=s)


class FostaController:
    """Fractional-order super-twisting controller; pass an RbfNetwork to get
    the neural-compensated variant.

    Per tick: form z from the error and the streaming fractional integral,
    compute the equivalent + super-twisting (+ neural) currents, clamp to the
    drive limit, then advance the super-twisting integral and (if present)
    the network weights.  The omega reported for the tick is the value used
    by the control, i.e. before the advance, so a trace reconstructs
    omega_k = -h2 * sum_{j<k} phi2(z_j) * h exactly.
    """

    def __init__(self, gains: FostaGains, a_nom: float = -1.092, b_nom: float = 3.9124,
                 h_ctrl: float = 1e-3, u_max: float = 10.0, n_mem: int = 2000,
                 rbf: RbfNetwork | None = None, zdot_cutoff_hz: float = 100.0):
        self.gains = gains
        self.a_nom, self.b_nom = a_nom, b_nom
        self.h = h_ctrl
        self.u_max = u_max
        self.n_mem = n_mem
        self.rbf = rbf
        wc = 2.0 * math.pi * zdot_cutoff_hz
        self._zdot_alpha = wc * h_ctrl / (1.0 + wc * h_ctrl)
        self._frac_int = FracEvaluator(gains.eta - 1.0, h=h_ctrl, n_mem=n_mem)
        self._frac_der = FracEvaluator(gains.eta, h=h_ctrl, n_mem=n_mem)
        self.ss = SlidingState()
        self._z_prev = 0.0
        self._primed = False

    def reset(self):
        self._frac_int.reset()
        self._frac_der.reset()
        self.ss = SlidingState()
        self._z_prev = 0.0
        self._primed = False

    def step(self, t: float, p_meas: float, v_meas: float, ref: RefSample) -> StepResult:
        g = self.gains
        e = p_meas - ref.r
        e_dot = v_meas - ref.r_dot
        se = sig_pow(e, g.a_exp)
        i_val = self._frac_int.step(se)
        d_val = self._frac_der.step(se)
        z = e_dot + g.alpha1 * i_val + g.alpha2 * e

        raw_zdot = (z - self._z_prev) / self.h if self._primed else 0.0
        self.ss.z_dot_est += self._zdot_alpha * (raw_zdot - self.ss.z_dot_est)
        self.ss.z = z
        self.ss.dphi1_dz = dphi1_dz(z)
        omega_used = self.ss.omega

        u_eq = (ref.r_ddot - g.alpha1 * d_val - g.alpha2 * e_dot
                - self.a_nom * v_meas) / self.b_nom
        u_st = -(g.h1 / self.b_nom) * phi1(z) + omega_used / self.b_nom

        f_hat = 0.0
        u_n = 0.0
        h_vec = None
        if self.rbf is not None:
            f_hat, h_vec = self.rbf.forward((z, self.ss.z_dot_est))
            u_n = u_nn(f_hat, self.b_nom)

        u, saturated = _clamp(u_eq + u_st + u_n, self.u_max)

        # advance integral and adaptation with the tick's own z and omega
        self.ss.omega += -g.h2 * phi2(z) * self.h
        clamped = False
        if self.rbf is not None:
            clamped = self.rbf.adapt(phi2(z), self.ss.dphi1_dz, omega_used,
                                     h_vec, self.h, g.rho)
        self._z_prev = z
        self._primed = True
        return StepResult(
            ControlDecomposition(u_eq, u_st, u_n, u, saturated),
            z=z, omega=omega_used, z_dot_est=self.ss.z_dot_est, f_hat=f_hat,
            frac_der_val=d_val, weight_clamped=clamped,
        )
