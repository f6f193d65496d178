"""Closed-loop wafer-stage motion simulator and controller benchmark.

Subsystems: fractional-order operators (``fracops``), the linear-motor stage
model (``plant``), the scan reference (``trajgen``), the four control laws
(``controllers``), the closed-loop engine with stability monitors
(``simcore``), and the benchmark harness plus CLI (``bench``, ``config``,
``cli``).
"""

from .bench import BenchSpec, CaseSpec, run_bench, rms_error, tune_grid
from .controllers import (
    FostaController,
    FostaGains,
    PidController,
    RbfNetwork,
    SmcController,
    convergence_bound,
    gain_check,
)
from .fracops import FracEvaluator, FracOrder, gl_weights, sig_pow
from .plant import DisturbanceSpec, PlantParams, PlantState
from .simcore import (
    AnnFsaSpec,
    FostaSpec,
    PidSpec,
    SimConfig,
    SmcSpec,
    lyapunov_quad,
    monitor,
    run_episode,
)
from .trajgen import RefSample, ScanProfile, duration, ref_at

__version__ = "0.1.0"

__all__ = [
    "AnnFsaSpec", "BenchSpec", "CaseSpec", "DisturbanceSpec", "FostaController",
    "FostaGains", "FostaSpec", "FracEvaluator", "FracOrder", "PidController",
    "PidSpec", "PlantParams", "PlantState", "RbfNetwork", "RefSample",
    "ScanProfile", "SimConfig", "SmcController", "SmcSpec", "convergence_bound",
    "duration", "gain_check", "gl_weights", "lyapunov_quad", "monitor",
    "ref_at", "rms_error", "run_bench", "run_episode", "sig_pow", "tune_grid",
]
