"""Benchmark harness: error metrics, trace/summary serialization, the
controller-comparison runner, and an exhaustive grid tuner.

Artifacts written by :func:`run_bench` into the output directory:

* ``trace_<controller>_<case>_seed<seed>.csv``  -- one row per control tick,
  columns exactly ``simcore.TRACE_COLUMNS``, decimal text at 17 significant
  digits (lossless float round-trip).
* ``runs.csv``      -- one row per episode with RMS/peak (um) and counters.
* ``summary.csv``   -- per controller: seed-averaged RMS per case plus the
  case difference (second case minus first), fixed row order
  PID, SMC, FOSTA, ANN-FSA.
* ``summary.txt``   -- the same table aligned for reading.
* ``report.txt``    -- config echo, gain-check and monitor lines per run.

Re-running an identical spec reproduces every artifact byte for byte.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from pathlib import Path

import io

import numpy as np

from .plant import DisturbanceSpec
from .simcore import (
    CONTROLLER_LABELS,
    AnnFsaSpec,
    ControllerSpec,
    EpisodeResult,
    FostaSpec,
    PidSpec,
    SimConfig,
    SmcSpec,
    TRACE_COLUMNS,
    run_episode,
)

CONTROLLER_ORDER = ("pid", "smc", "fosta", "annfsa")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# metrics

def rms_error(errors, times, window_start: float) -> float:
    """Root mean square of the error over samples with t >= window_start, in um."""
    e = np.asarray(errors, dtype=float)
    t = np.asarray(times, dtype=float)
    m = t >= window_start
    if not np.any(m):
        raise ValueError("empty metric window")
    return float(np.sqrt(np.mean(e[m] ** 2)) * 1e6)


def peak_error(errors, times, window_start: float) -> float:
    """Largest |error| over samples with t >= window_start, in um."""
    e = np.asarray(errors, dtype=float)
    t = np.asarray(times, dtype=float)
    m = t >= window_start
    if not np.any(m):
        raise ValueError("empty metric window")
    return float(np.max(np.abs(e[m])) * 1e6)


# ---------------------------------------------------------------------------
# spec

@dataclass(frozen=True)
class CaseSpec:
    name: str
    dist: DisturbanceSpec


@dataclass(frozen=True)
class BenchSpec:
    base: SimConfig
    controllers: tuple[ControllerSpec, ...]
    cases: tuple[CaseSpec, ...]
    seeds: tuple[int, ...]
    output_dir: str = "bench_out"
    workers: int = 1

    def __post_init__(self):
        if not self.controllers or not self.cases or not self.seeds:
            raise ValueError("need at least one controller, case, and seed")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        names = [c.name for c in self.cases]
        if len(set(names)) != len(names):
            raise ValueError("case names must be unique")


@dataclass(frozen=True)
class RunRecord:
    controller: str
    case: str
    seed: int
    rms_um: float
    peak_um: float
    gain_ok: bool | None
    sat_count: int
    clamp_count: int
    faulted: bool
    trace_file: str


@dataclass
class BenchReport:
    spec: BenchSpec
    records: list
    window_start: float

    @property
    def any_faulted(self) -> bool:
        return any(r.faulted for r in self.records)

    def mean_rms(self, controller: str, case: str) -> float:
        vals = [r.rms_um for r in self.records
                if r.controller == controller and r.case == case]
        return float(np.mean(vals))

    def summary_rows(self):
        """(label, [rms per case...], difference or None) per controller, in
        the canonical PID, SMC, FOSTA, ANN-FSA order."""
        kinds = [c.kind for c in self.spec.controllers]
        ordered = [k for k in CONTROLLER_ORDER if k in kinds]
        ordered += [k for k in kinds if k not in ordered]
        rows = []
        case_names = [c.name for c in self.spec.cases]
        for kind in ordered:
            rms = [self.mean_rms(kind, cn) for cn in case_names]
            diff = rms[1] - rms[0] if len(rms) == 2 else None
            rows.append((CONTROLLER_LABELS.get(kind, kind), rms, diff))
        return rows


def _controller_tag(spec: ControllerSpec) -> str:
    return spec.kind


def _run_one(args) -> tuple:
    ctl_spec, case, seed, base = args
    cfg = replace(base, controller=ctl_spec, dist=case.dist, seed=seed)
    res = run_episode(cfg)
    return (_controller_tag(ctl_spec), case.name, seed, res)


def write_trace_csv(path: Path, trace) -> None:
    buf = io.StringIO()
    buf.write(",".join(TRACE_COLUMNS) + "\n")
    cols = [trace.column(name) for name in TRACE_COLUMNS]
    for i in range(len(trace)):
        buf.write(",".join(_fmt(col[i]) for col in cols) + "\n")
    path.write_text(buf.getvalue())


def read_trace_csv(path: Path) -> dict:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = {name: np.array([float(r[j]) for r in rows])
            for j, name in enumerate(header)}
    return data


def run_bench(spec: BenchSpec) -> BenchReport:
    """Execute every (controller, case, seed) episode and write all artifacts."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    window_start = spec.base.transient_time()

    kinds = [c.kind for c in spec.controllers]
    ordered = [k for k in CONTROLLER_ORDER if k in kinds]
    ordered += [k for k in kinds if k not in ordered]
    by_kind = {c.kind: c for c in spec.controllers}
    jobs = [(by_kind[k], case, seed, spec.base)
            for k in ordered for case in spec.cases for seed in spec.seeds]

    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    records = []
    report_lines = [_describe_base(spec.base, window_start)]
    for kind, case_name, seed, res in results:
        trace_file = f"trace_{kind}_{case_name}_seed{seed}.csv"
        write_trace_csv(out / trace_file, res.trace)
        has_window = (len(res.trace) > 0
                      and float(res.trace.column("t")[-1]) >= window_start)
        if res.faulted or not has_window:
            rms = peak = float("nan")
        else:
            rms = rms_error(res.trace.column("e"), res.trace.column("t"), window_start)
            peak = peak_error(res.trace.column("e"), res.trace.column("t"), window_start)
        rec = RunRecord(
            controller=kind, case=case_name, seed=seed,
            rms_um=rms, peak_um=peak,
            gain_ok=res.gain.satisfied if res.gain else None,
            sat_count=res.sat_count, clamp_count=res.clamp_count,
            faulted=res.faulted, trace_file=trace_file,
        )
        records.append(rec)
        report_lines.append(_describe_run(rec, res))

    report = BenchReport(spec=spec, records=records, window_start=window_start)
    _write_runs_csv(out / "runs.csv", records)
    _write_summary(out, report)
    (out / "report.txt").write_text("\n".join(report_lines) + "\n")
    return report


def _describe_base(base: SimConfig, window_start: float) -> str:
    return (
        "closed-loop stage benchmark\n"
        f"h_ctrl={_fmt(base.h_ctrl)} s, h_phys={_fmt(base.h_phys)} s, "
        f"noise_std={_fmt(base.noise_std)} m\n"
        f"plant: a_nom={_fmt(base.plant.a_nom)}, b_nom={_fmt(base.plant.b_nom)}, "
        f"delta_a={_fmt(base.plant.delta_a)}, delta_b={_fmt(base.plant.delta_b)}, "
        f"ripple_amp={_fmt(base.plant.ripple_amp)}, "
        f"ripple_period={_fmt(base.plant.ripple_period)}\n"
        f"profile: length={_fmt(base.profile.scan_length)} m, "
        f"velocity={_fmt(base.profile.scan_velocity)} m/s, "
        f"accel={_fmt(base.profile.accel_limit)} m/s^2, "
        f"dwell={_fmt(base.profile.dwell)} s, cycles={base.profile.cycles}\n"
        f"metric window starts at t={_fmt(window_start)} s "
        "(first stroke excluded)\n"
    )


def _describe_run(rec: RunRecord, res: EpisodeResult) -> str:
    lines = [f"[{CONTROLLER_LABELS.get(rec.controller, rec.controller)} "
             f"{rec.case} seed={rec.seed}]"]
    if rec.faulted:
        lines.append(f"  FAULT at tick {res.fault.tick} (t={_fmt(res.fault.t)}): "
                     f"{res.fault.reason}")
    else:
        lines.append(f"  rms={rec.rms_um:.6f} um, peak={rec.peak_um:.6f} um, "
                     f"saturated_ticks={rec.sat_count}, "
                     f"weight_clamps={rec.clamp_count}")
    if res.gain is not None:
        lines.append(f"  gain check: h1_min={_fmt(res.gain.h1_min)}, "
                     f"h2_required={_fmt(res.gain.h2_required)}, "
                     f"satisfied={res.gain.satisfied}")
    if res.monitor is not None:
        m = res.monitor
        lines.append(f"  monitor: bound={_fmt(m.region_bound)} "
                     f"(eps={_fmt(m.bound_eps)}), "
                     f"outside={m.frac_outside_region_after_transient:.6f}, "
                     f"vquad_increase_while_outside="
                     f"{m.frac_vquad_increase_while_outside:.6f}")
    return "\n".join(lines)


def _write_runs_csv(path: Path, records) -> None:
    lines = ["controller,case,seed,rms_um,peak_um,gain_ok,sat_count,"
             "clamp_count,faulted,trace_file"]
    for r in records:
        gain = "" if r.gain_ok is None else str(r.gain_ok).lower()
        lines.append(
            f"{r.controller},{r.case},{r.seed},{_fmt(r.rms_um)},{_fmt(r.peak_um)},"
            f"{gain},{r.sat_count},{r.clamp_count},{str(r.faulted).lower()},"
            f"{r.trace_file}")
    path.write_text("\n".join(lines) + "\n")


def _write_summary(out: Path, report: BenchReport) -> None:
    case_names = [c.name for c in report.spec.cases]
    rows = report.summary_rows()
    header = ["controller"] + [f"rms_{cn}_um" for cn in case_names]
    two_cases = len(case_names) == 2
    if two_cases:
        header.append("difference_um")
    csv_lines = [",".join(header)]
    for label, rms, diff in rows:
        cells = [label] + [_fmt(v) for v in rms]
        if two_cases:
            cells.append(_fmt(diff))
        csv_lines.append(",".join(cells))
    (out / "summary.csv").write_text("\n".join(csv_lines) + "\n")

    width = max(len(h) for h in header + [r[0] for r in rows]) + 2
    txt = [f"RMS tracking errors (um), window t >= {report.window_start:g} s"]
    txt.append("".join(h.ljust(max(width, 16)) for h in header))
    for label, rms, diff in rows:
        cells = [label] + [f"{v:.4f}" for v in rms]
        if two_cases:
            cells.append(f"{diff:+.4f}")
        txt.append("".join(c.ljust(max(width, 16)) for c in cells))
    (out / "summary.txt").write_text("\n".join(txt) + "\n")


# ---------------------------------------------------------------------------
# grid tuner

_SPEC_TYPES = {"pid": PidSpec, "smc": SmcSpec, "fosta": FostaSpec, "annfsa": AnnFsaSpec}


def _apply_params(kind: str, params: dict) -> ControllerSpec:
    if kind in ("fosta", "annfsa"):
        base = _SPEC_TYPES[kind]()
        gains = replace(base.gains, **params)
        return replace(base, gains=gains)
    return _SPEC_TYPES[kind](**params)


@dataclass(frozen=True)
class TuneResult:
    controller: str
    best_params: dict
    best_rms_um: float
    best_peak_um: float
    table: tuple  # (params, rms, peak, faulted) per grid point


def tune_grid(kind: str, grid: dict, base: SimConfig,
              case_dist: DisturbanceSpec | None = None) -> TuneResult:
    """Exhaustively evaluate a parameter grid for one controller on a single
    case and return the RMS-argmin configuration.

    Ties break toward smaller peak error, then lexicographic parameter order.
    Faulted runs are excluded from the argmin but kept in the table.
    """
    if kind not in _SPEC_TYPES:
        raise ValueError(f"unknown controller {kind!r}")
    if not grid:
        raise ValueError("empty grid")
    keys = sorted(grid)
    values = [tuple(grid[k]) for k in keys]
    if any(len(v) == 0 for v in values):
        raise ValueError("every grid axis needs at least one value")
    dist = case_dist if case_dist is not None else base.dist
    window_start = base.transient_time()

    table = []
    best = None
    for combo in product(*values):
        params = dict(zip(keys, combo))
        ctl = _apply_params(kind, params)
        cfg = replace(base, controller=ctl, dist=dist)
        res = run_episode(cfg)
        if res.faulted or len(res.trace) == 0:
            table.append((params, float("nan"), float("nan"), True))
            continue
        rms = rms_error(res.trace.column("e"), res.trace.column("t"), window_start)
        peak = peak_error(res.trace.column("e"), res.trace.column("t"), window_start)
        table.append((params, rms, peak, False))
        key = (rms, peak, combo)
        if best is None or key < best[0]:
            best = (key, params, rms, peak)
    if best is None:
        raise ValueError("every grid point faulted")
    return TuneResult(controller=kind, best_params=best[1],
                      best_rms_um=best[2], best_peak_um=best[3],
                      table=tuple(table))
