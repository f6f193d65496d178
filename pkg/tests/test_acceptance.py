"""Acceptance suite: every exit criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL line
per criterion.  The full benchmark matrix (4 controllers x 2 cases x 5 seeds)
is executed once and shared by the comparative criteria.
"""

import math
import time

import numpy as np
import pytest

from stagebench.bench import BenchSpec, CaseSpec, read_trace_csv, run_bench
from stagebench.controllers import FostaGains, gain_check, required_h2
from stagebench.fracops import FracEvaluator
from stagebench.plant import DisturbanceSpec, PlantParams
from stagebench.simcore import (
    AnnFsaSpec,
    FostaSpec,
    PidSpec,
    SimConfig,
    SmcSpec,
    run_episode,
)
from stagebench.trajgen import ScanProfile, stroke_windows

BENCH_PLANT = PlantParams(delta_a=0.2, delta_b=-0.1, ripple_amp=0.02)
PROFILE = ScanProfile()  # reference scan: 0.04 m at 0.032 m/s, two cycles
TUNED = FostaGains(h1=5.0, h2=0.2)
SEEDS = (1, 2, 3, 4, 5)
CASES = (CaseSpec("case1", DisturbanceSpec()),
         CaseSpec("case2", DisturbanceSpec(kind="sinusoid", amplitude=0.03,
                                           frequency=1.0)))


def report(name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} -- {detail}")


@pytest.fixture(scope="module")
def benchmark(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    spec = BenchSpec(
        base=SimConfig(plant=BENCH_PLANT, profile=PROFILE, noise_std=1e-8),
        controllers=(PidSpec(), SmcSpec(), FostaSpec(TUNED), AnnFsaSpec(TUNED)),
        cases=CASES,
        seeds=SEEDS,
        output_dir=str(out),
    )
    return run_bench(spec), out


def test_criterion_1_fractional_operator_accuracy():
    h = 1e-4
    n = round(1.0 / h)
    t0 = time.perf_counter()
    got = {}
    for xi in (0.5, -0.5):
        ev = FracEvaluator(xi, h=h, n_mem=n + 1)
        val = 0.0
        for i in range(1, n + 1):
            val = ev.step(i * h)
        got[xi] = val
    elapsed = time.perf_counter() - t0
    want = {0.5: 1.0 / math.gamma(1.5),      # D^0.5 t at t=1
            -0.5: 1.0 / math.gamma(2.5)}     # I^0.5 t at t=1
    rel = {xi: abs(got[xi] - want[xi]) / abs(want[xi]) for xi in got}
    ok = all(r < 0.01 for r in rel.values()) and elapsed < 5.0
    report("1 fractional accuracy", ok,
           f"rel err D^+0.5={rel[0.5]:.2e}, D^-0.5={rel[-0.5]:.2e} "
           f"(tol 1e-2), runtime {elapsed:.2f}s (< 5s)")
    assert rel[0.5] < 0.01 and rel[-0.5] < 0.01
    assert elapsed < 5.0


def test_criterion_2_semigroup_composition():
    h = 1e-3
    n = round(1.0 / h)
    inner = FracEvaluator(-0.5, h=h, n_mem=n + 1)
    outer = FracEvaluator(-0.5, h=h, n_mem=n + 1)
    direct = FracEvaluator(-1.0, h=h, n_mem=n + 1)
    chained = plain = 0.0
    for i in range(1, n + 1):
        f = i * h
        chained = outer.step(inner.step(f))
        plain = direct.step(f)
    rel = abs(chained - plain) / abs(plain)
    report("2 semigroup", rel < 0.01,
           f"chained={chained:.6f} vs direct integration={plain:.6f}, "
           f"rel diff {rel:.2e} (tol 1e-2)")
    assert rel < 0.01


def test_criterion_3_gain_conditions():
    res = gain_check(0.2, 500.0, 30.0)
    ok = (abs(res.h1_min - 0.82) < 1e-9
          and abs(res.h2_required - 100.24) < 1e-9
          and not res.satisfied)
    report("3 gain conditions", ok,
           f"h1_min={res.h1_min!r}, h2_required={res.h2_required!r}, "
           f"(500, 30) satisfied={res.satisfied}")
    assert abs(res.h1_min - 0.82) < 1e-9
    assert abs(res.h2_required - 100.24) < 1e-9
    assert not res.satisfied


def test_criterion_4_oracle_cancellation():
    t0 = time.perf_counter()
    compensated = run_episode(SimConfig(
        controller=FostaSpec(TUNED), plant=BENCH_PLANT, profile=PROFILE,
        oracle_compensation=True))
    clean = run_episode(SimConfig(
        controller=FostaSpec(TUNED), plant=PlantParams(), profile=PROFILE))
    elapsed = time.perf_counter() - t0
    za = compensated.trace.column("z")
    zb = clean.trace.column("z")
    rms = float(np.sqrt(np.mean((za - zb) ** 2)))
    per_episode = elapsed / 2.0
    ok = rms < 1e-6 and per_episode < 10.0
    report("4 oracle cancellation", ok,
           f"z-trace rms diff {rms:.2e} (tol 1e-6), "
           f"{per_episode:.2f}s/episode (< 10s)")
    assert rms < 1e-6
    assert per_episode < 10.0


def test_criterion_5_convergence_region():
    h1 = 2.0
    cfg = SimConfig(
        controller=FostaSpec(FostaGains(rho=0.2, h1=h1, h2=required_h2(0.2, h1))),
        plant=PlantParams(),  # no parametric uncertainty: f is the injected wave
        dist=DisturbanceSpec(kind="sinusoid", amplitude=0.03, frequency=1.0),
        profile=PROFILE)
    res = run_episode(cfg)
    assert res.gain is not None and res.gain.satisfied
    m = res.monitor
    ok = (m.frac_outside_region_after_transient < 0.05
          and m.frac_vquad_increase_while_outside < 0.01)
    report("5 convergence region", ok,
           f"gains satisfied, bound={m.region_bound:.3e} "
           f"(empirical eps={m.bound_eps:.4f}), outside "
           f"{m.frac_outside_region_after_transient:.4f} (< 0.05), "
           f"v-quad increase among outside "
           f"{m.frac_vquad_increase_while_outside:.4f} (< 0.01)")
    assert m.frac_outside_region_after_transient < 0.05
    assert m.frac_vquad_increase_while_outside < 0.01


def test_criterion_6_comparative_ordering(benchmark):
    rep, _ = benchmark
    by = {(r.controller, r.case, r.seed): r.rms_um for r in rep.records}
    order_ok = True
    worst = ""
    for case in ("case1", "case2"):
        for seed in SEEDS:
            ann = by[("annfsa", case, seed)]
            fos = by[("fosta", case, seed)]
            pid = by[("pid", case, seed)]
            smc = by[("smc", case, seed)]
            if not (ann < fos < pid < smc):
                order_ok = False
                worst = (f"{case} seed {seed}: ann={ann:.4f} fosta={fos:.4f} "
                         f"pid={pid:.4f} smc={smc:.4f}")
    diffs = {k: abs(rep.mean_rms(k, "case2") - rep.mean_rms(k, "case1"))
             for k in ("pid", "smc", "fosta", "annfsa")}
    diff_ok = all(diffs["annfsa"] < diffs[k] for k in ("pid", "smc", "fosta"))
    detail = (f"per-seed order ANN<FOSTA<PID<SMC "
              f"{'holds' if order_ok else 'violated: ' + worst}; "
              f"|case2-case1| um: "
              + ", ".join(f"{k}={diffs[k]:.4f}" for k in ("pid", "smc",
                                                          "fosta", "annfsa")))
    report("6 comparative ordering", order_ok and diff_ok, detail)
    assert order_ok
    assert diff_ok


def test_criterion_7_nn_learning(benchmark):
    rep, out = benchmark
    clamp_total = sum(r.clamp_count for r in rep.records)
    windows = stroke_windows(PROFILE)
    (w0_lo, w0_hi), (wf_lo, wf_hi) = windows[0], windows[-1]
    ratios = []
    for seed in SEEDS:
        data = read_trace_csv(out / f"trace_annfsa_case1_seed{seed}.csv")
        gap2 = (data["f_hat"] - data["f_true"]) ** 2
        t = data["t"]
        first = float(np.mean(gap2[(t >= w0_lo) & (t < w0_hi)]))
        final = float(np.mean(gap2[(t >= wf_lo) & (t < wf_hi)]))
        ratios.append(final / first)
    worst = max(ratios)
    ok = clamp_total == 0 and worst <= 0.5
    report("7 nn learning", ok,
           f"zero weight clamps: {clamp_total == 0}; "
           f"final/first stroke estimation MSE ratios per seed: "
           + ", ".join(f"{r:.3f}" for r in ratios) + " (need <= 0.5)")
    assert clamp_total == 0
    # The estimator locks onto the lumped uncertainty within milliseconds
    # (see the report line above: the gap is dominated by components that
    # recur identically in every stroke), so this stroke-scale ratio is the
    # honest measurement even where it exceeds the target.
    assert worst <= 0.5


def test_criterion_8_determinism(tmp_path):
    def spec(out):
        return BenchSpec(
            base=SimConfig(plant=BENCH_PLANT, profile=ScanProfile(cycles=1),
                           noise_std=1e-8),
            controllers=(FostaSpec(TUNED), AnnFsaSpec(TUNED)),
            cases=CASES,
            seeds=(1, 2),
            output_dir=str(out),
        )
    run_bench(spec(tmp_path / "first"))
    run_bench(spec(tmp_path / "second"))
    summary_a = (tmp_path / "first" / "summary.csv").read_bytes()
    summary_b = (tmp_path / "second" / "summary.csv").read_bytes()
    traces_equal = all(
        (tmp_path / "first" / f.name).read_bytes() == f.read_bytes()
        for f in sorted((tmp_path / "second").glob("trace_*.csv")))
    ok = summary_a == summary_b and traces_equal
    report("8 determinism", ok,
           f"summary bytes identical: {summary_a == summary_b}, "
           f"all trace bytes identical: {traces_equal}")
    assert summary_a == summary_b
    assert traces_equal
