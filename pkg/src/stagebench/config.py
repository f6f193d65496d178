"""Plain-text configuration for the benchmark CLI.

INI sections map onto the library's dataclasses, one section per subsystem:

    [sim]      h_ctrl h_phys duration noise_std n_mem u_max
    [plant]    a_nom b_nom delta_a delta_b ripple_amp ripple_period coulomb_amp
    [profile]  scan_length scan_velocity accel_limit dwell cycles
    [dist]     kind amplitude frequency
    [pid]      kp ki kd n_filter
    [smc]      lam k_s phi_layer
    [fosta]    alpha1 alpha2 eta a_exp h1 h2 rho
    [rbf]      centers_z centers_zdot widths w_max
    [bench]    controllers cases seeds output_dir workers
    [case.X]   kind amplitude frequency   (per-case disturbance override)

Resolution order: built-in defaults, then the spec file, then command-line
overrides.  ``dump()`` emits the fully resolved text.
"""

from __future__ import annotations

import configparser

from .bench import BenchSpec, CaseSpec
from .controllers import FostaGains
from .plant import DisturbanceSpec, PlantParams
from .simcore import AnnFsaSpec, FostaSpec, PidSpec, SimConfig, SmcSpec
from .trajgen import ScanProfile


class ConfigError(Exception):
    """Invalid or unparsable configuration; mapped to CLI exit code 1."""


DEFAULTS: dict[str, dict[str, str]] = {
    "sim": {
        "h_ctrl": "1e-3",
        "h_phys": "1e-4",
        "duration": "",          # blank: full profile duration
        "noise_std": "1e-8",
        "n_mem": "2000",
        "u_max": "10.0",
        "static_oracle_velocity_tail": "false",
    },
    "plant": {
        "a_nom": "-1.092",
        "b_nom": "3.9124",
        "delta_a": "0.2",
        "delta_b": "-0.1",
        "ripple_amp": "0.02",
        "ripple_period": "0.01",
        "coulomb_amp": "0.0",
    },
    "profile": {
        "scan_length": "0.04",
        "scan_velocity": "0.032",
        "accel_limit": "1.0",
        "dwell": "0.1",
        "cycles": "2",
    },
    "dist": {
        "kind": "none",
        "amplitude": "0.0",
        "frequency": "0.0",
    },
    "pid": {
        "kp": "8000.0",
        "ki": "80000.0",
        "kd": "320.0",
        "n_filter": "100.0",
    },
    "smc": {
        "lam": "175.0",
        "k_s": "2.0",
        "phi_layer": "1e-4",
    },
    "fosta": {
        "alpha1": "0.001",
        "alpha2": "175.0",
        "eta": "0.5",
        "a_exp": "0.5",
        "h1": "5.0",
        "h2": "0.2",
        "rho": "0.2",
    },
    "rbf": {
        "centers_z": "-3 -1 0 1 3",
        "centers_zdot": "-7 -3 0 3 7",
        "widths": "50 50 50 50 50",
        "w_max": "100.0",
    },
    "bench": {
        "controllers": "pid smc fosta annfsa",
        "cases": "case1 case2",
        "seeds": "1 2 3 4 5",
        "output_dir": "bench_out",
        "workers": "1",
    },
    "case.case1": {
        "kind": "none",
    },
    "case.case2": {
        "kind": "sinusoid",
        "amplitude": "0.03",
        "frequency": "1.0",
    },
}

_KNOWN_CONTROLLERS = ("pid", "smc", "fosta", "annfsa")


def load_config(path: str | None = None,
                overrides: dict[str, str] | None = None) -> dict[str, dict[str, str]]:
    """Resolve defaults <- file <- overrides into {section: {key: str}}.

    Override keys use ``section.key`` form, e.g. ``{"bench.seeds": "7"}``.
    """
    resolved = {sec: dict(kv) for sec, kv in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
        for sec in parser.sections():
            if sec not in resolved and not sec.startswith("case."):
                raise ConfigError(f"unknown config section [{sec}]")
            target = resolved.setdefault(sec, {})
            for key, val in parser.items(sec):
                if sec in DEFAULTS and not sec.startswith("case.") \
                        and key not in DEFAULTS[sec]:
                    raise ConfigError(f"unknown key {key!r} in section [{sec}]")
                target[key] = val
    for dotted, val in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must be section.key")
        sec, key = dotted.split(".", 1)
        resolved.setdefault(sec, {})[key] = val
    return resolved


def dump(resolved: dict[str, dict[str, str]]) -> str:
    """Fully resolved configuration as INI text."""
    lines = []
    for sec in resolved:
        lines.append(f"[{sec}]")
        for key, val in resolved[sec].items():
            lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)


def _float(resolved, sec, key) -> float:
    raw = resolved[sec][key]
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not a number") from exc


def _int(resolved, sec, key) -> int:
    raw = resolved[sec][key]
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not an integer") from exc


def _floats(resolved, sec, key) -> tuple[float, ...]:
    raw = resolved[sec][key].replace(",", " ")
    try:
        return tuple(float(tok) for tok in raw.split())
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not a number list") from exc


def _ints(resolved, sec, key) -> tuple[int, ...]:
    raw = resolved[sec][key].replace(",", " ")
    try:
        return tuple(int(tok) for tok in raw.split())
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not an integer list") from exc


def _wrap(builder, what):
    try:
        return builder()
    except ValueError as exc:
        raise ConfigError(f"invalid {what}: {exc}") from exc


def build_plant(resolved) -> PlantParams:
    return _wrap(lambda: PlantParams(
        a_nom=_float(resolved, "plant", "a_nom"),
        b_nom=_float(resolved, "plant", "b_nom"),
        delta_a=_float(resolved, "plant", "delta_a"),
        delta_b=_float(resolved, "plant", "delta_b"),
        ripple_amp=_float(resolved, "plant", "ripple_amp"),
        ripple_period=_float(resolved, "plant", "ripple_period"),
        coulomb_amp=_float(resolved, "plant", "coulomb_amp"),
    ), "plant parameters")


def build_profile(resolved) -> ScanProfile:
    return _wrap(lambda: ScanProfile(
        scan_length=_float(resolved, "profile", "scan_length"),
        scan_velocity=_float(resolved, "profile", "scan_velocity"),
        accel_limit=_float(resolved, "profile", "accel_limit"),
        dwell=_float(resolved, "profile", "dwell"),
        cycles=_int(resolved, "profile", "cycles"),
    ), "scan profile")


def build_dist(resolved, section: str = "dist") -> DisturbanceSpec:
    sec = resolved.get(section)
    if sec is None:
        raise ConfigError(f"missing section [{section}]")
    merged = dict(DEFAULTS["dist"])
    merged.update(sec)
    view = {section: merged}
    return _wrap(lambda: DisturbanceSpec(
        kind=merged["kind"].strip(),
        amplitude=_float(view, section, "amplitude"),
        frequency=_float(view, section, "frequency"),
    ), f"disturbance [{section}]")


def build_gains(resolved) -> FostaGains:
    return _wrap(lambda: FostaGains(
        alpha1=_float(resolved, "fosta", "alpha1"),
        alpha2=_float(resolved, "fosta", "alpha2"),
        eta=_float(resolved, "fosta", "eta"),
        a_exp=_float(resolved, "fosta", "a_exp"),
        h1=_float(resolved, "fosta", "h1"),
        h2=_float(resolved, "fosta", "h2"),
        rho=_float(resolved, "fosta", "rho"),
    ), "super-twisting gains")


def build_controller(resolved, kind: str):
    kind = kind.strip().lower()
    if kind == "pid":
        return _wrap(lambda: PidSpec(
            kp=_float(resolved, "pid", "kp"),
            ki=_float(resolved, "pid", "ki"),
            kd=_float(resolved, "pid", "kd"),
            n_filter=_float(resolved, "pid", "n_filter"),
        ), "pid controller")
    if kind == "smc":
        return _wrap(lambda: SmcSpec(
            lam=_float(resolved, "smc", "lam"),
            k_s=_float(resolved, "smc", "k_s"),
            phi_layer=_float(resolved, "smc", "phi_layer"),
        ), "smc controller")
    if kind == "fosta":
        return FostaSpec(gains=build_gains(resolved))
    if kind == "annfsa":
        from .simcore import RbfSpec
        centers_z = _floats(resolved, "rbf", "centers_z")
        centers_zdot = _floats(resolved, "rbf", "centers_zdot")
        widths = _floats(resolved, "rbf", "widths")
        if not (len(centers_z) == len(centers_zdot) == len(widths)):
            raise ConfigError("[rbf] centers_z, centers_zdot and widths "
                              "must have equal length")
        rbf = _wrap(lambda: RbfSpec(
            centers_z=centers_z, centers_zdot=centers_zdot, widths=widths,
            w_max=_float(resolved, "rbf", "w_max"),
        ), "rbf network")
        return AnnFsaSpec(gains=build_gains(resolved), rbf=rbf)
    raise ConfigError(f"unknown controller {kind!r}; "
                      f"expected one of {_KNOWN_CONTROLLERS}")


def _bool(resolved, sec, key) -> bool:
    raw = resolved[sec][key].strip().lower()
    if raw in ("true", "yes", "on", "1"):
        return True
    if raw in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"[{sec}] {key} = {raw!r} is not a boolean")


def build_sim_config(resolved, controller_kind: str = "fosta",
                     case: str | None = None) -> SimConfig:
    duration_raw = resolved["sim"]["duration"].strip()
    dist = build_dist(resolved, f"case.{case}") if case else build_dist(resolved)
    return _wrap(lambda: SimConfig(
        controller=build_controller(resolved, controller_kind),
        plant=build_plant(resolved),
        dist=dist,
        profile=build_profile(resolved),
        h_ctrl=_float(resolved, "sim", "h_ctrl"),
        h_phys=_float(resolved, "sim", "h_phys"),
        duration=float(duration_raw) if duration_raw else None,
        noise_std=_float(resolved, "sim", "noise_std"),
        n_mem=_int(resolved, "sim", "n_mem"),
        u_max=_float(resolved, "sim", "u_max"),
        static_oracle_velocity_tail=_bool(resolved, "sim",
                                          "static_oracle_velocity_tail"),
    ), "simulation config")


def build_bench_spec(resolved) -> BenchSpec:
    controller_kinds = resolved["bench"]["controllers"].replace(",", " ").split()
    case_names = resolved["bench"]["cases"].replace(",", " ").split()
    seeds = _ints(resolved, "bench", "seeds")
    base = build_sim_config(resolved, controller_kinds[0] if controller_kinds
                            else "fosta")
    controllers = tuple(build_controller(resolved, k) for k in controller_kinds)
    cases = tuple(CaseSpec(name=n, dist=build_dist(resolved, f"case.{n}"))
                  for n in case_names)
    return _wrap(lambda: BenchSpec(
        base=base,
        controllers=controllers,
        cases=cases,
        seeds=seeds,
        output_dir=resolved["bench"]["output_dir"].strip(),
        workers=_int(resolved, "bench", "workers"),
    ), "bench spec")


def parse_grid(resolved) -> dict[str, tuple[float, ...]]:
    grid_sec = resolved.get("grid")
    if not grid_sec:
        raise ConfigError("grid file needs a [grid] section with at least one axis")
    return {key: _floats({"grid": grid_sec}, "grid", key) for key in grid_sec}
