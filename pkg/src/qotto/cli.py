"""Configuration-driven experiment runner.

A flat key=value config selects one of four modes:

    quasistatic     closed-form cycle report only, no simulation
    dynamic_cycle   finite-speed Otto cycle: hold / ramp / hold / ramp,
                    repeated, with per-stroke work and heat bookkeeping
    quench          sudden frequency jump on a thermal state
    sweep_squeezing energy-entropy and delta tables versus squeezing

Outputs are `<prefix>_timeseries.csv` (fixed column contract) and
`<prefix>_summary.json`; both are byte-reproducible for a fixed seed,
with any number of workers.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import entropy as entropy_mod
from .ensemble import (
    BathSpec,
    Ensemble,
    FrequencySchedule,
    Hold,
    Jump,
    LinearRamp,
    Snapshot,
    SnapshotContext,
    evolve_schedule,
    sample_squeezed_thermal,
)
from .thermo import CycleReport, QuasistaticCycle, Reservoir, quasistatic_report

__all__ = [
    "ExperimentConfig",
    "CycleSummary",
    "SimulatedCycle",
    "QuenchResult",
    "SqueezingSweep",
    "parse_config",
    "serialize_config",
    "run_experiment",
    "write_timeseries",
    "write_summary",
    "main",
]

MODES = ("quasistatic", "dynamic_cycle", "quench", "sweep_squeezing")
CSV_HEADER = "t,omega,E,n_mean,s,beta,S_E,S_qc,stderr_E"

N_CYCLES = 4          # simulated cycles; the first is transient, the rest are measured
OBSERVER_INTERVAL = 1.0   # time units between snapshots
QUENCH_SETTLE = 2.0       # isolated evolution time after the jump

_DEFAULTS = {
    "gamma_c": 0.5,
    "gamma_h": 0.5,
    "ramp_duration": 50.0,
    "hold_duration": 36.0,
    "particles": 20_000,
    "dt": 0.005,
    "seed": 7,
    "n_max": 64,
    "cell_side": 1.0,
    "output_prefix": "experiment",
}

_FLOAT_KEYS = {
    "omega_c", "omega_h", "T_c", "T_h", "gamma_c", "gamma_h",
    "ramp_duration", "hold_duration", "dt", "cell_side",
}
_INT_KEYS = {"particles", "seed", "n_max"}
_REQUIRED = ("mode", "omega_c", "omega_h", "T_c", "T_h")
_ALL_KEYS = set(_REQUIRED) | set(_DEFAULTS)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    omega_c: float
    omega_h: float
    T_c: float
    T_h: float
    gamma_c: float = _DEFAULTS["gamma_c"]
    gamma_h: float = _DEFAULTS["gamma_h"]
    ramp_duration: float = _DEFAULTS["ramp_duration"]
    hold_duration: float = _DEFAULTS["hold_duration"]
    particles: int = _DEFAULTS["particles"]
    dt: float = _DEFAULTS["dt"]
    seed: int = _DEFAULTS["seed"]
    n_max: int = _DEFAULTS["n_max"]
    cell_side: float = _DEFAULTS["cell_side"]
    output_prefix: str = _DEFAULTS["output_prefix"]

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode: must be one of {MODES}, got {self.mode!r}")
        # Reservoir/cycle constructors enforce positivity and omega ordering.
        self.cycle()
        if self.gamma_c < 0 or self.gamma_h < 0:
            raise ValueError("gamma_c/gamma_h: decay rates must be >= 0")
        if self.mode == "dynamic_cycle" and self.ramp_duration <= 0:
            raise ValueError("ramp_duration: must be > 0 for dynamic_cycle")
        if self.hold_duration <= 0:
            raise ValueError("hold_duration: must be > 0")
        if self.particles < 1:
            raise ValueError("particles: must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt: must be > 0")
        if self.omega_h * self.dt > 0.1:
            raise ValueError(
                f"dt: omega_h*dt = {self.omega_h * self.dt:.4g} exceeds the "
                f"stability guard 0.1"
            )
        if self.n_max < 16:
            raise ValueError("n_max: must be >= 16")
        if self.cell_side < 1.0:
            raise ValueError("cell_side: must be >= 1")

    def cycle(self) -> QuasistaticCycle:
        try:
            return QuasistaticCycle(
                cold=Reservoir(self.omega_c, self.T_c),
                hot=Reservoir(self.omega_h, self.T_h),
            )
        except ValueError as exc:
            raise ValueError(f"omega_c/omega_h/T_c/T_h: {exc}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse a flat `key = value` document (`#` starts a comment)."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in _ALL_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key in _INT_KEYS:
                values[key] = int(val)
            else:
                values[key] = val
        except ValueError as exc:
            raise ValueError(f"{key}: cannot parse {val!r}: {exc}") from exc
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ValueError(f"missing required key(s): {', '.join(missing)}")
    return ExperimentConfig(**values)  # type: ignore[arg-type]


def serialize_config(config: ExperimentConfig) -> str:
    """Emit a config document that parses back to an equal config."""
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in dataclasses.fields(config)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# summary records


@dataclass(frozen=True)
class SimulatedCycle:
    """Per-stroke bookkeeping of the simulated limit cycle.

    Works are energy changes on the isolated ramps, heats energy changes on
    the bath holds; r > 0 means net work delivered by the system.  The
    transient first cycle is discarded and the remaining cycles averaged;
    standard errors come from per-particle paired differences.
    """

    r: float
    r_stderr: float
    q_hot: float
    q_hot_stderr: float
    q_cold: float
    efficiency: Optional[float]
    efficiency_stderr: Optional[float]
    cop: Optional[float]
    max_squeezing_compression: float
    max_squeezing_expansion: float
    peak_s_e: float
    peak_s_qc: float
    cycle_energy_change: float
    relaxation_converged: bool
    r_gap: float
    r_gap_relative: float


@dataclass(frozen=True)
class QuenchResult:
    measured_s: float
    expected_s: float
    s_e_before: float
    s_e_after: float
    occupation_change: float
    delta_e_analytic: float
    delta_s_e_analytic: float


@dataclass(frozen=True)
class SqueezingSweep:
    """Energy entropy and squeezing shifts versus s at fixed omega/T."""

    x: float
    s_values: tuple[float, ...]
    s_e_exact: tuple[float, ...]
    s_e_approx: tuple[float, ...]
    delta_s_values: tuple[float, ...]
    delta_e: tuple[float, ...]
    delta_s_e: tuple[float, ...]


@dataclass(frozen=True)
class CycleSummary:
    mode: str
    analytic: CycleReport
    simulated: Optional[SimulatedCycle] = None
    quench: Optional[QuenchResult] = None
    sweep: Optional[SqueezingSweep] = None
    seed: Optional[int] = None
    particles: Optional[int] = None


# ---------------------------------------------------------------------------
# experiment driver


def _entropy_observer(config: ExperimentConfig, boundary_r2: dict[int, np.ndarray]):
    """Observer hook: entropy fields per snapshot, r^2 capture per boundary."""

    def hook(ens: Ensemble, ctx: SnapshotContext):
        if ctx.boundary:
            boundary_r2[ctx.segment] = ens.radius_squared().copy()
        pops = entropy_mod.populations_from_ensemble(ens, config.n_max)
        return {
            "s_e": entropy_mod.energy_entropy(pops),
            "s_qc": entropy_mod.quasiclassical_entropy(ens, config.cell_side),
        }

    return hook


def _cold_thermal(config: ExperimentConfig) -> Ensemble:
    from .thermo import nu_kappa

    nu_c, _ = nu_kappa(config.omega_c, config.T_c)
    return sample_squeezed_thermal(nu_c, 1.0, 0.0, config.particles, config.seed)


def _stderr_of_mean(v: np.ndarray) -> float:
    return float(v.std() / math.sqrt(len(v)))


def _run_dynamic_cycle(config: ExperimentConfig, workers: int):
    analytic = quasistatic_report(config.cycle())
    bath_c = BathSpec(config.gamma_c, config.T_c)
    bath_h = BathSpec(config.gamma_h, config.T_h)

    cycle_segments = [
        Hold(config.omega_c, config.hold_duration, bath_c),
        LinearRamp(config.omega_c, config.omega_h, config.ramp_duration),
        Hold(config.omega_h, config.hold_duration, bath_h),
        LinearRamp(config.omega_h, config.omega_c, config.ramp_duration),
    ]
    # Close the last cycle with one more cold hold so the DA heat is measurable.
    segments = cycle_segments * N_CYCLES + [Hold(config.omega_c, config.hold_duration, bath_c)]
    schedule = FrequencySchedule(segments)

    boundary_r2: dict[int, np.ndarray] = {}
    observer = _entropy_observer(config, boundary_r2)
    stride = max(1, round(OBSERVER_INTERVAL / config.dt))
    snapshots = evolve_schedule(
        _cold_thermal(config), schedule, config.dt, stride, workers=workers, observer=observer
    )

    # Measured cycles: every full cycle after the transient first one.
    # Cycle m (0-based) spans segments 4m .. 4m+3; its boundary energies are
    # A = end of 4m, B = end of 4m+1, C, D likewise, A' = end of 4m+4.
    w_c, w_h = config.omega_c, config.omega_h
    per_r_parts = []
    per_q_hot_parts = []
    per_q_cold_parts = []
    for m in range(1, N_CYCLES):
        a, b, c, d, a2 = (boundary_r2[4 * m + j] for j in range(5))
        per_r_parts.append((w_c * a - w_h * b) + (w_h * c - w_c * d))
        per_q_hot_parts.append(w_h * (c - b))
        per_q_cold_parts.append(w_c * (a2 - d))
    per_r = np.concatenate(per_r_parts)
    per_q_hot = np.concatenate(per_q_hot_parts)
    per_q_cold = np.concatenate(per_q_cold_parts)
    r_sim = float(per_r.mean())
    q_hot = float(per_q_hot.mean())
    q_cold = float(per_q_cold.mean())
    r_se = _stderr_of_mean(per_r)
    q_hot_se = _stderr_of_mean(per_q_hot)

    efficiency = eff_se = cop = None
    if analytic.mode.value == "heat_engine" and q_hot != 0.0:
        efficiency = r_sim / q_hot
        n = len(per_r)
        cov = float(np.cov(per_r, per_q_hot, bias=True)[0, 1]) / n
        var = (
            (r_se / q_hot) ** 2
            + (r_sim * q_hot_se / q_hot**2) ** 2
            - 2.0 * r_sim * cov / q_hot**3
        )
        eff_se = math.sqrt(max(var, 0.0))
    elif analytic.mode.value == "refrigerator" and r_sim != 0.0:
        cop = -q_cold / r_sim

    measured = [s for s in snapshots if 4 <= s.segment <= 4 * N_CYCLES]
    comp_segs = {4 * m + 1 for m in range(1, N_CYCLES)}
    exp_segs = {4 * m + 3 for m in range(1, N_CYCLES)}
    max_sq_comp = max(s.squeezing_s for s in measured if s.segment in comp_segs)
    max_sq_exp = max(s.squeezing_s for s in measured if s.segment in exp_segs)
    peak_s_e = max(s.s_e for s in measured if s.s_e is not None)
    peak_s_qc = max(s.s_qc for s in measured if s.s_qc is not None)

    converged = True
    last = 4 * (N_CYCLES - 1)
    for hold_seg in (last, last + 2, last + 4):
        inside = [s for s in snapshots if s.segment == hold_seg]
        if len(inside) >= 2:
            a, b = inside[-2], inside[-1]
            tol = 4.0 * math.hypot(a.energy_stderr, b.energy_stderr)
            if abs(b.energy - a.energy) > tol:
                converged = False
                warnings.warn(
                    f"hold segment {hold_seg} not converged: dE = "
                    f"{b.energy - a.energy:.3e} exceeds {tol:.3e}; increase "
                    f"hold_duration or gamma",
                    stacklevel=2,
                )

    mean_cycle_de = float(
        (w_c * (boundary_r2[4 * N_CYCLES] - boundary_r2[4])).mean() / (N_CYCLES - 1)
    )
    simulated = SimulatedCycle(
        r=r_sim,
        r_stderr=r_se,
        q_hot=q_hot,
        q_hot_stderr=q_hot_se,
        q_cold=q_cold,
        efficiency=efficiency,
        efficiency_stderr=eff_se,
        cop=cop,
        max_squeezing_compression=max_sq_comp,
        max_squeezing_expansion=max_sq_exp,
        peak_s_e=peak_s_e,
        peak_s_qc=peak_s_qc,
        cycle_energy_change=mean_cycle_de,
        relaxation_converged=converged,
        r_gap=r_sim - analytic.R,
        r_gap_relative=(r_sim - analytic.R) / analytic.R if analytic.R != 0 else math.nan,
    )
    summary = CycleSummary(
        mode=config.mode,
        analytic=analytic,
        simulated=simulated,
        seed=config.seed,
        particles=config.particles,
    )
    return snapshots, summary


def _run_quench(config: ExperimentConfig, workers: int):
    analytic = quasistatic_report(config.cycle())
    bath_c = BathSpec(config.gamma_c, config.T_c)
    schedule = FrequencySchedule(
        [
            Hold(config.omega_c, config.hold_duration, bath_c),
            Jump(config.omega_h),
            Hold(config.omega_h, QUENCH_SETTLE, None),
        ]
    )
    observer = _entropy_observer(config, {})
    stride = max(1, round(OBSERVER_INTERVAL / config.dt))
    snapshots = evolve_schedule(
        _cold_thermal(config), schedule, config.dt, stride, workers=workers, observer=observer
    )
    pre = next(s for s in snapshots if s.segment == 0 and s.boundary)
    post = next(s for s in snapshots if s.segment == 1 and s.boundary)

    x = config.omega_c / config.T_c
    s_expected = config.omega_h / config.omega_c
    d_e, d_s_e = entropy_mod.squeezing_deltas(x, s_expected, config.n_max)
    quench = QuenchResult(
        measured_s=post.squeezing_s,
        expected_s=s_expected,
        s_e_before=pre.s_e,
        s_e_after=post.s_e,
        occupation_change=post.mean_occupation - pre.mean_occupation,
        delta_e_analytic=d_e,
        delta_s_e_analytic=d_s_e,
    )
    summary = CycleSummary(
        mode=config.mode,
        analytic=analytic,
        quench=quench,
        seed=config.seed,
        particles=config.particles,
    )
    return snapshots, summary


def _run_sweep(config: ExperimentConfig):
    analytic = quasistatic_report(config.cycle())
    x = config.omega_c / config.T_c
    kappa = math.tanh(0.5 * x)
    s_values = tuple(round(1.0 + 0.05 * k, 2) for k in range(11))  # 1.00 .. 1.50
    s_e_exact = []
    s_e_approx = []
    for s in s_values:
        exact = entropy_mod.populations_squeezed_thermal_exact(kappa, s, config.n_max)
        approx = entropy_mod.populations_squeezed_thermal_approx(x, s, config.n_max)
        s_e_exact.append(entropy_mod.energy_entropy(exact))
        s_e_approx.append(entropy_mod.energy_entropy(approx))
    delta_s = tuple(float(v) for v in 1.0 + np.geomspace(0.02, 0.2, 9))
    deltas = [entropy_mod.squeezing_deltas(x, s, config.n_max) for s in delta_s]
    sweep = SqueezingSweep(
        x=x,
        s_values=s_values,
        s_e_exact=tuple(s_e_exact),
        s_e_approx=tuple(s_e_approx),
        delta_s_values=delta_s,
        delta_e=tuple(d[0] for d in deltas),
        delta_s_e=tuple(d[1] for d in deltas),
    )
    summary = CycleSummary(mode=config.mode, analytic=analytic, sweep=sweep)
    return [], summary


def run_experiment(
    config: ExperimentConfig, workers: int = 1
) -> tuple[list[Snapshot], CycleSummary]:
    """Run the configured experiment; returns (timeseries, summary).

    The timeseries is empty for the purely analytic modes (quasistatic,
    sweep_squeezing).  Identical config and seed give identical results
    for any `workers`.
    """
    if config.mode == "quasistatic":
        return [], CycleSummary(mode=config.mode, analytic=quasistatic_report(config.cycle()))
    if config.mode == "dynamic_cycle":
        return _run_dynamic_cycle(config, workers)
    if config.mode == "quench":
        return _run_quench(config, workers)
    if config.mode == "sweep_squeezing":
        return _run_sweep(config)
    raise ValueError(f"unknown mode {config.mode!r}")


# ---------------------------------------------------------------------------
# output writers


def _fmt(v: Optional[float]) -> str:
    if v is None:
        return "nan"
    return repr(float(v))


def write_timeseries(snapshots: list[Snapshot], path: str | Path) -> None:
    """Write snapshots as CSV with the fixed column contract."""
    if not snapshots:
        raise ValueError("refusing to write an empty timeseries")
    path = Path(path)
    try:
        with path.open("w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for s in snapshots:
                fh.write(
                    ",".join(
                        [
                            _fmt(s.time),
                            _fmt(s.omega),
                            _fmt(s.energy),
                            _fmt(s.mean_occupation),
                            _fmt(s.squeezing_s),
                            _fmt(s.beta_ratio),
                            _fmt(s.s_e),
                            _fmt(s.s_qc),
                            _fmt(s.energy_stderr),
                        ]
                    )
                    + "\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write timeseries to {path}: {exc}") from exc


def _jsonify(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if dataclasses.is_dataclass(obj):
        out = {}
        for f in dataclasses.fields(obj):
            key = "lambda" if f.name == "lam" else f.name
            out[key] = _jsonify(getattr(obj, f.name))
        return out
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(float(v)) for v in obj]
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def write_summary(summary: CycleSummary, path: str | Path) -> None:
    """Write the summary as a single JSON document."""
    path = Path(path)
    try:
        with path.open("w", newline="\n") as fh:
            json.dump(_jsonify(summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write summary to {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# entry point


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qotto",
        description="Oscillator Otto-cycle phase-space simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("config", help="path to a key=value config file")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument(
        "--particles", type=int, default=None, help="override the particle count"
    )
    run_p.add_argument(
        "--workers", type=int, default=1, help="worker threads (result-invariant)"
    )
    run_p.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        if args.particles is not None:
            config = dataclasses.replace(config, particles=args.particles)
        snapshots, summary = run_experiment(config, workers=max(1, args.workers))
        summary_path = f"{config.output_prefix}_summary.json"
        write_summary(summary, summary_path)
        written = [summary_path]
        if snapshots:
            ts_path = f"{config.output_prefix}_timeseries.csv"
            write_timeseries(snapshots, ts_path)
            written.append(ts_path)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(f"mode={config.mode} seed={config.seed} particles={config.particles}")
        for p in written:
            print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
