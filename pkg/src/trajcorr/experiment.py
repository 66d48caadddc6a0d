"""Named experiment scenarios: config validation, execution, and tabular output.

A scenario turns a structured config (JSON, strict keys) into one CSV data
file plus a JSON mirror of the same rows and a run manifest.  All floating
point output is printed with 17 significant digits so files round-trip
bit-faithfully; a fixed master seed makes re-runs bitwise identical
regardless of worker count.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .correlations import genuine_correlations_dicke
from .lindblad import integrate_master, trace_distance
from .models import (
    LMGParams,
    ThreeQubitScenario,
    lmg_homodyne_model,
    lmg_spec,
    psi1,
    psi2,
    three_qubit_spec,
)
from .states import (
    DensityOperator,
    StateVector,
    dicke_reduced_state,
    dicke_to_register,
    entropy_of_probabilities,
    partial_trace,
    schmidt_row,
)
from .trajectory import Observable, TrajectoryConfig, run_ensemble

__all__ = [
    "ConfigError",
    "SCENARIOS",
    "load_config",
    "validate_config",
    "run_scenario",
    "steady_state_sampling",
    "SteadyStateStat",
]


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


SCENARIOS = (
    "oracle-check",
    "three-qubit-entropy-cross",
    "three-qubit-beamsplitter",
    "lmg-jump-sweep",
    "lmg-homodyne-sweep",
    "dicke-validate",
)

_INITIAL_STATES = {"psi1": psi1, "psi2": psi2}


# ---------------------------------------------------------------------------
# Config schema
# ---------------------------------------------------------------------------

def _require(section: dict, where: str, schema: dict) -> dict:
    """Check one config section against {key: (type, default-or-None)}.

    Unknown keys are errors; a None default marks the key required.
    """
    unknown = set(section) - set(schema)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    out = {}
    for key, (typ, default) in schema.items():
        if key in section:
            value = section[key]
            if typ is float and isinstance(value, int):
                value = float(value)
            if not isinstance(value, typ):
                raise ConfigError(f"{where}.{key} must be {typ}, got {type(value).__name__}")
            out[key] = value
        elif default is None:
            raise ConfigError(f"missing required key {where}.{key}")
        else:
            out[key] = default
    return out


def _float_list(values, where: str) -> list[float]:
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{where} must be a nonempty list")
    out = []
    for v in values:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"{where} entries must be numbers")
        out.append(float(v))
    return out


_TRAJECTORY_SCHEMA = {
    "dt": (float, None),
    "t_final": (float, None),
    "burn_in": (float, 0.0),
    "record_stride": (int, 1),
    "n_trajectories": (int, None),
}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    if cfg.get("manifest_format") == "trajcorr-run-manifest":
        cfg = cfg.get("config")
        if not isinstance(cfg, dict):
            raise ConfigError("manifest does not embed a config object")
    return cfg


def validate_config(cfg: dict) -> dict:
    """Normalize and fully validate a config; raises ConfigError on any defect."""
    top = _require(cfg, "config", {
        "scenario": (str, None),
        "seed": (int, 12345),
        "output_dir": (str, "out"),
        "model": (dict, {}),
        "trajectory": (dict, {}),
        "sweep": (dict, {}),
    })
    scenario = top["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    validator = _SCENARIO_VALIDATORS[scenario]
    top["model"], top["trajectory"], top["sweep"] = validator(
        top["model"], top["trajectory"], top["sweep"]
    )
    return top


def _validate_three_qubit(model, trajectory, sweep, need_initial="psi1"):
    m = _require(model, "model", {
        "gamma_a": (float, 0.0),
        "gamma_b": (float, None),
        "gamma_c": (float, 0.0),
        "initial_state": (str, need_initial),
    })
    if m["initial_state"] not in _INITIAL_STATES:
        raise ConfigError(f"model.initial_state must be one of {sorted(_INITIAL_STATES)}")
    if max(m["gamma_a"], m["gamma_b"], m["gamma_c"]) <= 0:
        raise ConfigError("at least one decay rate must be positive")
    t = _require(trajectory, "trajectory", _TRAJECTORY_SCHEMA)
    s = _require(sweep, "sweep", {})
    return m, t, s


def _validate_oracle_check(model, trajectory, sweep):
    return _validate_three_qubit(model, trajectory, sweep)


def _validate_entropy_cross(model, trajectory, sweep):
    return _validate_three_qubit(model, trajectory, sweep, need_initial="psi1")


def _validate_beamsplitter(model, trajectory, sweep):
    m = _require(model, "model", {
        "gamma_a": (float, 1.0),
        "gamma_c": (float, 1.0),
        "initial_state": (str, "psi2"),
    })
    if m["initial_state"] not in _INITIAL_STATES:
        raise ConfigError(f"model.initial_state must be one of {sorted(_INITIAL_STATES)}")
    t = _require(trajectory, "trajectory", _TRAJECTORY_SCHEMA)
    s = _require(sweep, "sweep", {"gamma_b_over_a": (list, None)})
    s["gamma_b_over_a"] = _float_list(s["gamma_b_over_a"], "sweep.gamma_b_over_a")
    return m, t, s


def _validate_lmg_jump(model, trajectory, sweep):
    m = _require(model, "model", {
        "gamma_b_over_lambda": (float, 0.2),
        "anisotropy": (float, 0.0),
        "initial_excitations": (int, 0),
    })
    t = _require(trajectory, "trajectory", _TRAJECTORY_SCHEMA)
    s = _require(sweep, "sweep", {
        "h_over_lambda": (list, None),
        "n_qubits": (list, None),
    })
    s["h_over_lambda"] = _float_list(s["h_over_lambda"], "sweep.h_over_lambda")
    s["n_qubits"] = [int(n) for n in s["n_qubits"]]
    if any(n < 2 for n in s["n_qubits"]):
        raise ConfigError("sweep.n_qubits entries must be >= 2")
    return m, t, s


def _validate_lmg_homodyne(model, trajectory, sweep):
    m = _require(model, "model", {
        "gamma_b_over_lambda": (float, 0.2),
        "anisotropy": (float, 0.0),
        "n_qubits": (int, None),
        "h_over_lambda": (float, None),
        "initial_excitations": (int, 0),
    })
    if m["n_qubits"] < 2:
        raise ConfigError("model.n_qubits must be >= 2")
    t = _require(trajectory, "trajectory", _TRAJECTORY_SCHEMA)
    s = _require(sweep, "sweep", {"theta_deg": (list, None)})
    s["theta_deg"] = _float_list(s["theta_deg"], "sweep.theta_deg")
    return m, t, s


def _validate_dicke_validate(model, trajectory, sweep):
    m = _require(model, "model", {
        "n_max_register": (int, 8),
        "n_max_schmidt": (int, 60),
    })
    if m["n_max_register"] > 12:
        raise ConfigError("model.n_max_register above 12 is too large for brute force")
    _require(trajectory, "trajectory", {})
    _require(sweep, "sweep", {})
    return m, {}, {}


_SCENARIO_VALIDATORS = {
    "oracle-check": _validate_oracle_check,
    "three-qubit-entropy-cross": _validate_entropy_cross,
    "three-qubit-beamsplitter": _validate_beamsplitter,
    "lmg-jump-sweep": _validate_lmg_jump,
    "lmg-homodyne-sweep": _validate_lmg_homodyne,
    "dicke-validate": _validate_dicke_validate,
}


# ---------------------------------------------------------------------------
# Observables (module-level so they pickle into worker processes)
# ---------------------------------------------------------------------------

def _single_qubit_entropies(psi: StateVector) -> list[float]:
    """Reduced entropy of each qubit of a pure three-qubit state, in bits.

    Inlines the 2x2 eigenproblem; per-step trajectory sampling calls this
    in the hot loop, so it skips the general partial-trace machinery.
    """
    amps = psi.normalized().amplitudes.reshape(2, 2, 2)
    out = []
    for q in range(3):
        m = np.moveaxis(amps, q, 0).reshape(2, 4)
        g00 = float(np.vdot(m[0], m[0]).real)
        g11 = float(np.vdot(m[1], m[1]).real)
        g01 = complex(np.vdot(m[0], m[1]))
        disc = np.sqrt(max((g00 - g11) ** 2 + 4.0 * abs(g01) ** 2, 0.0))
        half = 0.5 * (g00 + g11)
        out.append(entropy_of_probabilities(
            np.array([half + 0.5 * disc, half - 0.5 * disc])
        ))
    return out


def _three_qubit_obs_func(psi: StateVector) -> np.ndarray:
    s_a, s_b, s_c = _single_qubit_entropies(psi)
    # Canonical cuts in enumeration order are {A}, {A,B}, {A,C}; for a pure
    # state the latter two share entropies with {C} and {B}.  Tie-break and
    # hysteresis mirror genuine_correlations_qubits.
    by_cut = (s_a, s_c, s_b)
    best_min = best_max = None
    arg_min = 0
    for i, entropy in enumerate(by_cut):
        if best_min is None or entropy < best_min - 1e-15:
            best_min, arg_min = entropy, i
        if best_max is None or entropy > best_max + 1e-15:
            best_max = entropy
    return np.array([
        max(best_min, 0.0), best_max, float(arg_min), s_a, s_b, s_c,
    ])


THREE_QUBIT_OBSERVABLE = Observable(
    names=("corr_min", "corr_max", "argmin_cut", "entropy_a", "entropy_b", "entropy_c"),
    func=_three_qubit_obs_func,
)


def _dicke_obs_func(psi: StateVector) -> np.ndarray:
    sample = genuine_correlations_dicke(psi)
    return np.array([
        sample.value, sample.max_value,
        float(sample.argmin.block_size), float(sample.argmax.block_size),
    ])


DICKE_OBSERVABLE = Observable(
    names=("corr_min", "corr_max", "argmin_block", "argmax_block"),
    func=_dicke_obs_func,
)


# ---------------------------------------------------------------------------
# Steady-state statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyStateStat:
    """Time-averaged steady-state statistics of one ensemble observable."""

    mean: float
    stderr: float
    first_half_mean: float
    second_half_mean: float
    nonstationary: bool

    @classmethod
    def from_samples(cls, per_trajectory: np.ndarray) -> "SteadyStateStat":
        """``per_trajectory``: (n_trajectories, n_times) samples at t >= burn_in.

        Each trajectory's window average is one independent sample; the
        stationarity flag compares the first and second halves of the
        window at two combined standard errors.
        """
        n_traj, n_times = per_trajectory.shape
        traj_means = per_trajectory.mean(axis=1)
        mean = float(traj_means.mean())
        stderr = float(traj_means.std(ddof=1) / np.sqrt(n_traj)) if n_traj > 1 else float("nan")
        half = n_times // 2
        first = per_trajectory[:, :half] if half else per_trajectory
        second = per_trajectory[:, half:]
        fm, sm = first.mean(axis=1), second.mean(axis=1)
        f_mean, s_mean = float(fm.mean()), float(sm.mean())
        if n_traj > 1 and half:
            combined = np.sqrt(fm.var(ddof=1) / n_traj + sm.var(ddof=1) / n_traj)
            nonstat = abs(f_mean - s_mean) > 2 * combined if combined > 0 else False
        else:
            nonstat = False
        return cls(mean, stderr, f_mean, s_mean, bool(nonstat))


def steady_state_sampling(result, name: str) -> SteadyStateStat:
    """Steady-state statistics of one named observable of an EnsembleResult.

    The result is expected to have been recorded with burn_in set, so every
    recorded time belongs to the sampling window.
    """
    idx = result.names.index(name)
    return SteadyStateStat.from_samples(result.samples[:, idx, :])


def _mode(values: np.ndarray) -> int:
    ints, counts = np.unique(values.astype(int), return_counts=True)
    return int(ints[np.argmax(counts)])


# ---------------------------------------------------------------------------
# Scenario runners (each returns (column names, rows, warnings, counts))
# ---------------------------------------------------------------------------

def _traj_config(t: dict, method: str, seed: int, theta: float = 0.0) -> TrajectoryConfig:
    return TrajectoryConfig(
        method=method, dt=t["dt"], t_final=t["t_final"], burn_in=t["burn_in"],
        record_stride=t["record_stride"], n_trajectories=t["n_trajectories"],
        master_seed=seed, theta=theta,
    )


def _point_seed(master_seed: int, point_index: int) -> int:
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(point_index, 0xE5CA1A))
    return int(seq.generate_state(1, np.uint64)[0])


def _run_oracle_check(cfg, threads):
    m, t = cfg["model"], cfg["trajectory"]
    scen = ThreeQubitScenario(m["gamma_a"], m["gamma_b"], m["gamma_c"])
    spec = three_qubit_spec(scen)
    psi0 = _INITIAL_STATES[m["initial_state"]]()
    config = _traj_config(t, "jump", cfg["seed"])
    result = run_ensemble(psi0, spec, config, [THREE_QUBIT_OBSERVABLE], n_threads=threads)
    _, oracle = integrate_master(
        spec, DensityOperator.from_state(psi0), t["dt"], t["t_final"],
        record_stride=t["record_stride"],
    )
    # integrate_master records on the same stride grid; align by index.
    recon = result.density_matrices()
    rows = []
    for i, tt in enumerate(result.times):
        rows.append({
            "time": tt,
            "trace_distance": trace_distance(recon[i], oracle[i].matrix),
            "n_trajectories": config.n_trajectories,
        })
    cols = ["time", "trace_distance", "n_trajectories"]
    return cols, rows, [], {"trajectories": config.n_trajectories}


def _three_qubit_rows(result, extra: dict) -> list[dict]:
    rows = []
    for i, tt in enumerate(result.times):
        row = dict(extra)
        row["time"] = tt
        for name in result.names:
            row[f"{name}_mean"] = result.mean(name)[i]
            if name != "argmin_cut":
                row[f"{name}_stderr"] = result.stderr(name)[i]
        row["argmin_cut_mode"] = _mode(result.samples[:, result.names.index("argmin_cut"), i])
        del row["argmin_cut_mean"]
        rows.append(row)
    return rows


def _run_entropy_cross(cfg, threads):
    m, t = cfg["model"], cfg["trajectory"]
    scen = ThreeQubitScenario(m["gamma_a"], m["gamma_b"], m["gamma_c"])
    spec = three_qubit_spec(scen)
    psi0 = _INITIAL_STATES[m["initial_state"]]()
    config = _traj_config(t, "jump", cfg["seed"])
    result = run_ensemble(psi0, spec, config, [THREE_QUBIT_OBSERVABLE], n_threads=threads)
    rows = _three_qubit_rows(result, {})
    # Min over the ensemble-averaged single-qubit entropies: the alternative
    # reading of the averaged minimum, emitted alongside for comparison.
    for i, row in enumerate(rows):
        row["min_of_mean_entropies"] = min(
            row["entropy_a_mean"], row["entropy_b_mean"], row["entropy_c_mean"]
        )
    cols = list(rows[0].keys())
    return cols, rows, [], {"trajectories": config.n_trajectories}


def _run_beamsplitter(cfg, threads):
    m, t, s = cfg["model"], cfg["trajectory"], cfg["sweep"]
    psi0 = _INITIAL_STATES[m["initial_state"]]()
    rows, counts = [], {}
    for point, ratio in enumerate(s["gamma_b_over_a"]):
        scen = ThreeQubitScenario(
            m["gamma_a"], ratio * m["gamma_a"], m["gamma_c"],
            unraveling="beam_splitter_ab",
        )
        spec = three_qubit_spec(scen)
        config = _traj_config(t, "jump", _point_seed(cfg["seed"], point))
        result = run_ensemble(psi0, spec, config, [THREE_QUBIT_OBSERVABLE], n_threads=threads)
        rows.extend(_three_qubit_rows(result, {"gamma_b_over_a": ratio}))
        counts[f"gamma_b_over_a={ratio:g}"] = config.n_trajectories
    cols = list(rows[0].keys())
    return cols, rows, [], counts


def _dicke_point_rows(result, extra: dict) -> tuple[dict, bool]:
    stat_min = steady_state_sampling(result, "corr_min")
    stat_max = steady_state_sampling(result, "corr_max")
    argmin_samples = result.samples[:, result.names.index("argmin_block"), :]
    row = dict(extra)
    row.update({
        "corr_min_mean": stat_min.mean,
        "corr_min_stderr": stat_min.stderr,
        "corr_max_mean": stat_max.mean,
        "corr_max_stderr": stat_max.stderr,
        "argmin_block_mode": _mode(argmin_samples),
        "stationary": int(not stat_min.nonstationary),
    })
    return row, stat_min.nonstationary


def _run_lmg_jump(cfg, threads):
    m, t, s = cfg["model"], cfg["trajectory"], cfg["sweep"]
    rows, warnings, counts = [], [], {}
    point = 0
    for n in s["n_qubits"]:
        for h in s["h_over_lambda"]:
            params = LMGParams(
                h=h, coupling=1.0, n_qubits=n,
                gamma_collective=m["gamma_b_over_lambda"], anisotropy=m["anisotropy"],
            )
            spec = lmg_spec(params)
            psi0 = StateVector.dicke(np.eye(n + 1)[m["initial_excitations"]], n)
            config = _traj_config(t, "jump", _point_seed(cfg["seed"], point))
            result = run_ensemble(psi0, spec, config, [DICKE_OBSERVABLE], n_threads=threads)
            row, nonstat = _dicke_point_rows(
                result, {"n_qubits": n, "h_over_lambda": h}
            )
            rows.append(row)
            if nonstat:
                warnings.append(
                    f"steady-state window may not be converged at N={n}, h/lambda={h:g}"
                )
            counts[f"N={n},h={h:g}"] = config.n_trajectories
            point += 1
    cols = list(rows[0].keys())
    return cols, rows, warnings, counts


def _run_lmg_homodyne(cfg, threads):
    m, t, s = cfg["model"], cfg["trajectory"], cfg["sweep"]
    params = LMGParams(
        h=m["h_over_lambda"], coupling=1.0, n_qubits=m["n_qubits"],
        gamma_collective=m["gamma_b_over_lambda"], anisotropy=m["anisotropy"],
    )
    psi0 = StateVector.dicke(
        np.eye(m["n_qubits"] + 1)[m["initial_excitations"]], m["n_qubits"]
    )
    rows, warnings, counts = [], [], {}
    for point, theta_deg in enumerate(s["theta_deg"]):
        theta = np.deg2rad(theta_deg)
        model = lmg_homodyne_model(params, theta)
        config = _traj_config(t, "diffusive", _point_seed(cfg["seed"], point), theta=theta)
        result = run_ensemble(psi0, model, config, [DICKE_OBSERVABLE], n_threads=threads)
        row, nonstat = _dicke_point_rows(result, {"theta_deg": theta_deg})
        rows.append(row)
        if nonstat:
            warnings.append(
                f"steady-state window may not be converged at theta={theta_deg:g} deg"
            )
        counts[f"theta={theta_deg:g}deg"] = config.n_trajectories
    cols = list(rows[0].keys())
    return cols, rows, warnings, counts


def _run_dicke_validate(cfg, threads):
    m = cfg["model"]
    rows = []
    for n in range(2, m["n_max_register"] + 1):
        worst = 0.0
        for exc in range(n + 1):
            register = dicke_to_register(exc, n)
            symmetric = StateVector.dicke(np.eye(n + 1)[exc], n)
            for n1 in range(1, n):
                fast = sorted(np.linalg.eigvalsh(dicke_reduced_state(symmetric, n1).matrix))
                brute = np.linalg.eigvalsh(partial_trace(register, range(n1, n)).matrix)
                brute = sorted(v for v in brute if v > 1e-13) or [0.0]
                fast = [v for v in fast if v > 1e-13] or [0.0]
                worst = max(worst, float(np.max(np.abs(
                    np.array(fast) - np.array(brute)
                ))))
        rows.append({"n_qubits": n, "check": "register_agreement", "max_deviation": worst})
    for n in range(2, m["n_max_schmidt"] + 1):
        worst = 0.0
        for exc in range(n + 1):
            for n1 in range(1, n):
                coeffs = schmidt_row(exc, n, n1).coefficients
                worst = max(worst, abs(float((coeffs**2).sum()) - 1.0))
        rows.append({"n_qubits": n, "check": "schmidt_normalization", "max_deviation": worst})
    cols = ["n_qubits", "check", "max_deviation"]
    return cols, rows, [], {}


_SCENARIO_RUNNERS = {
    "oracle-check": _run_oracle_check,
    "three-qubit-entropy-cross": _run_entropy_cross,
    "three-qubit-beamsplitter": _run_beamsplitter,
    "lmg-jump-sweep": _run_lmg_jump,
    "lmg-homodyne-sweep": _run_lmg_homodyne,
    "dicke-validate": _run_dicke_validate,
}


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def _format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _manifest_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _write_csv(path: Path, cols, rows, header_lines):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_format_value(row[c]) for c in cols) + "\n")


def run_scenario(cfg: dict, threads: int = 1, out_dir=None, seed=None) -> dict:
    """Validate, execute, and write one scenario; returns output paths.

    Raises ConfigError before any compute on a bad config; numerical
    failures (StepSizeError, TrajectoryError) propagate to the caller.
    """
    cfg = validate_config(cfg)
    if seed is not None:
        cfg["seed"] = int(seed)
    directory = Path(out_dir if out_dir is not None else cfg["output_dir"])
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {directory} is not writable: {exc}") from exc

    scenario = cfg["scenario"]
    started = time.time()
    cols, rows, warnings, counts = _SCENARIO_RUNNERS[scenario](cfg, threads)
    elapsed = time.time() - started

    mhash = _manifest_hash(cfg)
    header = [
        f"scenario: {scenario}",
        f"manifest_hash: {mhash}",
        "qubit order: A most significant; |1> = excited",
        "correlations in bits; times in inverse rate units of the model "
        "(1/gamma for three-qubit runs, 1/lambda for collective-spin runs)",
    ]
    base = directory / scenario
    csv_path = base.with_suffix(".csv")
    json_path = base.with_suffix(".json")
    manifest_path = directory / f"{scenario}.manifest.json"
    _write_csv(csv_path, cols, rows, header)
    with open(json_path, "w") as fh:
        json.dump({
            "scenario": scenario, "manifest_hash": mhash, "columns": cols,
            "rows": [{c: row[c] for c in cols} for row in rows],
        }, fh, indent=1, default=float)
        fh.write("\n")
    manifest = {
        "manifest_format": "trajcorr-run-manifest",
        "manifest_hash": mhash,
        "config": cfg,
        "master_seed": cfg["seed"],
        "code_version": __version__,
        "trajectory_counts": counts,
        "wall_clock_seconds": elapsed,
        "warnings": warnings,
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    return {"csv": csv_path, "json": json_path, "manifest": manifest_path,
            "warnings": warnings}
