"""Stochastic unraveling engines: quantum jumps and diffusive (homodyne) noise.

Each trajectory owns a counter-based random stream derived from
(master_seed, trajectory_index), so ensembles are reproducible bit-for-bit
regardless of how the work is scheduled.  Ensemble aggregation runs over
fixed-size blocks combined in index order, which makes parallel and serial
runs produce identical results.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import expm

from .lindblad import LindbladSpec, StepSizeError, effective_hamiltonian
from .states import DensityOperator, StateVector

__all__ = [
    "TrajectoryConfig",
    "TrajectoryRecord",
    "EnsembleResult",
    "DiffusiveModel",
    "Observable",
    "TrajectoryError",
    "jump_step",
    "run_jump_trajectory",
    "diffusive_step",
    "run_diffusive_trajectory",
    "run_ensemble",
    "reconstruction_noise_scale",
    "trajectory_rng",
]

JUMP_PROBABILITY_GUARD = 0.1
ENSEMBLE_BLOCK = 32  # trajectories per aggregation block; fixed for determinism


class TrajectoryError(RuntimeError):
    """A stochastic integration step failed (guard violation or blow-up)."""


@dataclass(frozen=True)
class TrajectoryConfig:
    """Integrator choice and ensemble bookkeeping for a trajectory run."""

    method: str  # "jump" or "diffusive"
    dt: float
    t_final: float
    n_trajectories: int
    master_seed: int
    burn_in: float = 0.0
    record_stride: int = 1
    theta: float = 0.0  # homodyne angle in radians (diffusive only)

    def __post_init__(self):
        if self.method not in ("jump", "diffusive"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.burn_in > self.t_final:
            raise ValueError("burn_in must not exceed t_final")
        if self.n_trajectories < 1:
            raise ValueError("need at least one trajectory")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def record_steps(self) -> np.ndarray:
        """Step indices at which states are recorded (stride grid past burn-in)."""
        steps = np.arange(0, self.n_steps + 1, self.record_stride)
        steps = steps[steps * self.dt >= self.burn_in * (1 - 1e-12)]
        if len(steps) == 0 or steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps


@dataclass(frozen=True)
class TrajectoryRecord:
    """Recorded pure states of a single stochastic realization."""

    times: np.ndarray
    states: np.ndarray  # (n_recorded, dim) complex, each row normalized
    n_parties: int
    basis: str
    jump_log: tuple[tuple[float, int], ...] = ()

    def state(self, i: int) -> StateVector:
        return StateVector(self.states[i], self.n_parties, self.basis)

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class DiffusiveModel:
    """Single-channel homodyne model: Hamiltonian plus one jump operator.

    The jump operator carries the detection phase; the monitored quadrature
    is L + L^dag.
    """

    hamiltonian: np.ndarray
    jump: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=np.complex128)
        l = np.asarray(self.jump, dtype=np.complex128)
        h.setflags(write=False)
        l.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jump", l)
        if h.shape != l.shape or h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian and jump must be square and same shape")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def as_lindblad(self) -> LindbladSpec:
        return LindbladSpec(hamiltonian=self.hamiltonian, jumps=(self.jump,))


@dataclass(frozen=True)
class Observable:
    """Named function of a pure state, evaluated at every recorded time.

    ``func`` maps a StateVector to a float array of length len(names);
    multi-component observables let related quantities share one pass over
    the state (e.g. min and max bipartition entropy).
    """

    names: tuple[str, ...]
    func: object

    def __call__(self, psi: StateVector) -> np.ndarray:
        out = np.atleast_1d(np.asarray(self.func(psi), dtype=float))
        if out.shape != (len(self.names),):
            raise ValueError(
                f"observable {self.names} returned shape {out.shape}"
            )
        return out


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble means, standard errors, and the reconstructed density matrix."""

    times: np.ndarray
    names: tuple[str, ...]
    samples: np.ndarray  # (n_trajectories, n_names, n_recorded)
    rho_block_sums: np.ndarray  # (n_blocks, n_recorded, dim, dim)
    block_sizes: np.ndarray
    n_trajectories: int
    n_parties: int
    basis: str

    def mean(self, name: str) -> np.ndarray:
        return self.samples[:, self.names.index(name), :].mean(axis=0)

    def stderr(self, name: str) -> np.ndarray:
        if self.n_trajectories < 2:
            return np.full(len(self.times), np.nan)
        vals = self.samples[:, self.names.index(name), :]
        return vals.std(axis=0, ddof=1) / np.sqrt(self.n_trajectories)

    def density_operators(self) -> list[DensityOperator]:
        mean = self.rho_block_sums.sum(axis=0) / self.n_trajectories
        return [DensityOperator.from_matrix(m) for m in mean]

    def density_matrices(self) -> np.ndarray:
        return self.rho_block_sums.sum(axis=0) / self.n_trajectories

    def half_density_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Reconstructions from the first and second halves of the blocks.

        Used to estimate the Monte Carlo noise floor of the full
        reconstruction without extra runs.
        """
        nb = len(self.block_sizes)
        first = self.rho_block_sums[: nb // 2].sum(axis=0) / self.block_sizes[: nb // 2].sum()
        second = self.rho_block_sums[nb // 2 :].sum(axis=0) / self.block_sizes[nb // 2 :].sum()
        return first, second


def reconstruction_noise_scale(result_a: "EnsembleResult", result_b: "EnsembleResult",
                               n_boot: int = 64, seed: int = 0) -> np.ndarray:
    """Monte Carlo noise floor for comparing two ensemble reconstructions.

    Sign-flip bootstrap over the aggregation blocks of both runs: returns,
    per recorded time, the RMS trace distance between zero-mean resampled
    noise matrices.  Two unravelings of the same Liouvillian should agree
    within a small multiple of this scale; a single half-split estimate is
    too noisy to gate on.
    """
    if len(result_a.times) != len(result_b.times):
        raise ValueError("results do not share a time grid")
    rng = np.random.default_rng(seed)
    out = np.zeros((n_boot, len(result_a.times)))
    centered = []
    for res in (result_a, result_b):
        bm = res.rho_block_sums / res.block_sizes[:, None, None, None]
        centered.append(bm - bm.mean(axis=0))
    for k in range(n_boot):
        noise = 0.0
        for c in centered:
            eps = rng.choice([-1.0, 1.0], size=len(c))
            noise = noise + np.tensordot(eps, c, axes=1) / len(c)
        for t in range(out.shape[1]):
            out[k, t] = 0.5 * np.abs(np.linalg.eigvalsh(noise[t])).sum()
    return np.sqrt((out**2).mean(axis=0))


def trajectory_rng(master_seed: int, trajectory_index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory, independent of all others."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trajectory_index,))
    return np.random.Generator(np.random.Philox(seq))


# ---------------------------------------------------------------------------
# Jump (Monte Carlo wave function) engine
# ---------------------------------------------------------------------------

class _JumpWorkspace:
    """Precomputed matrices for repeated jump stepping of one spec."""

    def __init__(self, spec: LindbladSpec, dt: float):
        self.dim = spec.dim
        self.dt = dt
        self.jump_ops = np.ascontiguousarray(np.stack(spec.jumps)) if spec.jumps \
            else np.zeros((0, spec.dim, spec.dim), dtype=np.complex128)
        self.rate_ops = np.ascontiguousarray(
            np.stack([j.conj().T @ j for j in spec.jumps])
        ) if spec.jumps else np.zeros((0, spec.dim, spec.dim), dtype=np.complex128)
        self.no_jump_propagator = np.ascontiguousarray(
            expm(-1j * dt * effective_hamiltonian(spec))
        )


@njit(cache=True)
def _jump_kernel(propagator, jump_ops, rate_ops, dt, psi0, n_steps,
                 record_flags, recorded, uniforms, jump_steps, jump_channels):
    """Advance one jump trajectory; returns (status, n_jumps, n_recorded).

    status: 0 ok, 1 probability guard violated, 2 zero-norm post-jump state.
    """
    n_ch = jump_ops.shape[0]
    d = psi0.shape[0]
    psi = psi0.copy()
    probs = np.empty(n_ch)
    rec_i = 0
    if record_flags[0]:
        recorded[rec_i] = psi
        rec_i += 1
    n_jumps = 0
    for step in range(n_steps):
        total = 0.0
        for i in range(n_ch):
            kpsi = np.dot(rate_ops[i], psi)
            p = np.vdot(psi, kpsi).real * dt
            if p < 0.0:
                p = 0.0
            probs[i] = p
            total += p
        if total > JUMP_PROBABILITY_GUARD:
            return 1, n_jumps, rec_i
        u = uniforms[step]
        if u < total:
            acc = 0.0
            channel = n_ch - 1
            for i in range(n_ch):
                acc += probs[i]
                if u < acc:
                    channel = i
                    break
            phi = np.dot(jump_ops[channel], psi)
            nrm = np.sqrt(np.vdot(phi, phi).real)
            if nrm <= 1e-300:
                return 2, n_jumps, rec_i
            psi = phi / nrm
            jump_steps[n_jumps] = step + 1
            jump_channels[n_jumps] = channel
            n_jumps += 1
        else:
            phi = np.dot(propagator, psi)
            nrm = np.sqrt(np.vdot(phi, phi).real)
            psi = phi / nrm
        if record_flags[step + 1]:
            recorded[rec_i] = psi
            rec_i += 1
    return 0, n_jumps, rec_i


def jump_step(psi: StateVector, spec: LindbladSpec, dt: float, rng):
    """One first-order jump step: returns (new state, jump channel or None).

    Jump channel i fires with probability <J_i^dag J_i> dt; otherwise the
    state evolves under the no-jump propagator exp(-i H_eff dt) and is
    renormalized.
    """
    ws = _JumpWorkspace(spec, dt)
    return _jump_step_ws(psi, ws, rng)


def _jump_step_ws(psi: StateVector, ws: _JumpWorkspace, rng):
    amps = psi.amplitudes
    probs = np.array([np.vdot(amps, k @ amps).real * ws.dt for k in ws.rate_ops])
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if total > JUMP_PROBABILITY_GUARD:
        raise StepSizeError(
            f"total jump probability {total:.3g} exceeds guard "
            f"{JUMP_PROBABILITY_GUARD}; reduce dt"
        )
    u = rng.random()
    if u < total:
        channel = int(np.searchsorted(np.cumsum(probs), u, side="right"))
        channel = min(channel, len(probs) - 1)
        phi = ws.jump_ops[channel] @ amps
        nrm = np.linalg.norm(phi)
        if nrm <= 1e-300:
            raise TrajectoryError(
                f"jump channel {channel} selected but J psi has zero norm"
            )
        return StateVector(phi / nrm, psi.n_parties, psi.basis), channel
    phi = ws.no_jump_propagator @ amps
    return StateVector(phi / np.linalg.norm(phi), psi.n_parties, psi.basis), None


def _record_flags(config: TrajectoryConfig) -> tuple[np.ndarray, np.ndarray]:
    steps = config.record_steps()
    flags = np.zeros(config.n_steps + 1, dtype=np.bool_)
    flags[steps] = True
    return flags, steps


def run_jump_trajectory(psi0: StateVector, spec: LindbladSpec,
                        config: TrajectoryConfig, trajectory_index: int,
                        _workspace: _JumpWorkspace | None = None) -> TrajectoryRecord:
    """One complete jump trajectory, deterministic in (master_seed, index)."""
    ws = _workspace if _workspace is not None else _JumpWorkspace(spec, config.dt)
    rng = trajectory_rng(config.master_seed, trajectory_index)
    n_steps = config.n_steps
    uniforms = rng.random(n_steps)
    flags, steps = _record_flags(config)
    recorded = np.empty((len(steps), ws.dim), dtype=np.complex128)
    jump_steps = np.empty(n_steps, dtype=np.int64)
    jump_channels = np.empty(n_steps, dtype=np.int64)
    psi0n = psi0.normalized()
    status, n_jumps, n_rec = _jump_kernel(
        ws.no_jump_propagator, ws.jump_ops, ws.rate_ops, config.dt,
        np.ascontiguousarray(psi0n.amplitudes), n_steps, flags, recorded,
        uniforms, jump_steps, jump_channels,
    )
    _raise_on_status(status, trajectory_index)
    log = tuple(
        (float(jump_steps[i] * config.dt), int(jump_channels[i]))
        for i in range(n_jumps)
    )
    return TrajectoryRecord(
        times=steps * config.dt, states=recorded, n_parties=psi0.n_parties,
        basis=psi0.basis, jump_log=log,
    )


def _raise_on_status(status: int, index: int):
    if status == 1:
        raise StepSizeError(
            f"trajectory {index}: total jump probability exceeded the "
            f"{JUMP_PROBABILITY_GUARD} guard; reduce dt"
        )
    if status == 2:
        raise TrajectoryError(
            f"trajectory {index}: selected jump annihilated the state"
        )
    if status == 3:
        raise TrajectoryError(
            f"trajectory {index}: non-finite amplitudes; reduce dt"
        )


# ---------------------------------------------------------------------------
# Diffusive (homodyne) engine
# ---------------------------------------------------------------------------

@njit(cache=True)
def _diffusive_kernel(hamiltonian, jump, jump_dag, psi0, dt, n_steps,
                      record_flags, recorded, noises):
    """Euler-Maruyama homodyne stepping with per-step renormalization.

    The Hamiltonian drift is gauged by its instantaneous expectation value
    (a pure global-phase change) to suppress first-order phase-bias at
    finite dt.  Returns (status, n_recorded); status 3 flags a blow-up.
    """
    psi = psi0.copy()
    sqrt_dt = np.sqrt(dt)
    rec_i = 0
    if record_flags[0]:
        recorded[rec_i] = psi
        rec_i += 1
    for step in range(n_steps):
        hpsi = np.dot(hamiltonian, psi)
        energy = np.vdot(psi, hpsi).real
        lpsi = np.dot(jump, psi)
        kpsi = np.dot(jump_dag, lpsi)
        x_exp = 2.0 * np.vdot(psi, lpsi).real
        drift = (-1j) * (hpsi - energy * psi) \
            - 0.5 * (kpsi - x_exp * lpsi + 0.25 * x_exp * x_exp * psi)
        noise = lpsi - 0.5 * x_exp * psi
        psi = psi + dt * drift + (sqrt_dt * noises[step]) * noise
        nrm_sq = np.vdot(psi, psi).real
        if not np.isfinite(nrm_sq) or nrm_sq <= 0.0:
            return 3, rec_i
        psi = psi / np.sqrt(nrm_sq)
        if record_flags[step + 1]:
            recorded[rec_i] = psi
            rec_i += 1
    return 0, rec_i


def diffusive_step(psi: StateVector, model: DiffusiveModel, dt: float, rng) -> StateVector:
    """One Euler-Maruyama step of the normalized homodyne equation.

    Drift: -i H psi - (1/2)(L^dag L - <x> L + <x>^2/4) psi with
    x = L + L^dag; noise: (L - <x>/2) psi dW, dW ~ Normal(0, dt).
    The state is renormalized afterwards.
    """
    amps = np.ascontiguousarray(psi.amplitudes)
    recorded = np.empty((1, len(amps)), dtype=np.complex128)
    flags = np.array([False, True])
    noise = np.array([rng.standard_normal()])
    status, _ = _diffusive_kernel(
        np.ascontiguousarray(model.hamiltonian),
        np.ascontiguousarray(model.jump),
        np.ascontiguousarray(model.jump.conj().T),
        amps, dt, 1, flags, recorded, noise,
    )
    if status != 0:
        raise TrajectoryError("non-finite amplitudes after diffusive step; reduce dt")
    return StateVector(recorded[0], psi.n_parties, psi.basis)


def run_diffusive_trajectory(psi0: StateVector, model: DiffusiveModel,
                             config: TrajectoryConfig,
                             trajectory_index: int) -> TrajectoryRecord:
    """One complete diffusive trajectory, deterministic in (master_seed, index)."""
    rng = trajectory_rng(config.master_seed, trajectory_index)
    n_steps = config.n_steps
    noises = rng.standard_normal(n_steps)
    flags, steps = _record_flags(config)
    recorded = np.empty((len(steps), model.dim), dtype=np.complex128)
    psi0n = psi0.normalized()
    status, _ = _diffusive_kernel(
        np.ascontiguousarray(model.hamiltonian),
        np.ascontiguousarray(model.jump),
        np.ascontiguousarray(model.jump.conj().T),
        np.ascontiguousarray(psi0n.amplitudes), config.dt, n_steps,
        flags, recorded, noises,
    )
    _raise_on_status(status, trajectory_index)
    return TrajectoryRecord(
        times=steps * config.dt, states=recorded, n_parties=psi0.n_parties,
        basis=psi0.basis,
    )


# ---------------------------------------------------------------------------
# Ensemble execution
# ---------------------------------------------------------------------------

def _run_block(psi0_amps, n_parties, basis, system, config, observables,
               start, stop):
    """Run trajectories [start, stop) serially; return per-trajectory
    observable samples and the block sum of projectors at recorded times."""
    psi0 = StateVector(psi0_amps, n_parties, basis)
    steps = config.record_steps()
    n_rec = len(steps)
    dim = len(psi0_amps)
    n_names = sum(len(o.names) for o in observables)
    samples = np.empty((stop - start, n_names, n_rec))
    rho_sum = np.zeros((n_rec, dim, dim), dtype=np.complex128)
    ws = _JumpWorkspace(system, config.dt) if config.method == "jump" else None
    for idx in range(start, stop):
        if config.method == "jump":
            rec = run_jump_trajectory(psi0, system, config, idx, _workspace=ws)
        else:
            rec = run_diffusive_trajectory(psi0, system, config, idx)
        for t in range(n_rec):
            rho_sum[t] += np.outer(rec.states[t], rec.states[t].conj())
            row = 0
            psi_t = rec.state(t)
            for obs in observables:
                vals = obs(psi_t)
                samples[idx - start, row : row + len(vals), t] = vals
                row += len(vals)
    return samples, rho_sum


def run_ensemble(psi0: StateVector, system, config: TrajectoryConfig,
                 observables=(), n_threads: int = 1) -> EnsembleResult:
    """Independent trajectories aggregated in fixed blocks.

    ``system`` is a LindbladSpec (jump method) or DiffusiveModel (diffusive
    method).  Results are bitwise independent of ``n_threads``.
    """
    if config.method == "jump" and not isinstance(system, LindbladSpec):
        raise TypeError("jump method requires a LindbladSpec")
    if config.method == "diffusive" and not isinstance(system, DiffusiveModel):
        raise TypeError("diffusive method requires a DiffusiveModel")
    observables = tuple(observables)
    n = config.n_trajectories
    bounds = [(s, min(s + ENSEMBLE_BLOCK, n)) for s in range(0, n, ENSEMBLE_BLOCK)]
    psi0n = psi0.normalized()
    args = [
        (psi0n.amplitudes, psi0.n_parties, psi0.basis, system, config,
         observables, start, stop)
        for start, stop in bounds
    ]
    if n_threads > 1 and len(bounds) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(_run_block_star, args))
    else:
        results = [_run_block(*a) for a in args]

    steps = config.record_steps()
    names = tuple(name for o in observables for name in o.names)
    samples = np.concatenate([r[0] for r in results], axis=0) if results else \
        np.empty((0, len(names), len(steps)))
    rho_block_sums = np.stack([r[1] for r in results])
    block_sizes = np.array([stop - start for start, stop in bounds])
    return EnsembleResult(
        times=steps * config.dt, names=names, samples=samples,
        rho_block_sums=rho_block_sums, block_sizes=block_sizes,
        n_trajectories=n, n_parties=psi0.n_parties, basis=psi0.basis,
    )


def _run_block_star(args):
    return _run_block(*args)
