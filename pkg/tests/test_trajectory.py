"""Stochastic trajectory engines: stepping rules, reproducibility, and
ensemble aggregation."""

import numpy as np
import pytest
from scipy.linalg import expm

from trajcorr import (
    DensityOperator,
    DiffusiveModel,
    LindbladSpec,
    Observable,
    StateVector,
    StepSizeError,
    TrajectoryConfig,
    diffusive_step,
    integrate_master,
    jump_step,
    run_diffusive_trajectory,
    run_ensemble,
    run_jump_trajectory,
    trace_distance,
    trajectory_rng,
)
from trajcorr.trajectory import reconstruction_noise_scale

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
EXCITED = StateVector.register([0, 1], 1)


def decay_spec(gamma=1.0):
    return LindbladSpec(hamiltonian=np.zeros((2, 2)),
                        jumps=(np.sqrt(gamma) * SIGMA_MINUS,))


class _FixedUniform:
    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


# ---------------------------------------------------------------------------
# Random streams and configuration
# ---------------------------------------------------------------------------

def test_trajectory_rng_reproducible_and_independent():
    a = trajectory_rng(42, 7).random(4)
    b = trajectory_rng(42, 7).random(4)
    c = trajectory_rng(42, 8).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_config_validation():
    with pytest.raises(ValueError):
        TrajectoryConfig(method="nope", dt=0.1, t_final=1, n_trajectories=1, master_seed=0)
    with pytest.raises(ValueError):
        TrajectoryConfig(method="jump", dt=0.1, t_final=1, burn_in=2,
                         n_trajectories=1, master_seed=0)


def test_record_steps_grid():
    cfg = TrajectoryConfig(method="jump", dt=0.1, t_final=1.0, burn_in=0.35,
                           record_stride=2, n_trajectories=1, master_seed=0)
    steps = cfg.record_steps()
    # stride grid past burn-in plus the final step
    assert list(steps) == [4, 6, 8, 10]
    cfg2 = TrajectoryConfig(method="jump", dt=0.1, t_final=1.0, record_stride=3,
                            n_trajectories=1, master_seed=0)
    assert list(cfg2.record_steps()) == [0, 3, 6, 9, 10]


# ---------------------------------------------------------------------------
# Jump stepping
# ---------------------------------------------------------------------------

def test_jump_step_no_jump_branch_is_renormalized_propagation():
    spec = decay_spec(0.5)
    psi = StateVector.register([1, 1], 1).normalized()
    out, channel = jump_step(psi, spec, 1e-2, _FixedUniform(0.999))
    assert channel is None
    assert out.norm == pytest.approx(1.0)
    heff = spec.hamiltonian - 0.5j * (SIGMA_MINUS.conj().T @ SIGMA_MINUS) * 0.5
    expect = expm(-1j * 1e-2 * heff) @ psi.amplitudes
    expect /= np.linalg.norm(expect)
    assert np.allclose(out.amplitudes, expect, atol=1e-12)


def test_jump_step_forced_jump_applies_normalized_jump_operator():
    spec = decay_spec(1.0)
    out, channel = jump_step(EXCITED, spec, 1e-2, _FixedUniform(0.0))
    assert channel == 0
    assert np.allclose(out.amplitudes, [1, 0])  # dropped to ground


def test_jump_step_guard():
    with pytest.raises(StepSizeError):
        jump_step(EXCITED, decay_spec(1.0), dt=0.5, rng=_FixedUniform(0.5))


def test_run_jump_trajectory_records_and_logs():
    cfg = TrajectoryConfig(method="jump", dt=1e-3, t_final=5.0, record_stride=1000,
                           n_trajectories=1, master_seed=9)
    rec = run_jump_trajectory(EXCITED, decay_spec(2.0), cfg, trajectory_index=0)
    assert len(rec) == 6
    assert np.allclose([np.linalg.norm(s) for s in rec.states], 1.0)
    assert len(rec.jump_log) == 1  # a two-level atom emits exactly once
    t_jump, channel = rec.jump_log[0]
    assert channel == 0 and 0 < t_jump <= 5.0
    # after the jump the state is the ground state forever
    assert np.allclose(np.abs(rec.states[-1]), [1, 0], atol=1e-12)


def test_jump_ensemble_reproduces_exponential_decay():
    cfg = TrajectoryConfig(method="jump", dt=1e-3, t_final=1.0, record_stride=250,
                           n_trajectories=2000, master_seed=31)
    res = run_ensemble(EXCITED, decay_spec(1.0), cfg)
    rho = res.density_matrices()
    pops = rho[:, 1, 1].real
    expect = np.exp(-res.times)
    # binomial error on the survival probability
    sigma = np.sqrt(expect * (1 - expect) / cfg.n_trajectories) + 1e-9
    assert np.all(np.abs(pops - expect) < 4 * sigma + 2e-3)


def _excited_population(psi):
    return np.array([abs(psi.amplitudes[1]) ** 2])


def test_run_ensemble_thread_count_is_invisible():
    spec = decay_spec(1.0)
    cfg = TrajectoryConfig(method="jump", dt=1e-2, t_final=1.0, record_stride=20,
                           n_trajectories=70, master_seed=5)
    obs = Observable(names=("pop",), func=_excited_population)
    serial = run_ensemble(EXCITED, spec, cfg, [obs], n_threads=1)
    parallel = run_ensemble(EXCITED, spec, cfg, [obs], n_threads=3)
    assert np.array_equal(serial.samples, parallel.samples)
    assert np.array_equal(serial.rho_block_sums, parallel.rho_block_sums)


def test_observable_shape_mismatch_raises():
    obs = Observable(names=("a", "b"), func=lambda p: np.array([1.0]))
    with pytest.raises(ValueError):
        obs(EXCITED)


# ---------------------------------------------------------------------------
# Diffusive stepping
# ---------------------------------------------------------------------------

def test_diffusive_step_without_coupling_is_schroedinger():
    h = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    model = DiffusiveModel(hamiltonian=h, jump=np.zeros((2, 2)))
    psi = StateVector.register([1, 0], 1)
    dt = 1e-4
    rng = np.random.default_rng(0)
    out = diffusive_step(psi, model, dt, rng)
    exact = expm(-1j * dt * h) @ psi.amplitudes
    # global phase is gauged away; compare projectors
    assert out.norm == pytest.approx(1.0)
    assert np.allclose(
        np.outer(out.amplitudes, out.amplitudes.conj()),
        np.outer(exact, exact.conj()), atol=1e-7,
    )


def test_diffusive_trajectory_stays_normalized():
    gamma = 0.5
    model = DiffusiveModel(hamiltonian=np.zeros((2, 2)),
                           jump=np.sqrt(gamma) * SIGMA_MINUS)
    cfg = TrajectoryConfig(method="diffusive", dt=1e-3, t_final=2.0,
                           record_stride=200, n_trajectories=1, master_seed=3)
    rec = run_diffusive_trajectory(EXCITED, model, cfg, trajectory_index=4)
    assert np.allclose([np.linalg.norm(s) for s in rec.states], 1.0, atol=1e-12)


def test_diffusive_ensemble_matches_master_equation():
    gamma = 1.0
    model = DiffusiveModel(hamiltonian=np.zeros((2, 2)),
                           jump=np.sqrt(gamma) * SIGMA_MINUS)
    cfg = TrajectoryConfig(method="diffusive", dt=1e-3, t_final=1.0,
                           record_stride=500, n_trajectories=1000, master_seed=17)
    res = run_ensemble(EXCITED, model, cfg)
    _, oracle = integrate_master(
        model.as_lindblad(), DensityOperator.from_state(EXCITED),
        1e-3, 1.0, record_stride=500,
    )
    recon = res.density_matrices()
    for i in range(len(res.times)):
        assert trace_distance(recon[i], oracle[i].matrix) < 0.06


def test_run_ensemble_type_checks():
    cfg = TrajectoryConfig(method="jump", dt=1e-2, t_final=0.1,
                           n_trajectories=1, master_seed=0)
    model = DiffusiveModel(hamiltonian=np.zeros((2, 2)), jump=np.zeros((2, 2)))
    with pytest.raises(TypeError):
        run_ensemble(EXCITED, model, cfg)


def test_reconstruction_noise_scale_brackets_null_fluctuations():
    spec = decay_spec(1.0)
    cfg = dict(method="jump", dt=2e-3, t_final=1.0, record_stride=100,
               n_trajectories=640)
    a = run_ensemble(EXCITED, spec, TrajectoryConfig(master_seed=1, **cfg))
    b = run_ensemble(EXCITED, spec, TrajectoryConfig(master_seed=2, **cfg))
    sigma = reconstruction_noise_scale(a, b, seed=0)
    ra, rb = a.density_matrices(), b.density_matrices()
    td = np.array([trace_distance(ra[i], rb[i]) for i in range(len(a.times))])
    assert sigma.shape == td.shape
    # same Liouvillian, different seeds: disagreement is pure Monte Carlo noise
    assert np.all(td[1:] < 4 * sigma[1:])
