"""Genuine multipartite correlation measures on pure states."""

import numpy as np
import pytest

from trajcorr import (
    StateVector,
    TrajectoryConfig,
    average_genuine_correlations,
    dicke_to_register,
    genuine_correlations_dicke,
    genuine_correlations_qubits,
    run_jump_trajectory,
)
from trajcorr.models import psi1, psi2
from trajcorr.trajectory import TrajectoryRecord

H2_1_9 = -(1 / 9) * np.log2(1 / 9) - (8 / 9) * np.log2(8 / 9)
H2_1_3 = -(1 / 3) * np.log2(1 / 3) - (2 / 3) * np.log2(2 / 3)


def test_ghz_state_has_one_bit_of_genuine_correlations():
    ghz = StateVector.register([1, 0, 0, 0, 0, 0, 0, 1], 3).normalized()
    sample = genuine_correlations_qubits(ghz)
    assert sample.value == pytest.approx(1.0, abs=1e-12)
    assert sample.max_value == pytest.approx(1.0, abs=1e-12)
    assert sample.total == pytest.approx(2.0, abs=1e-12)


def test_product_state_has_zero_correlations():
    plus = StateVector.register([1, 1], 1).normalized()
    product = StateVector.register(np.kron(np.kron(plus.amplitudes, plus.amplitudes),
                                           plus.amplitudes), 3)
    assert genuine_correlations_qubits(product).value == pytest.approx(0.0, abs=1e-12)


def test_entangled_pair_with_spectator_has_zero_genuine_tripartite():
    sample = genuine_correlations_qubits(psi2())
    assert sample.value == 0.0
    # the separating cut isolates the product qubit (party 0)
    assert sample.argmin.subset == (0,)
    assert sample.max_value == pytest.approx(1.0, abs=1e-12)


def test_psi1_value_is_binary_entropy_of_one_ninth():
    sample = genuine_correlations_qubits(psi1())
    assert sample.value == pytest.approx(H2_1_9, abs=1e-12)
    assert sample.argmin.complement() == (2,)  # weakest link is qubit C


def test_w_state_register_and_symmetric_agree():
    reg = genuine_correlations_qubits(dicke_to_register(1, 3))
    sym = genuine_correlations_dicke(StateVector.dicke([0, 1, 0, 0], 3))
    assert reg.value == pytest.approx(H2_1_3, abs=1e-12)
    assert sym.value == pytest.approx(reg.value, abs=1e-12)


def test_dicke_correlations_scan_all_block_sizes():
    sym = StateVector.dicke(np.ones(7), 6).normalized()
    sample = genuine_correlations_dicke(sym)
    assert 1 <= sample.argmin.block_size <= 3
    assert sample.max_value >= sample.value


def test_register_vs_symmetric_on_random_superpositions():
    rng = np.random.default_rng(21)
    for n in (3, 5, 8):
        amps = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
        sym = StateVector.dicke(amps, n).normalized()
        reg_amps = sum(
            sym.amplitudes[m] * dicke_to_register(m, n).amplitudes
            for m in range(n + 1)
        )
        reg = StateVector.register(reg_amps, n)
        fast = genuine_correlations_dicke(sym)
        brute = genuine_correlations_qubits(reg)
        # symmetric states minimize/maximize on contiguous blocks, and the
        # register scan covers those cuts too
        assert fast.value == pytest.approx(brute.value, abs=1e-9)
        assert fast.max_value <= brute.max_value + 1e-9


def test_average_takes_per_trajectory_minimum_first():
    # two "ensembles" whose minima sit on different cuts: averaging the
    # minima is not the same as minimizing the averages
    bell_ab = StateVector.register([1, 0, 0, 0, 0, 0, 1, 0], 3).normalized()
    bell_ac = StateVector.register([1, 0, 0, 0, 0, 1, 0, 0], 3).normalized()
    recs = [
        TrajectoryRecord(times=np.array([0.0]), states=np.array([s.amplitudes]),
                         n_parties=3, basis="register")
        for s in (bell_ab, bell_ac)
    ]
    times, mean, stderr = average_genuine_correlations(recs)
    assert mean[0] == pytest.approx(0.0, abs=1e-12)  # each state has a zero cut
    assert stderr[0] == pytest.approx(0.0, abs=1e-12)


def test_average_requires_common_time_grid():
    rec1 = TrajectoryRecord(times=np.array([0.0, 1.0]),
                            states=np.zeros((2, 4)), n_parties=2, basis="register")
    rec2 = TrajectoryRecord(times=np.array([0.0, 2.0]),
                            states=np.zeros((2, 4)), n_parties=2, basis="register")
    with pytest.raises(ValueError):
        average_genuine_correlations([rec1, rec2])


def test_average_over_real_trajectories():
    from trajcorr.models import ThreeQubitScenario, three_qubit_spec

    spec = three_qubit_spec(ThreeQubitScenario(0.0, 1.0, 0.0))
    cfg = TrajectoryConfig(method="jump", dt=1e-3, t_final=1.0, record_stride=500,
                           n_trajectories=1, master_seed=0)
    recs = [run_jump_trajectory(psi1(), spec, cfg, i) for i in range(20)]
    times, mean, stderr = average_genuine_correlations(recs)
    assert mean[0] == pytest.approx(H2_1_9, abs=1e-12)  # t = 0 is deterministic
    assert np.all(mean >= 0) and np.all(np.isfinite(stderr))
