"""Physical model constructors: decaying three-qubit registers and the
dissipative collective-spin (LMG) model with its homodyne quadrature.

Conventions: |1> is the excited level, the lowering operator is |0><1|,
qubit A is the most significant index bit (basis label |q_A q_B q_C>), and
the collective-spin space is the maximal-spin symmetric sector indexed by
excitation count m with Jz eigenvalue m - N/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lindblad import LindbladSpec
from .states import StateVector, collective_operator
from .trajectory import DiffusiveModel

__all__ = [
    "ThreeQubitScenario",
    "LMGParams",
    "three_qubit_spec",
    "lowering_operator",
    "psi1",
    "psi2",
    "lmg_hamiltonian",
    "lmg_spec",
    "lmg_homodyne_model",
    "spin_quadrature",
]

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
_EYE2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class ThreeQubitScenario:
    """Spontaneous-emission rates and detection scheme for three qubits."""

    gamma_a: float
    gamma_b: float
    gamma_c: float
    unraveling: str = "direct"  # or "beam_splitter_ab"

    def __post_init__(self):
        if min(self.gamma_a, self.gamma_b, self.gamma_c) < 0:
            raise ValueError("decay rates must be nonnegative")
        if self.unraveling not in ("direct", "beam_splitter_ab"):
            raise ValueError(f"unknown unraveling {self.unraveling!r}")


@dataclass(frozen=True)
class LMGParams:
    """Collective-spin model parameters, all rates in units of the coupling."""

    h: float  # effective magnetic field strength
    coupling: float  # spin-spin interaction strength (lambda)
    n_qubits: int
    gamma_collective: float  # collective pumping rate (Gamma_b)
    anisotropy: float = 0.0

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("need at least two qubits")
        if self.gamma_collective < 0:
            raise ValueError("collective rate must be nonnegative")
        if not -1.0 <= self.anisotropy <= 1.0:
            raise ValueError("anisotropy must lie in [-1, 1]")


def lowering_operator(qubit: int) -> np.ndarray:
    """|0><1| on one qubit of a three-qubit register (0 = A, most significant)."""
    ops = [_EYE2, _EYE2, _EYE2]
    ops[qubit] = _SIGMA_MINUS
    return np.kron(np.kron(ops[0], ops[1]), ops[2])


def three_qubit_spec(scenario: ThreeQubitScenario) -> LindbladSpec:
    """Spontaneous-emission spec with H = 0, under either detection scheme.

    The beam-splitter scheme mixes the A and B emission channels with a
    50/50 splitter: J1 = (sqrt(g_A) a + i sqrt(g_B) b)/sqrt(2),
    J2 = (i sqrt(g_A) a + sqrt(g_B) b)/sqrt(2), J3 unchanged.  Both schemes
    share one Liouvillian.
    """
    a = np.sqrt(scenario.gamma_a) * lowering_operator(0)
    b = np.sqrt(scenario.gamma_b) * lowering_operator(1)
    c = np.sqrt(scenario.gamma_c) * lowering_operator(2)
    if scenario.unraveling == "direct":
        jumps = (a, b, c)
    else:
        jumps = ((a + 1j * b) / np.sqrt(2), (1j * a + b) / np.sqrt(2), c)
    return LindbladSpec(hamiltonian=np.zeros((8, 8)), jumps=jumps)


def psi1() -> StateVector:
    """(2|011> + 2|101> + |110>)/3 in the |q_A q_B q_C> register."""
    amps = np.zeros(8, dtype=np.complex128)
    amps[0b011] = 2.0 / 3.0
    amps[0b101] = 2.0 / 3.0
    amps[0b110] = 1.0 / 3.0
    return StateVector.register(amps, 3)


def psi2() -> StateVector:
    """(|110> + |101>)/sqrt(2): qubit A excited, B and C sharing a Bell pair.

    Qubit A is a product factor (entropy 0), so the genuine three-partite
    correlations start at zero; detection schemes that mix A's emission
    with B's can then build them up through measurement back-action.
    """
    amps = np.zeros(8, dtype=np.complex128)
    amps[0b110] = 1.0 / np.sqrt(2)
    amps[0b101] = 1.0 / np.sqrt(2)
    return StateVector.register(amps, 3)


def lmg_hamiltonian(params: LMGParams) -> np.ndarray:
    """-2 h Jz - (2 lambda / N)(Jx^2 + anisotropy * Jy^2) on the symmetric sector."""
    n = params.n_qubits
    jx = collective_operator("Jx", n)
    jy = collective_operator("Jy", n)
    jz = collective_operator("Jz", n)
    h = -2.0 * params.h * jz
    h -= (2.0 * params.coupling / n) * (jx @ jx + params.anisotropy * (jy @ jy))
    return h


def lmg_spec(params: LMGParams) -> LindbladSpec:
    """Dissipative collective-spin spec with the single pumping channel
    sqrt(Gamma_b / N) J+."""
    n = params.n_qubits
    jump = np.sqrt(params.gamma_collective / n) * collective_operator("J+", n)
    return LindbladSpec(hamiltonian=lmg_hamiltonian(params), jumps=(jump,))


def lmg_homodyne_model(params: LMGParams, theta: float) -> DiffusiveModel:
    """Diffusive unraveling of the pumping channel at detection angle theta.

    The jump operator sqrt(Gamma_b / N) e^{-i theta} J+ carries the
    detection phase; the monitored quadrature is the Hermitian
    L + L^dag = sqrt(Gamma_b / N) (e^{-i theta} J+ + e^{i theta} J-).
    """
    n = params.n_qubits
    jump = (np.sqrt(params.gamma_collective / n) * np.exp(-1j * theta)
            * collective_operator("J+", n))
    return DiffusiveModel(hamiltonian=lmg_hamiltonian(params), jump=jump)


def spin_quadrature(theta: float, n_qubits: int) -> np.ndarray:
    """Hermitian quadrature e^{i theta} J+ + e^{-i theta} J-.

    With this sign convention the quadrature at theta = 0 is 2 Jx and at
    theta = pi/2 it is -2 Jy.
    """
    jp = collective_operator("J+", n_qubits)
    return np.exp(1j * theta) * jp + np.exp(-1j * theta) * jp.conj().T
