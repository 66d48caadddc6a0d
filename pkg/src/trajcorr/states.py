"""Finite-dimensional states and operators: qubit registers and collective spins.

Two state families are supported:

* ``register`` -- an n-qubit register of dimension 2^n, with qubit 0 the
  most significant index bit (basis label ``|q0 q1 ... q_{n-1}>``).
* ``dicke`` -- the permutation-symmetric sector of N qubits, dimension N+1,
  indexed by the excitation count m = 0..N.

All values are immutable after construction and all operations are pure
functions, so everything here is safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.special import gammaln

__all__ = [
    "StateVector",
    "DensityOperator",
    "Bipartition",
    "SchmidtRow",
    "tensor_product",
    "partial_trace",
    "von_neumann_entropy",
    "dicke_to_register",
    "collective_operator",
    "schmidt_row",
    "dicke_reduced_state",
    "qubit_bipartitions",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
EIGENVALUE_FLOOR = 1e-12
MAX_REGISTER_QUBITS = 14


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector in a finite Hilbert space."""

    amplitudes: np.ndarray
    n_parties: int
    basis: str  # "register" or "dicke"

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.basis == "register":
            expected = 2**self.n_parties
        elif self.basis == "dicke":
            expected = self.n_parties + 1
        else:
            raise ValueError(f"unknown basis tag {self.basis!r}")
        if amps.ndim != 1 or amps.shape[0] != expected:
            raise ValueError(
                f"{self.basis} state of {self.n_parties} parties needs "
                f"{expected} amplitudes, got shape {amps.shape}"
            )

    @classmethod
    def register(cls, amplitudes, n_qubits: int) -> "StateVector":
        return cls(np.asarray(amplitudes), n_qubits, "register")

    @classmethod
    def dicke(cls, amplitudes, n_qubits: int) -> "StateVector":
        return cls(np.asarray(amplitudes), n_qubits, "dicke")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.n_parties, self.basis)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive, unit-trace matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density operator must be square, got {mat.shape}")
        herm_err = np.max(np.abs(mat - mat.conj().T))
        if herm_err > HERMITICITY_TOL:
            raise ValueError(f"matrix not Hermitian (max deviation {herm_err:.2e})")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} differs from 1 beyond tolerance")
        evals = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
        if evals.min() < -TRACE_TOL:
            raise ValueError(f"negative eigenvalue {evals.min():.2e}")

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityOperator":
        return cls(psi.normalized().projector())

    @classmethod
    def from_matrix(cls, matrix) -> "DensityOperator":
        """Re-Hermitize and renormalize before construction (for integrator output)."""
        mat = np.asarray(matrix, dtype=np.complex128)
        mat = (mat + mat.conj().T) / 2
        return cls(mat / np.trace(mat).real)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class Bipartition:
    """A cut of n parties into a block and its complement, in canonical form.

    Qubit registers carry the kept subset (always the side containing party
    0, which is also the lexicographically smaller side).  Dicke cuts carry
    only the block size N1, canonicalized to N1 <= N - N1.
    """

    n_parties: int
    subset: tuple[int, ...] = field(default=())
    block_size: int = 0

    @classmethod
    def qubits(cls, subset, n_parties: int) -> "Bipartition":
        s = frozenset(int(i) for i in subset)
        if not s or len(s) >= n_parties:
            raise ValueError("subset must be a nonempty proper subset")
        if any(i < 0 or i >= n_parties for i in s):
            raise ValueError(f"party index out of range for n={n_parties}")
        if 0 not in s:
            s = frozenset(range(n_parties)) - s
        return cls(n_parties=n_parties, subset=tuple(sorted(s)))

    @classmethod
    def dicke(cls, block_size: int, n_parties: int) -> "Bipartition":
        if not 1 <= block_size <= n_parties - 1:
            raise ValueError(f"block size {block_size} invalid for N={n_parties}")
        return cls(n_parties=n_parties, block_size=min(block_size, n_parties - block_size))

    def complement(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_parties) if i not in self.subset)


def qubit_bipartitions(n: int) -> list[Bipartition]:
    """All 2^(n-1) - 1 canonical bipartitions of an n-qubit register."""
    if n < 2:
        raise ValueError("need at least two parties")
    others = list(range(1, n))
    cuts = []
    for size in range(0, n - 1):
        for rest in combinations(others, size):
            cuts.append(Bipartition.qubits((0,) + rest, n))
    return cuts


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product of two register states (a's qubits most significant)."""
    if a.basis != "register" or b.basis != "register":
        raise ValueError("tensor_product requires register-tagged states")
    return StateVector.register(
        np.kron(a.amplitudes, b.amplitudes), a.n_parties + b.n_parties
    )


def partial_trace(state, keep) -> DensityOperator:
    """Reduced density operator of the kept qubits of a register state.

    ``state`` may be a StateVector or a DensityOperator; ``keep`` a
    Bipartition or an iterable of qubit indices (kept side).
    """
    if isinstance(keep, Bipartition):
        kept = list(keep.subset)
        n = keep.n_parties
    else:
        kept = sorted(int(i) for i in keep)
        n = None

    if isinstance(state, StateVector):
        if state.basis != "register":
            raise ValueError("partial_trace expects a register state")
        n = state.n_parties
        _check_kept(kept, n)
        traced = [i for i in range(n) if i not in kept]
        psi = state.amplitudes.reshape((2,) * n)
        psi = np.transpose(psi, kept + traced)
        m = psi.reshape(2 ** len(kept), 2 ** len(traced))
        return DensityOperator.from_matrix(m @ m.conj().T)

    if isinstance(state, DensityOperator):
        n = int(round(np.log2(state.dim))) if n is None else n
        if 2**n != state.dim:
            raise ValueError("density operator dimension is not a power of two")
        _check_kept(kept, n)
        traced = [i for i in range(n) if i not in kept]
        rho = state.matrix.reshape((2,) * (2 * n))
        row = list(range(n))
        col = list(range(n, 2 * n))
        for t in traced:
            col[t] = row[t]
        out = list(kept) + [c + n for c in kept]
        rho = np.einsum(rho, row + col, out)
        return DensityOperator.from_matrix(rho.reshape(2 ** len(kept), 2 ** len(kept)))

    raise TypeError(f"unsupported state type {type(state)}")


def _check_kept(kept, n):
    if not kept or len(kept) >= n:
        raise ValueError("kept subset must be nonempty and proper")
    if any(i < 0 or i >= n for i in kept):
        raise ValueError("kept index out of range")


def von_neumann_entropy(rho) -> float:
    """Entropy -sum p log2 p of the eigenvalues, in bits.

    Accepts a DensityOperator or a Hermitian ndarray.  Eigenvalues below
    the floor are treated as exact zeros (0 log 0 := 0).
    """
    if isinstance(rho, DensityOperator):
        mat = rho.matrix
    else:
        mat = np.asarray(rho, dtype=np.complex128)
        herm_err = np.max(np.abs(mat - mat.conj().T))
        if herm_err > HERMITICITY_TOL:
            raise ValueError(f"input not Hermitian (max deviation {herm_err:.2e})")
    evals = np.linalg.eigvalsh(mat)
    return entropy_of_probabilities(evals)


def entropy_of_probabilities(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > EIGENVALUE_FLOOR]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log2(p)))


def dicke_to_register(m: int, n_qubits: int) -> StateVector:
    """Expand the symmetric m-excitation state of N qubits into the full register."""
    if not 0 <= m <= n_qubits:
        raise ValueError(f"excitation count {m} out of range for N={n_qubits}")
    if n_qubits > MAX_REGISTER_QUBITS:
        raise ValueError(f"N={n_qubits} exceeds the 2^{MAX_REGISTER_QUBITS} register guard")
    dim = 2**n_qubits
    amps = np.zeros(dim, dtype=np.complex128)
    idx = [i for i in range(dim) if bin(i).count("1") == m]
    amps[idx] = 1.0 / np.sqrt(len(idx))
    return StateVector.register(amps, n_qubits)


def collective_operator(kind: str, n_qubits: int) -> np.ndarray:
    """Collective spin operator on the (N+1)-dimensional symmetric sector.

    Basis index m is the excitation count; the raising operator connects
    m -> m+1 with matrix element sqrt((m+1)(N-m)), and Jz is diagonal with
    entries m - N/2.
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    n = n_qubits
    m = np.arange(n)  # source excitation counts for the raising ladder
    ladder = np.sqrt((m + 1.0) * (n - m))
    jp = np.zeros((n + 1, n + 1), dtype=np.complex128)
    jp[m + 1, m] = ladder
    if kind == "J+":
        return jp
    if kind == "J-":
        return jp.conj().T
    if kind == "Jx":
        return (jp + jp.conj().T) / 2
    if kind == "Jy":
        return (jp - jp.conj().T) / 2j
    if kind == "Jz":
        return np.diag(np.arange(n + 1) - n / 2).astype(np.complex128)
    raise ValueError(f"unknown operator kind {kind!r}")


@dataclass(frozen=True)
class SchmidtRow:
    """Schmidt coefficients of one symmetric basis state under a block cut.

    For excitation count m of N qubits split into blocks of N1 and N - N1,
    coefficient k runs over max(0, m - (N - N1)) .. min(m, N1) and weights
    the component with k excitations in the first block.
    """

    m: int
    n_qubits: int
    block_size: int
    k_min: int
    coefficients: np.ndarray

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.coefficients) - 1


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def schmidt_row(m: int, n_qubits: int, block_size: int) -> SchmidtRow:
    """Closed-form Schmidt coefficients, computed in log space (stable to N >= 200)."""
    n, n1 = n_qubits, block_size
    if not 0 <= m <= n:
        raise ValueError(f"excitation count {m} out of range for N={n}")
    if not 1 <= n1 <= n - 1:
        raise ValueError(f"block size {n1} invalid for N={n}")
    k_min = max(0, m - (n - n1))
    k_max = min(m, n1)
    k = np.arange(k_min, k_max + 1)
    log_lam = 0.5 * (_log_binom(n1, k) + _log_binom(n - n1, m - k) - _log_binom(n, m))
    coeffs = np.exp(log_lam)
    coeffs.setflags(write=False)
    return SchmidtRow(m=m, n_qubits=n, block_size=n1, k_min=k_min, coefficients=coeffs)


@lru_cache(maxsize=256)
def _schmidt_table(n_qubits: int, block_size: int) -> np.ndarray:
    """Dense (N+1) x (N1+1) table of Schmidt coefficients, zero outside range."""
    n, n1 = n_qubits, block_size
    table = np.zeros((n + 1, n1 + 1))
    for m in range(n + 1):
        row = schmidt_row(m, n, n1)
        table[m, row.k_min : row.k_max + 1] = row.coefficients
    table.setflags(write=False)
    return table


def _dicke_weights(amps: np.ndarray, n: int, n1: int) -> np.ndarray:
    """weights[k, a] = lambda_k^{a+k} c_{a+k}; the reduced state of the
    last N - N1 qubits is weights^T conj(weights)."""
    table = _schmidt_table(n, n1)
    d = n - n1 + 1
    weights = np.empty((n1 + 1, d), dtype=np.complex128)
    for k in range(n1 + 1):
        m = np.arange(k, k + d)
        weights[k] = table[m, k] * amps[m]
    return weights


def dicke_reduced_state(c: StateVector, block_size: int) -> DensityOperator:
    """Reduced state of the last N - N1 qubits of a symmetric superposition.

    Works directly in the (N+1)-dimensional symmetric basis via the
    closed-form Schmidt coefficients; never touches the 2^N register.
    """
    if c.basis != "dicke":
        raise ValueError("dicke_reduced_state expects a dicke-tagged state")
    n = c.n_parties
    n1 = block_size
    if not 1 <= n1 <= n - 1:
        raise ValueError(f"block size {n1} invalid for N={n}")
    weights = _dicke_weights(c.normalized().amplitudes, n, n1)
    reduced = weights.T @ weights.conj()
    return DensityOperator.from_matrix(reduced)


def dicke_block_entropy(c: StateVector, block_size: int) -> float:
    """Entropy of one block of a pure symmetric superposition, in bits.

    Diagonalizes the Gram matrix of the smaller Schmidt side, size
    min(N1, N - N1) + 1, which shares the nonzero spectrum of the reduced
    state; much cheaper than the full reduced matrix for small blocks.
    """
    if c.basis != "dicke":
        raise ValueError("dicke_block_entropy expects a dicke-tagged state")
    n = c.n_parties
    n1 = min(block_size, n - block_size)
    if not 1 <= n1 <= n - 1:
        raise ValueError(f"block size {block_size} invalid for N={n}")
    weights = _dicke_weights(c.normalized().amplitudes, n, n1)
    gram = weights @ weights.conj().T
    return entropy_of_probabilities(np.linalg.eigvalsh(gram))
