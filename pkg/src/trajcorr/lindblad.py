"""Master-equation specification, unraveling transforms, and the exact integrator.

The Runge-Kutta integrator here is the correctness oracle against which the
stochastic trajectory engines are validated: any unraveling of the same
specification must reproduce its density matrix on average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import DensityOperator

__all__ = [
    "LindbladSpec",
    "UnravelingTransform",
    "dissipator",
    "liouvillian_apply",
    "liouvillian_matrix",
    "integrate_master",
    "effective_hamiltonian",
    "apply_unraveling",
    "trace_distance",
    "StepSizeError",
]

HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-8


class StepSizeError(ValueError):
    """Raised when a requested time step violates an integrator guard."""


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian plus jump operators, all dim x dim, in units with hbar = 1."""

    hamiltonian: np.ndarray
    jumps: tuple[np.ndarray, ...]

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=np.complex128)
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"Hamiltonian must be square, got {h.shape}")
        herm_err = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
        if herm_err > HERMITICITY_TOL:
            raise ValueError(f"Hamiltonian not Hermitian (max deviation {herm_err:.2e})")
        jumps = []
        for j in self.jumps:
            jm = np.asarray(j, dtype=np.complex128)
            jm.setflags(write=False)
            if jm.shape != h.shape:
                raise ValueError(f"jump shape {jm.shape} != Hamiltonian shape {h.shape}")
            jumps.append(jm)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class UnravelingTransform:
    """Unitary mixing of the jump operators plus complex offsets."""

    mixing: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.mixing, dtype=np.complex128)
        a = np.asarray(self.offsets, dtype=np.complex128)
        u.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "mixing", u)
        object.__setattr__(self, "offsets", a)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"mixing matrix must be square, got {u.shape}")
        if a.shape != (u.shape[0],):
            raise ValueError("offsets length must match the number of jumps")
        err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        if err > UNITARITY_TOL:
            raise ValueError(f"mixing matrix not unitary (deviation {err:.2e})")


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        return rho.matrix
    return np.asarray(rho, dtype=np.complex128)


def dissipator(op: np.ndarray, rho) -> np.ndarray:
    """O rho O^dag - (1/2){O^dag O, rho}; traceless by construction."""
    o = np.asarray(op, dtype=np.complex128)
    r = _as_matrix(rho)
    if o.shape != r.shape:
        raise ValueError(f"dimension mismatch: op {o.shape} vs rho {r.shape}")
    k = o.conj().T @ o
    return o @ r @ o.conj().T - 0.5 * (k @ r + r @ k)


def liouvillian_apply(spec: LindbladSpec, rho) -> np.ndarray:
    """Right-hand side of the master equation: -i[H, rho] + sum_i D[J_i] rho."""
    r = _as_matrix(rho)
    if r.shape != spec.hamiltonian.shape:
        raise ValueError(f"dimension mismatch: rho {r.shape} vs spec dim {spec.dim}")
    out = -1j * (spec.hamiltonian @ r - r @ spec.hamiltonian)
    for j in spec.jumps:
        out += dissipator(j, r)
    return out


def liouvillian_matrix(spec: LindbladSpec) -> np.ndarray:
    """Dense dim^2 x dim^2 superoperator acting on row-major vec(rho).

    Uses vec(A rho B) = (A kron B^T) vec(rho).
    """
    d = spec.dim
    eye = np.eye(d)
    h = spec.hamiltonian
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for j in spec.jumps:
        k = j.conj().T @ j
        sup += np.kron(j, j.conj())
        sup -= 0.5 * (np.kron(k, eye) + np.kron(eye, k.T))
    return sup


def _max_jump_rate(spec: LindbladSpec) -> float:
    rates = [np.linalg.norm(j.conj().T @ j, 2) for j in spec.jumps]
    return max(rates, default=0.0)


def integrate_master(spec: LindbladSpec, rho0, dt: float, t_final: float,
                     record_stride: int = 1):
    """Classical RK4 integration of the master equation.

    Returns (times, rhos) with one re-Hermitized, trace-renormalized
    DensityOperator per recorded step (every ``record_stride`` steps,
    always including t = 0 and the final time).
    """
    if dt <= 0:
        raise StepSizeError("dt must be positive")
    if dt * _max_jump_rate(spec) > 0.05:
        raise StepSizeError(
            f"dt={dt} too large for the fastest jump rate {_max_jump_rate(spec):.3g}"
        )
    rho = _as_matrix(rho0).copy()
    n_steps = int(round(t_final / dt))
    times = [0.0]
    rhos = [DensityOperator.from_matrix(rho)]
    for step in range(1, n_steps + 1):
        k1 = liouvillian_apply(spec, rho)
        k2 = liouvillian_apply(spec, rho + 0.5 * dt * k1)
        k3 = liouvillian_apply(spec, rho + 0.5 * dt * k2)
        k4 = liouvillian_apply(spec, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = (rho + rho.conj().T) / 2
        rho = rho / np.trace(rho).real
        if step % record_stride == 0 or step == n_steps:
            times.append(step * dt)
            rhos.append(DensityOperator.from_matrix(rho))
    return np.array(times), rhos


def effective_hamiltonian(spec: LindbladSpec) -> np.ndarray:
    """Non-Hermitian generator H - (i/2) sum_i J_i^dag J_i of the no-jump evolution."""
    h_eff = spec.hamiltonian.astype(np.complex128).copy()
    for j in spec.jumps:
        h_eff -= 0.5j * (j.conj().T @ j)
    return h_eff


def apply_unraveling(spec: LindbladSpec, transform: UnravelingTransform) -> LindbladSpec:
    """Equivalent specification with mixed and offset jump operators.

    The Hamiltonian picks up the compensation term (1/2i) sum_i
    (conj(a_i) G~_i - a_i G~_i^dag) built from the unitarily mixed jumps
    G~_i, which keeps the Liouvillian exactly unchanged.
    """
    u = transform.mixing
    alpha = transform.offsets
    if u.shape[0] != len(spec.jumps):
        raise ValueError(
            f"transform size {u.shape[0]} != number of jumps {len(spec.jumps)}"
        )
    d = spec.dim
    mixed = [sum(u[i, j] * spec.jumps[j] for j in range(len(spec.jumps)))
             for i in range(len(spec.jumps))]
    h = spec.hamiltonian.astype(np.complex128).copy()
    new_jumps = []
    for i, g in enumerate(mixed):
        a = alpha[i]
        h += (np.conj(a) * g - a * g.conj().T) / 2j
        new_jumps.append(g + a * np.eye(d))
    return LindbladSpec(hamiltonian=h, jumps=tuple(new_jumps))


def trace_distance(rho_a, rho_b) -> float:
    """Half the trace norm of the difference of two density matrices."""
    diff = _as_matrix(rho_a) - _as_matrix(rho_b)
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))
