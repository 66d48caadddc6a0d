"""Genuine multipartite correlations of pure states and their ensemble averages.

For a pure state the genuine n-partite classical and quantum correlations
coincide and equal the reduced-state entropy minimized over all
bipartitions; the total is twice that value.  The ensemble average takes
the per-trajectory minimum first, then averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import (
    Bipartition,
    StateVector,
    dicke_block_entropy,
    partial_trace,
    qubit_bipartitions,
    von_neumann_entropy,
)

__all__ = [
    "CorrelationSample",
    "genuine_correlations_qubits",
    "genuine_correlations_dicke",
    "average_genuine_correlations",
]


@dataclass(frozen=True)
class CorrelationSample:
    """Min/max bipartition entropies of one pure state, in bits."""

    value: float  # genuine correlations: minimum bipartition entropy
    argmin: Bipartition
    max_value: float
    argmax: Bipartition
    time: float = 0.0

    @property
    def total(self) -> float:
        """Genuine total correlations (classical + quantum) of the pure state."""
        return 2.0 * self.value


def genuine_correlations_qubits(psi: StateVector) -> CorrelationSample:
    """Minimum (and maximum) reduced entropy over all canonical bipartitions.

    Ties break toward the lexicographically smallest subset, which the
    canonical enumeration order guarantees.
    """
    if psi.basis != "register":
        raise ValueError("expected a register state")
    if psi.n_parties < 2:
        raise ValueError("need at least two qubits")
    psi = psi.normalized()
    best_min = best_max = None
    arg_min = arg_max = None
    for cut in qubit_bipartitions(psi.n_parties):
        # Trace down to the smaller side for the cheaper eigenproblem.
        side = cut.subset if len(cut.subset) <= psi.n_parties // 2 else cut.complement()
        entropy = von_neumann_entropy(partial_trace(psi, side))
        if best_min is None or entropy < best_min - 1e-15:
            best_min, arg_min = entropy, cut
        if best_max is None or entropy > best_max + 1e-15:
            best_max, arg_max = entropy, cut
    return CorrelationSample(
        value=max(best_min, 0.0), argmin=arg_min, max_value=best_max, argmax=arg_max
    )


def genuine_correlations_dicke(c: StateVector) -> CorrelationSample:
    """Bipartition entropy extrema of a symmetric-sector state.

    Only block sizes 1..floor(N/2) are scanned; entropies are symmetric
    under N1 <-> N - N1 for a pure global state.
    """
    if c.basis != "dicke":
        raise ValueError("expected a dicke-tagged state")
    n = c.n_parties
    if n < 2:
        raise ValueError("need at least two qubits")
    c = c.normalized()
    best_min = best_max = None
    n1_min = n1_max = None
    for n1 in range(1, n // 2 + 1):
        entropy = dicke_block_entropy(c, n1)
        if best_min is None or entropy < best_min - 1e-15:
            best_min, n1_min = entropy, n1
        if best_max is None or entropy > best_max + 1e-15:
            best_max, n1_max = entropy, n1
    return CorrelationSample(
        value=max(best_min, 0.0),
        argmin=Bipartition.dicke(n1_min, n),
        max_value=best_max,
        argmax=Bipartition.dicke(n1_max, n),
    )


def _correlation_value(psi: StateVector) -> float:
    if psi.basis == "dicke":
        return genuine_correlations_dicke(psi).value
    return genuine_correlations_qubits(psi).value


def average_genuine_correlations(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-time mean and standard error of per-trajectory correlations.

    The minimum over bipartitions is taken per trajectory before
    averaging.  All records must share one time grid.  Returns
    (times, mean, stderr); stderr is NaN for a single record.
    """
    records = list(records)
    if not records:
        raise ValueError("no records given")
    times = records[0].times
    for rec in records[1:]:
        if len(rec.times) != len(times) or not np.allclose(rec.times, times):
            raise ValueError("records do not share a time grid")
    values = np.array([
        [_correlation_value(rec.state(i)) for i in range(len(rec))]
        for rec in records
    ])
    mean = values.mean(axis=0)
    if len(records) > 1:
        stderr = values.std(axis=0, ddof=1) / np.sqrt(len(records))
    else:
        stderr = np.full(len(times), np.nan)
    return times, mean, stderr
