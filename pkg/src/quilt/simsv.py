"""Dense statevector simulator: ground truth for every other module.

Gates are applied by in-place stride iteration over amplitude pairs (no
full-matrix construction), which keeps 20+ qubits workable on a desk
machine.  Sampling uses numpy's seeded PCG64 generator with inverse-CDF
lookup over the fixed little-endian amplitude ordering, so counts are
reproducible for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .circuit import Circuit, GateKind, PauliString, PauliSum

MAX_QUBITS = 24

_DIAG_1Q = {
    GateKind.Z: (1.0 + 0j, -1.0 + 0j),
    GateKind.S: (1.0 + 0j, 1j),
    GateKind.SDG: (1.0 + 0j, -1j),
    GateKind.T: (1.0 + 0j, np.exp(0.25j * np.pi)),
}


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over 2**n_qubits little-endian basis states."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=np.complex128)
        if a.shape != (1 << self.n_qubits,):
            raise SimulationError(
                f"amplitude length {a.shape} does not match {self.n_qubits} qubit(s)"
            )
        object.__setattr__(self, "amps", a)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def fidelity(self, other: "StateVector") -> float:
        """|<self|other>|^2 (phase-insensitive overlap)."""
        return float(abs(np.vdot(self.amps, other.amps)) ** 2)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def _apply_gate(amps: np.ndarray, gate) -> None:
    kind = gate.kind
    if kind is GateKind.MEASURE:
        return
    if kind is GateKind.CX:
        kernels.apply_cx(amps, gate.qubits[0], gate.qubits[1])
    elif kind is GateKind.CZ:
        kernels.apply_cz(amps, gate.qubits[0], gate.qubits[1])
    elif kind is GateKind.RZZ:
        kernels.apply_rzz(amps, gate.qubits[0], gate.qubits[1], float(gate.param))
    elif kind is GateKind.UNITARY:
        if len(gate.qubits) == 1:
            kernels.apply_single(amps, gate.qubits[0], gate.matrix)
        elif len(gate.qubits) == 2:
            kernels.apply_two(amps, gate.qubits[0], gate.qubits[1], gate.matrix)
        else:
            kernels.apply_unitary(amps, gate.qubits, gate.matrix)
    elif kind in _DIAG_1Q:
        p0, p1 = _DIAG_1Q[kind]
        kernels.apply_diag_single(amps, gate.qubits[0], p0, p1)
    elif kind is GateKind.RZ:
        t = float(gate.param)
        kernels.apply_diag_single(
            amps, gate.qubits[0], np.exp(-0.5j * t), np.exp(0.5j * t)
        )
    else:
        kernels.apply_single(amps, gate.qubits[0], gate.unitary())


def simulate(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Run ``circuit`` on ``initial`` (default |0...0>); measures are ignored."""
    if circuit.n_qubits > MAX_QUBITS:
        raise SimulationError(
            f"{circuit.n_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}"
        )
    if not circuit.is_bound:
        raise SimulationError(f"unbound parameters: {circuit.params}")
    if initial is None:
        amps = np.zeros(1 << circuit.n_qubits, dtype=np.complex128)
        amps[0] = 1.0
    else:
        if initial.n_qubits != circuit.n_qubits:
            raise SimulationError("initial state width does not match circuit")
        amps = initial.amps.astype(np.complex128, copy=True)
    for gate in circuit.gates:
        _apply_gate(amps, gate)
    return StateVector(circuit.n_qubits, amps)


def _apply_pauli(amps: np.ndarray, string: PauliString) -> None:
    for q, op in enumerate(string.ops):
        if op == "I":
            continue
        if op == "X":
            kernels.apply_single(amps, q, np.array([[0, 1], [1, 0]], dtype=complex))
        elif op == "Y":
            kernels.apply_single(amps, q, np.array([[0, -1j], [1j, 0]], dtype=complex))
        else:  # Z
            kernels.apply_diag_single(amps, q, 1.0 + 0j, -1.0 + 0j)


def expectation(state: StateVector, obs: PauliSum) -> float:
    """<psi| obs |psi> as a real number (imaginary residue checked < 1e-10)."""
    if obs.num_qubits is not None and obs.num_qubits != state.n_qubits:
        raise SimulationError(
            f"observable width {obs.num_qubits} does not match state "
            f"width {state.n_qubits}"
        )
    value = 0.0 + 0.0j
    for coeff, string in obs.terms:
        if string.is_identity:
            value += coeff * np.vdot(state.amps, state.amps)
            continue
        work = state.amps.copy()
        _apply_pauli(work, string)
        value += coeff * np.vdot(state.amps, work)
    if abs(value.imag) > 1e-10:
        raise SimulationError(f"expectation has imaginary residue {value.imag:g}")
    return float(value.real)


def sample(state: StateVector, shots: int, seed: int | None = None) -> dict[str, int]:
    """Draw ``shots`` bitstrings from |amps|^2; deterministic for a seed.

    Keys are little-endian: character ``i`` is the value of qubit ``i``.
    Keys appear in ascending basis-index order.
    """
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(seed)
    draws = rng.random(shots)
    idx = np.searchsorted(cdf, draws, side="right")
    idx = np.minimum(idx, probs.size - 1)
    values, cnts = np.unique(idx, return_counts=True)
    n = state.n_qubits
    return {
        "".join(str((int(v) >> q) & 1) for q in range(n)): int(c)
        for v, c in zip(values, cnts)
    }
