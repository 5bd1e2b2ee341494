"""Independent dense-matrix oracles shared by the test suite.

Everything here is built from first principles (kron chains over
hand-written 2x2 matrices) so it never reuses the simulator kernels it is
meant to check.  Qubit 0 is the least-significant bit of a basis index.
"""

from __future__ import annotations

import numpy as np

SQ2 = 1.0 / np.sqrt(2.0)

P2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

H2 = np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex)
S2 = np.diag([1, 1j]).astype(complex)
SDG2 = np.diag([1, -1j]).astype(complex)
T2 = np.diag([1, np.exp(0.25j * np.pi)]).astype(complex)


def rx2(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry2(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz2(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]).astype(complex)


def embed_1q(m: np.ndarray, q: int, n: int) -> np.ndarray:
    """Embed a 2x2 matrix on qubit q into the full 2^n space."""
    out = np.array([[1.0 + 0j]])
    for i in range(n):
        out = np.kron(m if i == q else P2["I"], out)
    return out


def embed_multi(ms: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Kron product placing each 2x2 matrix on its qubit (identity elsewhere)."""
    out = np.array([[1.0 + 0j]])
    for i in range(n):
        out = np.kron(ms.get(i, P2["I"]), out)
    return out


def pauli_matrix(ops: str) -> np.ndarray:
    """Dense matrix of a Pauli string; ops[i] acts on qubit i."""
    return embed_multi({i: P2[c] for i, c in enumerate(ops)}, len(ops))


def cx_full(control: int, target: int, n: int) -> np.ndarray:
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        j = i ^ (1 << target) if (i >> control) & 1 else i
        m[j, i] = 1.0
    return m


def cz_full(qa: int, qb: int, n: int) -> np.ndarray:
    dim = 1 << n
    d = np.ones(dim, dtype=complex)
    for i in range(dim):
        if (i >> qa) & 1 and (i >> qb) & 1:
            d[i] = -1.0
    return np.diag(d)


def rzz_full(qa: int, qb: int, t: float, n: int) -> np.ndarray:
    dim = 1 << n
    d = np.empty(dim, dtype=complex)
    for i in range(dim):
        same = ((i >> qa) ^ (i >> qb)) & 1 == 0
        d[i] = np.exp(-0.5j * t) if same else np.exp(0.5j * t)
    return np.diag(d)


def gate_full(gate, n: int) -> np.ndarray:
    """Full-space matrix for a quilt Gate, derived independently."""
    from quilt.circuit import GateKind

    k = gate.kind
    fixed = {
        GateKind.H: H2,
        GateKind.X: P2["X"],
        GateKind.Y: P2["Y"],
        GateKind.Z: P2["Z"],
        GateKind.S: S2,
        GateKind.SDG: SDG2,
        GateKind.T: T2,
    }
    if k in fixed:
        return embed_1q(fixed[k], gate.qubits[0], n)
    if k is GateKind.RX:
        return embed_1q(rx2(gate.param), gate.qubits[0], n)
    if k is GateKind.RY:
        return embed_1q(ry2(gate.param), gate.qubits[0], n)
    if k is GateKind.RZ:
        return embed_1q(rz2(gate.param), gate.qubits[0], n)
    if k is GateKind.RZZ:
        return rzz_full(gate.qubits[0], gate.qubits[1], gate.param, n)
    if k is GateKind.CX:
        return cx_full(gate.qubits[0], gate.qubits[1], n)
    if k is GateKind.CZ:
        return cz_full(gate.qubits[0], gate.qubits[1], n)
    if k is GateKind.UNITARY:
        return unitary_full(gate.matrix, gate.qubits, n)
    raise ValueError(f"no oracle matrix for {k}")


def unitary_full(matrix: np.ndarray, targets, n: int) -> np.ndarray:
    """Embed a little-endian k-qubit matrix on ``targets`` into 2^n space."""
    k = len(targets)
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(n) if q not in targets]
    for col in range(dim):
        sub_in = 0
        for j, q in enumerate(targets):
            sub_in |= ((col >> q) & 1) << j
        base = 0
        for q in rest:
            base |= ((col >> q) & 1) << q
        for sub_out in range(1 << k):
            row = base
            for j, q in enumerate(targets):
                row |= ((sub_out >> j) & 1) << q
            m[row, col] += matrix[sub_out, sub_in]
    return m


def circuit_unitary(circuit) -> np.ndarray:
    """Matrix-chain product of a whole circuit (measures rejected)."""
    n = circuit.n_qubits
    u = np.eye(1 << n, dtype=complex)
    for g in circuit.gates:
        u = gate_full(g, n) @ u
    return u


def statevector_oracle(circuit, initial=None) -> np.ndarray:
    n = circuit.n_qubits
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    if initial is not None:
        psi = np.asarray(initial, dtype=complex).copy()
    for g in circuit.gates:
        from quilt.circuit import GateKind

        if g.kind is GateKind.MEASURE:
            continue
        psi = gate_full(g, n) @ psi
    return psi


def entropies_from_statevector(psi: np.ndarray, n: int) -> np.ndarray:
    """Schmidt entropies (bits) of every bond from reduced density matrices.

    Bond k separates qubits 0..k from k+1..n-1; qubit 0 is the fastest axis.
    """
    out = np.empty(n - 1)
    for k in range(n - 1):
        m = psi.reshape(1 << (n - k - 1), 1 << (k + 1))  # rows: high qubits
        svals = np.linalg.svd(m, compute_uv=False)
        p = svals**2
        p = p[p > 1e-16]
        out[k] = float(-np.sum(p * np.log2(p)))
    return out


def random_circuit(rng, n_qubits, n_gates, nearest_neighbor=False, parametric=False):
    """Random test circuit over the full gate vocabulary (no measures)."""
    from quilt import circuit as cir

    gates = []
    names = iter(f"p{i}" for i in range(n_gates))
    for _ in range(n_gates):
        roll = rng.integers(0, 10)
        q = int(rng.integers(0, n_qubits))
        if roll < 5 or n_qubits == 1:
            kind = rng.choice(["h", "x", "y", "z", "s", "sdg", "t", "rx", "ry", "rz"])
            if kind in ("rx", "ry", "rz"):
                theta = next(names) if parametric and rng.random() < 0.3 else float(
                    rng.uniform(-np.pi, np.pi)
                )
                gates.append(cir.Gate(cir.GateKind(kind), (q,), theta))
            else:
                gates.append(cir.Gate(cir.GateKind(kind), (q,)))
        else:
            if nearest_neighbor:
                a = int(rng.integers(0, n_qubits - 1))
                b = a + 1
                if rng.random() < 0.5:
                    a, b = b, a
            else:
                a, b = rng.choice(n_qubits, size=2, replace=False)
                a, b = int(a), int(b)
            kind = rng.choice(["rzz", "cx", "cz"])
            if kind == "rzz":
                theta = next(names) if parametric and rng.random() < 0.3 else float(
                    rng.uniform(-np.pi, np.pi)
                )
                gates.append(cir.Gate(cir.GateKind.RZZ, (a, b), theta))
            else:
                gates.append(cir.Gate(cir.GateKind(kind), (a, b)))
    return cir.Circuit(n_qubits, tuple(gates))
