"""Benchmark the statevector kernels: numba fast path vs numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--qubits 20] [--gates 120] [--repeats 3]

The same random circuit is simulated under both backends (the numba side is
warmed up first so JIT compilation is not timed) and the results are checked
to agree before the timing table is printed.  Selecting the fallback in
production is done with ``QUILT_DISABLE_NUMBA=1``; here the switch is
explicit via ``quilt.kernels.use_backend``.
"""

import argparse
import time

import numpy as np

from quilt import kernels
from quilt.circuit import Circuit, Gate, GateKind
from quilt.simsv import simulate


def random_layers(rng, n_qubits: int, n_gates: int) -> Circuit:
    gates = []
    one_q = ["h", "x", "rz", "rx", "ry", "s", "t"]
    while len(gates) < n_gates:
        kind = rng.choice(one_q + ["cx", "cz", "rzz"])
        if kind in ("cx", "cz", "rzz"):
            a = int(rng.integers(0, n_qubits - 1))
            qubits = (a, a + 1)
        else:
            qubits = (int(rng.integers(0, n_qubits)),)
        param = (
            float(rng.uniform(-np.pi, np.pi))
            if kind in ("rx", "ry", "rz", "rzz")
            else None
        )
        gates.append(Gate(GateKind(kind), qubits, param))
    return Circuit(n_qubits, tuple(gates))


def time_backend(name: str, circuit: Circuit, repeats: int) -> tuple[float, np.ndarray]:
    kernels.use_backend(name)
    state = simulate(circuit)  # warmup (JIT compile on the numba path)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        state = simulate(circuit)
        best = min(best, time.perf_counter() - start)
    return best, state.amps


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, default=20)
    parser.add_argument("--gates", type=int, default=120)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    circuit = random_layers(rng, args.qubits, args.gates)
    print(
        f"circuit: {args.qubits} qubits, {len(circuit.gates)} gates, "
        f"best of {args.repeats} runs"
    )

    saved = kernels.active_backend()
    try:
        t_numpy, amps_numpy = time_backend("numpy", circuit, args.repeats)
        rows = [("numpy", t_numpy)]
        if kernels.HAVE_NUMBA:
            t_numba, amps_numba = time_backend("numba", circuit, args.repeats)
            agreement = float(np.max(np.abs(amps_numba - amps_numpy)))
            if agreement > 1e-12:
                raise SystemExit(f"backends disagree by {agreement:.2e}")
            rows.append(("numba", t_numba))
        else:
            print("numba not installed: timing the fallback only")
    finally:
        kernels.use_backend(saved)

    print(f"{'backend':<10}{'seconds':>10}{'gates/s':>12}")
    for name, seconds in rows:
        print(f"{name:<10}{seconds:>10.3f}{len(circuit.gates) / seconds:>12.0f}")
    if len(rows) == 2:
        print(f"speedup (numpy/numba): {rows[0][1] / rows[1][1]:.2f}x")


if __name__ == "__main__":
    main()
