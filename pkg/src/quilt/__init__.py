"""quilt: a desk-scale hybrid quantum-classical toolkit.

Subsystems:

* :mod:`quilt.circuit` - gate-level IR and Pauli observables.
* :mod:`quilt.qasm` - assembly-text interchange format.
* :mod:`quilt.simsv` - dense statevector simulator (ground truth).
* :mod:`quilt.simmps` - matrix-product-state simulator and entropy probe.
* :mod:`quilt.knit` - adaptive circuit knitting: cut planning,
  quasiprobability execution, overhead accounting.
* :mod:`quilt.maxcut` - QAOA MaxCut, divide-and-conquer pipeline, baselines.
* :mod:`quilt.hhl` - quantum linear solver with classical comparison.
* :mod:`quilt.dispatch` - quantum-resource server/client and a
  discrete-event scheduler simulator for hybrid jobs.
* :mod:`quilt.cli` - ``quilt`` command-line entry point.
"""

from .circuit import (
    Circuit,
    Gate,
    GateKind,
    PauliString,
    PauliSum,
    append,
    bind,
    inverse,
    pauli_expectation_terms,
)
from .simsv import StateVector, expectation, sample, simulate

__all__ = [
    "Circuit",
    "Gate",
    "GateKind",
    "PauliString",
    "PauliSum",
    "StateVector",
    "append",
    "bind",
    "expectation",
    "inverse",
    "pauli_expectation_terms",
    "sample",
    "simulate",
]

__version__ = "0.1.0"
