"""Simulator and verification harness for instantaneous non-local quantum computation."""

from .clifford_t import (Circuit, CircuitError, Gate, KeyPolynomial, PauliKey,
                         commute_t_past_key, conjugate_key_through_clifford, key_poly_eval,
                         key_poly_xor, parse_circuit)
from .referee import (AccessViolation, Ledger, PhasedProgram, Referee, RefereeResult, Transcript,
                      referee_run)
from .statevec import (StateVector, apply_gate, fidelity, measure_computational, run_circuit,
                       teleport_channel)

__version__ = "0.1.0"
