"""Dense state-vector simulation used as the correctness oracle.

Qubit 0 is the most significant bit of the basis index, so ``|10>`` on two
qubits is index 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .clifford_t import Circuit, Gate, PauliKey

DEFAULT_MAX_QUBITS = 14
NORM_TOL = 1e-9

_S2 = 1 / np.sqrt(2)
_W = np.exp(1j * np.pi / 4)

GATE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    "P": np.array([[1, 0], [0, 1j]], dtype=complex),
    "PDAG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "T": np.array([[1, 0], [0, _W]], dtype=complex),
    "TDAG": np.array([[1, 0], [0, np.conj(_W)]], dtype=complex),
}


class SimulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** self.n:
            raise SimulationError(f"expected {2 ** self.n} amplitudes, got {amps.size}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "StateVector":
        check_width(n)
        amps = np.zeros(2 ** n, dtype=complex)
        amps[index] = 1.0
        return cls(n, amps)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "StateVector":
        check_width(n)
        amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        return cls(n, amps / np.linalg.norm(amps))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_json(self) -> str:
        return json.dumps([[float(a.real), float(a.imag)] for a in self.amplitudes])

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        pairs = json.loads(text)
        amps = np.array([complex(re, im) for re, im in pairs])
        return cls(int(np.log2(len(amps))), amps)


def check_width(n: int, cap: int = DEFAULT_MAX_QUBITS) -> None:
    if not 1 <= n <= cap:
        raise SimulationError(f"qubit count {n} outside [1, {cap}]")


def apply_matrix(s: StateVector, m: np.ndarray, wires: Sequence[int]) -> StateVector:
    """Apply a ``2^k x 2^k`` unitary to the listed wires (first wire most significant)."""
    k = len(wires)
    for w in wires:
        if not 0 <= w < s.n:
            raise SimulationError(f"wire {w} out of range for {s.n} qubits")
    psi = s.amplitudes.reshape([2] * s.n)
    op = np.asarray(m, dtype=complex).reshape([2] * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(wires)))
    out = np.moveaxis(out, list(range(k)), list(wires))
    return StateVector(s.n, out.reshape(-1))


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    if g.kind == "CNOT":
        c, t = g.wires
        for w in g.wires:
            if not 0 <= w < s.n:
                raise SimulationError(f"wire {w} out of range for {s.n} qubits")
        psi = s.amplitudes.reshape([2] * s.n).copy()
        idx = [slice(None)] * s.n
        idx[c] = 1
        sub = psi[tuple(idx)]
        t_axis = t if t < c else t - 1
        psi[tuple(idx)] = np.flip(sub, axis=t_axis)
        return StateVector(s.n, psi.reshape(-1))
    return apply_matrix(s, GATE_MATRICES[g.kind], g.wires)


def apply_gates(s: StateVector, gates: Iterable[Gate]) -> StateVector:
    for g in gates:
        s = apply_gate(s, g)
    return s


def run_circuit(c: Circuit, s: StateVector) -> StateVector:
    if c.n != s.n:
        raise SimulationError("circuit and state widths differ")
    return apply_gates(s, c.gates)


def apply_pauli(s: StateVector, wire: int, x: int, z: int) -> StateVector:
    """Apply ``X^x Z^z`` (Z first) on one wire."""
    if z & 1:
        s = apply_matrix(s, GATE_MATRICES["Z"], [wire])
    if x & 1:
        s = apply_matrix(s, GATE_MATRICES["X"], [wire])
    return s


def apply_pauli_key(s: StateVector, key: PauliKey, wires: Sequence[int] | None = None) -> StateVector:
    wires = range(key.n) if wires is None else wires
    for i, w in enumerate(wires):
        s = apply_pauli(s, w, key.x[i], key.z[i])
    return s


def teleport_channel(s: StateVector, wires: Sequence[int],
                     rng: np.random.Generator) -> tuple[StateVector, PauliKey]:
    """Teleport the given wires: a uniformly random ``X^a Z^b`` per wire.

    Equivalent in distribution to Bell-measuring into fresh EPR halves, without
    materialising the pairs.
    """
    bits = rng.integers(0, 2, size=(2, len(wires)))
    key = PauliKey(tuple(bits[0]), tuple(bits[1]))
    return apply_pauli_key(s, key, wires), key


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n != b.n:
        raise SimulationError("dimension mismatch")
    f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(1.0, f))


def measure_computational(s: StateVector, wire: int,
                          rng: np.random.Generator) -> tuple[int, StateVector]:
    if not 0 <= wire < s.n:
        raise SimulationError(f"wire {wire} out of range")
    psi = s.amplitudes.reshape([2] * s.n)
    p1 = float(np.sum(np.abs(np.take(psi, 1, axis=wire)) ** 2))
    bit = int(rng.random() < p1)
    psi = psi.copy()
    idx = [slice(None)] * s.n
    idx[wire] = 1 - bit
    psi[tuple(idx)] = 0
    prob = p1 if bit else 1 - p1
    return bit, StateVector(s.n, psi.reshape(-1) / np.sqrt(prob))
