"""Instantaneous application of an element of the Clifford hierarchy.

Alice applies ``U`` to the uncorrected register, turning Bob's teleportation
Pauli ``sigma`` into ``E = U sigma U^dag``, one level lower. The register then
bounces between the parties: the sender teleports, the receiver (who knows
``E`` thanks to the label of the EPR set in use) applies ``E^dag``, leaving
``E^dag sigma' E`` another level lower. Once the error is Pauli the parties
exchange outcomes and correct.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from ..referee import ALICE, BOB, Ledger, Referee, Transcript
from ..statevec import GATE_MATRICES, StateVector, apply_matrix, apply_pauli, fidelity
from .base import RunReport, alice_wires, bob_wires, teleport_wires

MAX_LEVEL = 5
PHASE_TOL = 1e-9


class ConjugationTableError(ValueError):
    pass


def pauli_matrix(n: int, x: int, z: int) -> np.ndarray:
    """``X^x Z^z`` with bit ``n-1-w`` of the masks acting on wire ``w``."""
    mats = []
    for w in range(n):
        bx, bz = (x >> (n - 1 - w)) & 1, (z >> (n - 1 - w)) & 1
        m = GATE_MATRICES["I"]
        if bz:
            m = GATE_MATRICES["Z"] @ m
        if bx:
            m = GATE_MATRICES["X"] @ m
        mats.append(m)
    return reduce(np.kron, mats)


def paulis(n: int):
    for x, z in itertools.product(range(2 ** n), repeat=2):
        yield (x, z), pauli_matrix(n, x, z)


def pauli_decompose(m: np.ndarray, n: int) -> tuple[int, int] | None:
    """Masks ``(x, z)`` with ``m`` equal to ``X^x Z^z`` up to phase, else ``None``."""
    dim = 2 ** n
    for (x, z), p in paulis(n):
        if abs(abs(np.trace(p.conj().T @ m)) / dim - 1) < PHASE_TOL:
            return x, z
    return None


def in_level(u: np.ndarray, n: int, k: int) -> bool:
    if k < 1:
        return False
    if k == 1:
        return pauli_decompose(u, n) is not None
    ud = u.conj().T
    return all(in_level(u @ p @ ud, n, k - 1) for _, p in paulis(n))


def hierarchy_level(u: np.ndarray, n: int, cap: int = MAX_LEVEL) -> int:
    for k in range(1, cap + 1):
        if in_level(u, n, k):
            return k
    raise ConjugationTableError(f"unitary not in the first {cap} levels")


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = PHASE_TOL) -> bool:
    dim = a.shape[0]
    return abs(abs(np.trace(a.conj().T @ b)) / dim - 1) < tol


@dataclass
class HierarchyUnitary:
    """``U`` with its level and conjugation table ``sigma -> U sigma U^dag``."""

    name: str
    n: int
    matrix: np.ndarray
    level: int
    table: dict[tuple[int, int], np.ndarray] = field(repr=False)

    def validate(self) -> None:
        u, ud = self.matrix, self.matrix.conj().T
        if not np.allclose(ud @ u, np.eye(2 ** self.n), atol=1e-9):
            raise ConjugationTableError(f"{self.name} is not unitary")
        for (x, z), p in paulis(self.n):
            entry = self.table.get((x, z))
            if entry is None:
                raise ConjugationTableError(f"{self.name}: no table entry for Pauli ({x},{z})")
            if not equal_up_to_phase(entry, u @ p @ ud):
                raise ConjugationTableError(f"{self.name}: wrong entry for Pauli ({x},{z})")
            if not in_level(entry, self.n, self.level - 1) and self.level > 1:
                raise ConjugationTableError(f"{self.name}: entry ({x},{z}) not in level {self.level - 1}")
        if self.level == 1 and pauli_decompose(u, self.n) is None:
            raise ConjugationTableError(f"{self.name} is not Pauli")

    def conjugate(self, x: int, z: int) -> np.ndarray:
        return self.table[(x, z)]


_W8 = np.exp(1j * np.pi / 8)
BUILTIN = {
    "X": (1, GATE_MATRICES["X"]),
    "H": (1, GATE_MATRICES["H"]),
    "P": (1, GATE_MATRICES["P"]),
    "T": (1, GATE_MATRICES["T"]),
    "PT": (1, GATE_MATRICES["P"] @ GATE_MATRICES["T"]),
    "SQRT_T": (1, np.diag([1, _W8])),
    "CNOT": (2, np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)),
    "CP": (2, np.diag([1, 1, 1, 1j])),
    "T_I": (2, np.kron(GATE_MATRICES["T"], GATE_MATRICES["I"])),
}


def build_hierarchy_unitary(name: str, matrix: np.ndarray | None = None,
                            n: int | None = None) -> HierarchyUnitary:
    """Compute level and conjugation table for a builtin name or a given matrix."""
    if matrix is None:
        if name not in BUILTIN:
            raise KeyError(f"unknown builtin {name!r}; choose from {sorted(BUILTIN)}")
        n, matrix = BUILTIN[name]
    matrix = np.asarray(matrix, dtype=complex)
    n = n if n is not None else int(round(math.log2(matrix.shape[0])))
    ud = matrix.conj().T
    table = {key: matrix @ p @ ud for key, p in paulis(n)}
    u = HierarchyUnitary(name, n, matrix, hierarchy_level(matrix, n), table)
    u.validate()
    return u


def rounds_for_level(k: int) -> int:
    return max(0, k - 2)


def pairs_used(n: int, k: int) -> int:
    """Pairs the simulated run consumes: round ``r`` uses ``4^{n(r-1)}`` sets of ``n`` pairs."""
    return len(bob_wires(n)) + n * sum(4 ** (n * (r - 1)) for r in range(1, rounds_for_level(k) + 1))


def hierarchy_charge(n: int, k: int) -> int:
    """Ledgered cost: the initial teleportation plus ``n 4^{nt}`` for ``t = 1 .. k-1``."""
    return len(bob_wires(n)) + n * sum(4 ** (n * t) for t in range(1, k))


def hierarchy_bound(n: int, k: int) -> int:
    return math.ceil(n / 2) + n * sum(4 ** (n * t) for t in range(1, k + 1))


@dataclass
class HierarchyResult:
    state: StateVector
    transcript: Transcript
    report: RunReport
    ledger: Ledger


def _masks(out: dict[int, tuple[str, int, int]], n: int) -> tuple[int, int]:
    x = z = 0
    for w, (_, bx, bz) in out.items():
        x |= bx << (n - 1 - w)
        z |= bz << (n - 1 - w)
    return x, z


def run_clifford_hierarchy(u: HierarchyUnitary, psi: StateVector, seed: int,
                           tol: float = 1e-10) -> HierarchyResult:
    u.validate()
    n, k = u.n, u.level
    ref, ledger = Referee(seed), Ledger()
    wires = list(range(n))

    ledger.charge("step0", len(bob_wires(n)))
    state, out = teleport_wires(ref, psi, "B:h0", bob_wires(n))
    labels = {BOB: "".join(f"{bx}{bz}" for _, bx, bz in out.values()), ALICE: ""}
    # Alice applies U; the error becomes the table entry for Bob's Pauli.
    state = apply_matrix(state, u.matrix, wires)
    err = u.conjugate(*_masks(out, n))
    holder = ALICE
    set_label = ""
    for t in range(1, k):
        ledger.charge(f"level{t}", n * 4 ** (n * t))
    for r in range(1, rounds_for_level(k) + 1):
        prefix = "A" if holder == ALICE else "B"
        state, out = teleport_wires(ref, state, f"{prefix}:h{r}:{set_label}", wires)
        sigma = pauli_matrix(n, *_masks(out, n))
        # the receiver knows err: its own data plus the sender's data carried by the set label
        state = apply_matrix(state, err.conj().T, wires)
        err = err.conj().T @ sigma @ err
        receiver = BOB if holder == ALICE else ALICE
        set_label += labels[receiver] + "|"
        labels[holder] = "".join(f"{bx}{bz}" for _, bx, bz in out.values())
        holder = receiver

    masks = pauli_decompose(err, n)
    if masks is None:
        raise ConjugationTableError("error operator did not reach the Pauli level")
    ex, ez = masks
    # The wires owned by the other party go back with the simultaneous message.
    ledger.charge("return", 0)
    away = bob_wires(n) if holder == ALICE else alice_wires(n)
    state, ret = teleport_wires(ref, state, f"{'A' if holder == ALICE else 'B'}:ret", away)
    ref.exchange()
    for w in wires:
        cx, cz = (ex >> (n - 1 - w)) & 1, (ez >> (n - 1 - w)) & 1
        if w in ret:
            name = ret[w][0]
            view = ref.bob if w in bob_wires(n) else ref.alice
            cx ^= view[name + ".x"]
            cz ^= view[name + ".z"]
        state = apply_pauli(state, w, cx, cz)

    expected = apply_matrix(psi, u.matrix, wires)
    fid = fidelity(expected, state)
    charge = hierarchy_charge(n, k)
    ok = (abs(fid - 1) <= tol and ledger.epr_charged == charge
          and ledger.epr_charged <= hierarchy_bound(n, k) and not ref.violations)
    report = RunReport("hierarchy", n, "k", k, seed, ledger.epr_charged, hierarchy_bound(n, k),
                       fid, ok, ledger.by_phase(), {"unitary": u.name, "expected_charge": charge,
                                                    "pairs_used": pairs_used(n, k)})
    return HierarchyResult(state, ref.transcript, report, ledger)
