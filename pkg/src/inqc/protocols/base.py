"""Pieces shared by the INQC protocols: wire ownership, key bookkeeping, reports."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from ..clifford_t import Circuit, Gate, KeyPolynomial
from ..referee import ALICE, BOB, Ledger, Referee
from ..statevec import StateVector, apply_gate, apply_pauli, fidelity, run_circuit

DEFAULT_TOL = 1e-9


def bob_wires(n: int) -> range:
    """Bob holds the upper half of the wires (the single wire when ``n == 1``)."""
    return range(n // 2, n)


def alice_wires(n: int) -> range:
    return range(0, n // 2)


def owner_of_wire(n: int, w: int) -> str:
    return BOB if w >= n // 2 else ALICE


def outcome_var(name: str, comp: str) -> KeyPolynomial:
    owner = "alice" if name.startswith("A:") else "bob"
    return KeyPolynomial.var(f"{name}.{comp}", owner)


def teleport_wires(ref: Referee, state: StateVector, prefix: str,
                   wires: Sequence[int]) -> tuple[StateVector, dict[int, tuple[str, int, int]]]:
    """Teleport each wire through a fresh pair; outcome variables are ``prefix:w``."""
    out = {}
    for w in wires:
        name = f"{prefix}:{w}"
        bx, bz = ref.measure(name)
        state = apply_pauli(state, w, bx, bz)
        out[w] = (name, bx, bz)
    return state, out


def evaluate_key(view, xs: Sequence[KeyPolynomial], zs: Sequence[KeyPolynomial],
                 wires: Sequence[int]) -> dict[int, tuple[int, int]]:
    return {w: (xs[w].evaluate(view), zs[w].evaluate(view)) for w in wires}


def apply_corrections(state: StateVector, corr: dict[int, tuple[int, int]]) -> StateVector:
    for w, (x, z) in corr.items():
        state = apply_pauli(state, w, x, z)
    return state


def stray_phase(g: Gate) -> str:
    """Phase gate left behind when ``g`` is pushed through an X key."""
    return "P" if g.kind == "T" else "PDAG"


def undo_phase(kind: str) -> str:
    return "PDAG" if kind == "P" else "P"


@dataclass
class RunReport:
    protocol: str
    n: int
    param: str
    value: int
    seed: int
    epr_charged: int
    bound: float
    fidelity: float
    passed: bool
    breakdown: dict[str, int] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("param"), d.pop("value"), d.pop("passed")
        d[self.param] = self.value
        d["pass"] = self.passed
        return d


def check_output(circuit_or_state, psi: StateVector, out: StateVector) -> float:
    expected = run_circuit(circuit_or_state, psi) if isinstance(circuit_or_state, Circuit) \
        else circuit_or_state
    return fidelity(expected, out)


def apply_one(state: StateVector, kind: str, wire: int) -> StateVector:
    return apply_gate(state, Gate(kind, (wire,)))


def new_ledger() -> Ledger:
    return Ledger()
