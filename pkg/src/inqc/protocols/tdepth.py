"""Instantaneous computation with cost exponential only in T-depth.

Every key entry is an XOR of *atoms*; an atom is a bit computed by a
garden-hose protocol whose inputs are the parties' views (inputs plus Bell
outcomes). After each T-layer the stray phase on wire ``w`` is present iff
the X key of ``w`` is 1, so it is removed by phase removal driven by that
key's protocol, which adds tracker atoms ``g`` and ``h`` to the key. After the
next Clifford segment every key entry is recombined into one atom with the
XOR combinator; ``m_t`` is the largest atom size at that point.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from ..clifford_t import Circuit, KeyPolynomial, conjugate_key_through_clifford
from ..gardenhose import (ConstantProtocol, GardenHoseProtocol, LocalXorProtocol, gh_evaluate,
                          gh_xor)
from ..referee import Ledger, Referee, Transcript
from ..statevec import StateVector, apply_gate, apply_gates, fidelity, run_circuit
from .base import (DEFAULT_TOL, RunReport, alice_wires, apply_corrections, bob_wires,
                   evaluate_key, outcome_var, teleport_wires)
from .phase import PhaseRemoval, phase_removal

M0_BOUND = 3


def recurrence_bound(n: int, m_prev: int) -> int:
    return 68 * n * m_prev + 12 * n + 1


def closed_form_bound(n: int, t: int) -> float:
    c1 = (216 * n - 2) / (68 * n - 1)
    return c1 * (68 * n) ** t + (3 - c1)


def tdepth_bound(n: int, m_trace: list[int]) -> int:
    """Initial teleportation plus ``sum_t 2 n m_{t-1}``."""
    return len(bob_wires(n)) + sum(2 * n * m for m in m_trace[:-1])


class AtomAssignment(Mapping):
    """Lazy assignment: atoms are evaluated by their protocols, other names read from ``view``."""

    def __init__(self, atoms: dict[str, GardenHoseProtocol], view):
        self.atoms, self.view = atoms, view
        self._cache: dict[str, int] = {}

    def __getitem__(self, name):
        if name in self.atoms:
            if name not in self._cache:
                self._cache[name] = gh_evaluate(self.atoms[name], self.view, self.view).bit
            return self._cache[name]
        return self.view[name]

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)


@dataclass
class KeyState:
    n: int
    xs: list[KeyPolynomial]
    zs: list[KeyPolynomial]
    atoms: dict[str, GardenHoseProtocol] = field(default_factory=dict)

    def protocol_for(self, poly: KeyPolynomial) -> GardenHoseProtocol | None:
        terms = poly.linear_terms()
        if not terms:
            return ConstantProtocol(1) if poly.constant else None
        if len(terms) == 1 and not poly.constant:
            return self.atoms[terms[0]]
        return gh_xor([self.atoms[t] for t in terms], poly.constant)

    def recombine(self, step: int) -> int:
        """Collapse every entry to a single atom; returns the largest atom size."""
        for comp, entries in (("x", self.xs), ("z", self.zs)):
            for w, poly in enumerate(entries):
                if poly.is_zero:
                    continue
                terms = poly.linear_terms()
                if len(terms) == 1 and not poly.constant:
                    continue
                name = f"k{step}:{comp}{w}"
                self.atoms[name] = self.protocol_for(poly)
                entries[w] = KeyPolynomial.var(name)
        return self.max_size()

    def max_size(self) -> int:
        sizes = [self.atoms[t].size for poly in (*self.xs, *self.zs) for t in poly.linear_terms()]
        return max(sizes, default=0)


@dataclass
class TDepthResult:
    state: StateVector
    transcript: Transcript
    m_trace: list[int]
    report: RunReport
    ledger: Ledger
    removals: list[PhaseRemoval]


def run_tdepth_protocol(c: Circuit, psi: StateVector, seed: int,
                        tol: float = DEFAULT_TOL) -> TDepthResult:
    n = c.n
    ref, ledger = Referee(seed), Ledger()
    cliffords, t_layers = c.layers
    zero = KeyPolynomial.zero()
    keys = KeyState(n, [zero] * n, [zero] * n)

    # Step 0: Bob teleports his qubits; Alice runs C_0. Every key is a local Bob bit.
    ledger.charge("step0", len(bob_wires(n)))
    state, out = teleport_wires(ref, psi, "B:s0", bob_wires(n))
    for w, (name, _, _) in out.items():
        keys.xs[w], keys.zs[w] = outcome_var(name, "x"), outcome_var(name, "z")
    state = apply_gates(state, cliffords[0])
    keys.xs, keys.zs = conjugate_key_through_clifford((keys.xs, keys.zs), cliffords[0])
    for comp, entries in (("x", keys.xs), ("z", keys.zs)):
        for w, poly in enumerate(entries):
            if not poly.is_zero:
                name = f"k0:{comp}{w}"
                keys.atoms[name] = LocalXorProtocol(bob_bit=lambda v, p=poly: p.evaluate(v))
                entries[w] = KeyPolynomial.var(name)
    m_trace = [keys.max_size()]

    removals: list[PhaseRemoval] = []
    for t, (layer, seg) in enumerate(zip(t_layers, cliffords[1:]), 1):
        for g in layer:
            state = apply_gate(state, g)
        for g in layer:
            w = g.wires[0]
            f = keys.protocol_for(keys.xs[w])
            if f is None:
                continue
            tag = f"L{t}w{w}"
            pr = phase_removal(f, ref, tag, state, w, ledger, dagger=g.kind == "TDAG")
            state = pr.state
            removals.append(pr)
            gname, hname = f"g{t}:{w}", f"h{t}:{w}"
            keys.atoms[gname], keys.atoms[hname] = pr.x_tracker, pr.z_tracker
            keys.xs[w] = keys.xs[w] ^ KeyPolynomial.var(gname)
            keys.zs[w] = keys.zs[w] ^ KeyPolynomial.var(hname)
        state = apply_gates(state, seg)
        keys.xs, keys.zs = conjugate_key_through_clifford((keys.xs, keys.zs), seg)
        m_trace.append(keys.recombine(t))

    # Bob's qubits travel back with the simultaneous message.
    ledger.charge("return", 0)
    state, fin = teleport_wires(ref, state, "A:fin", bob_wires(n))
    for w, (name, _, _) in fin.items():
        keys.xs[w] = keys.xs[w] ^ outcome_var(name, "x")
        keys.zs[w] = keys.zs[w] ^ outcome_var(name, "z")

    ref.exchange()
    state = apply_corrections(state, evaluate_key(AtomAssignment(keys.atoms, ref.alice),
                                                  keys.xs, keys.zs, alice_wires(n)))
    state = apply_corrections(state, evaluate_key(AtomAssignment(keys.atoms, ref.bob),
                                                  keys.xs, keys.zs, bob_wires(n)))

    trackers_ok = all(pr.tracked(ref.alice) == (pr.g, pr.h) for pr in removals)
    d = c.t_depth
    fid = fidelity(run_circuit(c, psi), state)
    bound = tdepth_bound(n, m_trace)
    rec_ok = m_trace[0] <= M0_BOUND and all(
        m_trace[t] <= recurrence_bound(n, m_trace[t - 1]) for t in range(1, len(m_trace)))
    closed_ok = all(m <= closed_form_bound(n, t) for t, m in enumerate(m_trace))
    ok = (abs(fid - 1) <= tol and ledger.epr_charged <= bound and rec_ok and closed_ok
          and trackers_ok and not ref.violations)
    report = RunReport("tdepth", n, "d", d, seed, ledger.epr_charged, bound, fid, ok,
                       ledger.by_phase(), {"m_trace": m_trace, "trackers_ok": trackers_ok})
    return TDepthResult(state, ref.transcript, m_trace, report, ledger, removals)
