"""Instantaneous computation of a Clifford+T circuit with cost exponential in T-count.

After every T gate Alice hands the whole register to Bob, who knows the key
and removes the stray phase. He returns it through one of two sets of EPR
pairs chosen by his phase bit, so Alice's fix-up depends only on the set
label. Only the set matching Bob's actual bits is simulated; the ledger pays
for all of them.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..clifford_t import Circuit, KeyPolynomial, conjugate_key_through_clifford
from ..referee import Ledger, Referee, Transcript
from ..statevec import StateVector, apply_gate, apply_gates, apply_pauli, fidelity, run_circuit
from .base import (DEFAULT_TOL, RunReport, alice_wires, apply_corrections, apply_one, bob_wires,
                   evaluate_key, outcome_var, stray_phase, teleport_wires, undo_phase)


def tcount_charge(n: int, k: int) -> int:
    return len(bob_wires(n)) + sum(2 ** (t - 1) * 3 * n for t in range(1, k + 1))


def tcount_bound(n: int, k: int) -> int:
    return 3 * n * 2 ** k


@dataclass
class TCountResult:
    state: StateVector
    transcript: Transcript
    report: RunReport
    ledger: Ledger


def run_tcount_protocol(c: Circuit, psi: StateVector, seed: int,
                        tol: float = DEFAULT_TOL) -> TCountResult:
    n = c.n
    ref, ledger = Referee(seed), Ledger()
    segments, ts = c.t_split()
    zero = KeyPolynomial.zero()
    xs, zs = [zero] * n, [zero] * n

    # Step 0: Bob's qubits go to Alice; Bob knows the whole key.
    ledger.charge("step0", len(bob_wires(n)))
    state, out = teleport_wires(ref, psi, "B:s0", bob_wires(n))
    for w, (name, _, _) in out.items():
        xs[w], zs[w] = outcome_var(name, "x"), outcome_var(name, "z")

    label = ""
    for t, (seg, g) in enumerate(zip(segments, ts), 1):
        ledger.charge(f"step{t}", 2 ** (t - 1) * 3 * n)
        state = apply_gates(state, seg)
        xs, zs = conjugate_key_through_clifford((xs, zs), seg)
        w = g.wires[0]
        state = apply_gate(state, g)
        # Alice sends every qubit of set `label` to Bob.
        state, a = teleport_wires(ref, state, f"A:s{t}:{label}", range(n))
        view = ref.bob
        phase_bit = xs[w].evaluate(view)
        if phase_bit:
            state = apply_one(state, undo_phase(stray_phase(g)), w)
        for i in range(n):
            state = apply_pauli(state, i, xs[i].evaluate(view), zs[i].evaluate(view))
        label += str(phase_bit)
        state, back = teleport_wires(ref, state, f"B:s{t}:{label}", range(n))
        # Alice's fix-up on the set with this label.
        view = ref.alice
        for i, (name, _, _) in a.items():
            ax, az = view[name + ".x"], view[name + ".z"]
            if i == w and label[-1] == "1":
                az ^= ax
            state = apply_pauli(state, i, ax, az)
        for i, (name, _, _) in back.items():
            xs[i], zs[i] = outcome_var(name, "x"), outcome_var(name, "z")

    state = apply_gates(state, segments[-1])
    xs, zs = conjugate_key_through_clifford((xs, zs), segments[-1])
    # Bob's qubits travel back with the simultaneous message.
    ledger.charge("return", 0)
    state, fin = teleport_wires(ref, state, f"A:fin:{label}", bob_wires(n))
    for w, (name, _, _) in fin.items():
        xs[w] = xs[w] ^ outcome_var(name, "x")
        zs[w] = zs[w] ^ outcome_var(name, "z")

    ref.exchange()
    state = apply_corrections(state, evaluate_key(ref.alice, xs, zs, alice_wires(n)))
    state = apply_corrections(state, evaluate_key(ref.bob, xs, zs, bob_wires(n)))

    k = c.t_count
    fid = fidelity(run_circuit(c, psi), state)
    expected = tcount_charge(n, k)
    ok = abs(fid - 1) <= tol and ledger.epr_charged == expected \
        and ledger.epr_charged <= tcount_bound(n, k) and not ref.violations
    report = RunReport("tcount", n, "k", k, seed, ledger.epr_charged, tcount_bound(n, k), fid, ok,
                       ledger.by_phase(), {"expected_charge": expected})
    return TCountResult(state, ref.transcript, report, ledger)
