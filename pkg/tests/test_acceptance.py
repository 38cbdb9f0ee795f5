"""End-to-end acceptance checks, one test per criterion."""

import itertools
import math
import time

import numpy as np

from conftest import BOOL_FUNCS, phase_removal_trial, random_state, record_criterion
from inqc.clifford_t import Gate, PauliKey, conjugate_key_through_clifford
from inqc.gardenhose import (ALICE, TruthTable, TruthTableProtocol, gh_evaluate, gh_multi_output,
                             gh_single_output, gh_xor, multi_output_bound, spilling_pipes)
from inqc.harness.generators import generate_random_circuit
from inqc.ipp import (ell_for, generate_ipp_instance, rounded_product, rounding_bound,
                      run_ipp_attack)
from inqc.protocols.hierarchy import (build_hierarchy_unitary, hierarchy_bound, hierarchy_charge,
                                      run_clifford_hierarchy)
from inqc.protocols.tcount import run_tcount_protocol, tcount_bound
from inqc.protocols.tdepth import (M0_BOUND, closed_form_bound, recurrence_bound,
                                   run_tdepth_protocol)
from inqc.referee import ALICE as A, BOB as B, PhasedProgram, referee_run
from inqc.statevec import apply_gate, apply_pauli_key, fidelity


def _finish(num, title, failures, t0, limit, extra=""):
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < limit
    detail = f"{elapsed:.1f}s of {limit}s" + (f", {extra}" if extra else "")
    if failures:
        detail += f", first failure: {failures[0]}"
    record_criterion(num, title, ok, detail)
    assert not failures, failures[:5]
    assert elapsed < limit


def test_criterion_1_key_transforms():
    t0 = time.perf_counter()
    failures = []
    for n in (1, 2, 3):
        psi = random_state(n, 0)
        gates = [Gate(k, (w,)) for w in range(n) for k in ("H", "P", "PDAG", "X", "Z")]
        gates += [Gate("CNOT", cw) for cw in itertools.permutations(range(n), 2)]
        for g in gates:
            for bits in itertools.product((0, 1), repeat=2 * n):
                key = PauliKey(bits[:n], bits[n:])
                new = conjugate_key_through_clifford(key, [g])
                lhs = apply_gate(apply_pauli_key(psi, key), g)
                rhs = apply_pauli_key(apply_gate(psi, g), new)
                if abs(fidelity(lhs, rhs) - 1) > 1e-9:
                    failures.append((n, str(g), key))
    rules = [
        (Gate("H", (0,)), PauliKey((1,), (0,)), PauliKey((0,), (1,))),
        (Gate("P", (0,)), PauliKey((1,), (0,)), PauliKey((1,), (1,))),
        (Gate("CNOT", (0, 1)), PauliKey((1, 0), (0, 1)), PauliKey((1, 1), (1, 1))),
    ]
    for g, before, after in rules:
        if conjugate_key_through_clifford(before, [g]) != after:
            failures.append(("rule", str(g)))
    _finish(1, "key-transform soundness", failures, t0, 10)


def _tables(na, nb, rng, count=2):
    out = [TruthTable.from_function(BOOL_FUNCS["AND"], na, nb),
           TruthTable.from_function(lambda x, y: int(x % 2 ** min(na, nb) == y % 2 ** min(na, nb)), na, nb)]
    for _ in range(count):
        out.append(TruthTable(na, nb, tuple(int(b) for b in rng.integers(0, 2, 2 ** (na + nb)))))
    return out


def test_criterion_2_combinators():
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(2)
    for na, nb in itertools.product(range(1, 5), repeat=2):
        tables = _tables(na, nb, rng)
        ps = [TruthTableProtocol(t) for t in tables]
        inputs = list(itertools.product(range(2 ** na), range(2 ** nb)))
        for t, p in zip(tables, ps):
            so = gh_single_output(p)
            if p.size != 2 ** na + 1 or so.size != 3 * p.size + 1:
                failures.append(("size", na, nb))
            for x, y in inputs:
                if gh_evaluate(p, x, y).bit != t(x, y) or gh_evaluate(so, x, y).bit != t(x, y):
                    failures.append(("tt/so", na, nb, x, y))
            if spilling_pipes(so, "alice") > 1 or spilling_pipes(so, "bob") > 1:
                failures.append(("spill", na, nb))
        for c in (0, 1):
            xp = gh_xor(ps[:3], c)
            if xp.size != 4 * sum(p.size for p in ps[:3]) + 1:
                failures.append(("xor size", na, nb))
            for x, y in inputs:
                want = c ^ tables[0](x, y) ^ tables[1](x, y) ^ tables[2](x, y)
                if gh_evaluate(xp, x, y).bit != want:
                    failures.append(("xor", na, nb, x, y, c))
        mo = gh_multi_output(ps[:3])
        p_max = max(gh_single_output(p, both_alice=True).size for p in ps[:3])
        if mo.size > sum(2 ** (i - 1) * p_max for i in range(1, 4)) or mo.size > multi_output_bound(ps[:3]):
            failures.append(("multi size", na, nb))
        for x, y in inputs:
            e = gh_evaluate(mo, x, y)
            want = "".join(str(t(x, y)) for t in tables[:3])
            if e.side != ALICE or e.label != want:
                failures.append(("multi", na, nb, x, y))
    _finish(2, "garden-hose combinators", failures, t0, 30)


def test_criterion_3_phase_removal():
    t0 = time.perf_counter()
    failures = []
    runs = 0
    for name, f in sorted(BOOL_FUNCS.items()):
        table = TruthTable.from_function(f, 2, 2)
        for x, y in itertools.product(range(4), repeat=2):
            for seed in range(100):
                r = phase_removal_trial(table, x, y, seed, dagger=bool(seed % 2))
                runs += 1
                s = r["size"]
                if (abs(r["fidelity"] - 1) > 1e-10 or not r["agree"] or r["charged"] != 2 * s
                        or r["x_tracker"] > 4 * s + 1 or r["z_tracker"] > 11 * s + 2 or r["violations"]):
                    failures.append((name, x, y, seed, r))
    _finish(3, "conditional phase removal", failures, t0, 60, f"{runs} runs")


def test_criterion_4_tcount():
    t0 = time.perf_counter()
    failures = []
    for n, k in itertools.product((2, 4), range(4)):
        want = n / 2 + sum(2 ** (t - 1) * 3 * n for t in range(1, k + 1))
        for seed in range(100):
            c = generate_random_circuit(n, k=k, seed=seed)
            rep = run_tcount_protocol(c, random_state(n, seed), seed, 1e-9).report
            if (not rep.passed or abs(rep.fidelity - 1) > 1e-9 or rep.epr_charged != want
                    or rep.epr_charged > tcount_bound(n, k)):
                failures.append((n, k, seed, rep.epr_charged, rep.fidelity))
    _finish(4, "T-count protocol", failures, t0, 120)


def test_criterion_5_tdepth():
    t0 = time.perf_counter()
    failures = []
    worst = 0
    for n, d in itertools.product((2, 3), (1, 2)):
        for seed in range(50):
            c = generate_random_circuit(n, d=d, seed=seed)
            res = run_tdepth_protocol(c, random_state(n, seed), seed, 1e-9)
            m, rep = res.m_trace, res.report
            initial = math.ceil(n / 2)
            layer_cost = sum(2 * n * m[t - 1] for t in range(1, d + 1))
            closed = sum(2 * n * closed_form_bound(n, t - 1) for t in range(1, d + 1))
            ok = (rep.passed and abs(rep.fidelity - 1) <= 1e-9 and m[0] <= M0_BOUND
                  and all(m[t] <= recurrence_bound(n, m[t - 1]) for t in range(1, d + 1))
                  and rep.epr_charged - initial <= layer_cost and rep.epr_charged - initial <= closed)
            worst = max(worst, m[-1])
            if not ok:
                failures.append((n, d, seed, m, rep.epr_charged))
    _finish(5, "T-depth protocol", failures, t0, 600, f"largest m {worst}")


def test_criterion_6_hierarchy():
    t0 = time.perf_counter()
    failures = []
    for name in ("T", "PT"):
        u = build_hierarchy_unitary(name)
        n, k = u.n, u.level
        accounting = math.ceil(n / 2) + n * sum(4 ** (n * t) for t in range(1, k))
        if k > 3 or hierarchy_charge(n, k) != accounting:
            failures.append((name, "level/accounting"))
        for seed in range(100):
            rep = run_clifford_hierarchy(u, random_state(n, seed), seed, 1e-10).report
            if (not rep.passed or abs(rep.fidelity - 1) > 1e-10 or rep.epr_charged != accounting
                    or rep.epr_charged > hierarchy_bound(n, k)):
                failures.append((name, seed, rep.epr_charged))
    _finish(6, "Clifford-hierarchy protocol", failures, t0, 60)


def _haar(rng, count):
    out = []
    for _ in range(count):
        z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        out.append(q * (np.diag(r) / np.abs(np.diag(r))))
    return out


def test_criterion_7_rounding():
    t0 = time.perf_counter()
    failures = []
    eps1 = 1 / 16
    for t, ell in itertools.product((8, 16, 64), (8, 12, 16)):
        rng = np.random.default_rng([t, ell, 7])
        for trial in range(100):
            us = _haar(rng, t)
            _, err = rounded_product(us, ell)
            if err > rounding_bound(t, ell):
                failures.append((t, ell, trial, err))
            if ell == 8:
                _, err1 = rounded_product(us, ell_for(t, eps1))
                if err1 > eps1:
                    failures.append((t, "eps1", trial, err1))
    _finish(7, "rounding bound", failures, t0, 60)


def test_criterion_8_ipp_attack():
    t0 = time.perf_counter()
    failures = []
    for t in (2, 4):
        for seed in range(200):
            inst = generate_ipp_instance(t, seed)
            b = int(np.random.default_rng([seed, 7]).integers(2))
            res = run_ipp_attack(inst, b, seed)
            rep = res.report
            g = res.guesses
            m = rep.extra["m_trace"]
            ok = (rep.passed and g["alice"] == g["bob"] == b
                  and all(m[r] <= 68 * m[r - 1] + 13 for r in range(1, len(m)))
                  and rep.epr_charged == rep.bound)
            if not ok:
                failures.append((t, seed, g, b, m))
    _finish(8, "interleaved-product attack", failures, t0, 300)


def test_criterion_9_referee():
    t0 = time.perf_counter()
    failures = []
    noop = lambda ctx, ref: None
    probe = PhasedProgram(lambda ctx, ref: ctx["B:y"], noop, noop, noop)
    if not referee_run(probe, {B: {"y": 1}}, 0).aborted:
        failures.append("cross-party read not aborted")
    probe_b = PhasedProgram(noop, lambda ctx, ref: ctx["A:x"], noop, noop)
    if not referee_run(probe_b, {A: {"x": 1}}, 0).aborted:
        failures.append("bob probe not aborted")
    # every shipped protocol, one batch each, must finish without violations
    runs = [run_tcount_protocol(generate_random_circuit(2, k=2, seed=s), random_state(2, s), s).report
            for s in range(5)]
    runs += [run_tdepth_protocol(generate_random_circuit(2, d=2, seed=s), random_state(2, s), s).report
             for s in range(5)]
    u = build_hierarchy_unitary("T")
    runs += [run_clifford_hierarchy(u, random_state(1, s), s).report for s in range(5)]
    runs += [run_ipp_attack(generate_ipp_instance(2, s), s & 1, s).report for s in range(5)]
    failures += [r.protocol for r in runs if not r.passed]
    for name, f in BOOL_FUNCS.items():
        r = phase_removal_trial(TruthTable.from_function(f, 2, 2), 1, 2, 0)
        if r["violations"]:
            failures.append(name)
    _finish(9, "referee contract", failures, t0, 120)
