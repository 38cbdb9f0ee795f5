import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_unitary, kron_pauli, same_up_to_phase
from inqc.clifford_t import (Circuit, CircuitError, Gate, KeyPolynomial, PauliKey,
                             commute_t_past_key, conjugate_key_through_clifford, parse_circuit)
from inqc.harness.generators import generate_random_circuit


def single_generators(n):
    for w in range(n):
        for k in ("H", "P", "PDAG", "X", "Z"):
            yield Gate(k, (w,))
    for c, t in itertools.permutations(range(n), 2):
        yield Gate("CNOT", (c, t))


class TestParse:
    def test_round_trip(self):
        c = Circuit(3, (Gate("H", (0,)), Gate("CNOT", (0, 2)), Gate("T", (1,)), Gate("TDAG", (2,))))
        assert parse_circuit(c.to_text()) == c

    def test_comments_and_case(self):
        c = parse_circuit("qubits 2\n# hi\nh 0   # trailing\ncnot 0 1\n")
        assert [g.kind for g in c.gates] == ["H", "CNOT"]

    def test_width_inferred(self):
        assert parse_circuit("H 4\n").n == 5

    @pytest.mark.parametrize("text", [
        "qubits 2\nFOO 0\n",
        "qubits 2\nH a\n",
        "qubits 2\nCNOT 1 1\n",
        "qubits 2\nH 0 1\n",
        "qubits 2\nH 5\n",
        "qubits 0\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(CircuitError):
            parse_circuit(text)


class TestLayering:
    def test_hand_example(self):
        # H 2 touches wire 2 after the first layer opened, so T 2 starts a new one
        c = parse_circuit("qubits 3\nT 0\nT 1\nH 2\nT 2\nH 0\nT 0\nT 1\n")
        cliffs, layers = c.layers
        assert [[g.wires[0] for g in layer] for layer in layers] == [[0, 1], [2], [0, 1]]
        assert c.t_depth == 3
        assert len(cliffs) == len(layers) + 1

    def test_same_wire_twice_opens_layer(self):
        c = parse_circuit("qubits 1\nT 0\nT 0\nT 0\n")
        assert c.t_depth == 3 and c.t_count == 3

    def test_clifford_only(self):
        c = parse_circuit("qubits 2\nH 0\nCNOT 0 1\n")
        assert c.t_depth == 0 and len(c.layers[0]) == 1

    @pytest.mark.parametrize("seed", range(20))
    def test_flattened_layers_preserve_unitary(self, seed):
        c = generate_random_circuit(3, k=5, seed=seed)
        assert same_up_to_phase(dense_unitary(c.gates, 3), dense_unitary(c.flatten_layers().gates, 3))
        for layer in c.layers[1]:
            wires = [g.wires[0] for g in layer]
            assert len(wires) == len(set(wires))

    def test_t_split(self):
        c = parse_circuit("qubits 2\nH 0\nT 0\nT 1\nCNOT 0 1\n")
        segs, ts = c.t_split()
        assert len(segs) == 3 and len(ts) == 2
        assert segs[1] == () and segs[2] == (Gate("CNOT", (0, 1)),)


class TestKeyTransforms:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_operator_identity(self, n):
        for g in single_generators(n):
            U = dense_unitary([g], n)
            for bits in itertools.product((0, 1), repeat=2 * n):
                key = PauliKey(bits[:n], bits[n:])
                new = conjugate_key_through_clifford(key, [g])
                lhs = U @ kron_pauli(n, key.x, key.z)
                rhs = kron_pauli(n, new.x, new.z) @ U
                assert same_up_to_phase(lhs, rhs), (g, key, new)

    def test_rules(self):
        k = PauliKey((1, 0), (0, 1))
        assert conjugate_key_through_clifford(k, [Gate("H", (0,))]) == PauliKey((0, 0), (1, 1))
        assert conjugate_key_through_clifford(k, [Gate("P", (0,))]) == PauliKey((1, 0), (1, 1))
        assert conjugate_key_through_clifford(k, [Gate("CNOT", (0, 1))]) == PauliKey((1, 1), (1, 1))

    def test_t_gate_rejected(self):
        with pytest.raises(CircuitError):
            conjugate_key_through_clifford(PauliKey.zeros(1), [Gate("T", (0,))])

    def test_t_stray_phase(self):
        # T X = e^{..} P X T, so the stray phase exponent is the x bit
        T, P = dense_unitary([Gate("T", (0,))], 1), dense_unitary([Gate("P", (0,))], 1)
        X = kron_pauli(1, [1], [0])
        assert same_up_to_phase(T @ X, P @ X @ T)
        assert commute_t_past_key(1) == 1 and commute_t_past_key(0) == 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6), st.lists(st.tuples(st.booleans(), st.booleans()), min_size=3, max_size=3))
    def test_symbolic_matches_numeric(self, seed, assignment):
        c = generate_random_circuit(3, k=0, seed=seed)
        names = [(f"x{w}", f"z{w}") for w in range(3)]
        xs = [KeyPolynomial.var(a) for a, _ in names]
        zs = [KeyPolynomial.var(b) for _, b in names]
        sx, sz = conjugate_key_through_clifford((xs, zs), c.gates)
        env = {}
        for (a, b), (va, vb) in zip(names, assignment):
            env[a], env[b] = int(va), int(vb)
        key = PauliKey([int(v) for v, _ in assignment], [int(v) for _, v in assignment])
        num = conjugate_key_through_clifford(key, c.gates)
        assert tuple(p.evaluate(env) for p in sx) == num.x
        assert tuple(p.evaluate(env) for p in sz) == num.z


class TestKeyPolynomial:
    def test_xor_cancels(self):
        a = KeyPolynomial.var("a")
        assert (a ^ a).is_zero
        assert (a ^ KeyPolynomial.one()).constant == 1

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from("abcd"), max_size=6), st.lists(st.sampled_from("abcd"), max_size=6),
           st.fixed_dictionaries({v: st.integers(0, 1) for v in "abcd"}))
    def test_xor_is_linear(self, p_vars, q_vars, env):
        p = KeyPolynomial.zero()
        for v in p_vars:
            p = p ^ KeyPolynomial.var(v)
        q = KeyPolynomial.zero()
        for v in q_vars:
            q = q ^ KeyPolynomial.var(v)
        assert (p ^ q).evaluate(env) == p.evaluate(env) ^ q.evaluate(env)
        assert (p & q).evaluate(env) == p.evaluate(env) & q.evaluate(env)
