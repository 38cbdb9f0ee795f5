import json

import mpmath
import numpy as np
import pytest

from inqc.ipp import (DEFAULT_ALPHABETS, IppAttack, IppError, IppInstance, RoundedMatrix,
                      build_registry, circuit_matrix, ell_for, generate_ipp_instance, interleave,
                      operator_norm, rounded_product, rounding_bound, run_ipp_attack,
                      synthesize_exact)
from inqc.statevec import GATE_MATRICES

mpmath.mp.prec = 120


def haar(rng, count):
    out = []
    for _ in range(count):
        z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        out.append(q * (np.diag(r) / np.abs(np.diag(r))))
    return out


def mp_error(us, ell):
    """Distance of the rounded product to the exact product, in high precision."""
    m, _ = rounded_product(us, ell)
    exact = mpmath.eye(2)
    for u in us:
        exact = mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in u]) * exact
    rounded = mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in m.to_matrix()])
    return float(max(mpmath.svd_c(rounded - exact, compute_uv=False)))


def power_norm(a, iters=200):
    v = np.array([1.0, 0.37 + 0.2j])
    for _ in range(iters):
        v = a.conj().T @ (a @ v)
        v /= np.linalg.norm(v)
    return float(np.linalg.norm(a @ v))


class TestRounding:
    @pytest.mark.parametrize("t", [8, 16, 64])
    @pytest.mark.parametrize("ell", [8, 12, 16])
    def test_bound_against_mp_oracle(self, t, ell):
        rng = np.random.default_rng([t, ell])
        for _ in range(10):
            us = haar(rng, t)
            err = mp_error(us, ell)
            assert err <= rounding_bound(t, ell)
            assert rounded_product(us, ell)[1] == pytest.approx(err, abs=1e-12)

    def test_ell_choice_meets_eps(self):
        rng = np.random.default_rng(3)
        for t in (8, 16, 64):
            for eps in (1 / 8, 1 / 16, 1 / 64):
                assert rounding_bound(t, ell_for(t, eps)) <= eps
                assert rounded_product(haar(rng, t), ell_for(t, eps))[1] <= eps

    def test_identity_factor(self):
        m, err = rounded_product([np.eye(2)], 6)
        assert m == RoundedMatrix.identity(6) and err == 0

    def test_operator_norm_matches_power_iteration(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            assert operator_norm(a) == pytest.approx(power_norm(a), rel=1e-9)

    def test_bits_sign_magnitude(self):
        m = RoundedMatrix(2, (4, 0, -4, 0, 0, 0, 0, 3))
        bits = m.bits()
        assert len(bits) == 8 * 4
        assert bits[:4] == "0100" and bits[4:8] == "0000" and bits[8:12] == "1100"

    def test_bad_inputs(self):
        with pytest.raises(IppError):
            rounded_product([], 4)
        with pytest.raises(IppError):
            rounded_product([np.eye(2)], 0)

    def test_interleave_order(self):
        a, b, c, d = (GATE_MATRICES[g] for g in ("H", "T", "P", "X"))
        facs = interleave([a, c], [b, d])
        prod = np.eye(2)
        for f in facs:
            prod = f @ prod
        assert np.allclose(prod, a @ b @ c @ d)


class TestSynthesis:
    @pytest.mark.parametrize("word", ["", "H", "T", "HT", "THT", "TPHTHT"])
    def test_exact(self, word):
        u = np.eye(2, dtype=complex)
        for g in word:
            u = GATE_MATRICES[g] @ u
        c = synthesize_exact(u)
        m = circuit_matrix(c)
        assert abs(abs(np.trace(m.conj().T @ u)) / 2 - 1) < 1e-9
        assert c.t_count <= word.count("T")

    def test_rejects_non_clifford_t(self):
        with pytest.raises(IppError):
            synthesize_exact(np.array([[1, 0], [0, np.exp(0.3j)]]))


class TestInstances:
    def test_deterministic_bytes(self):
        assert generate_ipp_instance(2, 5).to_json() == generate_ipp_instance(2, 5).to_json()

    def test_json_round_trip(self):
        inst = generate_ipp_instance(2, 1)
        back = IppInstance.from_json(inst.to_json())
        assert back.t == 2 and all(np.allclose(a, b) for a, b in zip(inst.us, back.us))
        assert [e.label_bits for e in back.registry] == [e.label_bits for e in inst.registry]

    def test_circuit_file(self, tmp_path):
        inst = generate_ipp_instance(2, 1)
        d = json.loads(inst.to_json())
        for i, e in enumerate(d["registry"]):
            (tmp_path / f"c{i}.txt").write_text(e.pop("circuit"))
            e["circuit_file"] = f"c{i}.txt"
        back = IppInstance.from_json(json.dumps(d), tmp_path)
        assert [e.circuit for e in back.registry] == [e.circuit for e in inst.registry]

    def test_non_unitary_rejected(self):
        d = json.loads(generate_ipp_instance(2, 1).to_json())
        d["us"][0] = [[2, 0], [0, 0], [0, 0], [1, 0]]
        with pytest.raises(IppError):
            IppInstance.from_json(json.dumps(d))

    def test_registry_covers_labels(self):
        reg = build_registry(2, DEFAULT_ALPHABETS[2], 1 / 16)
        assert len({e.label_bits for e in reg}) == len(reg)


class TestAttack:
    def test_t1_identity(self):
        att = IppAttack(1, (("I",), ("I",)))
        for seed in range(5):
            for b in (0, 1):
                res = att.run([np.eye(2)], [np.eye(2)], b, seed)
                assert res.report.passed and res.guesses == {"alice": b, "bob": b}

    @pytest.mark.parametrize("t", [1, 2])
    def test_small_runs(self, t):
        att = IppAttack(t, DEFAULT_ALPHABETS[2] if t == 2 else (("I", "H", "P", "T"),) * 2)
        rng = np.random.default_rng(t)
        for seed in range(20):
            ia = rng.integers(4, size=t)
            ib = rng.integers(4, size=t)
            us = [GATE_MATRICES[att.alphabets[0][i]] for i in ia]
            vs = [GATE_MATRICES[att.alphabets[1][i]] for i in ib]
            b = seed & 1
            rep = att.run(us, vs, b, seed).report
            assert rep.passed, rep
            assert rep.extra["guesses"] == {"alice": b, "bob": b}

    def test_run_from_instance(self):
        inst = generate_ipp_instance(2, 3)
        res = run_ipp_attack(inst, 1, 3)
        assert res.report.passed
        m = res.report.extra["m_trace"]
        assert all(b <= 68 * a + 13 for a, b in zip(m, m[1:]))

    def test_foreign_unitary(self):
        att = IppAttack(1, (("I",), ("I",)))
        with pytest.raises(IppError):
            att.run([GATE_MATRICES["H"]], [np.eye(2)], 0, 0)
