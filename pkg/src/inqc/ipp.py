"""Attack on the Interleaved Product position-verification game.

Alice holds ``U|b>`` with ``U = u_1 v_1 u_2 v_2 ... u_t v_t``; she knows the
``u_i`` and Bob knows the ``v_i``. The attack routes the qubit through a
multi-output garden-hose protocol to a pipe labeled by a fixed-point
approximation of ``U``, undoes the registered Clifford+T circuit for that
label one T gate at a time with phase removal, measures, and lets both
parties decode ``b`` from the broadcast transcript.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .clifford_t import Circuit, Gate, KeyPolynomial, conjugate_key_through_clifford, parse_circuit
from .gardenhose import (MultiOutput, PhaseNetwork, TruthTable,
                         TruthTableProtocol, Tracker, build_x_tracker, build_z_tracker,
                         gh_evaluate, view_mapped, walk_qubit)
from .protocols.base import RunReport
from .protocols.phase import PhaseRemoval, phase_removal
from .protocols.tdepth import AtomAssignment, KeyState
from .referee import Ledger, Referee, Transcript
from .statevec import (GATE_MATRICES, StateVector, apply_gate, apply_gates, apply_matrix,
                       measure_computational)

MAX_T = 8
UNITARY_TOL = 1e-9
SYNTHESIS_MAX_T = 5


class IppError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Matrices and the rounded product
# ---------------------------------------------------------------------------

def check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise IppError("expected a 2x2 matrix")
    if operator_norm(u.conj().T @ u - np.eye(2)) > UNITARY_TOL:
        raise IppError("matrix is not unitary")
    return u


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value of a 2x2 matrix, in closed form."""
    a = np.asarray(a, dtype=complex)
    fro2 = float(np.sum(np.abs(a) ** 2))
    det2 = abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]) ** 2
    disc = max(fro2 * fro2 - 4 * det2, 0.0)
    return math.sqrt(max((fro2 + math.sqrt(disc)) / 2, 0.0))


@dataclass(frozen=True)
class RoundedMatrix:
    """Entries stored as integers ``round(value * 2^ell)``, real and imaginary parts."""

    ell: int
    parts: tuple[int, ...]  # re00, im00, re01, im01, re10, im10, re11, im11

    @classmethod
    def identity(cls, ell: int) -> "RoundedMatrix":
        one = 1 << ell
        return cls(ell, (one, 0, 0, 0, 0, 0, one, 0))

    @classmethod
    def from_matrix(cls, m: np.ndarray, ell: int) -> "RoundedMatrix":
        scale = float(1 << ell)
        parts = []
        for v in np.asarray(m).reshape(-1):
            parts += [int(round(v.real * scale)), int(round(v.imag * scale))]
        return cls(ell, tuple(parts))

    def to_matrix(self) -> np.ndarray:
        p = np.array(self.parts, dtype=float) / (1 << self.ell)
        return (p[0::2] + 1j * p[1::2]).reshape(2, 2)

    def bits(self) -> str:
        """Sign-magnitude: one sign bit and ``ell + 1`` magnitude bits per part."""
        width = self.ell + 1
        out = []
        for v in self.parts:
            if abs(v) >= 1 << width:
                raise IppError("entry does not fit the fixed-point width")
            out.append(("1" if v < 0 else "0") + format(abs(v), f"0{width}b"))
        return "".join(out)


def rounded_product(us: Sequence[np.ndarray], ell: int) -> tuple[RoundedMatrix, float]:
    """``M_r = round(u_r M_{r-1})`` from ``M_0 = I``; returns ``M_t`` and its distance to the exact product."""
    if not us:
        raise IppError("need at least one factor")
    if ell < 1:
        raise IppError("ell must be positive")
    m = RoundedMatrix.identity(ell)
    exact = np.eye(2, dtype=complex)
    for u in us:
        u = np.asarray(u, dtype=complex)
        m = RoundedMatrix.from_matrix(u @ m.to_matrix(), ell)
        exact = u @ exact
    return m, operator_norm(m.to_matrix() - exact)


def rounding_bound(t: int, ell: int) -> float:
    return t * 2.0 ** (-ell + 1)


def ell_for(t: int, eps1: float) -> int:
    """``ell = log t + log(1/eps1) + 1`` with both logs rounded up."""
    return math.ceil(math.log2(max(t, 1))) + math.ceil(math.log2(1 / eps1)) + 1


def interleave(us: Sequence[np.ndarray], vs: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Factors of ``u_1 v_1 ... u_t v_t`` in application order (``v_t`` first)."""
    out = []
    for u, v in zip(reversed(us), reversed(vs)):
        out += [v, u]
    return out


# ---------------------------------------------------------------------------
# Exact single-qubit Clifford+T synthesis (stand-in for approximate synthesis)
# ---------------------------------------------------------------------------

def _canon(m: np.ndarray) -> tuple:
    flat = m.reshape(-1)
    i = int(np.argmax(np.abs(flat) > 1e-6))
    m = m * (abs(flat[i]) / flat[i])
    return tuple(np.round(np.concatenate([m.real.reshape(-1), m.imag.reshape(-1)]), 8) + 0.0)


def _word_matrix(word: Sequence[str]) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for g in word:
        m = GATE_MATRICES[g] @ m
    return m


@lru_cache(maxsize=1)
def _cliffords() -> dict[tuple, tuple[str, ...]]:
    found = {_canon(np.eye(2, dtype=complex)): ()}
    frontier = [()]
    while frontier:
        nxt = []
        for w in frontier:
            for g in ("H", "P"):
                nw = w + (g,)
                key = _canon(_word_matrix(nw))
                if key not in found:
                    found[key] = nw
                    nxt.append(nw)
        frontier = nxt
    return found


@lru_cache(maxsize=1)
def _t_levels() -> list[dict[tuple, tuple[str, ...]]]:
    """Elements of minimal T-count ``j`` (up to phase) with a word, per ``j``."""
    cliff = _cliffords()
    levels = [dict(cliff)]
    seen = set(cliff)
    for _ in range(SYNTHESIS_MAX_T):
        nxt = {}
        for w in levels[-1].values():
            for cw in cliff.values():
                nw = w + ("T",) + cw
                key = _canon(_word_matrix(nw))
                if key not in seen:
                    seen.add(key)
                    nxt[key] = nw
        levels.append(nxt)
    return levels


def synthesize_exact(u: np.ndarray) -> Circuit:
    """Minimal-T-count circuit equal to ``u`` up to phase, if T-count is small enough."""
    key = _canon(np.asarray(u, dtype=complex))
    for level in _t_levels():
        if key in level:
            return Circuit(1, tuple(Gate(g, (0,)) for g in level[key]))
    raise IppError(f"no Clifford+T word with T-count <= {SYNTHESIS_MAX_T} found")


def circuit_matrix(c: Circuit) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for g in c.gates:
        m = GATE_MATRICES[g.kind] @ m
    return m


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

DEFAULT_ALPHABETS = {
    2: (("I", "H", "P", "T"), ("I", "H", "P", "T")),
    4: (("I", "P", "T", "Z"), ("I", "X")),
}


def gate_matrix(name: str) -> np.ndarray:
    return GATE_MATRICES[name]


@dataclass
class RegistryEntry:
    label_bits: str
    circuit: Circuit
    eps2: float = 0.0


@dataclass
class IppInstance:
    t: int
    us: list[np.ndarray]
    vs: list[np.ndarray]
    alphabets: tuple[tuple[str, ...], tuple[str, ...]]
    eps1: float
    registry: list[RegistryEntry] = field(default_factory=list)

    @property
    def ell(self) -> int:
        return ell_for(2 * self.t, self.eps1)

    def to_json(self) -> str:
        enc = lambda ms: [[[float(v.real), float(v.imag)] for v in m.reshape(-1)] for m in ms]
        return json.dumps({
            "t": self.t, "eps1": self.eps1, "us": enc(self.us), "vs": enc(self.vs),
            "alphabets": {"alice": list(self.alphabets[0]), "bob": list(self.alphabets[1])},
            "registry": [{"label_bits": e.label_bits, "circuit": e.circuit.to_text(),
                          "eps2": e.eps2} for e in self.registry],
        }, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str, base: Path | None = None) -> "IppInstance":
        d = json.loads(text)
        dec = lambda ms: [check_unitary(np.array([complex(a, b) for a, b in m]).reshape(2, 2))
                          for m in ms]
        reg = []
        for e in d.get("registry", []):
            if "circuit" in e:
                src = e["circuit"]
            else:
                src = ((base or Path(".")) / e["circuit_file"]).read_text()
            reg.append(RegistryEntry(e["label_bits"], parse_circuit(src, 1), float(e.get("eps2", 0.0))))
        al = d.get("alphabets", {})
        alph = (tuple(al.get("alice", DEFAULT_ALPHABETS[2][0])),
                tuple(al.get("bob", DEFAULT_ALPHABETS[2][1])))
        inst = cls(int(d["t"]), dec(d["us"]), dec(d["vs"]), alph, float(d.get("eps1", 1 / 16)), reg)
        if len(inst.us) != inst.t or len(inst.vs) != inst.t:
            raise IppError("us and vs must each hold t unitaries")
        return inst


def build_registry(t: int, alphabets, eps1: float) -> list[RegistryEntry]:
    """Every label reachable from the alphabets, each with an exact minimal-T circuit."""
    return list(_registry(t, tuple(map(tuple, alphabets)), eps1))


@lru_cache(maxsize=8)
def _registry(t: int, alphabets: tuple, eps1: float) -> tuple[RegistryEntry, ...]:
    ell = ell_for(2 * t, eps1)
    mats_a = [gate_matrix(g) for g in alphabets[0]]
    mats_b = [gate_matrix(g) for g in alphabets[1]]
    by_label: dict[str, np.ndarray] = {}
    for ia in itertools.product(range(len(mats_a)), repeat=t):
        for ib in itertools.product(range(len(mats_b)), repeat=t):
            us = [mats_a[i] for i in ia]
            vs = [mats_b[i] for i in ib]
            m, _ = rounded_product(interleave(us, vs), ell)
            exact = np.linalg.multi_dot(interleave(us, vs)[::-1]) if 2 * t > 1 else us[0]
            lab = m.bits()
            if lab in by_label:
                if _canon(by_label[lab]) != _canon(exact):
                    raise IppError("two different products share a rounded label")
            else:
                by_label[lab] = exact
    return tuple(RegistryEntry(lab, synthesize_exact(u)) for lab, u in sorted(by_label.items()))


def generate_ipp_instance(t: int, seed: int, eps1: float = 1 / 16) -> IppInstance:
    if t not in DEFAULT_ALPHABETS:
        raise IppError(f"no default alphabet for t={t}; available {sorted(DEFAULT_ALPHABETS)}")
    alph = DEFAULT_ALPHABETS[t]
    rng = np.random.default_rng(seed)
    us = [gate_matrix(alph[0][int(rng.integers(len(alph[0])))]) for _ in range(t)]
    vs = [gate_matrix(alph[1][int(rng.integers(len(alph[1])))]) for _ in range(t)]
    return IppInstance(t, us, vs, alph, eps1, build_registry(t, alph, eps1))


# ---------------------------------------------------------------------------
# The attack
# ---------------------------------------------------------------------------

def _bits_for(size: int) -> int:
    return max(1, math.ceil(math.log2(size)))


def _index_of(m: np.ndarray, alphabet: Sequence[str]) -> int:
    for i, g in enumerate(alphabet):
        if np.allclose(gate_matrix(g), m, atol=1e-9):
            return i
    raise IppError("unitary is not in the party's alphabet")


@dataclass
class Chain:
    """Key bookkeeping for undoing the circuit registered under one label."""

    label: str
    keys: KeyState
    m_trace: list[int]
    charges: list[int]
    removals: list[PhaseRemoval]
    state: StateVector | None = None


@dataclass
class IppResult:
    guesses: dict[str, int]
    transcript: Transcript
    report: RunReport
    ledger: Ledger
    chain: Chain


class IppAttack:
    """Precomputes the routing protocol and label chains for one alphabet/t setting."""

    def __init__(self, t: int, alphabets, eps1: float = 1 / 16,
                 registry: Sequence[RegistryEntry] | None = None):
        if not 1 <= t <= MAX_T:
            raise IppError(f"t={t} outside [1, {MAX_T}]")
        self.t, self.alphabets, self.eps1 = t, tuple(map(tuple, alphabets)), eps1
        self.ell = ell_for(2 * t, eps1)
        self.registry = list(registry) if registry is not None else build_registry(t, self.alphabets, eps1)
        self.index = {e.label_bits: i for i, e in enumerate(self.registry)}
        self.k = _bits_for(len(self.registry))
        self.wa = _bits_for(len(self.alphabets[0]))
        self.wb = _bits_for(len(self.alphabets[1]))
        self.routing = self._build_routing()

    def encode(self, idx: Sequence[int], width: int) -> int:
        v = 0
        for i in idx:
            v = (v << width) | i
        return v

    def decode(self, v: int, width: int, size: int) -> list[int]:
        out = [(v >> (width * (self.t - 1 - r))) & ((1 << width) - 1) for r in range(self.t)]
        return [i if i < size else 0 for i in out]

    def label_of(self, x: int, y: int) -> tuple[str, float]:
        ia = self.decode(x, self.wa, len(self.alphabets[0]))
        ib = self.decode(y, self.wb, len(self.alphabets[1]))
        us = [gate_matrix(self.alphabets[0][i]) for i in ia]
        vs = [gate_matrix(self.alphabets[1][i]) for i in ib]
        m, err = rounded_product(interleave(us, vs), self.ell)
        return m.bits(), err

    def _build_routing(self) -> MultiOutput:
        na, nb = self.wa * self.t, self.wb * self.t
        idx = {}
        for x in range(2 ** na):
            for y in range(2 ** nb):
                lab, _ = self.label_of(x, y)
                if lab not in self.index:
                    raise IppError("reachable label missing from the registry")
                idx[(x, y)] = self.index[lab]
        bits = []
        for b in range(self.k):
            shift = self.k - 1 - b
            tt = TruthTable.from_function(lambda x, y, s=shift: (idx[(x, y)] >> s) & 1, na, nb)
            bits.append(view_mapped(TruthTableProtocol(tt)))
        return MultiOutput(bits)

    def port_label(self, i: int) -> str:
        return format(i, f"0{self.k}b")

    def chain(self, i: int, ref: Referee | None = None, state: StateVector | None = None) -> Chain:
        """Undo the circuit of registry entry ``i``; simulate only when ``ref`` is given."""
        entry = self.registry[i]
        port = self.port_label(i)
        final = lambda w, p=port: w.port(p)
        atoms = {"fx0": Tracker(self.routing, "route", "x", final_of=final),
                 "fz0": Tracker(self.routing, "route", "z", final_of=final)}
        keys = KeyState(1, [KeyPolynomial.var("fx0")], [KeyPolynomial.var("fz0")], atoms)
        segments, ts = entry.circuit.inverse().t_split()
        if state is not None:
            state = apply_gates(state, segments[0])
        keys.xs, keys.zs = conjugate_key_through_clifford((keys.xs, keys.zs), segments[0])
        m_trace = [keys.recombine(0)]
        charges, removals = [], []
        for r, (g, seg) in enumerate(zip(ts, segments[1:]), 1):
            if state is not None:
                state = apply_gate(state, g)
            f = keys.protocol_for(keys.xs[0])
            if f is not None:
                tag = f"ip{i}:r{r}"
                # the network is padded with idle pipes to the key bound m_{r-1}
                if f.size > m_trace[-1]:
                    raise IppError("phase function larger than the key bound")
                charges.append(2 * m_trace[-1])
                if ref is not None:
                    pr = phase_removal(f, ref, tag, state, 0, dagger=g.kind == "TDAG")
                    state = pr.state
                    removals.append(pr)
                    xt, zt = pr.x_tracker, pr.z_tracker
                else:
                    net = PhaseNetwork(f)
                    xt, zt = build_x_tracker(net, tag), build_z_tracker(net, tag)
                keys.atoms[f"g{r}"], keys.atoms[f"h{r}"] = xt, zt
                keys.xs[0] = keys.xs[0] ^ KeyPolynomial.var(f"g{r}")
                keys.zs[0] = keys.zs[0] ^ KeyPolynomial.var(f"h{r}")
            if state is not None:
                state = apply_gates(state, seg)
            keys.xs, keys.zs = conjugate_key_through_clifford((keys.xs, keys.zs), seg)
            m_trace.append(keys.recombine(r))
        return Chain(port, keys, m_trace, charges, removals, state)

    def run(self, us: Sequence[np.ndarray], vs: Sequence[np.ndarray], x_bit: int, seed: int) -> IppResult:
        if len(us) != self.t or len(vs) != self.t:
            raise IppError("us and vs must each hold t unitaries")
        x = self.encode([_index_of(u, self.alphabets[0]) for u in us], self.wa)
        y = self.encode([_index_of(v, self.alphabets[1]) for v in vs], self.wb)
        ref, ledger = Referee(seed), Ledger()
        ref.set_input("alice", "in", x)
        ref.set_input("bob", "in", y)

        exact = np.linalg.multi_dot(interleave(us, vs)[::-1])
        state = apply_matrix(StateVector.basis(1, x_bit & 1), exact, [0])

        # 1. route the qubit to the pipe of its label
        ledger.charge("route", self.routing.size)
        walk = walk_qubit(self.routing.alice(ref.alice), self.routing.bob(ref.bob), ref,
                          "route", state, 0)
        if walk.exit.label is None:
            raise IppError(f"routing left the qubit at an unlabeled exit {walk.exit}")
        active = int(walk.exit.label, 2)
        if active >= len(self.registry):
            raise IppError(f"label {walk.exit.label} has no registered decomposition")

        # 2-3. Alice undoes each label's circuit in parallel; only the true one is simulated
        chains = {}
        for i in range(len(self.registry)):
            if i == active:
                chains[i] = self.chain(i, ref, walk.state)
            else:
                chains[i] = self.chain(i)
            for c in chains[i].charges:
                ledger.charge(f"label{i}", c)
        live = chains[active]

        # 4. measure, broadcast, decode
        rng = np.random.default_rng(seed)
        outcome, _ = measure_computational(live.state, 0, rng)
        ref.record("A:meas", outcome)
        ref.exchange()
        guesses = {}
        for party, view in (("alice", ref.alice), ("bob", ref.bob)):
            lab = gh_evaluate(self.routing, view, view).label
            ch = chains[int(lab, 2)]
            fx = ch.keys.xs[0].evaluate(AtomAssignment(ch.keys.atoms, view))
            guesses[party] = view["A:meas"] ^ fx

        lab_bits, err = self.label_of(x, y)
        entry = self.registry[active]
        eps2 = entry.eps2
        synth_ok = operator_norm(_phase_align(circuit_matrix(entry.circuit), exact)) <= max(eps2, 0) + 1e-9
        rec_ok = all(b <= 68 * a + 13 for a, b in zip(live.m_trace, live.m_trace[1:]))
        expected_ledger = self.routing.size + sum(sum(c.charges) for c in chains.values())
        per_label_bound = sum(sum(2 * m for m in c.m_trace[:-1]) for c in chains.values())
        correct = guesses["alice"] == guesses["bob"] == (x_bit & 1)
        ok = (correct and rec_ok and synth_ok and ledger.epr_charged == expected_ledger
              and ledger.epr_charged <= self.routing.size + per_label_bound
              and err <= rounding_bound(2 * self.t, self.ell) and not ref.violations)
        report = RunReport("ipp", 1, "t", self.t, seed, ledger.epr_charged,
                           self.routing.size + per_label_bound, 1.0 if correct else 0.0, ok,
                           {"route": self.routing.size}, {
                               "ell": self.ell, "rounding_error": err, "label": lab_bits,
                               "m_trace": live.m_trace, "labels": len(self.registry),
                               "x_bit": x_bit & 1, "guesses": guesses})
        return IppResult(guesses, ref.transcript, report, ledger, live)


def _phase_align(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a - e^{i phi} b`` with the phase minimising the distance."""
    ip = np.trace(b.conj().T @ a)
    phase = ip / abs(ip) if abs(ip) > 1e-12 else 1.0
    return a - phase * b


_ATTACKS: dict[tuple, IppAttack] = {}


def attack_for(instance: IppInstance) -> IppAttack:
    """Attack setup for the instance's parameters, shared between instances that agree."""
    reg = tuple((e.label_bits, e.circuit.to_text(), e.eps2) for e in instance.registry)
    key = (instance.t, tuple(map(tuple, instance.alphabets)), instance.eps1, reg)
    if key not in _ATTACKS:
        _ATTACKS[key] = IppAttack(instance.t, instance.alphabets, instance.eps1,
                                  instance.registry or None)
    return _ATTACKS[key]


def run_ipp_attack(instance: IppInstance, x_bit: int, seed: int) -> IppResult:
    return attack_for(instance).run(instance.us, instance.vs, x_bit, seed)
