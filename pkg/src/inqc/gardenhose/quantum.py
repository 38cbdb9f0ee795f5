"""Quantum execution of garden-hose protocols and correction trackers.

Every pipe is an EPR pair and every hose is a Bell measurement, so a qubit
fed in at the tap follows the water path, picking up one random Pauli per
hop. Bell outcomes come from the referee's keyed stream under the hose's
variable name: ``A:<tag>:tap`` for Alice's input hop, ``A:<tag>:<p>-<q>`` and
``B:<tag>:<p>-<q>`` (``p < q``) for hoses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..clifford_t import Gate
from ..referee import ALICE, BOB, Ledger, Referee
from ..statevec import StateVector, apply_gate, apply_pauli
from .combinators import SingleOutput
from .core import Exit, GardenHoseError, GardenHoseProtocol, Wiring


def tap_name(tag: str) -> str:
    return f"A:{tag}:tap"


def hose_name(party: str, tag: str, p: int, q: int) -> str:
    lo, hi = (p, q) if p < q else (q, p)
    return f"{'A' if party == ALICE else 'B'}:{tag}:{lo}-{hi}"


@dataclass(frozen=True)
class Hop:
    name: str
    party: str
    x: int
    z: int


@dataclass
class QuantumWalk:
    exit: Exit
    state: StateVector
    hops: list[Hop] = field(default_factory=list)
    fix_at: int | None = None  # hops before this index happened before Bob's gate

    @property
    def g(self) -> int:
        acc = 0
        for h in self.hops:
            acc ^= h.x
        return acc

    @property
    def h(self) -> int:
        acc = 0
        for i, hop in enumerate(self.hops):
            acc ^= hop.z
            if self.fix_at is not None and i < self.fix_at:
                acc ^= hop.x
        return acc

    def outcomes(self, party: str) -> list[tuple[int, int]]:
        return [(h.x, h.z) for h in self.hops if h.party == party]


BobGate = Callable[[int, "int | None"], "str | None"]


def walk_qubit(aw: Wiring, bw: Wiring, ref: Referee, tag: str, state: StateVector,
               wire: int, bob_gate: BobGate | None = None) -> QuantumWalk:
    """Teleport the qubit on ``wire`` along the water path.

    ``bob_gate(pipe, partner)`` may name a one-qubit gate that Bob applies
    when the qubit sits at his end of ``pipe``, before his hose (if any).
    """
    walk = QuantumWalk(Exit(ALICE, -1), state)

    def teleport(name: str, party: str) -> None:
        bx, bz = ref.measure(name)
        walk.state = apply_pauli(walk.state, wire, bx, bz)
        walk.hops.append(Hop(name, party, bx, bz))

    pipe = aw.tap
    visited = {pipe}
    teleport(tap_name(tag), ALICE)
    while True:
        q = bw.partner(pipe)
        if bob_gate is not None:
            kind = bob_gate(pipe, q)
            if kind is not None:
                walk.state = apply_gate(walk.state, Gate(kind, (wire,)))
                walk.fix_at = len(walk.hops)
        if q is None:
            walk.exit = Exit(BOB, pipe)
            return walk
        if q in visited:
            raise GardenHoseError(f"water revisits pipe {q}: invalid protocol")
        visited.add(q)
        teleport(hose_name(BOB, tag, pipe, q), BOB)
        r = aw.partner(q)
        if r is None:
            walk.exit = Exit(ALICE, q, aw.label(q))
            return walk
        if r in visited:
            raise GardenHoseError(f"water revisits pipe {r}: invalid protocol")
        visited.add(r)
        teleport(hose_name(ALICE, tag, q, r), ALICE)
        pipe = r


@dataclass
class QuantumExecution:
    exit: Exit
    alice_outcomes: list[tuple[int, int]]
    bob_outcomes: list[tuple[int, int]]
    state: StateVector
    g: int
    h: int


def gh_quantum_execute(p: GardenHoseProtocol, x, y, state: StateVector, wire: int = 0,
                       ref: Referee | None = None, ledger: Ledger | None = None,
                       seed: int = 0, tag: str = "gh") -> QuantumExecution:
    """Run ``p`` as a teleportation chain; ``X^g Z^h`` is left on the qubit."""
    ref = ref if ref is not None else Referee(seed)
    if ledger is not None:
        ledger.charge(f"gh:{tag}", p.size)
    w = walk_qubit(p.alice(x), p.bob(y), ref, tag, state, wire)
    return QuantumExecution(w.exit, w.outcomes(ALICE), w.outcomes(BOB), w.state, w.g, w.h)


# ---------------------------------------------------------------------------
# Conditional phase removal network
# ---------------------------------------------------------------------------

class PhaseNetwork(GardenHoseProtocol):
    """Two copies of ``f``: the forward run, then the same wiring traversed back.

    Copy 1 is pipes ``0..s-1`` and copy 2 is ``s..2s-1``. Open ends of copy 1
    are joined to the same pipe of copy 2 on both sides; the copy-2 tap pipe is
    left open at Alice and is where the qubit always ends up.
    """

    def __init__(self, f: GardenHoseProtocol):
        self.f = f
        self.s = f.size
        self.size = 2 * self.s
        self.n_alice, self.n_bob = f.n_alice, f.n_bob

    def alice(self, x):
        return _PhaseAlice(self.s, self.f.alice(x))

    def bob(self, y):
        return _PhaseBob(self.s, self.f.bob(y))

    def is_first(self, lo: int, hi: int) -> bool:
        return hi < self.s

    def bob_gate(self, dagger: bool = False) -> BobGate:
        """Bob undoes the phase at any open copy-1 end he receives the qubit on."""
        kind = "P" if dagger else "PDAG"
        s = self.s

        def gate(pipe, partner):
            return kind if pipe < s and partner is not None and partner >= s else None
        return gate


class _PhaseAlice(Wiring):
    def __init__(self, s: int, w: Wiring):
        self.s, self.w = s, w
        self.tap = w.tap
        self.final = s + w.tap

    def partner(self, q):
        s, w = self.s, self.w
        j = q if q < s else q - s
        r = w.partner(j)
        if r is not None:
            return r if q < s else r + s
        if j == w.tap:
            return None
        return j + s if q < s else j


class _PhaseBob(Wiring):
    def __init__(self, s: int, w: Wiring):
        self.s, self.w = s, w

    def partner(self, q):
        s = self.s
        j = q if q < s else q - s
        r = self.w.partner(j)
        if r is not None:
            return r if q < s else r + s
        return j + s if q < s else j


# ---------------------------------------------------------------------------
# Trackers
# ---------------------------------------------------------------------------

def outcome_bit(view, name: str, mode: str, first: bool) -> int:
    if mode == "x":
        return view[name + ".x"]
    if mode == "z":
        return view[name + ".z"]
    if mode == "xz_first":
        return (view[name + ".x"] ^ view[name + ".z"]) if first else view[name + ".z"]
    raise ValueError(f"unknown tracker mode {mode!r}")


class Tracker(GardenHoseProtocol):
    """Follows the qubit's path on pipe pairs ``I_j = 2j``, ``X_j = 2j+1``.

    Being on the ``X`` track means the tracked correction is 1 so far. A hose
    with outcome bit 0 joins the pairs in parallel, bit 1 crosswise. At the
    final location ``I`` is left open (output 0 at Alice) and ``X`` is taken
    to Bob through one extra pipe (output 1). Inputs are party views that
    expose the network inputs and the hose outcomes.
    """

    def __init__(self, network: GardenHoseProtocol, tag: str, mode: str = "x",
                 final_of: Callable[[Wiring], int] | None = None,
                 is_first: Callable[[int, int], bool] | None = None):
        self.network, self.tag, self.mode = network, tag, mode
        self.final_of = final_of or (lambda w: w.final)
        self.is_first = is_first or getattr(network, "is_first", lambda lo, hi: True)
        self.extra = 2 * network.size
        self.size = self.extra + 1

    def alice(self, view):
        return _TrackerAlice(self, view)

    def bob(self, view):
        return _TrackerBob(self, view)


class _TrackerAlice(Wiring):
    def __init__(self, tr: Tracker, view):
        self.tr, self.view = tr, view
        self.nw = tr.network.alice(view)
        self.final = tr.final_of(self.nw)
        self.tap = 2 * self.nw.tap + outcome_bit(view, tap_name(tr.tag), tr.mode, True)

    def partner(self, q):
        tr = self.tr
        if q == tr.extra:
            return 2 * self.final + 1
        j, track = divmod(q, 2)
        if j == self.final:
            return tr.extra if track else None
        k = self.nw.partner(j)
        if k is None:
            return None
        lo, hi = min(j, k), max(j, k)
        b = outcome_bit(self.view, hose_name(ALICE, tr.tag, lo, hi), tr.mode, tr.is_first(lo, hi))
        return 2 * k + (track ^ b)


class _TrackerBob(Wiring):
    def __init__(self, tr: Tracker, view):
        self.tr, self.view = tr, view
        self.nw = tr.network.bob(view)

    def partner(self, q):
        tr = self.tr
        if q == tr.extra:
            return None
        j, track = divmod(q, 2)
        k = self.nw.partner(j)
        if k is None:
            return None
        lo, hi = min(j, k), max(j, k)
        b = outcome_bit(self.view, hose_name(BOB, tr.tag, lo, hi), tr.mode, tr.is_first(lo, hi))
        return 2 * k + (track ^ b)


def build_x_tracker(network: PhaseNetwork, tag: str) -> Tracker:
    return Tracker(network, tag, "x")


class ZTracker(GardenHoseProtocol):
    """Decide whether the phase was present, then track Z in the matching mode.

    A both-at-Alice single-output copy of ``f`` routes the water to a plain
    Z tracker (phase absent) or to one that uses ``x xor z`` outcomes for hops
    made before Bob's phase fix (phase present).
    """

    def __init__(self, network: PhaseNetwork, tag: str):
        self.network = network
        self.so = SingleOutput(network.f, both_alice=True)
        self.t0 = Tracker(network, tag, "z")
        self.t1 = Tracker(network, tag, "xz_first")
        self.o0 = self.so.size
        self.o1 = self.o0 + self.t0.size
        self.size = self.o1 + self.t1.size

    def alice(self, view):
        return _ZAlice(self, view)

    def bob(self, view):
        return _ZBob(self, view)


class _ZAlice(Wiring):
    def __init__(self, zt: ZTracker, view):
        self.zt = zt
        self.so = zt.so.alice(view)
        self.t0 = zt.t0.alice(view)
        self.t1 = zt.t1.alice(view)
        self.tap = self.so.tap

    def partner(self, q):
        zt = self.zt
        if q < zt.o0:
            if q == self.so.out0:
                return zt.o0 + self.t0.tap
            if q == self.so.out1:
                return zt.o1 + self.t1.tap
            return self.so.partner(q)
        off, sub, back = (zt.o0, self.t0, self.so.out0) if q < zt.o1 else (zt.o1, self.t1, self.so.out1)
        j = q - off
        if j == sub.tap:
            return back
        r = sub.partner(j)
        return None if r is None else off + r


class _ZBob(Wiring):
    def __init__(self, zt: ZTracker, view):
        self.zt = zt
        self.so = zt.so.bob(view)
        self.t0 = zt.t0.bob(view)
        self.t1 = zt.t1.bob(view)

    def partner(self, q):
        zt = self.zt
        if q < zt.o0:
            return self.so.partner(q)
        off, sub = (zt.o0, self.t0) if q < zt.o1 else (zt.o1, self.t1)
        r = sub.partner(q - off)
        return None if r is None else off + r


def build_z_tracker(network: PhaseNetwork, tag: str) -> ZTracker:
    return ZTracker(network, tag)
