"""Garden-hose protocols: representation, water-flow evaluation, basic builders.

A protocol with ``s`` pipes is given by per-input wirings. Alice's wiring for
input ``x`` attaches the tap to one pipe and pairs up some of her pipe ends;
Bob's wiring for ``y`` pairs up some of his. Water runs from the tap through
the tapped pipe to Bob's side, then alternates sides along the hoses until it
reaches an unconnected end.

Wirings are queried lazily through :meth:`Wiring.partner`, so composite
protocols with very many pipes can be walked without materialising their
matchings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Iterable, Sequence

ALICE, BOB = "alice", "bob"
MAX_TRUTH_TABLE_WIDTH = 12


class GardenHoseError(ValueError):
    pass


@dataclass(frozen=True)
class Exit:
    side: str
    pipe: int
    label: str | None = None

    @property
    def bit(self) -> int:
        return int(self.side == BOB)


class Wiring:
    """One party's hoses for a fixed input. ``tap`` is set for Alice only."""

    tap: int | None = None

    def partner(self, p: int) -> int | None:
        raise NotImplementedError

    def label(self, p: int) -> str | None:
        return None


class TableWiring(Wiring):
    def __init__(self, pairs: Iterable[tuple[int, int]], tap: int | None = None,
                 labels: dict[int, str] | None = None):
        self.tap = tap
        self._partner: dict[int, int] = {}
        for a, b in pairs:
            self._partner[a] = b
            self._partner[b] = a
        self._labels = labels or {}

    def partner(self, p):
        return self._partner.get(p)

    def label(self, p):
        return self._labels.get(p)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return sorted((a, b) for a, b in self._partner.items() if a < b)


class GardenHoseProtocol:
    """Base class. Subclasses set ``size`` and implement ``alice``/``bob``.

    ``n_alice``/``n_bob`` are the input bit widths when inputs are integers;
    they are ``None`` for protocols whose inputs are party views.
    """

    size: int
    n_alice: int | None = None
    n_bob: int | None = None

    def alice(self, x) -> Wiring:
        raise NotImplementedError

    def bob(self, y) -> Wiring:
        raise NotImplementedError

    def alice_inputs(self) -> range:
        if self.n_alice is None:
            raise GardenHoseError("protocol inputs are not enumerable")
        return range(2 ** self.n_alice)

    def bob_inputs(self) -> range:
        if self.n_bob is None:
            raise GardenHoseError("protocol inputs are not enumerable")
        return range(2 ** self.n_bob)


def walk(p: GardenHoseProtocol, x, y) -> tuple[Exit, list[int]]:
    """Follow the water; returns the exit and the ordered list of visited pipes."""
    aw, bw = p.alice(x), p.bob(y)
    pipe = aw.tap
    if pipe is None or not 0 <= pipe < p.size:
        raise GardenHoseError(f"tap attached to invalid pipe {pipe}")
    path = [pipe]
    visited = {pipe}
    while True:
        q = bw.partner(pipe)
        if q is None:
            return Exit(BOB, pipe), path
        if q in visited:
            raise GardenHoseError(f"water revisits pipe {q}: invalid protocol")
        visited.add(q)
        path.append(q)
        r = aw.partner(q)
        if r is None:
            return Exit(ALICE, q, aw.label(q)), path
        if r in visited:
            raise GardenHoseError(f"water revisits pipe {r}: invalid protocol")
        visited.add(r)
        path.append(r)
        pipe = r


def gh_evaluate(p: GardenHoseProtocol, x, y) -> Exit:
    return walk(p, x, y)[0]


def full_pairs(w: Wiring, size: int) -> list[tuple[int, int]]:
    out = []
    for a in range(size):
        b = w.partner(a)
        if b is not None and a < b:
            out.append((a, b))
    return out


def validate(p: GardenHoseProtocol) -> None:
    """Check matchings are symmetric and disjoint from the tap (enumerable protocols)."""
    for x in p.alice_inputs():
        w = p.alice(x)
        _check_wiring(w, p.size, f"alice x={x}")
        if w.partner(w.tap) is not None:
            raise GardenHoseError(f"alice x={x}: tap pipe {w.tap} also has a hose")
    for y in p.bob_inputs():
        _check_wiring(p.bob(y), p.size, f"bob y={y}")


def _check_wiring(w: Wiring, size: int, where: str) -> None:
    for a in range(size):
        b = w.partner(a)
        if b is None:
            continue
        if not 0 <= b < size or b == a or w.partner(b) != a:
            raise GardenHoseError(f"{where}: inconsistent hose at pipe {a}")


def spilling_pipes(p: GardenHoseProtocol, side: str) -> int:
    """Max over one party's inputs of the distinct exit pipes on ``side``,
    taken over all inputs of the other party."""
    if side == ALICE:
        return max(len({e.pipe for y in p.bob_inputs()
                        if (e := gh_evaluate(p, x, y)).side == ALICE})
                   for x in p.alice_inputs())
    return max(len({e.pipe for x in p.alice_inputs()
                    if (e := gh_evaluate(p, x, y)).side == BOB})
               for y in p.bob_inputs())


def truth_of(p: GardenHoseProtocol) -> list[list[int]]:
    return [[gh_evaluate(p, x, y).bit for y in p.bob_inputs()] for x in p.alice_inputs()]


# ---------------------------------------------------------------------------
# Explicit protocols and JSON
# ---------------------------------------------------------------------------

class ExplicitProtocol(GardenHoseProtocol):
    def __init__(self, size: int, alice_table: dict[int, tuple[int, Sequence]],
                 bob_table: dict[int, Sequence], n_alice: int, n_bob: int,
                 labels: dict[int, dict[int, str]] | None = None):
        self.size = size
        self.n_alice, self.n_bob = n_alice, n_bob
        self._labels = labels or {}
        self._alice = {x: TableWiring(map(tuple, pairs), tap, self._labels.get(x))
                       for x, (tap, pairs) in alice_table.items()}
        self._bob = {y: TableWiring(map(tuple, pairs)) for y, pairs in bob_table.items()}

    def alice(self, x):
        return self._alice[x]

    def bob(self, y):
        return self._bob[y]


def protocol_to_dict(p: GardenHoseProtocol) -> dict[str, Any]:
    alice, bob, labels = {}, {}, {}
    for x in p.alice_inputs():
        w = p.alice(x)
        alice[str(x)] = {"tap": w.tap, "pairs": full_pairs(w, p.size)}
        lab = {str(q): w.label(q) for q in range(p.size) if w.label(q) is not None}
        if lab:
            labels[str(x)] = lab
    for y in p.bob_inputs():
        bob[str(y)] = full_pairs(p.bob(y), p.size)
    out = {"pipes": p.size, "n_alice": p.n_alice, "n_bob": p.n_bob,
           "alice": alice, "bob": bob}
    if labels:
        out["labels"] = labels
    return out


def protocol_from_dict(d: dict[str, Any]) -> ExplicitProtocol:
    alice = {int(x): (v["tap"], [tuple(pr) for pr in v["pairs"]]) for x, v in d["alice"].items()}
    bob = {int(y): [tuple(pr) for pr in v] for y, v in d["bob"].items()}
    labels = {int(x): {int(q): lab for q, lab in v.items()}
              for x, v in d.get("labels", {}).items()}
    p = ExplicitProtocol(d["pipes"], alice, bob, d["n_alice"], d["n_bob"], labels)
    validate(p)
    return p


def dumps(p: GardenHoseProtocol) -> str:
    return json.dumps(protocol_to_dict(p), indent=1)


def loads(text: str) -> ExplicitProtocol:
    return protocol_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Truth tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruthTable:
    n_alice: int
    n_bob: int
    bits: tuple[int, ...]  # index x * 2**n_bob + y

    def __post_init__(self):
        if len(self.bits) != 2 ** (self.n_alice + self.n_bob):
            raise GardenHoseError("truth table has the wrong number of entries")

    def __call__(self, x: int, y: int) -> int:
        return self.bits[(x << self.n_bob) | y]

    @classmethod
    def from_function(cls, f: Callable[[int, int], int], n_alice: int, n_bob: int) -> "TruthTable":
        return cls(n_alice, n_bob, tuple(int(f(x, y)) & 1 for x in range(2 ** n_alice)
                                         for y in range(2 ** n_bob)))

    @classmethod
    def parse(cls, text: str) -> "TruthTable":
        tokens = text.split()
        if len(tokens) < 3 or tokens[0] != "f":
            raise GardenHoseError("truth table must start with 'f nA nB'")
        na, nb = int(tokens[1]), int(tokens[2])
        bits = tuple(int(t) for t in tokens[3:])
        if any(b not in (0, 1) for b in bits):
            raise GardenHoseError("truth table entries must be 0 or 1")
        return cls(na, nb, bits)

    def format(self) -> str:
        rows = [" ".join(str(self(x, y)) for y in range(2 ** self.n_bob))
                for x in range(2 ** self.n_alice)]
        return f"f {self.n_alice} {self.n_bob}\n" + "\n".join(rows) + "\n"


class TruthTableProtocol(GardenHoseProtocol):
    """One pipe per Alice input plus an auxiliary pipe.

    Alice taps pipe ``x``. Bob leaves ``{x : f(x,y)=1}`` open and pairs up the
    rest in increasing order, using the auxiliary pipe when their count is odd.
    """

    def __init__(self, table: TruthTable):
        if table.n_alice > MAX_TRUTH_TABLE_WIDTH:
            raise GardenHoseError(f"Alice width {table.n_alice} exceeds {MAX_TRUTH_TABLE_WIDTH}")
        self.table = table
        self.n_alice, self.n_bob = table.n_alice, table.n_bob
        self.aux = 2 ** table.n_alice
        self.size = self.aux + 1
        self._bob = lru_cache(maxsize=None)(self._bob_wiring)

    def alice(self, x):
        return TableWiring((), tap=int(x))

    def bob(self, y):
        return self._bob(int(y))

    def _bob_wiring(self, y: int) -> TableWiring:
        zeros = [x for x in range(self.aux) if not self.table(x, y)]
        if len(zeros) % 2:
            zeros.append(self.aux)
        return TableWiring(zip(zeros[::2], zeros[1::2]))


def gh_from_truth_table(f: TruthTable) -> TruthTableProtocol:
    return TruthTableProtocol(f)


class ConstantProtocol(GardenHoseProtocol):
    """Constant 1 on one pipe; constant 0 on two (Bob closes the loop)."""

    def __init__(self, bit: int, n_alice: int | None = None, n_bob: int | None = None):
        self.bit = bit & 1
        self.size = 1 if self.bit else 2
        self.n_alice, self.n_bob = n_alice, n_bob

    def alice(self, x):
        return TableWiring((), tap=0)

    def bob(self, y):
        return TableWiring(() if self.bit else [(0, 1)])


class LocalXorProtocol(GardenHoseProtocol):
    """Three pipes computing ``a(x) xor b(y)`` for locally computable bits.

    Alice taps pipe ``a(x)``. Bob routes pipe ``b(y)`` to pipe 2, where the
    water leaves on Alice's side, and leaves the other one open.
    """

    size = 3

    def __init__(self, alice_bit: Callable[[Any], int] | None = None,
                 bob_bit: Callable[[Any], int] | None = None,
                 n_alice: int | None = None, n_bob: int | None = None):
        self.alice_bit = alice_bit or (lambda x: 0)
        self.bob_bit = bob_bit or (lambda y: 0)
        self.n_alice, self.n_bob = n_alice, n_bob

    def alice(self, x):
        return TableWiring((), tap=self.alice_bit(x) & 1)

    def bob(self, y):
        return TableWiring([(self.bob_bit(y) & 1, 2)])


class InputMapped(GardenHoseProtocol):
    """Same wiring, with each party's input transformed before lookup."""

    def __init__(self, inner: GardenHoseProtocol, alice_map: Callable, bob_map: Callable,
                 n_alice: int | None = None, n_bob: int | None = None):
        self.inner = inner
        self.size = inner.size
        self.alice_map, self.bob_map = alice_map, bob_map
        self.n_alice, self.n_bob = n_alice, n_bob

    def alice(self, x):
        return self.inner.alice(self.alice_map(x))

    def bob(self, y):
        return self.inner.bob(self.bob_map(y))
