"""Size-bounded combinators: single-output conversion, XOR, multi-output.

All combinators are lazy: they wrap the child protocols' wirings and compute
partners on demand, so sizes are structural and evaluation costs only the
length of the water path.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Sequence

from .core import GardenHoseError, GardenHoseProtocol, Wiring

MULTI_OUTPUT_CAP = 8


def _shared_widths(ps: Sequence[GardenHoseProtocol]) -> tuple[int | None, int | None]:
    na = {p.n_alice for p in ps}
    nb = {p.n_bob for p in ps}
    if len(na) > 1 or len(nb) > 1:
        raise GardenHoseError("protocols must share input widths")
    return na.pop(), nb.pop()


# ---------------------------------------------------------------------------
# Single output
# ---------------------------------------------------------------------------

class SingleOutput(GardenHoseProtocol):
    """Mirror-copy conversion to one spilling pipe per side.

    Three copies of the inner protocol: IN (blocks ``0..s-1``), 0-OUT and
    1-OUT. Open Alice ends of IN join the same pipe in 0-OUT, open Bob ends
    join 1-OUT, so the water retraces its IN path backwards through the chosen
    OUT copy and leaves at that copy's tap pipe. The 0 output stays at Alice;
    the 1 output is taken to Bob via an extra pipe unless ``both_alice``.
    """

    def __init__(self, inner: GardenHoseProtocol, both_alice: bool = False):
        self.inner = inner
        self.s = inner.size
        self.both_alice = both_alice
        self.size = 3 * self.s + (0 if both_alice else 1)
        self.n_alice, self.n_bob = inner.n_alice, inner.n_bob

    def alice(self, x):
        return _SingleOutputAlice(self, self.inner.alice(x))

    def bob(self, y):
        return _SingleOutputBob(self, self.inner.bob(y))


class _SingleOutputAlice(Wiring):
    def __init__(self, proto: SingleOutput, w: Wiring):
        s = proto.s
        self.s, self.w, self.both = s, w, proto.both_alice
        self.tap = w.tap
        self.out0 = s + w.tap
        self.out1 = 2 * s + w.tap
        self.extra = None if self.both else 3 * s

    def partner(self, q):
        if q == self.extra:
            return self.out1
        block, j = divmod(q, self.s)
        r = self.w.partner(j)
        if r is not None:
            return block * self.s + r
        if j == self.w.tap:
            if block == 2 and not self.both:
                return self.extra
            return None
        if block == 0:
            return self.s + j
        if block == 1:
            return j
        return None

    def label(self, q):
        if self.both:
            if q == self.out0:
                return "0"
            if q == self.out1:
                return "1"
        return None


class _SingleOutputBob(Wiring):
    def __init__(self, proto: SingleOutput, w: Wiring):
        self.s, self.w = proto.s, w
        self.extra = None if proto.both_alice else 3 * proto.s

    def partner(self, q):
        if q == self.extra:
            return None
        block, j = divmod(q, self.s)
        r = self.w.partner(j)
        if r is not None:
            return block * self.s + r
        if block == 0:
            return 2 * self.s + j
        if block == 2:
            return j
        return None


def gh_single_output(p: GardenHoseProtocol, both_alice: bool = False) -> SingleOutput:
    return SingleOutput(p, both_alice)


# ---------------------------------------------------------------------------
# XOR
# ---------------------------------------------------------------------------

class Xor(GardenHoseProtocol):
    """Chained four-copy gadgets computing ``c xor f_1 xor ... xor f_k``.

    Gadget ``i`` holds copies 0-IN, 1-IN, 0-OUT, 1-OUT of ``f_i``. Water enters
    ``b``-IN carrying the running parity ``b``. Alice joins open ends of
    ``b``-IN to ``b``-OUT; Bob joins open ends of ``b``-IN to ``(1-b)``-OUT.
    The ``b``-OUT tap pipe feeds ``b``-IN of the next gadget; after the last
    gadget, 0 exits at Alice and 1 is taken to Bob through one extra pipe.
    """

    def __init__(self, ps: Sequence[GardenHoseProtocol], c: int = 0):
        if not ps:
            raise GardenHoseError("gh_xor needs at least one protocol")
        self.ps = list(ps)
        self.c = c & 1
        self.n_alice, self.n_bob = _shared_widths(self.ps)
        self.sizes = [p.size for p in self.ps]
        self.offsets = [0]
        for s in self.sizes:
            self.offsets.append(self.offsets[-1] + 4 * s)
        self.extra = self.offsets[-1]
        self.size = self.extra + 1

    def locate(self, q: int) -> tuple[int, int, int]:
        i = bisect_right(self.offsets, q) - 1
        block, j = divmod(q - self.offsets[i], self.sizes[i])
        return i, block, j

    def pipe(self, i: int, block: int, j: int) -> int:
        return self.offsets[i] + block * self.sizes[i] + j

    def alice(self, x):
        return _XorAlice(self, [p.alice(x) for p in self.ps])

    def bob(self, y):
        return _XorBob(self, [p.bob(y) for p in self.ps])


_ALICE_OPEN = {0: 2, 1: 3, 2: 0, 3: 1}
_BOB_OPEN = {0: 3, 3: 0, 1: 2, 2: 1}


class _XorAlice(Wiring):
    def __init__(self, proto: Xor, ws: list[Wiring]):
        self.p, self.ws = proto, ws
        self.last = len(ws) - 1
        self.tap = proto.pipe(0, proto.c, ws[0].tap)

    def partner(self, q):
        p = self.p
        if q == p.extra:
            return p.pipe(self.last, 3, self.ws[self.last].tap)
        i, block, j = p.locate(q)
        w = self.ws[i]
        r = w.partner(j)
        if r is not None:
            return p.pipe(i, block, r)
        if j == w.tap:
            if block < 2:
                if i == 0:
                    return None
                return p.pipe(i - 1, 2 + block, self.ws[i - 1].tap)
            bit = block - 2
            if i < self.last:
                return p.pipe(i + 1, bit, self.ws[i + 1].tap)
            return p.extra if bit else None
        return p.pipe(i, _ALICE_OPEN[block], j)


class _XorBob(Wiring):
    def __init__(self, proto: Xor, ws: list[Wiring]):
        self.p, self.ws = proto, ws

    def partner(self, q):
        p = self.p
        if q == p.extra:
            return None
        i, block, j = p.locate(q)
        r = self.ws[i].partner(j)
        if r is not None:
            return p.pipe(i, block, r)
        return p.pipe(i, _BOB_OPEN[block], j)


def gh_xor(ps: Sequence[GardenHoseProtocol], c: int = 0) -> Xor:
    return Xor(ps, c)


# ---------------------------------------------------------------------------
# Multi-output
# ---------------------------------------------------------------------------

class MultiOutput(GardenHoseProtocol):
    """Binary tree of both-outputs-at-Alice single-output protocols.

    Level ``i`` (0-based) holds ``2**i`` copies of the conversion of ``f_{i+1}``,
    one per prefix of earlier output bits. Every exit is at Alice, on a pipe
    labeled with the full output string ``f_1 ... f_k``.
    """

    def __init__(self, ps: Sequence[GardenHoseProtocol], cap: int = MULTI_OUTPUT_CAP):
        if not ps:
            raise GardenHoseError("gh_multi_output needs at least one protocol")
        if len(ps) > cap:
            raise GardenHoseError(f"{len(ps)} output bits exceed the cap of {cap}")
        self.levels = [SingleOutput(p, both_alice=True) for p in ps]
        self.k = len(ps)
        self.n_alice, self.n_bob = _shared_widths(list(ps))
        self.level_sizes = [so.size for so in self.levels]
        self.bases = [0]
        for i, s in enumerate(self.level_sizes):
            self.bases.append(self.bases[-1] + (2 ** i) * s)
        self.size = self.bases[-1]

    def locate(self, q: int) -> tuple[int, int, int]:
        i = bisect_right(self.bases, q) - 1
        idx, j = divmod(q - self.bases[i], self.level_sizes[i])
        return i, idx, j

    def pipe(self, i: int, idx: int, j: int) -> int:
        return self.bases[i] + idx * self.level_sizes[i] + j

    def alice(self, x):
        return _MultiAlice(self, [so.alice(x) for so in self.levels])

    def bob(self, y):
        return _MultiBob(self, [so.bob(y) for so in self.levels])


class _MultiAlice(Wiring):
    def __init__(self, proto: MultiOutput, ws: list):
        self.p, self.ws = proto, ws
        self.tap = proto.pipe(0, 0, ws[0].tap)

    def partner(self, q):
        p, ws = self.p, self.ws
        i, idx, j = p.locate(q)
        w = ws[i]
        if j == w.tap:
            if i == 0:
                return None
            parent, bit = divmod(idx, 2)
            prev = ws[i - 1]
            return p.pipe(i - 1, parent, prev.out1 if bit else prev.out0)
        if j == w.out0 or j == w.out1:
            if i == p.k - 1:
                return None
            nxt = ws[i + 1]
            return p.pipe(i + 1, 2 * idx + int(j == w.out1), nxt.tap)
        r = w.partner(j)
        return None if r is None else p.pipe(i, idx, r)

    def label(self, q):
        p = self.p
        i, idx, j = p.locate(q)
        if i != p.k - 1:
            return None
        w = self.ws[i]
        if j not in (w.out0, w.out1):
            return None
        prefix = format(idx, f"0{i}b") if i else ""
        return prefix + ("1" if j == w.out1 else "0")

    def port(self, label: str) -> int:
        """Pipe whose Alice end carries ``label``."""
        p = self.p
        if len(label) != p.k or set(label) - {"0", "1"}:
            raise GardenHoseError(f"bad label {label!r}")
        idx = int(label[:-1], 2) if p.k > 1 else 0
        w = self.ws[-1]
        return p.pipe(p.k - 1, idx, w.out1 if label[-1] == "1" else w.out0)


class _MultiBob(Wiring):
    def __init__(self, proto: MultiOutput, ws: list):
        self.p, self.ws = proto, ws

    def partner(self, q):
        p = self.p
        i, idx, j = p.locate(q)
        r = self.ws[i].partner(j)
        return None if r is None else p.pipe(i, idx, r)


def gh_multi_output(ps: Sequence[GardenHoseProtocol], cap: int = MULTI_OUTPUT_CAP) -> MultiOutput:
    return MultiOutput(ps, cap)


def multi_output_bound(ps: Sequence[GardenHoseProtocol]) -> int:
    """``sum_i 2^(i-1) p`` with ``p`` the largest single-output size."""
    p = max(SingleOutput(q, both_alice=True).size for q in ps)
    return sum(2 ** i * p for i in range(len(ps)))
