"""Clifford+T circuits, Pauli keys and symbolic key tracking.

Keys follow the symplectic convention ``(x | z)``: the held state equals
``X^x Z^z`` applied to the intended state. Global phases are ignored
throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

GATE_NAMES = ("X", "Z", "H", "P", "PDAG", "CNOT", "T", "TDAG")
T_KINDS = frozenset({"T", "TDAG"})
CLIFFORD_KINDS = frozenset({"X", "Z", "H", "P", "PDAG", "CNOT"})

_INVERSE = {"X": "X", "Z": "Z", "H": "H", "P": "PDAG", "PDAG": "P",
            "CNOT": "CNOT", "T": "TDAG", "TDAG": "T"}

OWNERS = ("alice", "bob", "joint")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    wires: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_NAMES:
            raise CircuitError(f"unknown gate {self.kind!r}")
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.wires) != arity:
            raise CircuitError(f"{self.kind} takes {arity} wire(s), got {self.wires}")
        if arity == 2 and self.wires[0] == self.wires[1]:
            raise CircuitError("CNOT control and target must differ")
        if any(w < 0 for w in self.wires):
            raise CircuitError(f"negative wire in {self}")

    @property
    def is_t(self) -> bool:
        return self.kind in T_KINDS

    def inverse(self) -> "Gate":
        return Gate(_INVERSE[self.kind], self.wires)

    def __str__(self):
        return " ".join([self.kind, *map(str, self.wires)])


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 1:
            raise CircuitError("circuit needs at least one qubit")
        for g in self.gates:
            if max(g.wires) >= self.n:
                raise CircuitError(f"wire out of range in '{g}' (n={self.n})")

    @cached_property
    def t_count(self) -> int:
        return sum(g.is_t for g in self.gates)

    @cached_property
    def layers(self) -> tuple[tuple[tuple[Gate, ...], ...], tuple[tuple[Gate, ...], ...]]:
        """Greedy layering into Clifford segments and T-layers.

        Returns ``(cliffords, t_layers)`` with ``len(cliffords) == len(t_layers) + 1``,
        so the circuit is ``C_0, L_1, C_1, ..., L_d, C_d``. A T gate joins the
        most recent T-layer unless some gate on its wire came after that layer
        was opened.
        """
        cliffords: list[list[Gate]] = [[]]
        t_layers: list[list[Gate]] = []
        touched: set[int] = set()
        for g in self.gates:
            if g.is_t:
                w = g.wires[0]
                if t_layers and w not in touched:
                    t_layers[-1].append(g)
                else:
                    t_layers.append([g])
                    cliffords.append([])
                    touched = set()
                touched.add(w)
            else:
                cliffords[-1].append(g)
                touched.update(g.wires)
        return tuple(map(tuple, cliffords)), tuple(map(tuple, t_layers))

    @property
    def t_depth(self) -> int:
        return len(self.layers[1])

    def flatten_layers(self) -> "Circuit":
        cliffords, t_layers = self.layers
        out: list[Gate] = list(cliffords[0])
        for layer, seg in zip(t_layers, cliffords[1:]):
            out.extend(layer)
            out.extend(seg)
        return Circuit(self.n, tuple(out))

    def t_split(self) -> tuple[list[tuple[Gate, ...]], list[Gate]]:
        """Split at every T gate: ``C_1 T C_2 T ... T C_{k+1}``."""
        segments: list[list[Gate]] = [[]]
        ts: list[Gate] = []
        for g in self.gates:
            if g.is_t:
                ts.append(g)
                segments.append([])
            else:
                segments[-1].append(g)
        return [tuple(s) for s in segments], ts

    def inverse(self) -> "Circuit":
        return Circuit(self.n, tuple(g.inverse() for g in reversed(self.gates)))

    def to_text(self) -> str:
        return "\n".join([f"qubits {self.n}", *map(str, self.gates)]) + "\n"


def parse_circuit(text: str, n: int | None = None) -> Circuit:
    """Parse the line format ``qubits n`` followed by ``NAME w [w2]`` lines."""
    gates: list[Gate] = []
    width = n
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].upper()
        try:
            args = [int(p) for p in parts[1:]]
        except ValueError:
            raise CircuitError(f"line {lineno}: non-integer wire in {raw!r}") from None
        if head == "QUBITS":
            if len(args) != 1 or args[0] < 1:
                raise CircuitError(f"line {lineno}: malformed qubits line")
            width = args[0]
            continue
        if head not in GATE_NAMES:
            raise CircuitError(f"line {lineno}: unknown gate {parts[0]!r}")
        try:
            gates.append(Gate(head, tuple(args)))
        except CircuitError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if width is None:
        width = max((max(g.wires) for g in gates), default=0) + 1
    return Circuit(width, tuple(gates))


# ---------------------------------------------------------------------------
# Polynomials over F2
# ---------------------------------------------------------------------------

Monomial = frozenset  # of variable names; empty = constant 1


@dataclass(frozen=True)
class KeyPolynomial:
    """Multilinear polynomial over F2; duplicate monomials cancel."""

    monomials: frozenset = frozenset()
    owners: Mapping[str, str] = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def zero(cls) -> "KeyPolynomial":
        return cls()

    @classmethod
    def one(cls) -> "KeyPolynomial":
        return cls(frozenset({frozenset()}))

    @classmethod
    def var(cls, name: str, owner: str = "joint") -> "KeyPolynomial":
        if owner not in OWNERS:
            raise ValueError(f"owner must be one of {OWNERS}")
        return cls(frozenset({frozenset({name})}), {name: owner})

    @classmethod
    def const(cls, bit: int) -> "KeyPolynomial":
        return cls.one() if bit & 1 else cls.zero()

    @property
    def variables(self) -> frozenset:
        return frozenset().union(*self.monomials) if self.monomials else frozenset()

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.monomials), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.monomials

    @property
    def constant(self) -> int:
        return int(frozenset() in self.monomials)

    def linear_terms(self) -> list[str]:
        """Variables of a degree-1 polynomial, sorted."""
        if self.degree > 1:
            raise ValueError("polynomial is not affine")
        return sorted(next(iter(m)) for m in self.monomials if m)

    def _merge_owners(self, other: "KeyPolynomial") -> dict:
        merged = dict(self.owners)
        merged.update(other.owners)
        return merged

    def __xor__(self, other):
        if isinstance(other, int):
            other = KeyPolynomial.const(other)
        if not isinstance(other, KeyPolynomial):
            return NotImplemented
        return KeyPolynomial(self.monomials ^ other.monomials, self._merge_owners(other))

    __rxor__ = __xor__
    __add__ = __xor__
    __radd__ = __xor__

    def __and__(self, other):
        if isinstance(other, int):
            other = KeyPolynomial.const(other)
        if not isinstance(other, KeyPolynomial):
            return NotImplemented
        acc: set = set()
        for a in self.monomials:
            for b in other.monomials:
                acc ^= {a | b}
        return KeyPolynomial(frozenset(acc), self._merge_owners(other))

    __rand__ = __and__
    __mul__ = __and__
    __rmul__ = __and__

    def evaluate(self, assignment: Mapping[str, int]) -> int:
        """F2 sum of products under a total assignment."""
        total = 0
        for mono in self.monomials:
            term = 1
            for v in mono:
                try:
                    term &= int(assignment[v]) & 1
                except KeyError:
                    raise KeyError(f"variable {v!r} missing from assignment") from None
            total ^= term
        return total

    def __str__(self):
        if not self.monomials:
            return "0"
        terms = sorted("·".join(sorted(m)) if m else "1" for m in self.monomials)
        return " ⊕ ".join(terms)


def key_poly_xor(p: KeyPolynomial, q: KeyPolynomial) -> KeyPolynomial:
    return p ^ q


def key_poly_eval(p: KeyPolynomial, assignment: Mapping[str, int]) -> int:
    return p.evaluate(assignment)


# ---------------------------------------------------------------------------
# Pauli keys and their transformation under Clifford gates
# ---------------------------------------------------------------------------

KeyEntry = Union[int, KeyPolynomial]


@dataclass(frozen=True)
class PauliKey:
    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))
        if len(self.x) != len(self.z):
            raise ValueError("x and z masks must have equal length")

    @classmethod
    def zeros(cls, n: int) -> "PauliKey":
        return cls((0,) * n, (0,) * n)

    @property
    def n(self) -> int:
        return len(self.x)

    def __xor__(self, other: "PauliKey") -> "PauliKey":
        return PauliKey(tuple(a ^ b for a, b in zip(self.x, other.x)),
                        tuple(a ^ b for a, b in zip(self.z, other.z)))


def _conj_lists(xs: list, zs: list, gates: Iterable[Gate]) -> None:
    for g in gates:
        k = g.kind
        if k in T_KINDS:
            raise CircuitError("T gate in a Clifford-only key transformation")
        if k == "H":
            w = g.wires[0]
            xs[w], zs[w] = zs[w], xs[w]
        elif k in ("P", "PDAG"):
            w = g.wires[0]
            zs[w] = zs[w] ^ xs[w]
        elif k == "CNOT":
            c, t = g.wires
            xs[t] = xs[t] ^ xs[c]
            zs[c] = zs[c] ^ zs[t]
        # X and Z only contribute a global phase


def conjugate_key_through_clifford(key, gates: Sequence[Gate]):
    """Push a key through Clifford gates: ``c X^x Z^z = X^x' Z^z' c``.

    ``key`` is a :class:`PauliKey` or a pair ``(xs, zs)`` of per-wire entries
    (bits or :class:`KeyPolynomial`); the result has the same shape.
    """
    if isinstance(key, PauliKey):
        xs, zs = list(key.x), list(key.z)
        _conj_lists(xs, zs, gates)
        return PauliKey(tuple(xs), tuple(zs))
    xs, zs = (list(v) for v in key)
    _conj_lists(xs, zs, gates)
    return xs, zs


def commute_t_past_key(x_bit: KeyEntry) -> KeyEntry:
    """Exponent of the stray phase gate from ``T X^a = P^a X^a T``."""
    return x_bit
