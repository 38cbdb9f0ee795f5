"""Referee runtime for one-round simultaneous protocols.

Variable names carry their owner as a prefix: ``A:`` for Alice and ``B:`` for
Bob. Before the exchange a party may only read its own variables; afterwards
it may read everything the other party sent.

Bell-measurement outcomes are realised lazily from a keyed stream: the bit
pair for a variable is a hash of ``(seed, name)``. A run is therefore a pure
function of its inputs and seed, and outcomes of measurements that no code
path inspects never need to be enumerated.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Callable

ALICE, BOB = "alice", "bob"
PREFIX = {ALICE: "A:", BOB: "B:"}


class AccessViolation(RuntimeError):
    """A party read the other party's data before the simultaneous exchange."""


class ProtocolError(RuntimeError):
    pass


def owner_of(name: str) -> str:
    if name.startswith("A:"):
        return ALICE
    if name.startswith("B:"):
        return BOB
    raise KeyError(f"variable {name!r} has no owner prefix")


def other(party: str) -> str:
    return BOB if party == ALICE else ALICE


def keyed_bits(seed: int, name: str) -> tuple[int, int]:
    digest = hashlib.blake2b(f"{seed}|{name}".encode(), digest_size=2).digest()
    return digest[0] & 1, digest[1] & 1


@dataclass
class Ledger:
    """EPR-pair accounting; charges are append-only."""

    breakdown: list[tuple[str, int]] = field(default_factory=list)

    def charge(self, phase: str, pairs: int) -> None:
        if pairs < 0:
            raise ValueError("cannot refund EPR pairs")
        self.breakdown.append((phase, int(pairs)))

    @property
    def epr_charged(self) -> int:
        return sum(p for _, p in self.breakdown)

    def by_phase(self) -> dict[str, int]:
        acc: Counter = Counter()
        for phase, p in self.breakdown:
            acc[phase] += p
        return dict(acc)


@dataclass
class Transcript:
    alice_outcomes: dict[str, int] = field(default_factory=dict)
    bob_outcomes: dict[str, int] = field(default_factory=dict)
    simultaneous_message_alice: bytes = b""
    simultaneous_message_bob: bytes = b""

    def outcomes(self, party: str) -> dict[str, int]:
        return self.alice_outcomes if party == ALICE else self.bob_outcomes


class PartyContext(Mapping):
    """Read-only view of the variables one party may see."""

    def __init__(self, referee: "Referee", party: str):
        self._ref = referee
        self.party = party

    def __getitem__(self, name: str) -> int:
        return self._ref.read(self.party, name)

    def __iter__(self):
        own = self._ref.transcript.outcomes(self.party)
        names = list(own)
        if self._ref.exchanged:
            names += list(self._ref.transcript.outcomes(other(self.party)))
        return iter(names)

    def __len__(self):
        return sum(1 for _ in self)

    @property
    def readable(self) -> frozenset:
        return frozenset(self)

    def __repr__(self):
        return f"PartyContext({self.party}, exchanged={self._ref.exchanged})"


class Referee:
    """Holds both parties' records and enforces the single exchange."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.transcript = Transcript()
        self.exchanged = False
        self.violations: list[str] = []
        self.alice = PartyContext(self, ALICE)
        self.bob = PartyContext(self, BOB)

    def context(self, party: str) -> PartyContext:
        return self.alice if party == ALICE else self.bob

    def set_input(self, party: str, name: str, value: Any) -> None:
        full = PREFIX[party] + name
        self.transcript.outcomes(party)[full] = value

    def measure(self, name: str) -> tuple[int, int]:
        """Realise a Bell outcome ``(x, z)``; physical, no access check."""
        store = self.transcript.outcomes(owner_of(name))
        kx, kz = name + ".x", name + ".z"
        if kx not in store:
            bx, bz = keyed_bits(self.seed, name)
            store[kx], store[kz] = bx, bz
        return store[kx], store[kz]

    def record(self, name: str, value: int) -> None:
        self.transcript.outcomes(owner_of(name))[name] = value

    def read(self, party: str, name: str):
        owner = owner_of(name)
        if owner != party and not self.exchanged:
            msg = f"{party} read {name!r} before the exchange"
            self.violations.append(msg)
            raise AccessViolation(msg)
        store = self.transcript.outcomes(owner)
        if name not in store:
            base, _, comp = name.rpartition(".")
            if comp in ("x", "z") and base:
                self.measure(base)
            else:
                raise KeyError(name)
        return store[name]

    def exchange(self) -> None:
        if self.exchanged:
            raise ProtocolError("the simultaneous exchange happens exactly once")
        t = self.transcript
        t.simultaneous_message_alice = _serialize(t.alice_outcomes)
        t.simultaneous_message_bob = _serialize(t.bob_outcomes)
        self.exchanged = True


def _serialize(outcomes: Mapping[str, Any]) -> bytes:
    return json.dumps(dict(sorted(outcomes.items())), separators=(",", ":")).encode()


@dataclass
class PhasedProgram:
    """A two-party program: local phase, one exchange, local phase."""

    alice_phase1: Callable[[PartyContext, Referee], Any]
    bob_phase1: Callable[[PartyContext, Referee], Any]
    alice_phase2: Callable[[PartyContext, Referee], Any]
    bob_phase2: Callable[[PartyContext, Referee], Any]


@dataclass
class RefereeResult:
    transcript: Transcript
    outputs: dict[str, Any]
    aborted: bool = False
    violation: str | None = None


def referee_run(program: PhasedProgram, inputs: Mapping[str, Mapping[str, Any]],
                seed: int) -> RefereeResult:
    """Run ``program`` under access control; a cross-party read aborts the run."""
    for name in ("alice_phase1", "bob_phase1", "alice_phase2", "bob_phase2"):
        if not callable(getattr(program, name, None)):
            raise ProtocolError(f"malformed program: {name} is not callable")
    ref = Referee(seed)
    for party in (ALICE, BOB):
        for k, v in inputs.get(party, {}).items():
            ref.set_input(party, k, v)
    try:
        program.alice_phase1(ref.alice, ref)
        program.bob_phase1(ref.bob, ref)
        ref.exchange()
        outputs = {ALICE: program.alice_phase2(ref.alice, ref),
                   BOB: program.bob_phase2(ref.bob, ref)}
    except AccessViolation as exc:
        return RefereeResult(ref.transcript, {}, aborted=True, violation=str(exc))
    return RefereeResult(ref.transcript, outputs)
