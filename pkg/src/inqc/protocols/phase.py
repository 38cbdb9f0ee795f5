"""Removal of a phase gate whose presence is a garden-hose function of both inputs."""

from __future__ import annotations

from dataclasses import dataclass

from ..gardenhose import (GardenHoseProtocol, PhaseNetwork, QuantumWalk, Tracker, ZTracker,
                          build_x_tracker, build_z_tracker, gh_evaluate, walk_qubit)
from ..referee import Ledger, Referee
from ..statevec import StateVector


@dataclass
class PhaseRemoval:
    state: StateVector
    network: PhaseNetwork
    x_tracker: Tracker
    z_tracker: ZTracker
    walk: QuantumWalk
    charged: int

    @property
    def g(self) -> int:
        """X correction observed on the qubit (simulator side)."""
        return self.walk.g

    @property
    def h(self) -> int:
        return self.walk.h

    def tracked(self, view) -> tuple[int, int]:
        """``(g, h)`` as computed by the trackers from one party's post-exchange view."""
        gx = gh_evaluate(self.x_tracker, view, view).bit
        hz = gh_evaluate(self.z_tracker, view, view).bit
        return gx, hz


def phase_removal(f: GardenHoseProtocol, ref: Referee, tag: str, state: StateVector, wire: int,
                  ledger: Ledger | None = None, dagger: bool = False) -> PhaseRemoval:
    """Undo ``P^{f}`` (``Pdag^{f}`` when ``dagger``) on ``wire`` without communication.

    ``f`` takes party views as inputs. The qubit is teleported through the
    forward copy of ``f``; Bob applies the inverse phase at open ends of that
    copy and the qubit then retraces its path through the mirror copy back to
    a location fixed in advance. What remains is ``X^g Z^h`` with ``g`` and
    ``h`` computed by the returned trackers.
    """
    network = PhaseNetwork(f)
    if ledger is not None:
        ledger.charge(f"phase:{tag}", network.size)
    aw, bw = network.alice(ref.alice), network.bob(ref.bob)
    walk = walk_qubit(aw, bw, ref, tag, state, wire, network.bob_gate(dagger))
    if walk.exit.side != "alice" or walk.exit.pipe != aw.final:
        raise RuntimeError(f"qubit ended at {walk.exit}, expected Alice pipe {aw.final}")
    return PhaseRemoval(walk.state, network, build_x_tracker(network, tag),
                        build_z_tracker(network, tag), walk, network.size)
