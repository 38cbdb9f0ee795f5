"""Reproducible random instances."""

from __future__ import annotations

import numpy as np

from ..clifford_t import Circuit, Gate

CLIFFORD_POOL = ("H", "P", "PDAG", "X", "Z", "CNOT")
MAX_WIDTH = 14
MAX_T = 64


class InfeasibleTarget(ValueError):
    pass


def _clifford_segment(rng: np.random.Generator, n: int, max_len: int) -> list[Gate]:
    out = []
    for _ in range(int(rng.integers(0, max_len + 1))):
        kind = CLIFFORD_POOL[int(rng.integers(len(CLIFFORD_POOL)))]
        if kind == "CNOT":
            if n < 2:
                kind = "H"
            else:
                c, t = rng.choice(n, size=2, replace=False)
                out.append(Gate("CNOT", (int(c), int(t))))
                continue
        out.append(Gate(kind, (int(rng.integers(n)),)))
    return out


def _t_gate(rng: np.random.Generator, w: int) -> Gate:
    return Gate("T" if rng.random() < 0.75 else "TDAG", (w,))


def generate_random_circuit(n: int, k: int | None = None, d: int | None = None, seed: int = 0,
                            max_segment: int = 4) -> Circuit:
    """Random Clifford+T circuit with exactly ``k`` T gates or T-depth exactly ``d``."""
    if (k is None) == (d is None):
        raise InfeasibleTarget("give exactly one of k (T-count) or d (T-depth)")
    if not 1 <= n <= MAX_WIDTH:
        raise InfeasibleTarget(f"width {n} outside [1, {MAX_WIDTH}]")
    target = k if k is not None else d
    if not 0 <= target <= MAX_T:
        raise InfeasibleTarget(f"target {target} outside [0, {MAX_T}]")
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []
    if k is not None:
        for _ in range(k):
            gates += _clifford_segment(rng, n, max_segment)
            gates.append(_t_gate(rng, int(rng.integers(n))))
        gates += _clifford_segment(rng, n, max_segment)
        return Circuit(n, tuple(gates))
    prev: list[int] = []
    for _ in range(d):
        gates += _clifford_segment(rng, n, max_segment)
        wires = [int(w) for w in rng.permutation(n)[: int(rng.integers(1, n + 1))]]
        if prev and not set(wires) & set(prev):
            wires[0] = prev[int(rng.integers(len(prev)))]
        if prev:
            # lead with a wire of the previous layer so greedy layering opens a new one
            lead = next(w for w in wires if w in prev)
            wires.remove(lead)
            wires.insert(0, lead)
        gates += [_t_gate(rng, w) for w in wires]
        prev = wires
    gates += _clifford_segment(rng, n, max_segment)
    c = Circuit(n, tuple(gates))
    assert c.t_depth == d
    return c
