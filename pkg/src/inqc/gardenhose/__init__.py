"""Garden-hose engine: protocols, combinators and quantum execution."""

from .combinators import (MULTI_OUTPUT_CAP, MultiOutput, SingleOutput, Xor, gh_multi_output,
                          gh_single_output, gh_xor, multi_output_bound)
from .core import (ALICE, BOB, ConstantProtocol, Exit, ExplicitProtocol, GardenHoseError,
                   GardenHoseProtocol, InputMapped, LocalXorProtocol, TableWiring, TruthTable,
                   TruthTableProtocol, Wiring, dumps, full_pairs, gh_evaluate, gh_from_truth_table,
                   loads, protocol_from_dict, protocol_to_dict, spilling_pipes, truth_of, validate,
                   walk)
from .quantum import (PhaseNetwork, QuantumExecution, QuantumWalk, Tracker, ZTracker,
                      build_x_tracker, build_z_tracker, gh_quantum_execute, hose_name, tap_name,
                      walk_qubit)


def view_mapped(p: GardenHoseProtocol, name: str = "in") -> InputMapped:
    """Let ``p`` read its integer inputs from party views under ``A:name``/``B:name``."""
    return InputMapped(p, lambda v: v["A:" + name], lambda v: v["B:" + name])
