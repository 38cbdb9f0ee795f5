"""INQC protocols executed under the referee."""

from .hierarchy import (BUILTIN, ConjugationTableError, HierarchyUnitary, build_hierarchy_unitary,
                        hierarchy_bound, hierarchy_charge, pairs_used, run_clifford_hierarchy)
from .phase import PhaseRemoval, phase_removal
from .tcount import run_tcount_protocol, tcount_bound, tcount_charge
from .tdepth import closed_form_bound, recurrence_bound, run_tdepth_protocol, tdepth_bound
