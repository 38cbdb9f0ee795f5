"""Instance generators, report emission and the command-line interface."""

from .generators import InfeasibleTarget, generate_random_circuit
from .report import build_report, emit_report, to_csv
