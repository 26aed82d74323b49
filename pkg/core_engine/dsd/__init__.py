"""Compilation of formal networks into strand-displacement circuits."""
from .schemas import Gate, Strand, DsdCircuit
from .compiler import DEFAULT_LAMBDA_FAST, compile_to_dsd
from .compare import ComparisonMetrics, compare_traces, comparison_frame
from .report import GateDepletion, gate_depletion, gate_report

__all__ = [
    'Gate',
    'Strand',
    'DsdCircuit',
    'DEFAULT_LAMBDA_FAST',
    'compile_to_dsd',
    'ComparisonMetrics',
    'compare_traces',
    'comparison_frame',
    'GateDepletion',
    'gate_depletion',
    'gate_report',
]
