"""Mass-action reaction networks: representation, evaluation and structure."""
from .schemas import LinearForm, Network, RateLaw, Reaction, Species, StructureReport
from .network import (
    build_network,
    evaluate_rhs,
    finite_difference_jacobian,
    jacobian,
    linearize,
    spectral_abscissa,
    structural_checks,
)

__all__ = [
    'Species',
    'RateLaw',
    'Reaction',
    'Network',
    'LinearForm',
    'StructureReport',
    'build_network',
    'evaluate_rhs',
    'jacobian',
    'finite_difference_jacobian',
    'linearize',
    'spectral_abscissa',
    'structural_checks',
]
