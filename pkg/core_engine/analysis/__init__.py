"""Equilibria, stability threshold, tuning, disturbance rejection and power."""
from .equilibria import (
    EquilibriumPair,
    NewtonResult,
    chi,
    dimerization_equilibrium,
    equilibria,
    positive_equilibrium_spectrum,
    positive_jacobian,
    solve_equilibrium_nonlinear,
    zero_equilibrium_spectrum,
)
from .stability import (
    AlphaBar,
    StabilityReport,
    alpha_bar,
    alpha_bar_bisection,
    best_alpha,
    crossing_polynomial,
    frequency_response_margin,
    stability_report,
    transfer_polynomials,
)
from .disturbance import DisturbanceModel, disturbance_analysis
from .power import (
    MetabolicCosts,
    PowerBreakdown,
    instantaneous_power,
    power_at_equilibrium,
    stationary_power,
)

__all__ = [
    'EquilibriumPair',
    'NewtonResult',
    'equilibria',
    'zero_equilibrium_spectrum',
    'positive_equilibrium_spectrum',
    'positive_jacobian',
    'chi',
    'solve_equilibrium_nonlinear',
    'dimerization_equilibrium',
    'AlphaBar',
    'StabilityReport',
    'alpha_bar',
    'alpha_bar_bisection',
    'best_alpha',
    'crossing_polynomial',
    'frequency_response_margin',
    'stability_report',
    'transfer_polynomials',
    'DisturbanceModel',
    'disturbance_analysis',
    'MetabolicCosts',
    'PowerBreakdown',
    'instantaneous_power',
    'power_at_equilibrium',
    'stationary_power',
]
