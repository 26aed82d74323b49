"""
Metabolic power drawn by the controller reactions.
"""
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from core_engine.controller.motifs import ControllerParams
from core_engine.crn.schemas import LinearForm
from core_engine.errors import ParameterError
from .equilibria import positive_equilibrium_state


@dataclass(frozen=True)
class MetabolicCosts:
    """Energy per event of the reference, measurement and actuation reactions."""
    kappa_r: float = 1.0
    kappa_m: float = 1.0
    kappa_a: float = 1.0

    def __post_init__(self):
        for name in ('kappa_r', 'kappa_m', 'kappa_a'):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0:
                raise ParameterError(f"Metabolic cost {name} must be >= 0, got {getattr(self, name)}")
            object.__setattr__(self, name, value)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class PowerBreakdown:
    """Stationary power split into the cost of adaptation and the constitutive limit."""
    adaptation_cost: float
    constitutive_limit: float
    total: float

    def to_dict(self) -> Dict:
        return asdict(self)


def instantaneous_power(params: ControllerParams, v, y, costs: MetabolicCosts):
    """P = kappa_r alpha mu v + kappa_m alpha v y + kappa_a k v."""
    return (costs.kappa_r * params.alpha * params.mu * v
            + costs.kappa_m * params.alpha * v * y
            + costs.kappa_a * params.k * v)


def power_at_equilibrium(params: ControllerParams, v_star: float, costs: MetabolicCosts) -> PowerBreakdown:
    """Stationary power for any positive equilibrium with y = mu and controller level v*."""
    adaptation = v_star * params.alpha * params.mu * (costs.kappa_r + costs.kappa_m)
    constitutive = v_star * params.k * costs.kappa_a
    return PowerBreakdown(adaptation_cost=float(adaptation), constitutive_limit=float(constitutive),
                          total=float(adaptation + constitutive))


def stationary_power(linear: LinearForm, params: ControllerParams, costs: MetabolicCosts) -> PowerBreakdown:
    """
    P* = alpha mu^2 (kappa_r + kappa_m) / (k g) + mu kappa_a / g (for b = 0).

    Valid when the positive equilibrium is asymptotically stable; otherwise use the
    time average of a simulated power trace.
    """
    _, v_star, mu_b = positive_equilibrium_state(linear, params.mu, params.k)
    if mu_b <= 0:
        raise ParameterError(f"No positive equilibrium: mu + C A^-1 b = {mu_b:.6g} <= 0")
    return power_at_equilibrium(params, v_star, costs)
