"""
Rejection of constant input disturbances.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from core_engine.controller.motifs import ControllerParams
from core_engine.crn.schemas import LinearForm
from core_engine.errors import ParameterError
from .equilibria import positive_equilibrium_state
from .stability import alpha_bar

logger = logging.getLogger(__name__)


@dataclass
class DisturbanceModel:
    """
    Admissibility, stability threshold and equilibrium under a constant disturbance d.

    d is admissible when mu + C A^-1 E d > 0 (offsets from b included); the
    threshold then scales as alpha_bar_d = mu / (mu + C A^-1 E d) * alpha_bar.
    """
    E: np.ndarray
    d: np.ndarray
    admissible: bool
    effective_reference: float
    alpha_bar: float
    alpha_bar_d: Optional[float]
    equilibrium: Optional[np.ndarray]

    def to_dict(self) -> Dict:
        return {
            'E': self.E.tolist(),
            'd': self.d.tolist(),
            'admissible': self.admissible,
            'effective_reference': self.effective_reference,
            'alpha_bar': self.alpha_bar,
            'alpha_bar_d': self.alpha_bar_d,
            'equilibrium': None if self.equilibrium is None else self.equilibrium.tolist(),
        }


def disturbance_analysis(linear: LinearForm, params: ControllerParams, E, d) -> DisturbanceModel:
    """
    Evaluate a constant input disturbance d entering through E.

    Raises:
        ParameterError: Negative disturbance entries or mismatched shapes
    """
    E = np.asarray(E, dtype=float).reshape(linear.size, -1)
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.shape[0] != E.shape[1]:
        raise ParameterError(f"Disturbance has {d.shape[0]} values for {E.shape[1]} channels")
    if np.any(d < 0):
        raise ParameterError(f"Disturbance amplitudes must be >= 0, got {d.tolist()}")
    if np.any(E < 0):
        raise ParameterError("Disturbance input matrix E must be nonnegative")

    nominal = alpha_bar(linear, params.mu).alpha_bar
    mu_b = linear.effective_reference(params.mu)
    w = linear.b + E @ d
    x_star, v_star, mu_w = positive_equilibrium_state(linear, params.mu, params.k, w)
    admissible = mu_w > 0
    if admissible:
        scaled = nominal * mu_b / mu_w if np.isfinite(nominal) else float('inf')
        equilibrium = np.append(x_star, v_star)
    else:
        logger.info(f"[ANALYSIS] Disturbance {d.tolist()} is not admissible (mu + C A^-1 E d = {mu_w:.6g})")
        scaled = None
        equilibrium = None
    return DisturbanceModel(
        E=E,
        d=d,
        admissible=admissible,
        effective_reference=mu_w,
        alpha_bar=nominal,
        alpha_bar_d=scaled,
        equilibrium=equilibrium,
    )
