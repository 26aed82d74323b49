"""
Equilibria of the closed loop and local spectra around them.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from core_engine.controller.motifs import ClosedLoop, ControllerParams
from core_engine.crn.network import require_analyzable, spectral_abscissa
from core_engine.crn.schemas import LinearForm
from core_engine.errors import EquilibriumError, ParameterError

logger = logging.getLogger(__name__)


@dataclass
class EquilibriumPair:
    """
    Zero and positive equilibria as full closed-loop states (plant species then v).

    The positive equilibrium exists when the effective reference
    mu + C A^-1 b is positive; with b = 0 that is always the case.
    """
    zero: np.ndarray
    positive: Optional[np.ndarray]
    zero_exists: bool
    positive_exists: bool
    effective_reference: float

    @property
    def v_star(self) -> Optional[float]:
        return None if self.positive is None else float(self.positive[-1])

    def to_dict(self) -> Dict:
        return {
            'zero': self.zero.tolist(),
            'positive': None if self.positive is None else self.positive.tolist(),
            'zero_exists': self.zero_exists,
            'positive_exists': self.positive_exists,
            'effective_reference': self.effective_reference,
        }


def positive_equilibrium_state(linear: LinearForm, mu: float, k: float,
                               w: Optional[np.ndarray] = None):
    """
    Positive equilibrium under a constant input w (defaults to b).

    Returns:
        (x*, v*, mu_w) with mu_w = mu + C A^-1 w; x* = -A^-1 (w + B k v*),
        v* = mu_w / (g k)
    """
    w = linear.b if w is None else np.asarray(w, dtype=float)
    gain = linear.static_gain
    mu_w = mu + linear.output_offset(w)
    v_star = mu_w / (gain * k)
    x_star = -linear.solve(w + linear.B * k * v_star)
    return x_star, float(v_star), float(mu_w)


def equilibria(linear: LinearForm, params: ControllerParams) -> EquilibriumPair:
    """
    Closed-form zero and positive equilibria of the closed loop.

    Raises:
        StructureError: A not Hurwitz or g = 0
    """
    require_analyzable(linear)
    zero_plant = -linear.solve(linear.b)
    zero = np.append(zero_plant, 0.0)
    x_star, v_star, mu_w = positive_equilibrium_state(linear, params.mu, params.k)
    exists = mu_w > 0
    if not exists:
        logger.info(f"[ANALYSIS] No positive equilibrium: effective reference {mu_w:.6g} <= 0")
    return EquilibriumPair(
        zero=zero,
        positive=np.append(x_star, v_star) if exists else None,
        zero_exists=True,
        positive_exists=exists,
        effective_reference=mu_w,
    )


def zero_equilibrium_spectrum(linear: LinearForm, params: ControllerParams) -> List[complex]:
    """
    Spectrum of M0 = [[A, B k], [0, alpha mu]]: lambda(A) together with alpha mu.

    The eigenvalue alpha mu > 0 makes the zero equilibrium unstable.
    """
    alpha_mu = params.alpha * params.mu
    return [complex(v) for v in np.linalg.eigvals(linear.A)] + [complex(alpha_mu)]


def positive_jacobian(linear: LinearForm, mu: float, alpha: float, k: float = 1.0) -> np.ndarray:
    """M_p = [[A, B k], [-alpha v* C, 0]] with v* = mu_b / (g k)."""
    d = linear.size
    gain = linear.static_gain
    mu_b = linear.effective_reference(mu)
    v_star = mu_b / (gain * k)
    matrix = np.zeros((d + 1, d + 1))
    matrix[:d, :d] = linear.A
    matrix[:d, d] = linear.B * k
    matrix[d, :d] = -alpha * v_star * linear.C
    return matrix


def positive_equilibrium_spectrum(linear: LinearForm, params: ControllerParams) -> List[complex]:
    """Eigenvalues of the Jacobian at the positive equilibrium (independent of k)."""
    require_analyzable(linear)
    matrix = positive_jacobian(linear, params.mu, params.alpha, params.k)
    return [complex(v) for v in np.linalg.eigvals(matrix)]


def chi(linear: LinearForm, mu: float, alpha: float) -> float:
    """Spectral abscissa of the positive-equilibrium Jacobian."""
    return spectral_abscissa(positive_jacobian(linear, mu, alpha))


@dataclass
class NewtonResult:
    """Root of the full closed-loop right-hand side."""
    state: np.ndarray
    spectrum: List[complex]
    stable: bool
    iterations: int
    residual: float

    def to_dict(self) -> Dict:
        return {
            'state': self.state.tolist(),
            'spectrum': self.spectrum,
            'stable': self.stable,
            'iterations': self.iterations,
            'residual': self.residual,
        }


def solve_equilibrium_nonlinear(
    closed_loop: ClosedLoop,
    guess,
    max_iterations: int = 100,
    max_halvings: int = 40,
    tolerance: float = 1e-12,
) -> NewtonResult:
    """
    Damped Newton iteration on the closed-loop right-hand side.

    Args:
        closed_loop: Closed loop (ideal or Hill)
        guess: Strictly positive starting state
        max_iterations: Newton steps before giving up
        max_halvings: Step halvings per iteration
        tolerance: Converged when ||rhs||_inf < tolerance * (1 + ||x||_inf)

    Returns:
        NewtonResult with the Jacobian spectrum and stability flag

    Raises:
        ParameterError: Guess not strictly positive
        EquilibriumError: No convergence, or convergence to a non-positive point
    """
    x = np.asarray(guess, dtype=float).reshape(-1).copy()
    if x.shape[0] != closed_loop.network.size:
        raise ParameterError(f"Guess has {x.shape[0]} entries, closed loop has {closed_loop.network.size}")
    if np.any(x <= 0):
        raise ParameterError("Newton guess must be strictly positive")

    def residual_norm(values):
        return float(np.max(np.abs(values)))

    F = closed_loop.rhs(0.0, x)
    iterations = 0
    while residual_norm(F) >= tolerance * (1.0 + residual_norm(x)):
        if iterations >= max_iterations:
            raise EquilibriumError(
                f"Newton did not converge in {max_iterations} iterations (residual {residual_norm(F):.3g})"
            )
        J = closed_loop.jacobian(0.0, x)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
        scale = 1.0
        for _ in range(max_halvings + 1):
            candidate = x + scale * step
            F_candidate = closed_loop.rhs(0.0, candidate)
            if np.all(np.isfinite(F_candidate)) and residual_norm(F_candidate) < residual_norm(F):
                break
            scale /= 2.0
        else:
            raise EquilibriumError(f"Newton line search failed at iteration {iterations}")
        x, F = candidate, F_candidate
        iterations += 1

    if np.any(x < -tolerance * (1.0 + residual_norm(x))) or x[closed_loop.controller_index] <= 0:
        raise EquilibriumError(f"Newton converged to a non-positive point {x.tolist()}")
    x = np.maximum(x, 0.0)
    spectrum = [complex(v) for v in np.linalg.eigvals(closed_loop.jacobian(0.0, x))]
    stable = max(v.real for v in spectrum) < 0
    logger.debug(f"[ANALYSIS] Newton converged in {iterations} iterations: {x}")
    return NewtonResult(state=x, spectrum=spectrum, stable=stable, iterations=iterations,
                        residual=residual_norm(F))


def dimerization_equilibrium(gamma_1: float, k_12: float, gamma_2: float, k_21: float,
                             mu: float, k: float):
    """
    Closed-form positive equilibrium of the dimerization loop.

    x1* = sqrt(mu (gamma_2 + k_21) / k_12), x2* = mu and k v* = gamma_1 x1* + 2 gamma_2 mu
    (two monomers are lost per degraded dimer).
    """
    x1 = np.sqrt(mu * (gamma_2 + k_21) / k_12)
    u_star = gamma_1 * x1 + 2.0 * gamma_2 * mu
    return np.array([x1, mu, u_star / k])
