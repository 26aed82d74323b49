"""
Stability threshold of the positive equilibrium and controller tuning.

The positive-equilibrium Jacobian is stable for small alpha and loses stability
when a pair of eigenvalues crosses the imaginary axis at +-j omega. With the
normalized transfer function H_n(s) = N(s)/D(s) = C (sI - A)^-1 B / g, crossings
satisfy j omega D(j omega) + alpha mu N(j omega) = 0, whose real and imaginary
parts give

    Q(omega) = N_I D_I + N_R D_R = 0
    alpha    = D_I omega / (mu N_R) = -D_R omega / (mu N_I).
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize_scalar

from core_engine.controller.motifs import ControllerParams
from core_engine.crn.network import require_analyzable
from core_engine.crn.schemas import LinearForm
from core_engine.errors import ParameterError
from .equilibria import chi, positive_jacobian, zero_equilibrium_spectrum

logger = logging.getLogger(__name__)

ROOT_IMAG_TOLERANCE = 1e-8
ROOT_MIN_OMEGA = 1e-9
BRANCH_AGREEMENT = 1e-6
DEFAULT_ALPHA_CAP = 1e3
GRID_POINTS = 200


def transfer_polynomials(linear: LinearForm) -> Tuple[Polynomial, Polynomial]:
    """
    Numerator and denominator of H_n(s) = C (sI - A)^-1 B / g.

    Uses the Faddeev-LeVerrier recursion: M_1 = I, M_k = A M_{k-1} + c_{n-k+1} I,
    c_{n-k} = -tr(A M_k) / k, so that adj(sI - A) = sum_k M_k s^(n-k) and
    det(sI - A) = sum_j c_j s^j. Coefficients are in ascending powers.
    """
    A = linear.A
    n = linear.size
    identity = np.eye(n)
    coefficients = np.zeros(n + 1)
    coefficients[n] = 1.0
    numerator = np.zeros(n)
    M = np.zeros((n, n))
    for k in range(1, n + 1):
        M = A @ M + coefficients[n - k + 1] * identity
        numerator[n - k] = linear.C @ M @ linear.B
        coefficients[n - k] = -np.trace(A @ M) / k
    gain = linear.static_gain
    return Polynomial(numerator / gain), Polynomial(coefficients)


def split_on_imaginary_axis(p: Polynomial) -> Tuple[Polynomial, Polynomial]:
    """Polynomials R, I in omega with p(j omega) = R(omega) + j I(omega)."""
    coef = p.coef
    real = np.zeros(len(coef))
    imag = np.zeros(len(coef))
    signs = (1.0, 1.0, -1.0, -1.0)
    for i, c in enumerate(coef):
        if i % 2 == 0:
            real[i] = signs[i % 4] * c
        else:
            imag[i] = signs[i % 4] * c
    return Polynomial(real), Polynomial(imag)


@dataclass
class CrossingPolynomial:
    """Parity-split parts of N and D and the crossing polynomial Q."""
    N_R: Polynomial
    N_I: Polynomial
    D_R: Polynomial
    D_I: Polynomial
    Q: Polynomial

    @property
    def q_in_omega_squared(self) -> Polynomial:
        """Q is even in omega; coefficients of Q as a polynomial in z = omega^2."""
        coef = self.Q.coef[0::2]
        scale = np.max(np.abs(coef)) if coef.size else 0.0
        if scale == 0.0:
            return Polynomial([0.0])
        return Polynomial(coef).trim(tol=1e-14 * scale)

    def positive_roots(self) -> List[float]:
        """Positive real roots omega of Q, ascending."""
        qz = self.q_in_omega_squared
        if qz.degree() < 1:
            return []
        roots = []
        for z in qz.roots():
            if abs(z.imag) < ROOT_IMAG_TOLERANCE * (1.0 + abs(z)) and z.real > 0:
                omega = float(np.sqrt(z.real))
                if omega > ROOT_MIN_OMEGA:
                    roots.append(omega)
        return sorted(roots)

    def alpha_at(self, omega: float, mu: float) -> float:
        """Crossing value of alpha at a root, using the better-conditioned branch."""
        n_r, n_i = self.N_R(omega), self.N_I(omega)
        d_r, d_i = self.D_R(omega), self.D_I(omega)
        from_real = d_i * omega / (mu * n_r) if n_r != 0 else None
        from_imag = -d_r * omega / (mu * n_i) if n_i != 0 else None
        if from_real is not None and from_imag is not None:
            if abs(from_real - from_imag) > BRANCH_AGREEMENT * max(abs(from_real), abs(from_imag)):
                logger.warning(
                    f"[ANALYSIS] alpha branches disagree at omega={omega:.6g}: {from_real:.10g} vs {from_imag:.10g}"
                )
            return from_real if abs(n_r) >= abs(n_i) else from_imag
        return from_real if from_real is not None else from_imag


def crossing_polynomial(linear: LinearForm) -> CrossingPolynomial:
    N, D = transfer_polynomials(linear)
    N_R, N_I = split_on_imaginary_axis(N)
    D_R, D_I = split_on_imaginary_axis(D)
    return CrossingPolynomial(N_R=N_R, N_I=N_I, D_R=D_R, D_I=D_I, Q=N_I * D_I + N_R * D_R)


class AlphaBar(NamedTuple):
    """
    Threshold result. ``alpha_bar`` is inf in two cases: ``weakly_spr`` (Q has no
    positive root) or ``nonpositive_crossings`` (every root of Q needs alpha <= 0).
    """
    alpha_bar: float
    omega_star: Optional[float]
    weakly_spr: bool
    nonpositive_crossings: bool = False


def alpha_bar(linear: LinearForm, mu: float) -> AlphaBar:
    """
    Supremum of alpha keeping the positive equilibrium locally stable.

    Returns:
        AlphaBar; alpha_bar is inf with weakly_spr True when Q has no positive
        real root, and inf with nonpositive_crossings True when no root gives alpha > 0

    Raises:
        StructureError: A not Hurwitz or g = 0
        ParameterError: No positive equilibrium for this reference
    """
    require_analyzable(linear)
    mu_b = linear.effective_reference(mu)
    if mu_b <= 0:
        raise ParameterError(f"No positive equilibrium: mu + C A^-1 b = {mu_b:.6g} <= 0")
    crossing = crossing_polynomial(linear)
    roots = crossing.positive_roots()
    if not roots:
        return AlphaBar(float('inf'), None, True)

    best: Optional[Tuple[float, float]] = None
    for omega in roots:
        alpha = crossing.alpha_at(omega, mu_b)
        if alpha is not None and alpha > 0 and (best is None or alpha < best[0]):
            best = (float(alpha), omega)
    if best is None:
        logger.info("[ANALYSIS] Q has positive roots but none corresponds to alpha > 0")
        return AlphaBar(float('inf'), None, False, nonpositive_crossings=True)
    return AlphaBar(best[0], best[1], False)


def frequency_response_margin(linear: LinearForm, points: int = 2000) -> float:
    """Minimum of Re[H_n(j omega)] over log-spaced omega (diagnostic only)."""
    N, D = transfer_polynomials(linear)
    scale = max(1.0, float(np.max(np.abs(np.linalg.eigvals(linear.A)))))
    omegas = np.logspace(-4, 4, points) * scale
    values = N(1j * omegas) / D(1j * omegas)
    return float(np.min(values.real))


def alpha_bar_bisection(linear: LinearForm, mu: float, alpha_max: float = 1e8,
                        growth: float = 1.02, rtol: float = 1e-12) -> float:
    """
    Threshold found directly from eigenvalues: scan alpha geometrically until the
    positive-equilibrium Jacobian becomes unstable, then bisect.
    """
    require_analyzable(linear)
    alpha = 1e-6 / max(mu, 1e-12)
    last_stable = alpha
    while alpha <= alpha_max:
        if chi(linear, mu, alpha) > 0:
            break
        last_stable = alpha
        alpha *= growth
    else:
        return float('inf')
    low, high = last_stable, alpha
    while high - low > rtol * high:
        middle = 0.5 * (low + high)
        if chi(linear, mu, middle) > 0:
            high = middle
        else:
            low = middle
    return 0.5 * (low + high)


def best_alpha(linear: LinearForm, mu: float, alpha_cap: float = DEFAULT_ALPHA_CAP,
               grid_points: int = GRID_POINTS, tolerance: float = 1e-8) -> float:
    """
    Alpha in (0, alpha_bar) minimizing the spectral abscissa of the positive equilibrium.

    A geometric grid on (alpha_bar 1e-4, alpha_bar 0.999) (or up to ``alpha_cap`` when
    alpha_bar is infinite) is refined around its minimum by a bounded scalar search.
    """
    threshold = alpha_bar(linear, mu).alpha_bar
    upper = threshold * 0.999 if np.isfinite(threshold) else alpha_cap
    lower = upper * 1e-4
    grid = np.geomspace(lower, upper, grid_points)
    values = np.array([chi(linear, mu, a) for a in grid])
    index = int(np.argmin(values))
    left = grid[max(index - 1, 0)]
    right = grid[min(index + 1, grid_points - 1)]
    if right <= left:
        return float(grid[index])
    result = minimize_scalar(lambda a: chi(linear, mu, a), bounds=(left, right), method='bounded',
                             options={'xatol': tolerance * right})
    if result.success and result.fun <= values[index]:
        return float(result.x)
    return float(grid[index])


@dataclass
class StabilityReport:
    """Threshold, tuning and spectra for one (mu, alpha, k) configuration."""
    alpha_bar: float
    omega_star: Optional[float]
    weakly_spr: bool
    nonpositive_crossings: bool
    zero_eq_spectrum: List[complex]
    positive_eq_spectrum: List[complex]
    best_alpha: float
    q_coefficients: List[float]
    spectral_abscissa: float
    stable: bool
    frequency_margin: float

    def to_dict(self) -> Dict:
        return {
            'alpha_bar': self.alpha_bar,
            'omega_star': self.omega_star,
            'weakly_spr': self.weakly_spr,
            'nonpositive_crossings': self.nonpositive_crossings,
            'best_alpha': self.best_alpha,
            'spectral_abscissa': self.spectral_abscissa,
            'stable': self.stable,
            'frequency_margin': self.frequency_margin,
            'q_coefficients': self.q_coefficients,
            'zero_eq_spectrum': self.zero_eq_spectrum,
            'zero_eq_unstable': True,
            'positive_eq_spectrum': self.positive_eq_spectrum,
        }


def stability_report(linear: LinearForm, params: ControllerParams,
                     alpha_cap: float = DEFAULT_ALPHA_CAP) -> StabilityReport:
    threshold = alpha_bar(linear, params.mu)
    crossing = crossing_polynomial(linear)
    matrix = positive_jacobian(linear, params.mu, params.alpha, params.k)
    spectrum = [complex(v) for v in np.linalg.eigvals(matrix)]
    abscissa = max(v.real for v in spectrum)
    logger.info(
        f"[ANALYSIS] alpha_bar={threshold.alpha_bar:.6g} omega*={threshold.omega_star} "
        f"chi={abscissa:.6g} at alpha={params.alpha:g}"
    )
    return StabilityReport(
        alpha_bar=threshold.alpha_bar,
        omega_star=threshold.omega_star,
        weakly_spr=threshold.weakly_spr,
        nonpositive_crossings=threshold.nonpositive_crossings,
        zero_eq_spectrum=zero_equilibrium_spectrum(linear, params),
        positive_eq_spectrum=spectrum,
        best_alpha=best_alpha(linear, params.mu, alpha_cap=alpha_cap),
        q_coefficients=crossing.q_in_omega_squared.coef.tolist(),
        spectral_abscissa=abscissa,
        stable=abscissa < 0,
        frequency_margin=frequency_response_margin(linear),
    )
