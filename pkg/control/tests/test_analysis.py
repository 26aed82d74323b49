"""
Equilibria, stability threshold, tuning, disturbance rejection and power.
"""
import numpy as np
from django.test import SimpleTestCase

from core_engine.analysis.disturbance import disturbance_analysis
from core_engine.analysis.equilibria import (
    chi,
    dimerization_equilibrium,
    equilibria,
    positive_equilibrium_spectrum,
    solve_equilibrium_nonlinear,
    zero_equilibrium_spectrum,
)
from core_engine.analysis.power import MetabolicCosts, power_at_equilibrium, stationary_power
from core_engine.analysis.stability import (
    alpha_bar,
    alpha_bar_bisection,
    best_alpha,
    crossing_polynomial,
    stability_report,
    transfer_polynomials,
)
from core_engine.controller.motifs import (
    ControllerParams,
    HillParams,
    attach_hill_controller,
    attach_integral_controller,
)
from core_engine.crn.examples import birth_death, dimerization, gene_expression
from core_engine.crn.network import build_network, linearize
from core_engine.crn.schemas import LinearForm, Reaction
from core_engine.errors import EquilibriumError, ParameterError, StructureError


def gene_linear():
    network = gene_expression()
    return linearize(network, network.initial_state())


class EquilibriumTests(SimpleTestCase):
    """Closed-form equilibria of the ideal loop around a linear plant."""

    def setUp(self):
        self.params = ControllerParams(mu=2.0, alpha=0.081, k=10.0)
        self.loop = attach_integral_controller(gene_expression(), self.params)
        self.linear = self.loop.linear_form()

    def test_positive_equilibrium(self):
        pair = equilibria(self.linear, self.params)
        self.assertTrue(pair.positive_exists)
        self.assertAlmostEqual(pair.positive[2], 2.0, places=10)
        self.assertAlmostEqual(pair.v_star, 2.0 / (self.linear.static_gain * 10.0), places=10)
        np.testing.assert_allclose(self.loop.rhs(0.0, pair.positive), 0.0, atol=1e-10)

    def test_zero_equilibrium(self):
        pair = equilibria(self.linear, self.params)
        np.testing.assert_allclose(pair.zero, 0.0, atol=1e-12)
        spectrum = zero_equilibrium_spectrum(self.linear, self.params)
        self.assertIn(complex(0.081 * 2.0), spectrum)

    def assert_same_spectra(self, spectra):
        reference = spectra[0]
        for spectrum in spectra[1:]:
            self.assertEqual(len(spectrum), len(reference))
            for z in spectrum:
                self.assertLess(min(abs(z - w) for w in reference), 1e-8)

    def test_positive_spectrum_independent_of_k(self):
        spectra = [positive_equilibrium_spectrum(self.linear, ControllerParams(mu=2.0, alpha=0.081, k=k))
                   for k in (0.1, 1.0, 10.0, 100.0)]
        self.assert_same_spectra(spectra)

    def test_dimer_spectrum_independent_of_k(self):
        spectra = []
        for k in (0.1, 1.0, 10.0, 100.0):
            loop = attach_integral_controller(dimerization(), ControllerParams(mu=2.0, alpha=0.2, k=k))
            state = dimerization_equilibrium(1.0, 1.0, 2.0, 2.0, mu=2.0, k=k)
            spectra.append([complex(z) for z in np.linalg.eigvals(loop.jacobian(0.0, state))])
        self.assert_same_spectra(spectra)

    def test_non_hurwitz_plant(self):
        plant = build_network(['x'], [Reaction({'x': 1}, {'x': 2}, 1.0, label='growth')])
        with self.assertRaises(StructureError):
            equilibria(linearize(plant, [1.0]), self.params)


class StabilityThresholdTests(SimpleTestCase):
    """Threshold alpha_bar from the crossing polynomial."""

    def setUp(self):
        self.linear = gene_linear()

    def test_normalized_transfer_function(self):
        N, D = transfer_polynomials(self.linear)
        self.assertAlmostEqual(N(0.0) / D(0.0), 1.0, places=10)
        self.assertEqual(D.degree(), 3)

    def test_gene_expression_threshold(self):
        threshold = alpha_bar(self.linear, 2.0)
        self.assertAlmostEqual(threshold.alpha_bar, 0.8437, delta=1e-3)
        self.assertAlmostEqual(threshold.omega_star, 0.97729, delta=1e-3)
        self.assertFalse(threshold.weakly_spr)

    def test_threshold_scales_inversely_with_mu(self):
        at_2 = alpha_bar(self.linear, 2.0).alpha_bar
        at_4 = alpha_bar(self.linear, 4.0).alpha_bar
        at_1 = alpha_bar(self.linear, 1.0).alpha_bar
        self.assertAlmostEqual(at_4, 0.4218, delta=1e-3)
        self.assertAlmostEqual(at_1, 1.687, delta=2e-3)
        self.assertAlmostEqual(at_4 * 4.0, at_2 * 2.0, places=8)

    def test_bisection_agrees(self):
        closed_form = alpha_bar(self.linear, 2.0).alpha_bar
        numeric = alpha_bar_bisection(self.linear, 2.0)
        self.assertLess(abs(numeric - closed_form) / closed_form, 1e-6)

    def test_spectral_abscissa_changes_sign(self):
        threshold = alpha_bar(self.linear, 2.0).alpha_bar
        self.assertLess(chi(self.linear, 2.0, 0.99 * threshold), 0.0)
        self.assertGreater(chi(self.linear, 2.0, 1.01 * threshold), 0.0)

    def test_crossing_at_threshold(self):
        threshold = alpha_bar(self.linear, 2.0)
        omega = threshold.omega_star
        Q = crossing_polynomial(self.linear).Q
        scale = float(np.sum(np.abs(Q.coef) * omega ** np.arange(len(Q.coef))))
        self.assertLess(abs(Q(omega)), 1e-8 * (1.0 + scale))
        spectrum = positive_equilibrium_spectrum(
            self.linear, ControllerParams(mu=2.0, alpha=threshold.alpha_bar, k=10.0))
        for target in (1j * omega, -1j * omega):
            self.assertLess(min(abs(z - target) for z in spectrum), 1e-6)

    def test_crossings_that_need_negative_alpha(self):
        # H(s) = (s + 0.05)^2 / (s + 1)^3 only reaches the imaginary axis at +90 degrees
        linear = LinearForm(
            A=[[-1.0, -0.475, 0.0], [0.0, -1.0, -1.9], [0.0, 0.0, -1.0]],
            b=[0.0, 0.0, 0.0],
            B=[0.0, 0.0, 1.0],
            C=[1.0, 1.0, 1.0],
        )
        self.assertAlmostEqual(linear.static_gain, 0.0025, places=12)
        self.assertTrue(crossing_polynomial(linear).positive_roots())
        threshold = alpha_bar(linear, 1.0)
        self.assertEqual(threshold.alpha_bar, float('inf'))
        self.assertFalse(threshold.weakly_spr)
        self.assertTrue(threshold.nonpositive_crossings)
        self.assertIsNone(threshold.omega_star)
        self.assertLess(chi(linear, 1.0, 1.0), 0.0)
        self.assertLess(chi(linear, 1.0, 100.0), 0.0)
        report = stability_report(linear, ControllerParams(mu=1.0, alpha=1.0, k=1.0))
        self.assertTrue(report.to_dict()['nonpositive_crossings'])

    def test_birth_death_is_weakly_spr(self):
        network = birth_death(gamma=1.0)
        threshold = alpha_bar(linearize(network, network.initial_state()), 2.0)
        self.assertEqual(threshold.alpha_bar, float('inf'))
        self.assertTrue(threshold.weakly_spr)
        self.assertIsNone(threshold.omega_star)

    def test_best_alpha_is_inside_the_stable_range(self):
        threshold = alpha_bar(self.linear, 2.0).alpha_bar
        tuned = best_alpha(self.linear, 2.0)
        self.assertGreater(tuned, 0.0)
        self.assertLess(tuned, threshold)
        self.assertLessEqual(chi(self.linear, 2.0, tuned), chi(self.linear, 2.0, 0.9 * threshold))
        self.assertLessEqual(chi(self.linear, 2.0, tuned), chi(self.linear, 2.0, 0.01 * threshold))

    def test_report(self):
        report = stability_report(self.linear, ControllerParams(mu=2.0, alpha=0.081, k=10.0))
        self.assertTrue(report.stable)
        self.assertLess(report.spectral_abscissa, 0.0)
        data = report.to_dict()
        self.assertTrue(data['zero_eq_unstable'])
        self.assertEqual(len(data['positive_eq_spectrum']), 4)

    def test_report_beyond_threshold(self):
        report = stability_report(self.linear, ControllerParams(mu=4.0, alpha=0.45, k=10.0))
        self.assertFalse(report.stable)


def random_plant(rng):
    """Hurwitz-Metzler plant with a positive static gain, of size 2 to 6."""
    d = int(rng.integers(2, 7))
    A = rng.uniform(0.0, 1.0, (d, d)) * (rng.random((d, d)) < 0.5)
    A[np.arange(1, d), np.arange(d - 1)] = rng.uniform(0.5, 1.5, d - 1)
    np.fill_diagonal(A, 0.0)
    np.fill_diagonal(A, -(A.sum(axis=0) + rng.uniform(0.1, 2.0, d)))
    B = np.eye(d)[0] if rng.random() < 0.5 else rng.uniform(0.0, 1.0, d)
    C = np.eye(d)[-1] if rng.random() < 0.5 else rng.uniform(0.0, 1.0, d)
    return LinearForm(A=A, b=np.zeros(d), B=B, C=C)


class AlphaBarOracleTests(SimpleTestCase):
    """Closed-form threshold against eigenvalue bisection on random plants."""

    def test_random_plants(self):
        rng = np.random.default_rng(11)
        for trial in range(50):
            linear = random_plant(rng)
            mu = float(rng.uniform(0.5, 5.0))
            closed_form = alpha_bar(linear, mu).alpha_bar
            numeric = alpha_bar_bisection(linear, mu)
            if np.isinf(closed_form):
                self.assertTrue(np.isinf(numeric), trial)
            else:
                self.assertLess(abs(numeric - closed_form) / closed_form, 1e-6, trial)


class NonlinearEquilibriumTests(SimpleTestCase):
    """Newton solves for dimerization and Hill loops."""

    def test_dimerization_closed_form(self):
        state = dimerization_equilibrium(1.0, 1.0, 2.0, 2.0, mu=2.0, k=10.0)
        np.testing.assert_allclose(state, [np.sqrt(8.0), 2.0, (np.sqrt(8.0) + 8.0) / 10.0], rtol=1e-12)

    def test_dimerization_newton(self):
        params = ControllerParams(mu=2.0, alpha=0.2, k=10.0)
        loop = attach_integral_controller(dimerization(), params)
        result = solve_equilibrium_nonlinear(loop, [2.5, 2.2, 1.2])
        expected = dimerization_equilibrium(1.0, 1.0, 2.0, 2.0, mu=2.0, k=10.0)
        np.testing.assert_allclose(result.state, expected, rtol=1e-8)
        self.assertTrue(result.stable)

    def test_hill_newton(self):
        params = ControllerParams(mu=2.0, alpha=1.0, k=10.0)
        hill = HillParams(100.0)
        loop = attach_hill_controller(birth_death(gamma=1.0), params, hill)
        result = solve_equilibrium_nonlinear(loop, [1.9, 0.2])
        np.testing.assert_allclose(result.state, hill.birth_death_equilibrium(params, 1.0), rtol=1e-8)

    def test_guess_must_be_positive(self):
        loop = attach_integral_controller(dimerization(), ControllerParams(mu=2.0, alpha=0.2, k=10.0))
        with self.assertRaises(ParameterError):
            solve_equilibrium_nonlinear(loop, [1.0, 0.0, 1.0])

    def test_iteration_budget(self):
        loop = attach_integral_controller(dimerization(), ControllerParams(mu=2.0, alpha=0.2, k=10.0))
        with self.assertRaises(EquilibriumError):
            solve_equilibrium_nonlinear(loop, [100.0, 100.0, 100.0], max_iterations=1)


class DisturbanceAnalysisTests(SimpleTestCase):
    """Admissibility and threshold under a basal transcription disturbance."""

    def setUp(self):
        self.linear = gene_linear()
        self.params = ControllerParams(mu=2.0, alpha=0.081, k=1.0)
        self.E = np.array([[1.0], [0.0], [0.0]])

    def test_admissible_disturbance(self):
        model = disturbance_analysis(self.linear, self.params, self.E, [4.0])
        mu_w = 2.0 - self.linear.static_gain * 4.0
        self.assertTrue(model.admissible)
        self.assertAlmostEqual(model.effective_reference, mu_w, places=10)
        self.assertAlmostEqual(model.alpha_bar_d, model.alpha_bar * 2.0 / mu_w, places=8)
        self.assertAlmostEqual(model.equilibrium[2], 2.0, places=10)
        self.assertAlmostEqual(model.equilibrium[3], mu_w / self.linear.static_gain, places=10)

    def test_inadmissible_disturbance(self):
        model = disturbance_analysis(self.linear, self.params, self.E, [5.0])
        self.assertFalse(model.admissible)
        self.assertIsNone(model.alpha_bar_d)
        self.assertIsNone(model.equilibrium)

    def test_admissible_disturbances_raise_the_threshold(self):
        rng = np.random.default_rng(3)
        admissible = 0
        for _ in range(40):
            E = rng.uniform(0.0, 1.0, (3, 2))
            d = rng.uniform(0.0, 2.0, 2)
            model = disturbance_analysis(self.linear, self.params, E, d)
            if not model.admissible:
                continue
            admissible += 1
            self.assertGreaterEqual(model.alpha_bar_d, model.alpha_bar)
            self.assertAlmostEqual(model.equilibrium[2], 2.0, places=10)
        self.assertGreater(admissible, 0)

    def test_negative_disturbance_rejected(self):
        with self.assertRaises(ParameterError):
            disturbance_analysis(self.linear, self.params, self.E, [-1.0])

    def test_shape_mismatch(self):
        with self.assertRaises(ParameterError):
            disturbance_analysis(self.linear, self.params, self.E, [1.0, 2.0])


class PowerTests(SimpleTestCase):
    """Stationary metabolic power of the controller reactions."""

    def test_stationary_power_formula(self):
        linear = gene_linear()
        params = ControllerParams(mu=2.0, alpha=0.081, k=10.0)
        costs = MetabolicCosts(kappa_r=1.0, kappa_m=2.0, kappa_a=0.5)
        power = stationary_power(linear, params, costs)
        g = linear.static_gain
        adaptation = params.alpha * params.mu ** 2 * (1.0 + 2.0) / (params.k * g)
        constitutive = params.mu * 0.5 / g
        self.assertAlmostEqual(power.adaptation_cost, adaptation, places=10)
        self.assertAlmostEqual(power.constitutive_limit, constitutive, places=10)
        self.assertAlmostEqual(power.total, adaptation + constitutive, places=10)

    def test_power_at_equilibrium(self):
        params = ControllerParams(mu=2.0, alpha=1.0, k=1.0)
        power = power_at_equilibrium(params, 2.0, MetabolicCosts())
        self.assertAlmostEqual(power.total, 10.0)

    def test_negative_cost_rejected(self):
        with self.assertRaises(ParameterError):
            MetabolicCosts(kappa_r=-1.0)
