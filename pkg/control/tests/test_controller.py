"""
Controller motifs and closed-loop assembly.
"""
import numpy as np
from django.test import SimpleTestCase

from core_engine.controller.motifs import (
    ClosedLoop,
    ControllerParams,
    HillParams,
    attach_hill_controller,
    attach_integral_controller,
    disturbance_matrix,
)
from core_engine.crn.examples import birth_death, gene_expression
from core_engine.crn.network import build_network
from core_engine.crn.schemas import Reaction
from core_engine.errors import NetworkValidationError, ParameterError


class ControllerParamsTests(SimpleTestCase):

    def test_nonpositive_values_rejected(self):
        for name in ('mu', 'alpha', 'k', 'v0'):
            values = {'mu': 2.0, 'alpha': 0.1, 'k': 1.0, 'v0': 1.0}
            values[name] = 0.0
            with self.assertRaises(ParameterError):
                ControllerParams(**values)

    def test_hill_theta_must_be_positive(self):
        with self.assertRaises(ParameterError):
            HillParams(-1.0)


class IdealMotifTests(SimpleTestCase):
    """Closed loop x' = f(x) + e_a k v, v' = alpha v (mu - y)."""

    def setUp(self):
        self.params = ControllerParams(mu=2.0, alpha=0.5, k=3.0, v0=1.5)
        self.loop = attach_integral_controller(birth_death(gamma=1.0), self.params)

    def test_species_and_reactions(self):
        self.assertEqual(self.loop.species_names, ['x', 'v'])
        self.assertEqual(self.loop.network.reaction_labels, ['gamma', 'reference', 'measurement', 'actuation'])
        self.assertEqual(self.loop.controller_index, 1)
        self.assertEqual(self.loop.output_index, 0)
        np.testing.assert_allclose(self.loop.initial_state(), [0.0, 1.5])

    def test_rhs(self):
        rhs = self.loop.rhs(0.0, np.array([1.0, 2.0]))
        # x' = -x + k v, v' = alpha v (mu - x)
        np.testing.assert_allclose(rhs, [-1.0 + 3.0 * 2.0, 0.5 * 2.0 * (2.0 - 1.0)], rtol=1e-12)

    def test_zero_controller_is_invariant(self):
        rhs = self.loop.rhs(0.0, np.array([0.7, 0.0]))
        self.assertEqual(rhs[1], 0.0)

    def test_reference_rate_follows_mu(self):
        changed = self.loop.with_parameter('controller.mu', 4.0)
        self.assertEqual(changed.params.mu, 4.0)
        self.assertAlmostEqual(changed.network.reaction('reference').rate_constant, 0.5 * 4.0)
        self.assertEqual(self.loop.params.mu, 2.0)

    def test_plant_rate_change(self):
        changed = self.loop.with_parameter('rate.gamma', 3.0)
        self.assertEqual(changed.plant.reaction('gamma').rate_constant, 3.0)

    def test_controller_rates_not_addressable_as_plant_rates(self):
        with self.assertRaises(ParameterError):
            self.loop.with_parameter('rate.reference', 1.0)

    def test_unknown_target(self):
        with self.assertRaises(ParameterError):
            self.loop.with_parameter('plant.gamma', 1.0)

    def test_zero_initial_controller(self):
        loop = self.loop.with_initial_state([0.5, 0.0])
        np.testing.assert_allclose(loop.initial_state(), [0.5, 0.0])

    def test_species_name_clash(self):
        plant = build_network(['v'], [Reaction({'v': 1}, {}, 1.0, label='decay')])
        with self.assertRaises(NetworkValidationError):
            attach_integral_controller(plant, self.params)

    def test_label_clash(self):
        plant = build_network(['x'], [Reaction({'x': 1}, {}, 1.0, label='measurement')])
        with self.assertRaises(NetworkValidationError):
            attach_integral_controller(plant, self.params)


class HillMotifTests(SimpleTestCase):
    """Reference reaction repressed by v with saturation scale theta."""

    def setUp(self):
        self.params = ControllerParams(mu=2.0, alpha=1.0, k=10.0)
        self.hill = HillParams(100.0)
        self.loop = attach_hill_controller(birth_death(gamma=1.0), self.params, self.hill)

    def test_reference_rate_is_repressed(self):
        x, v = 1.0, 2.0
        rhs = self.loop.rhs(0.0, np.array([x, v]))
        expected = 1.0 * 2.0 * v * 100.0 / (100.0 + v) - 1.0 * v * x
        self.assertAlmostEqual(rhs[1], expected, places=12)

    def test_rho(self):
        self.assertAlmostEqual(self.hill.rho(self.params, 1.0), 500.0)

    def test_closed_form_equilibrium(self):
        x_star, v_star = self.hill.birth_death_equilibrium(self.params, 1.0)
        self.assertAlmostEqual(x_star, 1.99602, places=4)
        self.assertLess(x_star, self.params.mu)
        np.testing.assert_allclose(self.loop.rhs(0.0, np.array([x_star, v_star])), 0.0, atol=1e-9)

    def test_theta_change(self):
        changed = self.loop.with_parameter('hill.theta', 10.0)
        self.assertEqual(changed.hill.theta, 10.0)
        self.assertIsInstance(changed, ClosedLoop)


class DisturbanceInputTests(SimpleTestCase):
    """Constant inflows E d added to the plant equations."""

    def setUp(self):
        self.plant = gene_expression()
        self.loop = attach_integral_controller(self.plant, ControllerParams(mu=2.0, alpha=0.081, k=1.0))
        self.E = disturbance_matrix(self.plant, [{'m': 1.0}])

    def test_matrix_shape(self):
        np.testing.assert_allclose(self.E, [[1.0], [0.0], [0.0]])

    def test_inflow_enters_rhs(self):
        disturbed = self.loop.with_disturbance(self.E, [4.0])
        state = np.array([0.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(disturbed.rhs(0.0, state), [4.0, 0.0, 0.0, 0.0])

    def test_amplitude_change(self):
        disturbed = self.loop.with_disturbance(self.E, [0.0]).with_parameter('disturbance.d.0', 2.5)
        self.assertEqual(disturbed.inflow[0], 2.5)

    def test_missing_channel(self):
        disturbed = self.loop.with_disturbance(self.E, [0.0])
        with self.assertRaises(ParameterError):
            disturbed.with_parameter('disturbance.d.1', 1.0)

    def test_negative_amplitude_rejected(self):
        with self.assertRaises(ParameterError):
            self.loop.with_disturbance(self.E, [-1.0])

    def test_negative_weight_rejected(self):
        with self.assertRaises(ParameterError):
            disturbance_matrix(self.plant, [{'m': -1.0}])
