"""
Network construction, evaluation, structure checks and the file format.
"""
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core_engine.crn.examples import birth_death, dimerization, gene_expression
from core_engine.crn.network import (
    build_network,
    evaluate_rhs,
    finite_difference_jacobian,
    jacobian,
    linearize,
    reaction_table,
    structural_checks,
)
from core_engine.crn.schemas import RateLaw, Reaction, Species
from core_engine.crn.serialization import load_network, network_from_dict, networks_equivalent, save_network
from core_engine.errors import NetworkValidationError, ParameterError
from core_engine.registry import NetworkRegistry


class NetworkConstructionTests(SimpleTestCase):
    """Validation of species and reaction declarations."""

    def test_duplicate_species_rejected(self):
        with self.assertRaises(NetworkValidationError):
            build_network(['x', 'x'], [Reaction({'x': 1}, {}, 1.0)])

    def test_undeclared_participant_rejected(self):
        with self.assertRaises(NetworkValidationError):
            build_network(['x'], [Reaction({'x': 1}, {'y': 1}, 1.0)])

    def test_nonpositive_rate_rejected(self):
        with self.assertRaises(NetworkValidationError):
            Reaction({'x': 1}, {}, 0.0)

    def test_negative_initial_concentration_rejected(self):
        with self.assertRaises(NetworkValidationError):
            Species('x', -1.0)

    def test_unlabelled_reactions_get_index_labels(self):
        network = build_network(['a', 'b'], [Reaction({'a': 1}, {'b': 1}, 2.0), Reaction({'b': 1}, {}, 1.0)])
        self.assertEqual(network.reaction_labels, ['r0', 'r1'])
        self.assertEqual(network.controlled, 'b')
        self.assertEqual(network.actuated, 'a')

    def test_unimolecular_flag(self):
        self.assertTrue(gene_expression().is_unimolecular)
        self.assertFalse(dimerization().is_unimolecular)

    def test_unknown_rate_label(self):
        with self.assertRaises(ParameterError):
            gene_expression().with_rate('k_unknown', 1.0)


class EvaluationTests(SimpleTestCase):
    """Right-hand side and Jacobian of the rate equations."""

    def test_gene_expression_rhs(self):
        network = gene_expression()
        rhs = evaluate_rhs(network, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(rhs, [-1.2337, 1.4513 - 3.0155 - 2.3679, 2.3679 - 1.1114], rtol=1e-12)

    def test_negative_state_rejected(self):
        with self.assertRaises(NetworkValidationError):
            evaluate_rhs(gene_expression(), [1.0, -0.1, 1.0])

    def test_wrong_state_size_rejected(self):
        with self.assertRaises(NetworkValidationError):
            evaluate_rhs(gene_expression(), [1.0, 1.0])

    def test_dimerization_rhs(self):
        network = dimerization()
        x1, x2 = 1.5, 0.7
        rhs = evaluate_rhs(network, [x1, x2])
        expected_x1 = -1.0 * x1 - 2 * 1.0 * x1 ** 2 + 2 * 2.0 * x2
        expected_x2 = 1.0 * x1 ** 2 - 2.0 * x2 - 2.0 * x2
        np.testing.assert_allclose(rhs, [expected_x1, expected_x2], rtol=1e-12)

    def test_positivity_on_random_networks(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            names = [f"s{i}" for i in range(int(rng.integers(2, 6)))]
            reactions = []
            for _ in range(int(rng.integers(1, 9))):
                reactants = {}
                for name in rng.choice(names, size=int(rng.integers(0, 3))):
                    reactants[str(name)] = reactants.get(str(name), 0) + 1
                products = {str(name): int(rng.integers(1, 3))
                            for name in rng.choice(names, size=int(rng.integers(0, 3)), replace=False)}
                reactions.append(Reaction(reactants, products, float(rng.uniform(0.1, 5.0))))
            network = build_network(names, reactions)
            for _ in range(10):
                state = rng.uniform(0.0, 3.0, len(names)) * (rng.random(len(names)) < 0.6)
                rhs = evaluate_rhs(network, state)
                for i in np.flatnonzero(state == 0.0):
                    self.assertGreaterEqual(rhs[i], 0.0)

    def test_analytic_jacobian_matches_finite_differences(self):
        network = dimerization()
        point = [1.5, 0.7]
        np.testing.assert_allclose(jacobian(network, point), finite_difference_jacobian(network, point), atol=1e-6)

    def test_hill_jacobian_matches_finite_differences(self):
        reactions = [
            Reaction({'v': 1}, {'v': 2}, 2.0, rate_law=RateLaw.hill_repressed(3.0, 'v'), label='ref'),
            Reaction({'v': 1}, {}, 1.0, label='decay'),
        ]
        network = build_network(['v'], reactions)
        np.testing.assert_allclose(jacobian(network, [1.3]), finite_difference_jacobian(network, [1.3]), atol=1e-6)


class StructureTests(SimpleTestCase):
    """Linear forms and the controller's structural assumptions."""

    def test_gene_expression_linear_form(self):
        linear = linearize(gene_expression(), [0.3, 0.2, 0.1])
        self.assertTrue(linear.exact)
        np.testing.assert_allclose(linear.b, 0.0, atol=1e-12)
        np.testing.assert_allclose(linear.B, [1.0, 0.0, 0.0])
        np.testing.assert_allclose(linear.C, [0.0, 0.0, 1.0])
        self.assertAlmostEqual(linear.static_gain, 0.46557, places=4)

    def test_gene_expression_passes_checks(self):
        network = gene_expression()
        report = structural_checks(linearize(network, network.initial_state()), network, test_mode=True)
        self.assertTrue(report.is_metzler)
        self.assertTrue(report.is_hurwitz)
        self.assertTrue(report.is_output_controllable)
        self.assertLess(report.jacobian_fd_error, 1e-6)

    def test_autocatalytic_plant_is_not_hurwitz(self):
        network = build_network(['x'], [Reaction({'x': 1}, {'x': 2}, 1.0, label='growth')])
        report = structural_checks(linearize(network, [1.0]))
        self.assertFalse(report.is_hurwitz)
        self.assertGreater(report.spectral_abscissa, 0)

    def test_disconnected_output_is_not_controllable(self):
        network = build_network(
            ['a', 'b'],
            [Reaction({'a': 1}, {}, 1.0, label='ga'), Reaction({'b': 1}, {}, 1.0, label='gb')],
            controlled='b', actuated='a',
        )
        report = structural_checks(linearize(network, [0.0, 0.0]))
        self.assertTrue(report.is_hurwitz)
        self.assertFalse(report.is_output_controllable)
        self.assertIn('does not reach the output', report.diagnostic)

    def test_reaction_table(self):
        lines = reaction_table(birth_death(gamma=2.0))
        self.assertEqual(lines, ['gamma: x -> 0  k=2'])


class SerializationTests(SimpleTestCase):
    """The JSON network document."""

    def test_save_and_load(self):
        network = dimerization(initial={'x1': 0.5})
        with tempfile.TemporaryDirectory() as tmp:
            path = save_network(network, Path(tmp) / 'dimer.json')
            loaded = load_network(path)
        self.assertTrue(networks_equivalent(network, loaded))

    def test_missing_rate(self):
        document = {'species': [{'name': 'x'}], 'reactions': [{'label': 'd', 'reactants': {'x': 1}}]}
        with self.assertRaises(NetworkValidationError):
            network_from_dict(document)

    def test_syntax_error_reports_position(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'broken.json'
            path.write_text('{"species": [\n  {"name": "x",}\n]}\n', encoding='utf-8')
            with self.assertRaises(NetworkValidationError) as ctx:
                load_network(path)
        self.assertIn('line 2', str(ctx.exception))

    def test_hill_rate_law_survives(self):
        document = {
            'species': [{'name': 'v', 'initial': 1.0}],
            'reactions': [{'label': 'ref', 'reactants': {'v': 1}, 'products': {'v': 2}, 'rate': 2.0,
                           'rate_law': {'kind': 'hill_repressed', 'theta': 5.0, 'repressor': 'v'}}],
        }
        network = network_from_dict(document)
        self.assertEqual(network.reaction('ref').rate_law.theta, 5.0)
        self.assertFalse(network.is_unimolecular)


class RegistryTests(SimpleTestCase):
    """Builtin network builders."""

    def test_builtins_registered(self):
        names = NetworkRegistry.list_all()
        for name in ('birth_death', 'death_process', 'gene_expression', 'dimerization'):
            self.assertIn(name, names)

    def test_build_with_parameters(self):
        network = NetworkRegistry.build('death_process', gamma=0.004)
        self.assertEqual(network.reaction('gamma').rate_constant, 0.004)

    def test_build_from_module_path(self):
        network = NetworkRegistry.build('core_engine.crn.examples:birth_death', gamma=3.0)
        self.assertEqual(network.species_names, ['x'])

    def test_unknown_builder(self):
        with self.assertRaises(ValueError):
            NetworkRegistry.build('no_such_network')

    def test_bad_parameter(self):
        with self.assertRaises(ValueError):
            NetworkRegistry.build('gene_expression', k_unknown=1.0)
