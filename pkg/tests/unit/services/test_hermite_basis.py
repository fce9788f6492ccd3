import math
import unittest

import numpy as np

from chalicelib.modules.errors import InvalidParameterError
from chalicelib.services.hermite_basis import (
    ENERGY, TENSOR, BasisSpec, HermiteBasis, hermite_functions, lex_index, maxwellian, multi_indices)


class TestHermiteBasis(unittest.TestCase):

    def setUp(self):
        self.hermite_basis = HermiteBasis()

    def test_lex_index_orders_by_degree_then_first_component(self):
        # given
        cases = [((0, 0, 0), 0), ((1, 0, 0), 1), ((0, 0, 1), 3), ((2, 0, 0), 4), ((1, 1, 0), 5),
                 ((0, 2, 0), 7), ((0, 0, 2), 9), ((3, 0, 0), 10), ((2, 0), 3), ((0, 2), 5), ((5,), 5)]

        # when
        actual = [lex_index(m, len(m)) for m, _ in cases]

        # then
        self.assertEqual([expected for _, expected in cases], actual)

    def test_multi_index_inverts_lex_index(self):
        # given
        d, N = 3, 84

        # when
        indices = multi_indices(d, N)

        # then
        self.assertEqual(N, len(indices))
        for position, m in enumerate(indices):
            self.assertEqual(position, self.hermite_basis.lex_index(m, d))
            self.assertEqual(m, self.hermite_basis.multi_index(position, d))

    def test_lex_index_rejects_negative_components(self):
        with self.assertRaises(InvalidParameterError):
            lex_index((1, -1), 2)

    def test_recurrence_coeffs(self):
        # when
        raising, lowering = self.hermite_basis.recurrence_coeffs(3)

        # then
        self.assertAlmostEqual(2.0, raising, places=14)
        self.assertAlmostEqual(math.sqrt(3), lowering, places=14)

    def test_one_dimensional_functions_at_zero(self):
        # given
        v = np.array([0.0])

        # when
        values = hermite_functions(2, v)[:, 0]

        # then
        self.assertAlmostEqual(1 / math.sqrt(2 * math.pi), values[0], places=14)
        self.assertAlmostEqual(0.0, values[1], places=14)
        self.assertAlmostEqual(-1 / math.sqrt(2) / math.sqrt(2 * math.pi), values[2], places=14)

    def test_eval_basis_matches_tensor_product(self):
        # given
        v = np.array([0.3, -1.1])

        # when
        actual = self.hermite_basis.eval_basis((2, 1), v)

        # then
        g1 = hermite_functions(2, np.array([0.3]))[2, 0]
        g2 = hermite_functions(1, np.array([-1.1]))[1, 0]
        self.assertAlmostEqual(g1 * g2, actual, places=14)

    def test_energy_function_is_kinetic_energy_combination(self):
        # given
        points = np.array([[0.4, 1.2], [-0.7, 0.1]])

        # when
        actual = self.hermite_basis.eval_basis((2, 0), points, variant=ENERGY)

        # then
        expected = (self.hermite_basis.eval_basis((2, 0), points, TENSOR)
                    + self.hermite_basis.eval_basis((0, 2), points, TENSOR)) / math.sqrt(2)
        np.testing.assert_allclose(actual, expected, atol=1e-14)

    def test_energy_function_is_proportional_to_maxwellian_energy(self):
        # given
        v = np.array([0.5, -0.8, 1.3])

        # when
        actual = self.hermite_basis.eval_basis((2, 0, 0), v, variant=ENERGY)

        # then
        expected = (v @ v - 3) / math.sqrt(6) * maxwellian(v)
        self.assertAlmostEqual(expected, actual, places=13)

    def test_basis_change_is_an_orthogonal_involution(self):
        for d in (2, 3):
            # when
            S = self.hermite_basis.basis_change_matrix(d, 20)

            # then
            np.testing.assert_allclose(S @ S.T, np.eye(20), atol=1e-14)
            np.testing.assert_allclose(S, S.T, atol=1e-14)

    def test_basis_change_entries(self):
        # when
        S2 = self.hermite_basis.basis_change_matrix(2, 10)
        S3 = self.hermite_basis.basis_change_matrix(3, 20)

        # then
        self.assertAlmostEqual(1 / math.sqrt(2), S2[3, 3], places=15)
        self.assertAlmostEqual(1 / math.sqrt(2), S2[3, 5], places=15)
        self.assertAlmostEqual(-1 / math.sqrt(2), S2[5, 5], places=15)
        self.assertAlmostEqual(1.0, S2[4, 4], places=15)
        self.assertAlmostEqual(1 / math.sqrt(3), S3[4, 4], places=15)
        self.assertAlmostEqual(1 / math.sqrt(3), S3[7, 4], places=15)
        self.assertAlmostEqual(-(1 + 1 / math.sqrt(3)) / 2, S3[7, 7], places=15)
        self.assertAlmostEqual((1 - 1 / math.sqrt(3)) / 2, S3[7, 9], places=15)

    def test_energy_basis_velocity_recurrence(self):
        # given
        points = np.random.default_rng(3).normal(size=(25, 2))

        # when
        actual = points[:, 0] * self.hermite_basis.eval_basis((2, 0), points, variant=ENERGY)

        # then
        g = {m: self.hermite_basis.eval_basis(m, points, variant=ENERGY) for m in ((3, 0), (1, 0), (1, 2))}
        expected = (math.sqrt(3) * g[(3, 0)] + math.sqrt(2) * g[(1, 0)] + g[(1, 2)]) / math.sqrt(2)
        np.testing.assert_allclose(actual, expected, atol=1e-13)

    def test_basis_change_needs_second_degree_block(self):
        with self.assertRaises(InvalidParameterError):
            self.hermite_basis.basis_change_matrix(3, 8)
        with self.assertRaises(InvalidParameterError):
            self.hermite_basis.basis_change_matrix(1, 8)

    def test_gram_matrix_is_identity(self):
        # when
        gram = self.hermite_basis.gram_matrix(30)

        # then
        np.testing.assert_allclose(gram, np.eye(31), atol=1e-10)

    def test_gauss_hermite_weights_sum_to_one(self):
        # when
        knots, weights = self.hermite_basis.gauss_hermite(20)

        # then
        self.assertAlmostEqual(1.0, float(np.sum(weights)), places=13)
        self.assertAlmostEqual(1.0, float(weights @ knots ** 2), places=12)

    def test_basis_spec_validation(self):
        # given
        spec = BasisSpec(d=2, variant=ENERGY, N=11)

        # then
        self.assertTrue(spec.supports_certificate())
        self.assertFalse(BasisSpec(d=3, N=20).supports_certificate())
        with self.assertRaises(InvalidParameterError):
            BasisSpec(d=4)
        with self.assertRaises(InvalidParameterError):
            BasisSpec(d=1, variant="spherical")


if __name__ == '__main__':
    unittest.main()
