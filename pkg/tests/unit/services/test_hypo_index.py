import unittest

import numpy as np

from chalicelib.modules.errors import InvalidParameterError
from chalicelib.services.hermite_basis import ENERGY, TENSOR, HermiteBasis
from chalicelib.services.hypo_index import HypoIndex, kernel_basis, numerical_rank, psd_sqrt
from chalicelib.services.operator_assembly import ALTERNATING, MASS, OperatorAssembly


def random_pair(rng, hypocoercive):
    """Random Hermitian pair in a random unitary frame; the first kernel vector is made C1-invariant on request."""
    n = int(rng.integers(3, 13))
    k = int(rng.integers(0 if hypocoercive else 1, 4))
    V, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    M = (M + M.conj().T) / 2
    if not hypocoercive:
        M[0, 1:] = 0
        M[1:, 0] = 0
    M = M / np.linalg.norm(M, 2)
    dissipation = np.concatenate([np.zeros(k), rng.uniform(0.5, 1.5, size=n - k)])
    C1 = V @ M @ V.conj().T
    C2 = V @ np.diag(dissipation) @ V.conj().T
    return (C1 + C1.conj().T) / 2, (C2 + C2.conj().T) / 2


class TestHypoIndex(unittest.TestCase):

    def setUp(self):
        self.hypo_index = HypoIndex(rank_tolerance=1e-10)
        self.operator_assembly = OperatorAssembly(hermite_basis=HermiteBasis())

    def test_one_dimensional_bgk_has_index_three(self):
        # given
        pair = self.operator_assembly.operator_pair(1, TENSOR, 20)

        # when
        report = self.hypo_index.hypocoercivity_index(pair.L1, pair.L2)

        # then
        self.assertEqual(3, report.index)
        self.assertEqual([17, 18, 19, 20], report.rank_profile)
        self.assertEqual(3, report.kernel_dimension)
        self.assertGreater(report.coercivity, 0)
        self.assertEqual(3, report.to_dict()["tau"])

    def test_energy_basis_bgk_has_index_two(self):
        for d, N in ((2, 15), (3, 21)):
            # given
            pair = self.operator_assembly.operator_pair(d, ENERGY, N)

            # when
            report = self.hypo_index.hypocoercivity_index(pair.L1, pair.L2)

            # then
            self.assertEqual(2, report.index)
            self.assertEqual(d + 2, report.kernel_dimension)

    def test_alternative_relaxations_have_index_one(self):
        for relaxation in (MASS, ALTERNATING):
            # given
            pair = self.operator_assembly.operator_pair(1, TENSOR, 10, relaxation=relaxation)

            # when
            report = self.hypo_index.hypocoercivity_index(pair.L1, pair.L2)

            # then
            self.assertEqual(1, report.index)

    def test_invariant_kernel_is_not_hypocoercive(self):
        # given
        C1 = np.diag([1.0, 2.0])
        C2 = np.diag([0.0, 1.0])

        # when
        report = self.hypo_index.hypocoercivity_index(C1, C2)

        # then
        self.assertIsNone(report.index)
        self.assertFalse(report.hypocoercive)
        self.assertEqual("not hypocoercive", report.to_dict()["tau"])
        self.assertFalse(self.hypo_index.is_hypocoercive_spectral(C1, C2))
        self.assertEqual({"B3": False, "B4": False}, self.hypo_index.check_invariance_conditions(C1, C2))

    def test_bgk_pair_satisfies_equivalent_conditions(self):
        # given
        pair = self.operator_assembly.operator_pair(1, TENSOR, 20)

        # when
        spectral = self.hypo_index.is_hypocoercive_spectral(pair.L1, pair.L2)
        conditions = self.hypo_index.check_invariance_conditions(pair.L1, pair.L2)

        # then
        self.assertTrue(spectral)
        self.assertEqual({"B3": True, "B4": True}, conditions)

    def test_degenerate_pair_with_equal_matrices_is_not_hypocoercive(self):
        # given
        A = np.diag([1.0, 0.0])

        # when
        report = self.hypo_index.hypocoercivity_index(A, A)

        # then
        self.assertIsNone(report.index)
        self.assertEqual([1, 1], report.rank_profile)
        self.assertFalse(self.hypo_index.is_hypocoercive_spectral(A, A))
        self.assertEqual({"B3": False, "B4": False}, self.hypo_index.check_invariance_conditions(A, A))

    def test_verdicts_agree_on_random_pairs(self):
        # given
        rng = np.random.default_rng(2024)

        for trial in range(200):
            C1, C2 = random_pair(rng, hypocoercive=trial % 2 == 0)

            # when
            report = self.hypo_index.hypocoercivity_index(C1, C2)
            spectral = self.hypo_index.is_hypocoercive_spectral(C1, C2)
            conditions = self.hypo_index.check_invariance_conditions(C1, C2)

            # then
            expected = trial % 2 == 0
            self.assertEqual(expected, report.hypocoercive, f"trial {trial}")
            self.assertEqual(expected, spectral, f"trial {trial}")
            self.assertEqual({"B3": expected, "B4": expected}, conditions, f"trial {trial}")

    def test_index_is_invariant_under_unitary_change_of_basis(self):
        # given
        rng = np.random.default_rng(11)
        pairs = [self.operator_assembly.operator_pair(1, TENSOR, 10),
                 self.operator_assembly.operator_pair(2, ENERGY, 15)]

        for pair in pairs:
            n = pair.L1.shape[0]
            Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))

            # when
            original = self.hypo_index.hypocoercivity_index(pair.L1, pair.L2)
            rotated = self.hypo_index.hypocoercivity_index(Q.conj().T @ pair.L1 @ Q, Q.conj().T @ pair.L2 @ Q)

            # then
            self.assertEqual(original.index, rotated.index)
            self.assertEqual(original.rank_profile, rotated.rank_profile)
            self.assertEqual(original.kernel_dimension, rotated.kernel_dimension)
            self.assertAlmostEqual(original.coercivity, rotated.coercivity, places=10)

    def test_skew_commutator_condition(self):
        # given
        C1 = np.array([[0.0, 1.0], [1.0, 0.0]])
        C2 = np.diag([0.0, 1.0])
        K = np.array([[0.0, 0.25], [-0.25, 0.0]])

        # then
        self.assertTrue(self.hypo_index.skew_commutator_condition(C1, C2, K))
        self.assertFalse(self.hypo_index.skew_commutator_condition(C1, C2, np.zeros((2, 2))))
        with self.assertRaises(InvalidParameterError):
            self.hypo_index.skew_commutator_condition(C1, C2, np.eye(2))

    def test_rejects_non_hermitian_input(self):
        with self.assertRaises(InvalidParameterError):
            self.hypo_index.hypocoercivity_index(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))
        with self.assertRaises(InvalidParameterError):
            self.hypo_index.hypocoercivity_index(np.eye(2), np.eye(3))

    def test_rank_helpers(self):
        # given
        matrix = np.diag([4.0, 1.0, 0.0])

        # when
        root = psd_sqrt(matrix, 1e-12)
        kernel = kernel_basis(matrix, 1e-12)

        # then
        np.testing.assert_allclose(root, np.diag([2.0, 1.0, 0.0]), atol=1e-14)
        self.assertEqual(2, numerical_rank(matrix, 1e-12))
        self.assertEqual((3, 1), kernel.shape)
        self.assertAlmostEqual(1.0, abs(kernel[2, 0]), places=14)
        with self.assertRaises(InvalidParameterError):
            psd_sqrt(np.diag([1.0, -1.0]), 1e-12)


if __name__ == '__main__':
    unittest.main()
