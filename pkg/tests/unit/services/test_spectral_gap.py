import math
import unittest
from unittest import mock

import numpy as np
from scipy import linalg

from chalicelib.modules.errors import EigensolverError, InvalidParameterError
from chalicelib.services.decay_certificate import DecayCertifier
from chalicelib.services.hermite_basis import HermiteBasis
from chalicelib.services.lyapunov_ansatz import LyapunovAnsatz
from chalicelib.services.operator_assembly import MASS, OperatorAssembly
from chalicelib.services.spectral_gap import SpectralGap

TWO_PI = 2 * math.pi


class TestSpectralGap(unittest.TestCase):

    def setUp(self):
        self.operator_assembly = OperatorAssembly(hermite_basis=HermiteBasis())
        self.spectral_gap = SpectralGap(operator_assembly=self.operator_assembly)

    def test_complex_eigenvalues_of_simple_matrices(self):
        # when
        diagonal = self.spectral_gap.complex_eigenvalues(np.diag([3.0, -1.0, 2.0]))
        rotation = self.spectral_gap.complex_eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))

        # then
        np.testing.assert_allclose(np.sort(diagonal.real), [-1.0, 2.0, 3.0], atol=1e-14)
        np.testing.assert_allclose(np.sort(rotation.imag), [-1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(rotation.real, [0.0, 0.0], atol=1e-14)

    def test_complex_eigenvalues_preserve_trace_and_determinant(self):
        # given
        generator = np.random.default_rng(7)
        M = generator.standard_normal((8, 8)) + 1j * generator.standard_normal((8, 8))

        # when
        eigenvalues = self.spectral_gap.complex_eigenvalues(M)

        # then
        self.assertAlmostEqual(np.trace(M), np.sum(eigenvalues), places=10)
        self.assertAlmostEqual(np.linalg.det(M), np.prod(eigenvalues), places=6)

    def test_complex_eigenvalues_agree_with_hermitian_solver(self):
        # given
        generator = np.random.default_rng(11)
        X = generator.standard_normal((12, 12)) + 1j * generator.standard_normal((12, 12))
        H = X + X.conj().T

        # when
        eigenvalues = self.spectral_gap.complex_eigenvalues(H)

        # then
        np.testing.assert_allclose(np.sort(eigenvalues.real), linalg.eigvalsh(H), atol=1e-10)

    def test_complex_eigenvalues_reject_invalid_matrices(self):
        with self.assertRaises(InvalidParameterError):
            self.spectral_gap.complex_eigenvalues(np.ones((2, 3)))
        with self.assertRaises(InvalidParameterError):
            self.spectral_gap.complex_eigenvalues(np.array([[1.0, np.nan], [0.0, 1.0]]))

    @mock.patch("chalicelib.services.spectral_gap.linalg.eig")
    def test_complex_eigenvalues_wrap_solver_failure(self, eig):
        # given
        eig.side_effect = linalg.LinAlgError("did not converge")

        # then
        with self.assertRaises(EigensolverError):
            self.spectral_gap.complex_eigenvalues(np.eye(3))

    @mock.patch("chalicelib.services.spectral_gap.linalg.eig")
    def test_complex_eigenvalues_check_backward_error(self, eig):
        # given
        eig.return_value = (np.array([1.0, 5.0]), np.eye(2))

        # when
        with self.assertRaises(EigensolverError) as context:
            self.spectral_gap.complex_eigenvalues(np.diag([1.0, 2.0]))

        # then
        self.assertEqual(2, len(context.exception.partial))

    def test_one_dimensional_gap(self):
        # when
        report = self.spectral_gap.spectral_gap(1, TWO_PI, [1.0], 500)

        # then
        self.assertAlmostEqual(0.558296, report.gap, delta=5e-4)

    def test_gap_is_attained_at_the_first_mode(self):
        # when
        report = self.spectral_gap.spectral_gap(1, TWO_PI, [0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 100)

        # then
        self.assertEqual(1.0, report.argmin_kappa)
        self.assertEqual(1.0, report.entries[0].gap)
        self.assertTrue(report.to_csv().startswith("kappa,N,gap\n0,100,1\n"))
        self.assertEqual(6, len(report.to_dict()["entries"]))

    def test_truncation_study_reports_overshoot_then_convergence(self):
        # when
        study = self.spectral_gap.truncation_study(1, TWO_PI, 1.0, sizes=(25, 50, 100, 200, 500))

        # then
        self.assertFalse(study.monotone)
        self.assertFalse(study.to_dict()["monotone"])
        np.testing.assert_allclose(study.gaps, [0.4944968, 0.5637769, 0.5595291, 0.5583309, 0.5582962], atol=1e-6)
        self.assertEqual(4, len(study.differences))
        self.assertTrue(all(b < a for a, b in zip(study.differences[1:], study.differences[2:])))
        self.assertLess(study.differences[-1], 1e-4)
        self.assertEqual([25, 50, 100, 200, 500], study.to_dict()["N"])

    def test_certified_rate_is_below_numerical_gap(self):
        # given
        certifier = DecayCertifier(operator_assembly=self.operator_assembly, lyapunov_ansatz=LyapunovAnsatz())

        for L in (math.pi, TWO_PI, 4 * math.pi):
            # when
            mu = certifier.certify(1, L).mu
            gap = self.spectral_gap.spectral_gap(1, L, [1.0, 2.0, 3.0], 80).gap

            # then
            self.assertLessEqual(mu, gap)

    def test_mass_relaxation_has_larger_gap(self):
        # when
        bgk = self.spectral_gap.spectral_gap(1, TWO_PI, [1.0], 100)
        mass = self.spectral_gap.spectral_gap(1, TWO_PI, [1.0], 100, relaxation=MASS)

        # then
        self.assertGreater(mass.gap, bgk.gap)

    def test_uniform_bound_profile(self):
        # when
        profile = self.spectral_gap.uniform_bound_profile(2, TWO_PI, [1.0, math.sqrt(2), 2.0], 30)

        # then
        self.assertEqual(3, len(profile.scaled))
        self.assertAlmostEqual(2 * profile.gaps[0], profile.scaled[0], places=14)
        self.assertGreater(profile.lower_bound, 0)
        with self.assertRaises(InvalidParameterError):
            self.spectral_gap.uniform_bound_profile(1, TWO_PI, [0.0, 1.0], 30)

    def test_rejects_small_truncations(self):
        with self.assertRaises(InvalidParameterError):
            self.spectral_gap.spectral_gap(2, TWO_PI, [1.0], 8)
        with self.assertRaises(InvalidParameterError):
            self.spectral_gap.spectral_gap(1, TWO_PI, [], 20)


if __name__ == '__main__':
    unittest.main()
