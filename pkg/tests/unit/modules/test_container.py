import os
import unittest
from unittest import mock

from chalicelib.modules.container import Container, load_config
from chalicelib.services.decay_certificate import DecayCertifier


class TestContainer(unittest.TestCase):

    def test_defaults(self):
        # when
        target = load_config(Container())

        # then
        self.assertEqual(1e-10, target.config.rank_tolerance())
        self.assertEqual(40, target.lyapunov_ansatz().bisection_steps)
        self.assertEqual(50, target.decay_certifier().verification_moduli)

    @mock.patch.dict(os.environ, {"HYPO_BISECTION_STEPS": "12", "HYPO_RESIDUAL_TOLERANCE": "1e-6"})
    def test_environment_overrides(self):
        # when
        target = load_config(Container())

        # then
        self.assertEqual(12, target.lyapunov_ansatz().bisection_steps)
        self.assertEqual(1e-6, target.spectral_gap().residual_tolerance)

    def test_services_share_singletons(self):
        # when
        target = load_config(Container())
        certifier = target.decay_certifier()

        # then
        self.assertIsInstance(certifier, DecayCertifier)
        self.assertIs(target.operator_assembly(), certifier.operator_assembly)
        self.assertIs(target.lyapunov_ansatz(), target.bgk_simulator().lyapunov_ansatz)


if __name__ == '__main__':
    unittest.main()
