import json
import unittest
from types import SimpleNamespace
from unittest.mock import MagicMock

from click.testing import CliRunner

from chalicelib.cli import EXIT_USAGE, EXIT_VERIFICATION, cli
from chalicelib.modules.container import container


def csv_rows(output):
    lines = [line for line in output.splitlines() if line and not line.startswith("#")]
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestCli(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()

    def test_index_of_two_dimensional_energy_basis(self):
        # when
        result = self.runner.invoke(cli, ["index", "--dim", "2", "--basis", "energy", "--trunc", "15"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        payload = json.loads(result.output)
        self.assertEqual(2, payload["tau"])
        self.assertEqual(15, payload["config"]["trunc"])
        self.assertEqual("index", payload["config"]["subcommand"])

    def test_certificate_in_three_dimensions(self):
        # when
        result = self.runner.invoke(cli, ["certificate", "--dim", "3"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        payload = json.loads(result.output)
        self.assertAlmostEqual(0.0001774540949, payload["mu"], delta=1e-12)
        self.assertTrue(payload["valid"])

    def test_certificate_failure_exits_with_verification_status(self):
        # given
        certifier = MagicMock()
        certifier.certify.return_value = SimpleNamespace(valid=False, to_dict=lambda: {"valid": False})

        # when
        with container.decay_certifier.override(certifier):
            result = self.runner.invoke(cli, ["certificate", "--dim", "1"])

        # then
        self.assertEqual(EXIT_VERIFICATION, result.exit_code)
        self.assertFalse(json.loads(result.output)["valid"])

    def test_sweep_is_monotone(self):
        # when
        result = self.runner.invoke(cli, ["sweep-L", "--dim", "1", "--from", "0.5", "--to", "20", "--points", "6"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        header, rows = csv_rows(result.output)
        self.assertEqual(["L", "alpha_plus", "alpha_star", "mu", "two_mu"], header)
        rates = [float(row["two_mu"]) for row in rows]
        self.assertEqual(6, len(rates))
        self.assertTrue(all(later < earlier for earlier, later in zip(rates, rates[1:])))
        self.assertIn("# subcommand=sweep-L", result.output)

    def test_sweep_rejects_reversed_range(self):
        # when
        result = self.runner.invoke(cli, ["sweep-L", "--from", "5", "--to", "1"])

        # then
        self.assertEqual(EXIT_USAGE, result.exit_code)

    def test_unknown_flag_is_a_usage_error(self):
        # when
        result = self.runner.invoke(cli, ["certificate", "--colour", "blue"])

        # then
        self.assertEqual(EXIT_USAGE, result.exit_code)

    def test_invalid_dimension_is_a_usage_error(self):
        # when
        result = self.runner.invoke(cli, ["minors", "--dim", "4"])

        # then
        self.assertEqual(EXIT_USAGE, result.exit_code)

    def test_minors_as_csv(self):
        # when
        result = self.runner.invoke(cli, ["minors", "--dim", "1", "--alpha", "0.1", "--format", "csv"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        header, rows = csv_rows(result.output)
        self.assertEqual(["j", "delta"], header)
        self.assertEqual(5, len(rows))
        self.assertEqual("2", rows[0]["delta"])

    def test_spectrum_is_deterministic(self):
        # given
        arguments = ["spectrum", "--dim", "1", "--trunc", "40", "--kappa", "1", "--kappa", "2"]

        # when
        first = self.runner.invoke(cli, arguments)
        second = self.runner.invoke(cli, arguments)

        # then
        self.assertEqual(0, first.exit_code, first.output)
        self.assertEqual(first.output, second.output)
        header, rows = csv_rows(first.output)
        self.assertEqual(["kappa", "N", "gap"], header)
        self.assertEqual(["1", "2"], [row["kappa"] for row in rows])

    def test_envelope_starts_at_the_cap(self):
        # when
        result = self.runner.invoke(cli, ["envelope", "--dim", "2", "--E0", "15", "--tmax", "20", "--dt", "5"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        header, rows = csv_rows(result.output)
        self.assertEqual(["t", "envelope"], header)
        self.assertEqual(5, len(rows))
        self.assertEqual("2", rows[0]["envelope"])

    def test_matrix_export_as_coordinates(self):
        # when
        result = self.runner.invoke(cli, ["matrix", "--which", "L1", "--trunc", "5", "--format", "mtx"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        lines = result.output.splitlines()
        self.assertEqual("%%MatrixMarket matrix coordinate complex general", lines[0])
        self.assertEqual("5 5 8", lines[1])
        self.assertEqual("1 2 1 0", lines[2])

    def test_matrix_export_as_json(self):
        # when
        result = self.runner.invoke(cli, ["matrix", "--which", "P", "--dim", "2", "--trunc", "11", "--kappa", "2"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        payload = json.loads(result.output)
        self.assertEqual(11, payload["n"])
        self.assertEqual([0.0, -0.05], payload["rows"][0][1])

    def test_simulate_writes_trajectory(self):
        # when
        result = self.runner.invoke(cli, ["simulate", "--dim", "1", "--kmax", "16", "--tmax", "2", "--dt", "1",
                                          "--format", "json"])

        # then
        self.assertEqual(0, result.exit_code, result.output)
        payload = json.loads(result.output)
        self.assertEqual([0.0, 1.0, 2.0], payload["t"])
        self.assertEqual(3, len(payload["l1"]))
        self.assertGreaterEqual(payload["entropy"][0], payload["entropy"][-1])


if __name__ == '__main__':
    unittest.main()
