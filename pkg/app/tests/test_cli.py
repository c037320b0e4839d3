import json
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from app import cli, formats
from app.core import TriangularConfiguration, validate
from app.gadgets import make_s5


class CliTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, name, data):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w") as f:
            f.write(data if isinstance(data, str) else json.dumps(data))
        return path

    def run_ok(self, *argv):
        result = cli.run(list(argv))
        self.assertEqual(result.status, 0, result.render())
        return result


class ManagementCommandTest(CliTestCase):
    def test_lattice_dimers(self):
        out = StringIO()
        call_command("kas3", "lattice", "2", "2", "2", "--dimers", stdout=out)
        self.assertEqual(out.getvalue().strip(), "9")

    def test_fold(self):
        out = StringIO()
        call_command("kas3", "fold", "1 + x^6", "--e", "4", stdout=out)
        self.assertEqual(out.getvalue().strip(), "1 + x^1")

    def test_json_flag(self):
        out = StringIO()
        call_command("kas3", "--json", "lattice", "2", "1", "1", "--dimers", stdout=out)
        self.assertEqual(json.loads(out.getvalue())["count"], 1)

    def test_failure_exit_code(self):
        with self.assertRaises(CommandError) as cm:
            call_command("kas3", "fold", "x^2 + x^5", "--e", "4", stdout=StringIO())
        self.assertEqual(cm.exception.returncode, 1)


class RunTest(CliTestCase):
    def test_statuses(self):
        failed = cli.run(["fold", "x^2 + x^5", "--e", "4"])
        self.assertEqual(failed.status, 1)
        self.assertEqual(failed.payload["error"]["type"], "FoldError")
        self.assertEqual(cli.run(["fold", "x^^2", "--e", "4"]).status, 2)
        self.assertEqual(cli.run(["nope"]).status, 2)
        self.assertEqual(cli.run(["per3", os.path.join(self.tmp.name, "missing.json")]).status, 1)
        self.assertEqual(cli.run(["per3", self.write("bad.json", "{")]).status, 2)

    def test_error_payload_is_json(self):
        rendered = cli.run(["fold", "x^2 + x^5", "--e", "4"]).render()
        self.assertIn("error", json.loads(rendered))

    def test_gadget(self):
        result = self.run_ok("gadget", "mtt", "--certify", "--json")
        payload = json.loads(result.render())
        self.assertEqual(payload["kind"], "mtt")
        self.assertEqual(payload["end_labels"], ["abc", "123", "alpha"])
        checks = {c["name"]: c for c in payload["certificate"]}
        self.assertTrue(all(c["passed"] for c in checks.values()))
        self.assertTrue(checks["matchings_within_ends"]["detail"].startswith("2 matchings"))

    def test_gadget_output_round_trips(self):
        payload = json.loads(self.run_ok("gadget", "s5", "--json").render())
        bundle = formats.config_from_dict(payload)
        self.assertEqual(bundle.config, make_s5().config)

    def test_reduce(self):
        path = self.write(
            "config.json",
            {"edges": [{"id": "a"}, {"id": "b"}, {"id": "c"}], "triangles": [{"id": "t", "edges": ["a", "b", "c"]}], "weights": {"t": 3}},
        )
        payload = self.run_ok("reduce", path).payload
        self.assertEqual(payload["P"], "x^3")
        self.assertEqual(payload["P_reduced"], "x^3")
        reduced = formats.config_from_dict(json.loads(formats.payload_to_str(payload)))
        self.assertEqual(validate(reduced.config), [])
        self.assertEqual(reduced.config.counts(), (0, 39, 23))

    def test_tensor_commands(self):
        path = self.write(
            "tensor.json",
            {"dims": [2, 2, 2], "entries": [[i, j, k, 1] for i in range(2) for j in range(2) for k in range(2)]},
        )
        self.assertEqual(self.run_ok("per3", path).summary, "4")
        self.assertEqual(self.run_ok("det3", path, "--dense").summary, "0")
        signed = self.run_ok("sign-k1", path).payload
        self.assertTrue(signed["certified"])
        self.assertTrue(signed["verified"])

    def test_polynomial_tensor_entries(self):
        path = self.write("tensor.json", {"dims": [1, 1, 1], "entries": [[0, 0, 0, {"poly": {"2": 1}}]]})
        self.assertEqual(self.run_ok("per3", path).summary, "x^2")

    def test_triadj(self):
        path = self.write(
            "config.json", {"edges": [{"id": "a"}, {"id": "b"}, {"id": "c"}], "triangles": [{"id": "t", "edges": ["a", "b", "c"]}]}
        )
        payload = self.run_ok("triadj", path).payload
        self.assertEqual(payload["dims"], [1, 1, 1])

    def test_kasteleyn(self):
        path = self.write("matrix.json", {"n": 2, "rows": [[1, 1], [1, 1]]})
        payload = self.run_ok("kasteleyn", "build", path, "--certify").payload
        self.assertEqual(payload["m"], 8)
        cert = payload["certification"]
        self.assertEqual((cert["per"], cert["per3"], cert["det3"]), (2, 2, 2))
        self.assertTrue(cert["trivial_signing"]["passed"])
        self.assertTrue(cert["bijection"]["passed"])
        bad = self.write("bad_matrix.json", {"n": 2, "rows": [[1, 1]]})
        self.assertEqual(cli.run(["kasteleyn", "build", bad]).status, 2)

    def test_lattice_export(self):
        target = os.path.join(self.tmp.name, "cube.off")
        self.run_ok("lattice", "2", "2", "2", "--export-off", target)
        with open(target) as f:
            self.assertEqual(f.readline().strip(), "OFF")

    def test_code_and_kernel(self):
        code = self.write("code.json", {"k": 2, "n": 3, "rows": [[1, 1, 0], [0, 1, 1]]})
        self.assertEqual(self.run_ok("code", "wenum", code).summary, "1 + 3*x^2")
        config = TriangularConfiguration.from_triangles(
            {"f1": ("1", "2", "3"), "f2": ("1", "2", "4"), "f3": ("1", "3", "4"), "f4": ("2", "3", "4")}
        )
        path = self.write("tetra.json", formats.config_to_dict(config))
        self.assertEqual(self.run_ok("kernel-wenum", path, "--p", "2").summary, "1 + x^4")
        self.assertEqual(cli.run(["kernel-wenum", path, "--p", "4"]).status, 1)

    def test_output_does_not_depend_on_threads(self):
        triangle = {"edges": [{"id": "a"}, {"id": "b"}, {"id": "c"}], "triangles": [{"id": "t", "edges": ["a", "b", "c"]}]}
        tensor = {"dims": [3, 3, 3], "entries": [[i, j, (i + j) % 3, i + 1] for i in range(3) for j in range(3)]}
        commands = [
            ["gadget", "mtt", "--certify"],
            ["lattice", "2", "2", "2", "--dimers"],
            ["kasteleyn", "build", self.write("matrix.json", {"n": 3, "rows": [[1, 1, 0], [0, 1, 1], [1, 0, 1]]}), "--certify"],
            ["reduce", self.write("config.json", triangle)],
            ["per3", self.write("tensor.json", tensor)],
            ["det3", self.write("tensor.json", tensor)],
        ]
        for argv in commands:
            outputs = [self.run_ok(*argv, "--json", "--threads", str(n)).render() for n in (1, 2, 4)]
            self.assertEqual(len(set(outputs)), 1, argv)

    def test_bc_check_is_deterministic(self):
        one = self.run_ok("bc-check", "--r", "2", "--n", "3", "--count", "10", "--json")
        many = cli.run(["bc-check", "--r", "2", "--n", "3", "--count", "10", "--threads", "3", "--json"])
        self.assertTrue(one.payload["all_equal"])
        self.assertEqual(one.render(), many.render())
