import io
import json
import os
import tempfile
import unittest
from unittest import mock

import numpy as np

from app import main
from config.config import EQUALITY_TOLERANCE, EXAMPLES_FOLDER
from utils.matrix import approx_equal, named_gate


def example(name: str) -> str:
    return os.path.join(EXAMPLES_FOLDER, name)


def run_cli(argv, stdin: str = ""):
    """运行命令行，返回 (退出码, 标准输出, 标准错误)"""
    with mock.patch("sys.stdout", new_callable=io.StringIO) as out, \
            mock.patch("sys.stderr", new_callable=io.StringIO) as err, \
            mock.patch("sys.stdin", io.StringIO(stdin)):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def complex_matrix(text: str) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in json.loads(text)])


class TestCheckCommand(unittest.TestCase):

    def test_ok(self):
        code, out, _ = run_cli(["check", example("four_gates.proof")])
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("ok: ⊢ <><>~a, [][]a"))

    def test_ill_formed(self):
        code, out, _ = run_cli(["check", example("bad.proof")])
        self.assertEqual(code, 1)
        self.assertTrue(out.startswith("error at node ε:"))

    def test_json_report(self):
        code, out, _ = run_cli(["check", "--json", example("bad.proof")])
        self.assertEqual(code, 1)
        data = json.loads(out)
        self.assertFalse(data["ok"])
        self.assertEqual(data["path"], "ε")

    def test_syntax_error(self):
        code, out, err = run_cli(["check", "-"], stdin="(ax a")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("错误", err)

    def test_missing_file(self):
        code, _, err = run_cli(["check", example("missing.proof")])
        self.assertEqual(code, 2)
        self.assertIn("无法读写文件", err)


class TestProofCommands(unittest.TestCase):

    def test_mll_matrix(self):
        code, out, _ = run_cli(["mll-matrix", example("pi.proof")])
        self.assertEqual(code, 0)
        m = complex_matrix(out).real
        self.assertTrue(np.array_equal(m, [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]))

    def test_mll_matrix_rejects_quantum_rules(self):
        code, _, _ = run_cli(["mll-matrix", "-"], stdin="(q 1 H (ax a))")
        self.assertEqual(code, 1)

    def test_normalize_with_trace(self):
        code, out, err = run_cli(["normalize", "--trace", "-"], stdin="(cut 2 1 (q 1 H (ax a)) (q 1 X (ax a)))")
        self.assertEqual(code, 0)
        self.assertEqual(out, "(q 1 (dot X H) (ax a))\n")
        self.assertIn("1 QuantumPrincipal ε 25 -> 10\n2 AxiomRed 0 10 -> 2\n", err)

    def test_normalize_random_strategy(self):
        _, expected, _ = run_cli(["normalize", example("four_gates.proof")])
        for strategy in ("random", "random-any"):
            with self.subTest(strategy=strategy):
                code, out, _ = run_cli(["normalize", "--strategy", strategy, "--seed", "3",
                                        example("four_gates.proof")])
                self.assertEqual(code, 0)
                self.assertNotIn("cut", out)
                self.assertEqual(out, expected)

    def test_normalize_is_idempotent(self):
        for name in ("four_gates.proof", "pi.proof", "rho.proof", "h_cnot.proof"):
            with self.subTest(name=name):
                code, once, _ = run_cli(["normalize", example(name)])
                self.assertEqual(code, 0)
                code, twice, _ = run_cli(["normalize", "-"], stdin=once)
                self.assertEqual(code, 0)
                self.assertEqual(twice, once)

    def test_usage_errors(self):
        for argv in ([], ["frobnicate", "-"], ["normalize", "--strategy", "outermost", "-"]):
            with self.subTest(argv=argv):
                code, _, _ = run_cli(argv)
                self.assertEqual(code, 2)


class TestMachineCommands(unittest.TestCase):

    def test_run_with_trace(self):
        code, out, err = run_cli(["run", "--trace-machine", "-"], stdin="(q 1 H (ax a))")
        self.assertEqual(code, 0)
        amplitudes = [complex(re, im) for re, im in json.loads(out)]
        self.assertTrue(approx_equal(amplitudes, [2 ** -0.5, 2 ** -0.5], 1e-12))
        self.assertEqual(err.splitlines()[-1], "3 ε@2 [][.] ε H@0")

    def test_run_with_input_register(self):
        code, out, _ = run_cli(["run", "--input", "|1⟩", "--entry", "1", "--context", "1.M", "-"],
                               stdin="(q 1 X (ax a))")
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out), [[1, 0], [0, 0]])

    def test_run_register_size_mismatch(self):
        code, _, err = run_cli(["run", "--input", "|10⟩", "-"], stdin="(q 1 X (ax a))")
        self.assertEqual(code, 1)
        self.assertIn("错误", err)

    def test_ambiguous_context(self):
        code, _, _ = run_cli(["semantics", example("pi.proof")])
        self.assertEqual(code, 1)

    def test_encode_then_semantics(self):
        code, proof_text, _ = run_cli(["encode", example("four_gates.json")])
        self.assertEqual(code, 0)
        code, out, _ = run_cli(["semantics", "-"], stdin=proof_text)
        self.assertEqual(code, 0)
        h, x, z, cnot = (named_gate(n).matrix for n in ("H", "X", "Z", "CNOT"))
        expected = cnot @ np.kron(z, x) @ np.kron(h, np.eye(2))
        self.assertTrue(approx_equal(complex_matrix(out), expected, EQUALITY_TOLERANCE))

    def test_encode_is_idempotent_through_extract(self):
        for name in ("identity3.json", "h_on_2.json", "h_cnot.json", "four_gates.json"):
            with self.subTest(name=name):
                code, once, _ = run_cli(["encode", example(name)])
                self.assertEqual(code, 0)
                code, circuit, _ = run_cli(["extract", "-"], stdin=once)
                self.assertEqual(code, 0)
                code, twice, _ = run_cli(["encode", "-"], stdin=circuit)
                self.assertEqual(code, 0)
                code, again, _ = run_cli(["encode", "-"], stdin=run_cli(["extract", "-"], stdin=twice)[1])
                self.assertEqual(again, twice)

    def test_extract(self):
        code, out, _ = run_cli(["extract", "--prune-identity", example("h_on_2.proof")])
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out), {"qubits": 3, "gates": [{"gate": "H", "targets": [2]}]})

    def test_long_circuit(self):
        gates = [{"gate": "H" if k % 2 else "X", "targets": [1]} for k in range(1500)]
        code, proof_text, _ = run_cli(["encode", "-"], stdin=json.dumps({"qubits": 1, "gates": gates}))
        self.assertEqual(code, 0)
        code, out, _ = run_cli(["semantics", "-"], stdin=proof_text)
        self.assertEqual(code, 0)
        step = named_gate("H").matrix @ named_gate("X").matrix
        expected = np.linalg.matrix_power(step, 750)
        self.assertTrue(approx_equal(complex_matrix(out), expected, EQUALITY_TOLERANCE))

    def test_too_deeply_nested_proof(self):
        text = "(ex 1 2 " * 3000 + "(ax a)" + ")" * 3000
        code, out, err = run_cli(["check", "-"], stdin=text)
        self.assertEqual(code, 1)
        self.assertEqual(out, "")
        self.assertIn("递归上限", err)

    def test_bad_circuit(self):
        code, _, err = run_cli(["encode", "-"], stdin='{"qubits": 1, "gates": [{"gate": "H", "targets": [2]}]}')
        self.assertEqual(code, 2)
        self.assertIn("错误", err)


class TestOutputFile(unittest.TestCase):

    def test_output_option(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "out.proof")
            code, out, _ = run_cli(["encode", "-o", path, example("h_cnot.json")])
            self.assertEqual(code, 0)
            self.assertEqual(out, "")
            with open(path, "r", encoding="utf-8") as f:
                self.assertEqual(f.read(), "(q 2 CNOT (q 1 H (ax a)))\n")


if __name__ == "__main__":
    unittest.main()
