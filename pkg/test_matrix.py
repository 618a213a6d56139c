import json
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from utils.errors import DimensionError, QmllSyntaxError
from utils.matrix import (StateVector, UnitaryMatrix, adjoint, apply_at, approx_equal, embed,
                          format_number, identity, matmul, matrix_json, named_gate, parse_row,
                          parse_state, state_json, tensor, unitarity_defect)
from utils.random_proofs import random_unitary

seeds = st.integers(0, 2 ** 32 - 1)
qubits = st.integers(1, 2)


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    v = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return StateVector(v / np.linalg.norm(v))


class TestUnitaryMatrix(unittest.TestCase):

    def test_rejects_non_unitary(self):
        with self.assertRaises(DimensionError):
            UnitaryMatrix([[1, 1], [0, 1]])

    def test_rejects_bad_shape(self):
        with self.assertRaises(DimensionError):
            UnitaryMatrix(np.eye(3))
        with self.assertRaises(DimensionError):
            UnitaryMatrix([[1, 0]])

    def test_read_only(self):
        h = named_gate("H")
        with self.assertRaises(ValueError):
            h.matrix[0, 0] = 0

    def test_named_gates(self):
        self.assertEqual(named_gate("CNOT").dim_qubits, 2)
        self.assertEqual(named_gate("I").label, "I1")
        self.assertTrue(named_gate("I3").is_identity)
        self.assertEqual(named_gate("I3").dim_qubits, 3)
        with self.assertRaises(QmllSyntaxError):
            named_gate("FOO")

    def test_default_label_is_literal(self):
        u = UnitaryMatrix([[0, 1], [1, 0]])
        self.assertEqual(u.label, "(mat [[0,0],[1,0]] [[1,0],[0,0]])")


class TestAlgebra(unittest.TestCase):

    def test_tensor_order(self):
        """第一个因子占据编号较小的量子比特"""
        u = tensor(named_gate("X"), identity(1))
        self.assertTrue(approx_equal(u, np.kron(named_gate("X").matrix, np.eye(2)), 0))
        self.assertEqual(u.label, "(kron X I1)")
        self.assertEqual(tensor(identity(1), identity(2)).label, "I3")

    def test_matmul_with_identity(self):
        h = named_gate("H")
        self.assertIs(matmul(identity(1), h), h)
        self.assertIs(matmul(h, identity(1)), h)
        hz = matmul(h, named_gate("Z"))
        self.assertEqual(hz.label, "(dot H Z)")
        self.assertTrue(approx_equal(hz, h.matrix @ named_gate("Z").matrix, 1e-12))

    def test_matmul_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            matmul(named_gate("H"), named_gate("CNOT"))

    def test_adjoint(self):
        s = named_gate("S")
        self.assertTrue(approx_equal(matmul(adjoint(s), s), np.eye(2), 1e-12))
        self.assertEqual(adjoint(named_gate("H")).label, "H")

    def test_approx_equal_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            approx_equal(np.eye(2), np.eye(4), 1e-8)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3), st.integers(0, 3))
    def test_apply_at_matches_embedding(self, seed, k, extra):
        rng = np.random.default_rng(seed)
        u = random_unitary(k, rng)
        n = k + extra
        offset = int(rng.integers(0, extra + 1))
        v = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
        v = StateVector(v / np.linalg.norm(v))
        out = apply_at(u, v, offset)
        expected = embed(u, offset, n) @ v.amplitudes
        self.assertTrue(approx_equal(out.amplitudes, expected, 1e-10))
        self.assertAlmostEqual(out.norm, 1.0, places=9)

    def test_apply_at_batch(self):
        cnot = named_gate("CNOT")
        columns = apply_at(cnot, np.eye(8, dtype=complex), 1)
        self.assertTrue(approx_equal(columns, np.kron(np.eye(2), cnot.matrix), 1e-12))

    def test_apply_at_out_of_range(self):
        with self.assertRaises(DimensionError):
            apply_at(named_gate("CNOT"), StateVector.zero(2), 1)

    def test_hadamard_squares_to_identity(self):
        h = named_gate("H")
        self.assertTrue(approx_equal(matmul(h, h), np.eye(2), 1e-12))

    def test_z_after_x(self):
        zx = matmul(named_gate("Z"), named_gate("X"))
        self.assertTrue(approx_equal(zx, [[0, 1], [-1, 0]], 1e-12))


class TestAlgebraProperties(unittest.TestCase):
    """随机酉矩阵上的代数性质"""

    @settings(max_examples=25, deadline=None)
    @given(seeds, qubits, qubits, qubits)
    def test_tensor_is_associative(self, seed, i, j, k):
        rng = np.random.default_rng(seed)
        a, b, c = random_unitary(i, rng), random_unitary(j, rng), random_unitary(k, rng)
        self.assertTrue(approx_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), 1e-10))

    @settings(max_examples=25, deadline=None)
    @given(seeds, qubits, st.integers(0, 2))
    def test_adjoint_undoes_apply_at(self, seed, k, extra):
        rng = np.random.default_rng(seed)
        u = random_unitary(k, rng)
        v = random_state(k + extra, rng)
        offset = int(rng.integers(0, extra + 1))
        back = apply_at(u, apply_at(adjoint(u), v, offset), offset)
        self.assertTrue(approx_equal(back.amplitudes, v.amplitudes, 1e-10))

    @settings(max_examples=25, deadline=None)
    @given(seeds, qubits, qubits, st.integers(0, 1))
    def test_tensor_equals_two_placements(self, seed, i, j, extra):
        rng = np.random.default_rng(seed)
        u, w = random_unitary(i, rng), random_unitary(j, rng)
        v = random_state(i + j + extra, rng)
        joint = apply_at(tensor(u, w), v, 0)
        separate = apply_at(w, apply_at(u, v, 0), u.dim_qubits)
        self.assertTrue(approx_equal(joint.amplitudes, separate.amplitudes, 1e-10))

    @settings(max_examples=25, deadline=None)
    @given(seeds, qubits, qubits)
    def test_operations_stay_unitary(self, seed, i, j):
        rng = np.random.default_rng(seed)
        a, b, c = random_unitary(i, rng), random_unitary(i, rng), random_unitary(j, rng)
        for u in (matmul(a, b), tensor(a, c), adjoint(a)):
            self.assertLess(unitarity_defect(u.matrix), 1e-9)


class TestText(unittest.TestCase):

    def test_number_format(self):
        self.assertEqual(format_number(1.0), "1")
        self.assertEqual(format_number(-0.0), "0")
        self.assertEqual(float(format_number(1 / np.sqrt(2))), 1 / np.sqrt(2))

    def test_matrix_json(self):
        data = json.loads(matrix_json(named_gate("X")))
        self.assertEqual(data, [[[0, 0], [1, 0]], [[1, 0], [0, 0]]])

    def test_parse_row(self):
        self.assertEqual(parse_row("[[0,1], 2]"), [1j, 2])
        with self.assertRaises(QmllSyntaxError):
            parse_row("[[0,1,2]]")
        with self.assertRaises(QmllSyntaxError):
            parse_row("[1,")

    def test_parse_state_basis(self):
        for text in ("|10⟩", "|10>"):
            v = parse_state(text)
            self.assertEqual(v.n_qubits, 2)
            self.assertEqual(v.amplitudes[2], 1)

    def test_parse_state_json(self):
        v = parse_state("[[0.6,0],[0,0.8]]")
        self.assertTrue(approx_equal(v.amplitudes, [0.6, 0.8j], 1e-12))
        self.assertEqual(json.loads(state_json(v)), [[0.6, 0], [0, 0.8]])

    def test_parse_state_errors(self):
        with self.assertRaises(QmllSyntaxError):
            parse_state("|012⟩")
        with self.assertRaises(QmllSyntaxError):
            parse_state("[1, 1]")
        with self.assertRaises(DimensionError):
            parse_state("|0⟩", n_qubits=2)


if __name__ == "__main__":
    unittest.main()
