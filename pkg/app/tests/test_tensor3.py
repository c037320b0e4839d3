import itertools
from fractions import Fraction

import sympy
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from app.algebra import Polynomial
from app.core import TriangularConfiguration, find_edge_tripartition, find_vertex_tripartition
from app.errors import GuardExceeded, TripartitionError
from app.graphs import BipartiteGraph
from app.sweeps import binet_cauchy_sweep, projection_signing_sweep
from app.tensor3 import (
    RectMatrixTriple,
    Tensor3,
    apply_signing,
    binet_cauchy_C,
    binet_cauchy_rhs,
    check_pfaffian_signing,
    contributing_terms,
    determinant2,
    determinant3,
    find_pfaffian_signing,
    kasteleyn_sign_via_k1,
    permanent2,
    permanent3,
    permutation_sign,
    projection_graphs,
    triadjacency,
    vertex_adjacency,
)


@st.composite
def small_tensors(draw, max_n=3):
    n = draw(st.integers(1, max_n))
    cells = list(itertools.product(range(n), repeat=3))
    values = draw(st.lists(st.integers(-2, 2), min_size=len(cells), max_size=len(cells)))
    return Tensor3.build((n, n, n), dict(zip(cells, values)))


@st.composite
def square_matrices(draw, max_n=4, low=-3, high=3):
    n = draw(st.integers(1, max_n))
    return draw(st.lists(st.lists(st.integers(low, high), min_size=n, max_size=n), min_size=n, max_size=n))


def four_cycle():
    return BipartiteGraph.build(["a0", "a1"], ["b0", "b1"], [("a0", "b0"), ("a0", "b1"), ("a1", "b0"), ("a1", "b1")])


class TensorTest(SimpleTestCase):
    def test_build_rejects_bad_input(self):
        with self.assertRaises(ValueError):
            Tensor3.build((1, 1, 1), [(0, 0, 0, 1), (0, 0, 0, 2)])
        with self.assertRaises(ValueError):
            Tensor3.build((1, 1, 1), {(1, 0, 0): 1})
        with self.assertRaises(ValueError):
            Tensor3((1, 1, 1), {(0, 0, 0): 0})

    def test_zeros_are_dropped(self):
        self.assertEqual(Tensor3.build((2, 2, 2), {(0, 0, 0): 0, (1, 1, 1): 3}).nnz, 1)

    def test_padding(self):
        tensor = Tensor3.build((1, 2, 2), {(0, 1, 1): 1}).padded()
        self.assertEqual(tensor.dims, (2, 2, 2))
        self.assertEqual(permanent3(tensor), 0)


class PermanentDeterminantTest(SimpleTestCase):
    def test_small_values(self):
        self.assertEqual(permanent3(Tensor3.build((1, 1, 1), {(0, 0, 0): 7})), 7)
        self.assertEqual(permanent3(Tensor3.full(2)), 4)
        self.assertEqual(determinant3(Tensor3.full(2)), 0)
        self.assertEqual(permanent3(Tensor3.diagonal([2, 3, 5])), 30)
        self.assertEqual(determinant3(Tensor3.diagonal([2, 3, 5])), 30)

    def test_empty_tensor(self):
        empty = Tensor3.build((0, 0, 0), {})
        self.assertEqual(permanent3(empty), 1)
        self.assertEqual(determinant3(empty), 1)

    def test_polynomial_entries(self):
        x = Polynomial.monomial(1)
        tensor = Tensor3.diagonal([x, x**2])
        self.assertEqual(str(permanent3(tensor)), "x^3")

    def test_dense_guard(self):
        with self.assertRaises(GuardExceeded):
            permanent3(Tensor3.diagonal([1] * 5), method="dense")

    @settings(deadline=None, max_examples=40)
    @given(small_tensors())
    def test_sparse_matches_dense(self, tensor):
        self.assertEqual(permanent3(tensor), permanent3(tensor, method="dense"))
        self.assertEqual(determinant3(tensor), determinant3(tensor, method="dense"))
        self.assertEqual(permanent3(tensor, threads=1), permanent3(tensor, threads=3))

    @settings(deadline=None, max_examples=40)
    @given(small_tensors(), st.data())
    def test_relabelling(self, tensor, data):
        n = tensor.side
        perm = data.draw(st.permutations(range(n)))
        axis = data.draw(st.integers(0, 2))
        moved = tensor.permute_axis(axis, perm)
        self.assertEqual(permanent3(moved), permanent3(tensor))
        expected = determinant3(tensor)
        if axis:
            expected = permutation_sign(perm) * expected
        self.assertEqual(determinant3(moved), expected)

    def test_terms_carry_signs(self):
        terms = contributing_terms(Tensor3.full(2))
        self.assertEqual(len(terms), 4)
        self.assertEqual(sorted(t.sign for t in terms), [-1, -1, 1, 1])

    def test_permutation_sign(self):
        self.assertEqual(permutation_sign([0, 1, 2]), 1)
        self.assertEqual(permutation_sign([1, 0, 2]), -1)
        self.assertEqual(permutation_sign([1, 2, 0]), 1)


class AdjacencyTest(SimpleTestCase):
    def test_triadjacency_of_a_triangle(self):
        config = TriangularConfiguration.build((), ["a", "b", "c"], {"t": ["a", "b", "c"]})
        tensor = triadjacency(config, find_edge_tripartition(config), {"t": 2})
        self.assertEqual(tensor.dims, (1, 1, 1))
        self.assertEqual(str(tensor.get(0, 0, 0)), "x^2")

    def test_unequal_classes_pad_to_zero(self):
        config = TriangularConfiguration.build(
            (), ["a", "b", "c", "d", "e"], {"t1": ["a", "b", "c"], "t2": ["a", "d", "e"]}
        )
        tensor = triadjacency(config, {"a": 1, "b": 2, "c": 3, "d": 2, "e": 3})
        self.assertEqual(tensor.dims, (2, 2, 2))
        self.assertEqual(permanent3(tensor), 0)

    def test_vertex_adjacency(self):
        config = TriangularConfiguration.from_triangles({"t": ("u", "v", "w")})
        classes = find_vertex_tripartition(config)
        self.assertEqual(vertex_adjacency(config, classes, {"t": 5}).get(0, 0, 0), 5)
        with self.assertRaises(TripartitionError):
            vertex_adjacency(config, {"u": 1, "v": 1, "w": 2})

    def test_projection_graphs(self):
        graphs = projection_graphs(Tensor3.diagonal([1, 1, 1]))
        self.assertEqual(graphs.g1.edges, (("a0", "b0"), ("a1", "b1"), ("a2", "b2")))
        self.assertEqual(graphs.g2.edges, (("a0", "c0"), ("a1", "c1"), ("a2", "c2")))
        self.assertEqual(len(projection_graphs(Tensor3.full(2)).g1.edges), 4)

    def test_apply_signing(self):
        tensor = Tensor3.full(2)
        graphs = projection_graphs(tensor)
        s1 = {edge: 1 for edge in graphs.g1.edges}
        s2 = {edge: 1 for edge in graphs.g2.edges}
        self.assertEqual(apply_signing(tensor, s1, s2), tensor)
        s1[("a0", "b1")] = -1
        signed = apply_signing(tensor, s1, s2)
        self.assertEqual(signed.get(0, 1, 0), -1)
        self.assertEqual(signed.get(0, 1, 1), -1)
        self.assertEqual(signed.get(0, 0, 1), 1)


class MatrixTest(SimpleTestCase):
    def test_permanent2(self):
        self.assertEqual(permanent2([[1, 0], [0, 1]]), 1)
        self.assertEqual(permanent2([[1] * 3] * 3), 6)
        self.assertEqual(permanent2([]), 1)

    def test_determinant2(self):
        self.assertEqual(determinant2([[Fraction(1, 2), 1], [1, 4]]), 1)
        with self.assertRaises(TypeError):
            determinant2([[Polynomial.monomial(1)]])

    @settings(deadline=None, max_examples=50)
    @given(square_matrices())
    def test_against_sympy(self, rows):
        matrix = sympy.Matrix(rows)
        self.assertEqual(determinant2(rows), matrix.det())
        self.assertEqual(permanent2(rows), matrix.per())


class PfaffianSigningTest(SimpleTestCase):
    def test_forest_needs_no_flips(self):
        path = BipartiteGraph.build(["a0", "a1"], ["b0", "b1"], [("a0", "b0"), ("a1", "b0"), ("a1", "b1")])
        self.assertEqual(set(find_pfaffian_signing(path).values()), {1})

    def test_four_cycle(self):
        graph = four_cycle()
        signing = find_pfaffian_signing(graph)
        self.assertTrue(check_pfaffian_signing(graph, signing))
        self.assertEqual(sum(1 for s in signing.values() if s < 0) % 2, 1)

    def test_k33_has_no_signing(self):
        left, right = ["a0", "a1", "a2"], ["b0", "b1", "b2"]
        graph = BipartiteGraph.build(left, right, itertools.product(left, right))
        self.assertIsNone(find_pfaffian_signing(graph))

    def test_sign_via_projections(self):
        for tensor in (Tensor3.diagonal([2, 3, 5]), Tensor3.full(2)):
            signed = kasteleyn_sign_via_k1(tensor)
            self.assertIsNotNone(signed)
            self.assertTrue(signed.verified)
            self.assertEqual(determinant3(signed.tensor), permanent3(tensor))

    def test_not_certified(self):
        # both projections of the full cube of side 3 are K3,3
        self.assertIsNone(kasteleyn_sign_via_k1(Tensor3.full(3)))

    def test_sweep(self):
        df = projection_signing_sweep(count=20, seed=3)
        self.assertEqual(len(df), 20)
        self.assertTrue(df["equal"].all())


class BinetCauchyTest(SimpleTestCase):
    def test_contracted_tensor(self):
        triple = RectMatrixTriple.build([[1, 1]], [[1, 1]], [[1, 1]])
        self.assertEqual(binet_cauchy_C(triple).get(0, 0, 0), 2)
        self.assertEqual(binet_cauchy_rhs(triple), 2)

    def test_shape_checks(self):
        with self.assertRaises(ValueError):
            RectMatrixTriple.build([[1, 2]], [[1, 2]], [[1]])
        with self.assertRaises(ValueError):
            RectMatrixTriple.build([[1], [2]], [[1], [2]], [[1], [2]])

    @settings(deadline=None, max_examples=30)
    @given(st.integers(1, 3), st.integers(0, 2), st.data())
    def test_identity(self, r, extra, data):
        n = r + extra
        block = st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=r, max_size=r)
        triple = RectMatrixTriple.build(data.draw(block), data.draw(block), data.draw(block))
        self.assertEqual(determinant3(binet_cauchy_C(triple)), binet_cauchy_rhs(triple))

    def test_sweep(self):
        df = binet_cauchy_sweep(count=100, seed=1)
        self.assertEqual(len(df), 100)
        self.assertTrue(df["equal"].all())
