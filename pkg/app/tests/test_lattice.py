from fractions import Fraction

from django.test import SimpleTestCase

from app.errors import GuardExceeded, InvalidConfiguration
from app.lattice import (
    _decimal,
    biadjacency,
    cubic_lattice,
    dimer_polynomial,
    embed_T,
    embedding_problems,
    point_name,
    to_off,
)
from app.kasteleyn_construct import v, w


class CubicLatticeTest(SimpleTestCase):
    def test_counts(self):
        self.assertEqual(len(cubic_lattice(2, 1, 1).edges), 1)
        self.assertEqual(len(cubic_lattice(2, 2, 1).edges), 4)
        lattice = cubic_lattice(2, 2, 2)
        self.assertEqual(len(lattice.points), 8)
        self.assertEqual(len(lattice.edges), 12)
        self.assertEqual(len(lattice.even), len(lattice.odd))

    def test_edges_run_even_to_odd(self):
        for p, q in cubic_lattice(3, 2, 2).edges:
            self.assertEqual(sum(p) % 2, 0)
            self.assertEqual(sum(q) % 2, 1)
            self.assertEqual(sum(abs(a - b) for a, b in zip(p, q)), 1)

    def test_bad_dims(self):
        with self.assertRaises(ValueError):
            cubic_lattice(0, 1, 1)

    def test_names_and_biadjacency(self):
        self.assertEqual(point_name((0, 1, 0)), "p0_1_0")
        matrix = biadjacency(cubic_lattice(2, 1, 1), {((0, 0, 0), (1, 0, 0)): 3})
        self.assertEqual(str(matrix[0][0]), "x^3")


class DimerTest(SimpleTestCase):
    def test_known_counts(self):
        expected = {(2, 1, 1): 1, (2, 2, 1): 2, (3, 2, 1): 3, (4, 2, 1): 5, (2, 2, 2): 9}
        for dims, count in expected.items():
            self.assertEqual(dimer_polynomial(cubic_lattice(*dims)).count, count, dims)

    def test_cube_polynomial(self):
        result = dimer_polynomial(cubic_lattice(2, 2, 2))
        self.assertEqual(str(result.polynomial), "9*x^4")
        self.assertEqual(result.side, 20)
        self.assertEqual(result.tensor_polynomial, result.polynomial)
        self.assertEqual(result.ryser_polynomial, result.polynomial)
        self.assertIsNone(result.flagged)

    def test_symmetry(self):
        counts = {dimer_polynomial(cubic_lattice(*dims)).count for dims in ((2, 2, 1), (2, 1, 2), (1, 2, 2))}
        self.assertEqual(counts, {2})

    def test_odd_vertex_count(self):
        result = dimer_polynomial(cubic_lattice(3, 1, 1))
        self.assertEqual(result.count, 0)
        self.assertEqual(result.flagged, "odd vertex count")

    def test_weighted_edges(self):
        lattice = cubic_lattice(2, 2, 1)
        weights = {((0, 0, 0), (1, 0, 0)): 2, ((1, 1, 0), (0, 1, 0)): 2}
        self.assertEqual(dimer_polynomial(lattice, weights).polynomial.as_dict(), {2: 1, 4: 1})

    def test_pipelines_agree_on_a_larger_box(self):
        result = dimer_polynomial(cubic_lattice(3, 2, 2))
        self.assertGreater(result.count, 0)
        self.assertEqual(result.tensor_polynomial, result.polynomial)

    def test_guard(self):
        with self.assertRaises(GuardExceeded):
            dimer_polynomial(cubic_lattice(6, 3, 1))


class EmbeddingTest(SimpleTestCase):
    def test_lattice_points_stay_put(self):
        emb = embed_T(cubic_lattice(2, 1, 1))
        self.assertEqual(emb.coords[v(1, 1)], (0, 0, 0))
        self.assertEqual(emb.coords[v(2, 1)], (1, 0, 0))
        self.assertEqual(emb.coords[w(0, "e1")], (Fraction(1, 2), Fraction(1, 8), 0))

    def test_non_degenerate(self):
        for dims in ((2, 2, 1), (2, 2, 2)):
            emb = embed_T(cubic_lattice(*dims))
            self.assertEqual(embedding_problems(emb), [])
            self.assertEqual(set(emb.coords), set(emb.config.vertices))

    def test_unequal_parity(self):
        with self.assertRaises(InvalidConfiguration):
            embed_T(cubic_lattice(3, 1, 1))

    def test_off_export(self):
        emb = embed_T(cubic_lattice(2, 1, 1))
        lines = to_off(emb).splitlines()
        self.assertEqual(lines[0], "OFF")
        self.assertEqual(lines[1], f"{len(emb.coords)} {len(emb.config.triangles)} 0")
        self.assertEqual(len(lines), 2 + len(emb.coords) + len(emb.config.triangles))
        self.assertTrue(all(line.startswith("3 ") for line in lines[2 + len(emb.coords) :]))

    def test_decimal(self):
        self.assertEqual(_decimal(Fraction(1, 32)), "0.03125")
        self.assertEqual(_decimal(Fraction(3, 2)), "1.5")
        self.assertEqual(_decimal(Fraction(-1, 8)), "-0.125")
        self.assertEqual(_decimal(Fraction(3)), "3")
        with self.assertRaises(ValueError):
            _decimal(Fraction(1, 3))
