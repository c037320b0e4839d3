from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from app.algebra import (
    BinaryCode,
    Polynomial,
    dual_code,
    fold_enumerator,
    gf_p_nullspace,
    gf_p_rank,
    macwilliams_transform,
    require_prime,
    span_weight_enumerator,
    weight_enumerator,
)
from app.errors import DependentRowsError, FoldError, GuardExceeded


@st.composite
def systematic_codes(draw):
    """[I_k | R] generators, so the rows are always independent."""
    k = draw(st.integers(1, 4))
    extra = draw(st.integers(0, 4))
    tail = draw(st.lists(st.lists(st.integers(0, 1), min_size=extra, max_size=extra), min_size=k, max_size=k))
    rows = [[int(i == j) for j in range(k)] + tail[i] for i in range(k)]
    return BinaryCode.from_rows(rows, k + extra)


class PolynomialTest(SimpleTestCase):
    def test_text_form(self):
        self.assertEqual(str(Polynomial({0: 1, 6: 1})), "1 + x^6")
        self.assertEqual(str(Polynomial({3: -1})), "-x^3")
        self.assertEqual(str(Polynomial({0: 1, 3: -2})), "1 - 2*x^3")
        self.assertEqual(str(Polynomial()), "0")

    def test_parse(self):
        self.assertEqual(Polynomial.parse("1 + x^6"), Polynomial({0: 1, 6: 1}))
        self.assertEqual(Polynomial.parse("x^2 + x^5"), Polynomial({2: 1, 5: 1}))
        self.assertEqual(Polynomial.parse("-2*x^3 + 1"), Polynomial({0: 1, 3: -2}))
        self.assertEqual(Polynomial.parse("3x"), Polynomial({1: 3}))
        for bad in ("", "*x", "1 + + x", "x^^2"):
            with self.assertRaises(ValueError):
                Polynomial.parse(bad)

    def test_constants_compare_with_ints(self):
        self.assertEqual(Polynomial.constant(5), 5)
        self.assertEqual(hash(Polynomial.constant(5)), hash(5))
        self.assertEqual(Polynomial.zero(), 0)
        self.assertFalse(Polynomial.zero())

    def test_arithmetic(self):
        x = Polynomial.monomial(1)
        self.assertEqual((1 + x) ** 2, Polynomial({0: 1, 1: 2, 2: 1}))
        self.assertEqual((1 + x) * (1 - x), Polynomial({0: 1, 2: -1}))
        self.assertEqual((x - x), 0)
        self.assertEqual(Polynomial({0: 1, 2: 3})(1), 4)


class WeightEnumeratorTest(SimpleTestCase):
    def test_repetition_code(self):
        self.assertEqual(weight_enumerator(BinaryCode.from_rows([[1, 1, 1]])), Polynomial({0: 1, 3: 1}))

    def test_even_weight_code(self):
        code = BinaryCode.from_rows([[1, 1, 0], [0, 1, 1]])
        self.assertEqual(weight_enumerator(code), Polynomial({0: 1, 2: 3}))

    def test_zero_dimensional_code(self):
        self.assertEqual(weight_enumerator(BinaryCode.from_rows([], 3)), 1)

    def test_dependent_rows(self):
        with self.assertRaises(DependentRowsError):
            weight_enumerator(BinaryCode.from_rows([[1, 1, 0], [1, 1, 0]]))

    def test_macwilliams_on_repetition(self):
        self.assertEqual(macwilliams_transform(Polynomial({0: 1, 3: 1}), 3, 1), Polynomial({0: 1, 2: 3}))

    @settings(deadline=None, max_examples=40)
    @given(systematic_codes())
    def test_enumerator_properties(self, code):
        wenum = weight_enumerator(code)
        self.assertEqual(wenum.constant_term(), 1)
        self.assertEqual(wenum(1), 2**code.k)
        self.assertEqual(macwilliams_transform(wenum, code.n, code.k), weight_enumerator(dual_code(code)))


class FoldTest(SimpleTestCase):
    def test_fold(self):
        self.assertEqual(str(fold_enumerator(Polynomial({0: 1, 6: 1}), 4)), "1 + x^1")
        self.assertEqual(fold_enumerator(Polynomial({0: 1, 4: 1}), 8), Polynomial({0: 1, 2: 1}))

    def test_odd_residue(self):
        with self.assertRaises(FoldError) as cm:
            fold_enumerator(Polynomial({2: 1, 5: 1}), 4)
        self.assertEqual(cm.exception.exponent, 5)

    @given(st.dictionaries(st.integers(0, 12).map(lambda i: 2 * i), st.integers(-5, 5)), st.integers(1, 6))
    def test_fold_keeps_coefficient_sum(self, terms, half):
        poly = Polynomial(terms)
        self.assertEqual(fold_enumerator(poly, 2 * half)(1), poly(1))


class GaloisFieldTest(SimpleTestCase):
    def test_nullspace(self):
        self.assertEqual(gf_p_nullspace([[1, 0], [0, 1]], 2), [])
        self.assertEqual(gf_p_nullspace([[1, 1]], 2), [(1, 1)])
        self.assertEqual(gf_p_nullspace([[1, 1]], 3), [(2, 1)])

    def test_rank(self):
        self.assertEqual(gf_p_rank([[1, 1], [1, 1]], 2), 1)
        self.assertEqual(gf_p_rank([[1, 2], [2, 1]], 3), 1)
        self.assertEqual(gf_p_rank([[1, 2], [2, 1]], 5), 2)
        self.assertEqual(gf_p_rank([], 2, n_cols=3), 0)

    def test_require_prime(self):
        for bad in (0, 1, 4, 9):
            with self.assertRaises(ValueError):
                require_prime(bad)
        require_prime(7)

    def test_span_is_guarded_on_codewords(self):
        basis = [[int(i == j) for j in range(16)] for i in range(16)]
        with self.assertRaises(GuardExceeded) as cm:
            span_weight_enumerator(basis, 16, 3)
        self.assertEqual(cm.exception.value, 3**16)
        self.assertEqual(str(span_weight_enumerator(basis[:2], 16, 3)), "1 + 4*x^1 + 4*x^2")
