"""Exact scalar and polynomial arithmetic, GF(p) linear algebra and weight enumerators."""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from app.errors import DependentRowsError, FoldError, check_guard

logger = logging.getLogger(__name__)

_TERM_RE = re.compile(r"^(?P<coeff>\d+)?(?:(?P<star>\*)?x(?:\^(?P<exp>\d+))?)?$")


class Polynomial:
    """Sparse univariate polynomial with big-integer coefficients.

    Stored as ascending ``(exponent, coefficient)`` pairs with no zero
    coefficient. Compares equal to plain ints when constant, so ring code can
    mix ``0``/``1`` literals with polynomial entries.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        merged: dict[int, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exp, coeff in items:
            exp = int(exp)
            if exp < 0:
                raise ValueError(f"negative exponent {exp}")
            merged[exp] = merged.get(exp, 0) + int(coeff)
        self.terms: tuple[tuple[int, int], ...] = tuple(
            (e, c) for e, c in sorted(merged.items()) if c != 0
        )

    @classmethod
    def monomial(cls, exp: int, coeff: int = 1) -> Polynomial:
        return cls({exp: coeff})

    @classmethod
    def constant(cls, value: int) -> Polynomial:
        return cls({0: value})

    @classmethod
    def zero(cls) -> Polynomial:
        return cls()

    @classmethod
    def one(cls) -> Polynomial:
        return cls({0: 1})

    @classmethod
    def lift(cls, value: Polynomial | int) -> Polynomial:
        if isinstance(value, Polynomial):
            return value
        if isinstance(value, int):
            return cls.constant(value)
        raise TypeError(f"cannot lift {type(value).__name__} to Polynomial")

    def as_dict(self) -> dict[int, int]:
        return dict(self.terms)

    def coefficient(self, exp: int) -> int:
        return self.as_dict().get(exp, 0)

    @property
    def degree(self) -> int:
        return self.terms[-1][0] if self.terms else -1

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == 0)

    def constant_term(self) -> int:
        return self.coefficient(0)

    def coefficient_sum(self) -> int:
        return sum(c for _, c in self.terms)

    def __call__(self, x):
        total = 0
        for exp, coeff in self.terms:
            total += coeff * x**exp
        return total

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self.terms
            return self.terms == ((0, other),)
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_constant():
            return hash(self.constant_term())
        return hash(self.terms)

    def __add__(self, other):
        if not isinstance(other, (Polynomial, int)):
            return NotImplemented
        other = Polynomial.lift(other)
        return Polynomial(itertools.chain(self.terms, other.terms))

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial((e, -c) for e, c in self.terms)

    def __sub__(self, other):
        if not isinstance(other, (Polynomial, int)):
            return NotImplemented
        return self + (-Polynomial.lift(other))

    def __rsub__(self, other):
        if not isinstance(other, (Polynomial, int)):
            return NotImplemented
        return Polynomial.lift(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            return Polynomial((e, c * other) for e, c in self.terms)
        if not isinstance(other, Polynomial):
            return NotImplemented
        product: dict[int, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                product[e1 + e2] = product.get(e1 + e2, 0) + c1 * c2
        return Polynomial(product)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> Polynomial:
        if power < 0:
            raise ValueError("negative power")
        result = Polynomial.one()
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def exact_div(self, divisor: int) -> Polynomial:
        for exp, coeff in self.terms:
            if coeff % divisor:
                raise ValueError(f"coefficient {coeff} of x^{exp} not divisible by {divisor}")
        return Polynomial((e, c // divisor) for e, c in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for idx, (exp, coeff) in enumerate(self.terms):
            magnitude = abs(coeff)
            if exp == 0:
                body = str(magnitude)
            elif magnitude == 1:
                body = f"x^{exp}"
            else:
                body = f"{magnitude}*x^{exp}"
            if idx == 0:
                parts.append(f"-{body}" if coeff < 0 else body)
            else:
                parts.append(f" - {body}" if coeff < 0 else f" + {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.as_dict()!r})"

    @classmethod
    def parse(cls, text: str) -> Polynomial:
        """Parse the text form ``c0 + c1*x^e1 + ...`` (``x``, ``c*x`` and ``-`` accepted)."""
        compact = text.replace(" ", "")
        if not compact:
            raise ValueError("empty polynomial text")
        if compact[0] not in "+-":
            compact = "+" + compact
        pieces = re.findall(r"[+-][^+-]*", compact)
        if "".join(pieces) != compact:
            raise ValueError(f"cannot parse polynomial {text!r}")
        terms: dict[int, int] = {}
        for piece in pieces:
            sign = -1 if piece[0] == "-" else 1
            match = _TERM_RE.match(piece[1:])
            if not piece[1:] or match is None:
                raise ValueError(f"cannot parse term {piece!r} of {text!r}")
            has_x = "x" in piece
            if match.group("star") and match.group("coeff") is None:
                raise ValueError(f"dangling '*' in term {piece!r}")
            coeff = int(match.group("coeff")) if match.group("coeff") else 1
            exp = (int(match.group("exp")) if match.group("exp") else 1) if has_x else 0
            terms[exp] = terms.get(exp, 0) + sign * coeff
        return cls(terms)


@dataclass(frozen=True)
class BinaryCode:
    """Binary linear code given by a k×n generator matrix over GF(2)."""

    rows: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        for row in self.rows:
            if len(row) != self.n:
                raise ValueError(f"row length {len(row)} differs from n={self.n}")
            if any(bit not in (0, 1) for bit in row):
                raise ValueError("generator entries must be 0 or 1")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], n: int | None = None) -> BinaryCode:
        rows = tuple(tuple(int(b) for b in row) for row in rows)
        if n is None:
            if not rows:
                raise ValueError("n is required for a zero-dimensional code")
            n = len(rows[0])
        return cls(rows, n)

    @property
    def k(self) -> int:
        return len(self.rows)


def require_prime(p: int) -> None:
    if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
        raise ValueError(f"{p} is not prime")
    if p >= 2**28:
        raise ValueError(f"prime {p} too large for int64 elimination")


def _as_matrix(matrix, p: int, n_cols: int | None = None) -> np.ndarray:
    arr = np.array(matrix, dtype=np.int64)
    if arr.size == 0:
        cols = n_cols if n_cols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        return np.zeros((0, cols), dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError("matrix must be 2-dimensional")
    return arr % p


def _rref(arr: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(p); pivots taken left to right, top to bottom."""
    arr = arr.copy()
    rows, cols = arr.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nonzero = np.nonzero(arr[r:, c])[0]
        if nonzero.size == 0:
            continue
        pivot_row = r + int(nonzero[0])
        if pivot_row != r:
            arr[[r, pivot_row]] = arr[[pivot_row, r]]
        inv = pow(int(arr[r, c]), -1, p)
        arr[r] = (arr[r] * inv) % p
        for other in range(rows):
            if other != r and arr[other, c]:
                arr[other] = (arr[other] - arr[other, c] * arr[r]) % p
        pivots.append(c)
        r += 1
    return arr, pivots


def gf_p_rank(matrix, p: int, n_cols: int | None = None) -> int:
    require_prime(p)
    _, pivots = _rref(_as_matrix(matrix, p, n_cols), p)
    return len(pivots)


def gf_p_nullspace(matrix, p: int, n_cols: int | None = None) -> list[tuple[int, ...]]:
    """Basis of ``{x | A x = 0}`` over GF(p), one vector per free column in ascending order."""
    require_prime(p)
    arr = _as_matrix(matrix, p, n_cols)
    reduced, pivots = _rref(arr, p)
    cols = arr.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for f in free:
        vec = [0] * cols
        vec[f] = 1
        for r, c in enumerate(pivots):
            vec[c] = int(-reduced[r, f] % p)
        basis.append(tuple(vec))
    return basis


def span_weight_enumerator(basis: Sequence[Sequence[int]], n: int, p: int) -> Polynomial:
    """Hamming weight enumerator of the GF(p)-span of independent ``basis`` vectors."""
    dim = len(basis)
    counts = np.zeros(n + 1, dtype=np.int64)
    if dim == 0:
        counts[0] = 1
        return Polynomial({0: 1})
    check_guard("CODEWORDS", p**dim)
    gen = np.array(basis, dtype=np.int64) % p
    tail = 0
    while tail < dim and p ** (tail + 1) <= 4096:
        tail += 1
    head = dim - tail
    tail_coeffs = np.array(list(itertools.product(range(p), repeat=tail)), dtype=np.int64).reshape(-1, tail)
    tail_words = (tail_coeffs @ gen[head:]) % p if tail else np.zeros((1, n), dtype=np.int64)
    for prefix in itertools.product(range(p), repeat=head):
        shift = (np.array(prefix, dtype=np.int64) @ gen[:head]) % p if head else 0
        words = (tail_words + shift) % p
        weights = np.count_nonzero(words, axis=1)
        counts += np.bincount(weights, minlength=n + 1)
    return Polynomial({w: int(c) for w, c in enumerate(counts) if c})


def weight_enumerator(code: BinaryCode) -> Polynomial:
    check_guard("CODE_DIM", code.k)
    if code.k and gf_p_rank(code.rows, 2, code.n) != code.k:
        raise DependentRowsError(f"generator rows are dependent (k={code.k})")
    wenum = span_weight_enumerator(code.rows, code.n, 2)
    logger.debug("weight enumerator of [%d,%d] code: %s", code.n, code.k, wenum)
    return wenum


def fold_enumerator(poly: Polynomial, e: int) -> Polynomial:
    """Collapse exponents i to (i mod e)/2, merging coefficients."""
    if e <= 0:
        raise ValueError("e must be a positive integer")
    folded: dict[int, int] = {}
    for exp, coeff in poly.terms:
        residue = exp % e
        if residue % 2:
            raise FoldError(exp, e)
        folded[residue // 2] = folded.get(residue // 2, 0) + coeff
    return Polynomial(folded)


def dual_code(code: BinaryCode) -> BinaryCode:
    basis = gf_p_nullspace(code.rows, 2, code.n) if code.k else [
        tuple(int(i == j) for j in range(code.n)) for i in range(code.n)
    ]
    return BinaryCode(tuple(basis), code.n)


def macwilliams_transform(wenum: Polynomial, n: int, k: int) -> Polynomial:
    """Enumerator of the dual code: 2^-k * sum_i A_i (1+x)^(n-i) (1-x)^i."""
    one_plus = Polynomial({0: 1, 1: 1})
    one_minus = Polynomial({0: 1, 1: -1})
    total = Polynomial.zero()
    for weight, count in wenum.terms:
        total = total + count * (one_plus ** (n - weight)) * (one_minus**weight)
    return total.exact_div(2**k)
