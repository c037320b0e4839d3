"""Exact 3-matrix algebra: permanents, determinants, adjacency tensors, signings, Binet-Cauchy."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from app.algebra import Polynomial
from app.core import TriangularConfiguration, Weighting, check_edge_tripartition, check_vertex_tripartition
from app.errors import SigningError, TripartitionError, check_guard, guard_limit
from app.exact_cover import exact_cover
from app.graphs import BipartiteGraph

logger = logging.getLogger(__name__)

Index = tuple[int, int, int]
EdgeSigning = dict[tuple[str, str], int]


def ring_zero(values: Iterable[Any]):
    """Additive identity of the ring the values live in (Polynomial if any value is one)."""
    return Polynomial.zero() if any(isinstance(v, Polynomial) for v in values) else 0


def ring_product(values: Iterable[Any]):
    product: Any = 1
    for value in values:
        product = value * product
    return product


@dataclass(frozen=True)
class Tensor3:
    dims: tuple[int, int, int]
    entries: Mapping[Index, Any]

    def __post_init__(self):
        if len(self.dims) != 3 or any(d < 0 for d in self.dims):
            raise ValueError(f"bad dims {self.dims}")
        for idx, value in self.entries.items():
            if any(not 0 <= x < d for x, d in zip(idx, self.dims)):
                raise ValueError(f"index {idx} outside dims {self.dims}")
            if value == 0:
                raise ValueError(f"explicit zero stored at {idx}")

    @classmethod
    def build(cls, dims: Sequence[int], entries: Mapping[Index, Any] | Iterable[tuple]) -> Tensor3:
        items = entries.items() if isinstance(entries, Mapping) else (((i, j, k), v) for i, j, k, v in entries)
        stored: dict[Index, Any] = {}
        for (i, j, k), value in items:
            idx = (int(i), int(j), int(k))
            if idx in stored:
                raise ValueError(f"index {idx} given twice")
            if value != 0:
                stored[idx] = value
        return cls((int(dims[0]), int(dims[1]), int(dims[2])), dict(sorted(stored.items())))

    @classmethod
    def diagonal(cls, values: Sequence[Any]) -> Tensor3:
        n = len(values)
        return cls.build((n, n, n), {(i, i, i): v for i, v in enumerate(values)})

    @classmethod
    def full(cls, n: int, value: Any = 1) -> Tensor3:
        return cls.build((n, n, n), {idx: value for idx in itertools.product(range(n), repeat=3)})

    @property
    def is_cube(self) -> bool:
        return self.dims[0] == self.dims[1] == self.dims[2]

    @property
    def side(self) -> int:
        return max(self.dims)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def get(self, i: int, j: int, k: int):
        return self.entries.get((i, j, k), 0)

    def padded(self) -> Tensor3:
        """Zero-pad to a cube of side max(dims)."""
        n = self.side
        return self if self.is_cube else Tensor3((n, n, n), self.entries)

    def permute_axis(self, axis: int, perm: Sequence[int]) -> Tensor3:
        """Relabel index x on ``axis`` as ``perm[x]``."""
        if sorted(perm) != list(range(self.dims[axis])):
            raise ValueError(f"not a permutation of axis {axis}")
        moved = {}
        for idx, value in self.entries.items():
            new = list(idx)
            new[axis] = perm[idx[axis]]
            moved[tuple(new)] = value
        return Tensor3.build(self.dims, moved)

    def map_values(self, fn) -> Tensor3:
        return Tensor3.build(self.dims, {idx: fn(idx, v) for idx, v in self.entries.items()})


def permutation_sign(perm: Sequence[int]) -> int:
    inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class Term:
    sigma1: tuple[int, ...]
    sigma2: tuple[int, ...]
    value: Any

    @property
    def sign(self) -> int:
        return permutation_sign(self.sigma1) * permutation_sign(self.sigma2)


def contributing_terms(A: Tensor3, threads: int | None = None) -> list[Term]:
    """Every (sigma1, sigma2) with a nonzero product, found by exact cover on rows and both column sets."""
    A = A.padded()
    n = A.side
    indices = list(A.entries)
    options = [(1 << i) | (1 << (n + j)) | (1 << (2 * n + k)) for i, j, k in indices]
    solutions = exact_cover(options, (1 << (3 * n)) - 1, threads)
    terms = []
    for sol in solutions:
        chosen = sorted(indices[o] for o in sol)
        sigma1 = tuple(j for _, j, _ in chosen)
        sigma2 = tuple(k for _, _, k in chosen)
        terms.append(Term(sigma1, sigma2, ring_product(A.entries[idx] for idx in chosen)))
    terms.sort(key=lambda t: (t.sigma1, t.sigma2))
    logger.debug("side %d tensor with %d nonzeros has %d terms", n, A.nnz, len(terms))
    return terms


def _dense_sum(A: Tensor3, signed: bool):
    A = A.padded()
    n = A.side
    check_guard("DENSE_N", n)
    total = ring_zero(A.entries.values())
    for s1 in itertools.permutations(range(n)):
        for s2 in itertools.permutations(range(n)):
            product = ring_product(A.get(i, s1[i], s2[i]) for i in range(n))
            if product == 0:
                continue
            if signed and permutation_sign(s1) * permutation_sign(s2) < 0:
                product = -product
            total = total + product
    return total


def _sparse_sum(A: Tensor3, signed: bool, threads: int | None):
    total = ring_zero(A.entries.values())
    for term in contributing_terms(A, threads):
        total = total + (term.value if not signed or term.sign > 0 else -term.value)
    return total


def permanent3(A: Tensor3, method: str = "sparse", threads: int | None = None):
    if method == "dense":
        return _dense_sum(A, signed=False)
    return _sparse_sum(A, signed=False, threads=threads)


def determinant3(A: Tensor3, method: str = "sparse", threads: int | None = None):
    if method == "dense":
        return _dense_sum(A, signed=True)
    return _sparse_sum(A, signed=True, threads=threads)


def _class_orders(classes: Mapping[str, int], orders: Sequence[Sequence[str]] | None) -> list[list[str]]:
    if orders is not None:
        return [list(axis) for axis in orders]
    return [sorted(x for x, c in classes.items() if c == k) for k in (1, 2, 3)]


def triadjacency(
    config: TriangularConfiguration, edge_classes: Mapping[str, int], weighting: Weighting | None = None
) -> Tensor3:
    """Entry x^w(t) at the (class 1, class 2, class 3) edge indices of each triangle t."""
    problems = check_edge_tripartition(config, edge_classes)
    if problems:
        raise TripartitionError("; ".join(problems[:5]))
    orders = _class_orders(edge_classes, None)
    pos = [{e: x for x, e in enumerate(axis)} for axis in orders]
    entries = {}
    for t in config.sorted_triangles():
        by_class = {edge_classes[e]: e for e in config.triangles[t]}
        idx = tuple(pos[c - 1][by_class[c]] for c in (1, 2, 3))
        w = 1 if weighting is None else weighting.get(t, 1)
        entries[idx] = Polynomial.monomial(w)
    return Tensor3.build(tuple(len(axis) for axis in orders), entries).padded()


def vertex_adjacency(
    config: TriangularConfiguration,
    vertex_classes: Mapping[str, int],
    entry_values: Mapping[str, Any] | None = None,
    orders: Sequence[Sequence[str]] | None = None,
) -> Tensor3:
    """Entry ``entry_values[t]`` (default 1) at the class-ordered vertex indices of each triangle t."""
    problems = check_vertex_tripartition(config, vertex_classes)
    if problems:
        raise TripartitionError("; ".join(problems[:5]))
    axes = _class_orders(vertex_classes, orders)
    pos = [{v: x for x, v in enumerate(axis)} for axis in axes]
    entries = {}
    for t in config.sorted_triangles():
        by_class = {vertex_classes[v]: v for v in config.vertex_triple(t)}
        idx = tuple(pos[c - 1][by_class[c]] for c in (1, 2, 3))
        entries[idx] = 1 if entry_values is None else entry_values.get(t, 1)
    return Tensor3.build(tuple(len(axis) for axis in axes), entries).padded()


@dataclass(frozen=True)
class ProjectionGraphs:
    g1: BipartiteGraph
    g2: BipartiteGraph


def axis_names(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{x}" for x in range(n))


def projection_graphs(A: Tensor3) -> ProjectionGraphs:
    n0, n1, n2 = A.dims
    e1 = {(f"a{i}", f"b{j}") for i, j, _ in A.entries}
    e2 = {(f"a{i}", f"c{k}") for i, _, k in A.entries}
    return ProjectionGraphs(
        BipartiteGraph.build(axis_names("a", n0), axis_names("b", n1), e1),
        BipartiteGraph.build(axis_names("a", n0), axis_names("c", n2), e2),
    )


def apply_signing(A: Tensor3, s1: EdgeSigning, s2: EdgeSigning) -> Tensor3:
    def signed(idx: Index, value):
        i, j, k = idx
        e1, e2 = (f"a{i}", f"b{j}"), (f"a{i}", f"c{k}")
        if e1 not in s1 or e2 not in s2:
            raise SigningError(f"missing sign for {e1 if e1 not in s1 else e2}")
        return value if s1[e1] * s2[e2] > 0 else -value

    return A.map_values(signed)


def permanent2(matrix: Sequence[Sequence[Any]]):
    """Ryser's formula, columns visited in Gray-code order."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    check_guard("RYSER_N", n)
    if n == 0:
        return 1
    zero = ring_zero(v for row in matrix for v in row)
    sums: list[Any] = [zero] * n
    total: Any = zero
    prev = 0
    for step in range(1, 2**n):
        gray = step ^ (step >> 1)
        j = (gray ^ prev).bit_length() - 1
        add = bool(gray >> j & 1)
        sums = [s + row[j] if add else s - row[j] for s, row in zip(sums, matrix)]
        prev = gray
        if any(s == 0 for s in sums):
            continue
        product = ring_product(sums)
        total = total + product if (n - gray.bit_count()) % 2 == 0 else total - product
    return total


def determinant2(matrix: Sequence[Sequence[Any]]):
    """Bareiss elimination for integers, Fraction elimination for rationals."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    if n == 0:
        return 1
    values = [v for row in matrix for v in row]
    if all(isinstance(v, int) for v in values):
        return _bareiss([list(row) for row in matrix])
    if all(isinstance(v, (int, Fraction)) for v in values):
        return _fraction_det([[Fraction(v) for v in row] for row in matrix])
    raise TypeError("determinant2 supports int and Fraction entries")


def _bareiss(a: list[list[int]]) -> int:
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _fraction_det(a: list[list[Fraction]]) -> Fraction:
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        pivot = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            factor = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= factor * a[k][j]
    return det


def signed_biadjacency(graph: BipartiteGraph, signing: EdgeSigning) -> list[list[int]]:
    rows = {v: x for x, v in enumerate(graph.left)}
    cols = {v: x for x, v in enumerate(graph.right)}
    matrix = [[0] * len(graph.right) for _ in graph.left]
    for a, b in graph.edges:
        matrix[rows[a]][cols[b]] = signing[(a, b)]
    return matrix


def check_pfaffian_signing(graph: BipartiteGraph, signing: EdgeSigning) -> bool:
    if len(graph.left) != len(graph.right):
        return True
    return determinant2(signed_biadjacency(graph, signing)) == permanent2(graph.biadjacency())


def find_pfaffian_signing(graph: BipartiteGraph, threads: int | None = None) -> EdgeSigning | None:
    """Search for a signing whose determinant equals the permanent.

    Switching all signs at one vertex multiplies every perfect matching term by
    the same factor, so spanning-forest edges can be fixed to +1 and only the
    remaining edges searched; a last switch at one vertex fixes the overall sign.
    """
    check_guard("SIGNING_EDGES", len(graph.edges))
    signing: EdgeSigning = {edge: 1 for edge in graph.edges}
    if len(graph.left) != len(graph.right):
        return signing
    matchings = graph.perfect_matchings(threads)
    if not matchings:
        return signing
    rows = {v: x for x, v in enumerate(graph.left)}
    cols = {v: x for x, v in enumerate(graph.right)}
    forest = set(graph.spanning_forest())
    free = [edge for edge in graph.edges if edge not in forest]
    free_bit = {edge: 1 << x for x, edge in enumerate(free)}
    terms = []
    for m in matchings:
        perm = [0] * len(graph.left)
        mask = 0
        for a, b in m:
            perm[rows[a]] = cols[b]
            mask |= free_bit.get((a, b), 0)
        terms.append((permutation_sign(perm), mask))
    logger.debug("signing search over %d free edges, %d matchings", len(free), len(terms))
    for flips in range(2 ** len(free)):
        common = None
        for sign, mask in terms:
            term = -sign if (mask & flips).bit_count() % 2 else sign
            if common is None:
                common = term
            elif term != common:
                break
        else:
            for edge, bit in free_bit.items():
                if flips & bit:
                    signing[edge] = -1
            if common < 0:
                pivot = graph.left[0]
                for edge in graph.edges:
                    if edge[0] == pivot:
                        signing[edge] = -signing[edge]
            return signing
    return None


@dataclass(frozen=True)
class K1Signing:
    tensor: Tensor3
    s1: EdgeSigning
    s2: EdgeSigning
    verified: bool


def kasteleyn_sign_via_k1(A: Tensor3, threads: int | None = None) -> K1Signing | None:
    """Sign A from Pfaffian signings of both projection graphs; None means not certified."""
    A = A.padded()
    graphs = projection_graphs(A)
    s1 = find_pfaffian_signing(graphs.g1, threads)
    s2 = find_pfaffian_signing(graphs.g2, threads) if s1 is not None else None
    if s1 is None or s2 is None:
        logger.info("projection graph without a Pfaffian signing; not certified")
        return None
    signed = apply_signing(A, s1, s2)
    verified = False
    if A.side <= guard_limit("CERTIFY_SIDE"):
        if determinant3(signed, threads=threads) != permanent3(A, threads=threads):
            logger.error("signed tensor determinant differs from the permanent")
            raise SigningError("signed determinant does not match the permanent")
        verified = True
    return K1Signing(signed, s1, s2, verified)


@dataclass(frozen=True)
class RectMatrixTriple:
    a1: tuple[tuple[Any, ...], ...]
    a2: tuple[tuple[Any, ...], ...]
    a3: tuple[tuple[Any, ...], ...]

    def __post_init__(self):
        shapes = {(len(m), len(m[0]) if m else 0) for m in (self.a1, self.a2, self.a3)}
        if len(shapes) != 1:
            raise ValueError(f"matrices differ in shape: {sorted(shapes)}")
        for m in (self.a1, self.a2, self.a3):
            if any(len(row) != self.n for row in m):
                raise ValueError("ragged matrix")
        if self.r > self.n:
            raise ValueError(f"r={self.r} exceeds n={self.n}")

    @classmethod
    def build(cls, a1, a2, a3) -> RectMatrixTriple:
        return cls(*(tuple(tuple(row) for row in m) for m in (a1, a2, a3)))

    @property
    def r(self) -> int:
        return len(self.a1)

    @property
    def n(self) -> int:
        return len(self.a1[0]) if self.a1 else 0


def binet_cauchy_C(triple: RectMatrixTriple) -> Tensor3:
    r = triple.r
    entries = {}
    for idx in itertools.product(range(r), repeat=3):
        i1, i2, i3 = idx
        entries[idx] = sum(triple.a1[i1][j] * triple.a2[i2][j] * triple.a3[i3][j] for j in range(triple.n))
    return Tensor3.build((r, r, r), entries)


def _columns(matrix, cols: Sequence[int]) -> list[list[Any]]:
    return [[row[j] for j in cols] for row in matrix]


def binet_cauchy_rhs(triple: RectMatrixTriple):
    """Sum over r-column subsets I of Per(A1_I) det(A2_I) det(A3_I)."""
    check_guard("BC_SUBSETS", math.comb(triple.n, triple.r))
    total: Any = 0
    for cols in itertools.combinations(range(triple.n), triple.r):
        d2 = determinant2(_columns(triple.a2, cols))
        if d2 == 0:
            continue
        d3 = determinant2(_columns(triple.a3, cols))
        if d3 == 0:
            continue
        total += permanent2(_columns(triple.a1, cols)) * d2 * d3
    return total
