"""Cubic box lattices, their dimer polynomials and a rational 3D realization of T(Q)."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from app.algebra import Polynomial
from app.core import TriangularConfiguration
from app.errors import CertificationError, InvalidConfiguration, check_guard
from app.graphs import BipartiteGraph
from app.kasteleyn_construct import TConstruction, build_T, v, v_prime, w, w0
from app.tensor3 import permanent2, permanent3

logger = logging.getLogger(__name__)

Point = tuple[int, int, int]
Coord = tuple[Fraction, Fraction, Fraction]


def point_name(p: Point) -> str:
    return "p" + "_".join(map(str, p))


@dataclass(frozen=True)
class CubicLattice:
    """a x b x c box of grid points with open boundary, split by coordinate parity."""

    dims: tuple[int, int, int]

    @property
    def points(self) -> list[Point]:
        a, b, c = self.dims
        return list(itertools.product(range(a), range(b), range(c)))

    @property
    def even(self) -> list[Point]:
        return [p for p in self.points if sum(p) % 2 == 0]

    @property
    def odd(self) -> list[Point]:
        return [p for p in self.points if sum(p) % 2 == 1]

    @property
    def edges(self) -> list[tuple[Point, Point]]:
        """Unit edges, each as (even end, odd end)."""
        found = []
        for p in self.even:
            for axis in range(3):
                for step in (-1, 1):
                    q = list(p)
                    q[axis] += step
                    if 0 <= q[axis] < self.dims[axis]:
                        found.append((p, tuple(q)))
        return sorted(found)  # type: ignore

    def graph(self) -> BipartiteGraph:
        return BipartiteGraph.build(
            [point_name(p) for p in self.even],
            [point_name(q) for q in self.odd],
            [(point_name(p), point_name(q)) for p, q in self.edges],
        )


def cubic_lattice(a: int, b: int, c: int) -> CubicLattice:
    if min(a, b, c) < 1:
        raise ValueError("lattice dimensions must be at least 1")
    return CubicLattice((a, b, c))


EdgeWeights = Mapping[tuple[Point, Point], int]


def biadjacency(lattice: CubicLattice, edge_weights: EdgeWeights | None = None) -> list[list[Polynomial | int]]:
    """Even-by-odd matrix with x^w(e) on lattice edges (w defaults to 1)."""
    rows = {p: i for i, p in enumerate(lattice.even)}
    cols = {q: j for j, q in enumerate(lattice.odd)}
    matrix: list[list[Polynomial | int]] = [[0] * len(cols) for _ in rows]
    for p, q in lattice.edges:
        weight = 1 if edge_weights is None else edge_weights.get((p, q), 1)
        matrix[rows[p]][cols[q]] = Polynomial.monomial(weight)
    return matrix


@dataclass(frozen=True)
class DimerResult:
    dims: tuple[int, int, int]
    polynomial: Polynomial
    tensor_polynomial: Polynomial | None
    ryser_polynomial: Polynomial | None
    side: int | None
    flagged: str | None = None

    @property
    def count(self) -> int:
        return self.polynomial(1)


def dimer_polynomial(
    lattice: CubicLattice, edge_weights: EdgeWeights | None = None, threads: int | None = None
) -> DimerResult:
    """Dimer generating function, by direct enumeration and through the T(Q) permanent."""
    n_points = len(lattice.points)
    if n_points % 2 or len(lattice.even) != len(lattice.odd):
        logger.info("lattice %s has no dimer cover: parity classes %d/%d", lattice.dims, len(lattice.even), len(lattice.odd))
        zero = Polynomial.zero()
        return DimerResult(lattice.dims, zero, zero, zero, None, flagged="odd vertex count")
    check_guard("DIMER_VERTICES", n_points)
    graph = lattice.graph()
    names = {point_name(p): p for p in lattice.points}
    terms: dict[int, int] = {}
    for matching in graph.perfect_matchings(threads):
        weight = sum(
            1 if edge_weights is None else edge_weights.get((names[a], names[b]), 1) for a, b in matching
        )
        terms[weight] = terms.get(weight, 0) + 1
    direct = Polynomial(terms)

    matrix = biadjacency(lattice, edge_weights)
    tc = build_T(matrix)
    via_tensor = Polynomial.lift(permanent3(tc.tensor, threads=threads))
    via_ryser = Polynomial.lift(permanent2(matrix))
    if not direct == via_tensor == via_ryser:
        logger.error("dimer pipelines disagree on %s: %s / %s / %s", lattice.dims, direct, via_tensor, via_ryser)
        raise CertificationError(f"dimer pipelines disagree: {direct} / {via_tensor} / {via_ryser}")
    logger.info("lattice %s: dimer polynomial %s", lattice.dims, direct)
    return DimerResult(lattice.dims, direct, via_tensor, via_ryser, tc.m)


@dataclass(frozen=True)
class EmbeddedComplex:
    config: TriangularConfiguration
    coords: dict[str, Coord]
    anchors: dict[str, Coord]


def _add(p, *offsets) -> Coord:
    out = [Fraction(x) for x in p]
    for offset in offsets:
        out = [a + b for a, b in zip(out, offset)]
    return tuple(out)  # type: ignore


def _unit(axis: int, scale: Fraction) -> Coord:
    return tuple(scale if k == axis else Fraction(0) for k in range(3))  # type: ignore


def _diagonal(scale: Fraction) -> Coord:
    return (scale, scale, scale)


def embed_T(lattice: CubicLattice) -> EmbeddedComplex:
    """Place T(Q) in space: lattice vertices stay put, auxiliary ones sit within 1/4 of their anchor.

    ``anchors`` records the lattice point or edge midpoint governing each vertex.
    """
    if len(lattice.even) != len(lattice.odd):
        raise InvalidConfiguration(f"lattice {lattice.dims} has unequal parity classes")
    tc: TConstruction = build_T(biadjacency(lattice))
    even, odd = lattice.even, lattice.odd
    coords: dict[str, Coord] = {}
    anchors: dict[str, Coord] = {}

    def place(name: str, anchor: Coord, *offsets):
        anchors[name] = anchor
        coords[name] = _add(anchor, *offsets)

    near, far = _diagonal(Fraction(1, 32)), _diagonal(Fraction(3, 32))
    for j, p in enumerate(even, start=1):
        anchor = _add(p)
        place(v(1, j), anchor)
        place(w0(1, j), anchor, near)
        place(v_prime(2, j), anchor, far)
    for j, q in enumerate(odd, start=1):
        anchor = _add(q)
        place(v(2, j), anchor)
        place(w0(2, j), anchor, near)
        place(v_prime(1, j), anchor, far)
    for e, (i, j) in tc.edge_ends.items():
        p, q = even[i - 1], odd[j - 1]
        axis = next(k for k in range(3) if p[k] != q[k])
        d1, d2 = [k for k in range(3) if k != axis]
        mid = tuple(Fraction(a + b, 2) for a, b in zip(p, q))
        step = Fraction(1, 8)
        place(w(0, e), mid, _unit(d1, step))
        place(w(1, e), mid, _unit(d2, step))
        place(w(2, e), mid, _unit(d1, step), _unit(d2, step))

    emb = EmbeddedComplex(tc.config, coords, anchors)
    problems = embedding_problems(emb)
    if problems:
        logger.error("embedding of %s is degenerate: %s", lattice.dims, problems[:3])
        raise CertificationError("; ".join(problems))
    return emb


def _cross(u: Coord, v_: Coord) -> Coord:
    return (u[1] * v_[2] - u[2] * v_[1], u[2] * v_[0] - u[0] * v_[2], u[0] * v_[1] - u[1] * v_[0])


def embedding_problems(emb: EmbeddedComplex) -> list[str]:
    problems = []
    missing = sorted(set(emb.config.vertices) - set(emb.coords))
    if missing:
        problems.append(f"vertices without coordinates: {missing}")
    by_point: dict[Coord, str] = {}
    for name, c in sorted(emb.coords.items()):
        if c in by_point:
            problems.append(f"{name} and {by_point[c]} coincide")
        by_point[c] = name
    for t in emb.config.sorted_triangles():
        a, b, c = (emb.coords[x] for x in emb.config.vertex_triple(t))
        ab = tuple(y - x for x, y in zip(a, b))
        ac = tuple(y - x for x, y in zip(a, c))
        if _cross(ab, ac) == (0, 0, 0):  # type: ignore
            problems.append(f"triangle {t} is degenerate")
    limit = Fraction(1, 16)
    for name, c in emb.coords.items():
        anchor = emb.anchors.get(name, c)
        if sum((x - y) ** 2 for x, y in zip(c, anchor)) >= limit:
            problems.append(f"{name} is not within 1/4 of its anchor")
    return problems


def _decimal(value: Fraction) -> str:
    """Exact decimal text of a dyadic rational."""
    den = value.denominator
    k = den.bit_length() - 1
    if den != 1 << k:
        raise ValueError(f"{value} is not dyadic")
    scaled = abs(value.numerator) * 5**k
    digits = str(scaled).rjust(k + 1, "0")
    whole, frac = digits[: len(digits) - k] if k else digits, digits[len(digits) - k :] if k else ""
    frac = frac.rstrip("0")
    sign = "-" if value < 0 else ""
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def to_off(emb: EmbeddedComplex) -> str:
    names = sorted(emb.coords)
    index = {name: i for i, name in enumerate(names)}
    triangles = emb.config.sorted_triangles()
    lines = ["OFF", f"{len(names)} {len(triangles)} 0"]
    lines += [" ".join(_decimal(x) for x in emb.coords[name]) for name in names]
    for t in triangles:
        lines.append("3 " + " ".join(str(index[x]) for x in emb.config.vertex_triple(t)))
    return "\n".join(lines) + "\n"
