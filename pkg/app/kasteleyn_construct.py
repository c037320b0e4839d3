"""Vertex-tripartite configuration T(G) of a square matrix and the checks that its 3-matrix is trivially Kasteleyn.

For M with support graph G = (V1, V2, E) the configuration has classes

    W0 = {w(0,e)} + {w(0,1,j)} + {w(0,2,j)}
    W1 = V1 + V1' + {w(1,e)}
    W2 = V2 + V2' + {w(2,e)}

and, for every edge e = v(1,i) v(2,j), the triangles

    A[e] = (v(1,i), v(2,j), w(0,e))       entry M[i][j]
    B[e] = (w(0,e), w(1,e), w(2,e))       entry 1
    C[e] = (w(0,1,i), v'(2,i), w(1,e))    entry 1
    D[e] = (w(0,2,j), v'(1,j), w(2,e))    entry 1

Perfect strong matchings of T(G) correspond one to one with perfect matchings of G.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

from app.core import Matching, TriangularConfiguration, enumerate_perfect_strong_matchings
from app.errors import check_guard
from app.graphs import BipartiteGraph
from app.tensor3 import Term, Tensor3, contributing_terms, projection_graphs, ring_product, vertex_adjacency

logger = logging.getLogger(__name__)


def v(i: int, j: int) -> str:
    return f"v({i},{j})"


def v_prime(i: int, j: int) -> str:
    return f"v'({i},{j})"


def w(level: int, e: str) -> str:
    return f"w({level},{e})"


def w0(i: int, j: int) -> str:
    return f"w(0,{i},{j})"


@dataclass(frozen=True)
class TConstruction:
    matrix: tuple[tuple[Any, ...], ...]
    graph: BipartiteGraph
    edge_ends: dict[str, tuple[int, int]]
    config: TriangularConfiguration
    vertex_classes: dict[str, int]
    orders: tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]
    entry_values: dict[str, Any]
    tensor: Tensor3

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def m(self) -> int:
        return len(self.orders[0])

    def image(self, matching: Sequence[tuple[str, str]]) -> Matching:
        """Strong matching of T(G) assigned to a perfect matching of G (given as graph edges)."""
        ends = {(v(1, i), v(2, j)): e for e, (i, j) in self.edge_ends.items()}
        chosen = {ends[edge] for edge in matching}
        triangles = set()
        for e in self.edge_ends:
            if e in chosen:
                triangles |= {f"A[{e}]", f"C[{e}]", f"D[{e}]"}
            else:
                triangles.add(f"B[{e}]")
        return frozenset(triangles)


def build_T(matrix: Sequence[Sequence[Any]]) -> TConstruction:
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    rows = tuple(tuple(row) for row in matrix)
    edge_ends: dict[str, tuple[int, int]] = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if rows[i - 1][j - 1] != 0:
                edge_ends[f"e{len(edge_ends) + 1}"] = (i, j)
    graph = BipartiteGraph.build(
        [v(1, j) for j in range(1, n + 1)],
        [v(2, j) for j in range(1, n + 1)],
        [(v(1, i), v(2, j)) for i, j in edge_ends.values()],
    )

    triples: dict[str, tuple[str, str, str]] = {}
    values: dict[str, Any] = {}
    for e, (i, j) in edge_ends.items():
        triples[f"A[{e}]"] = (v(1, i), v(2, j), w(0, e))
        values[f"A[{e}]"] = rows[i - 1][j - 1]
        triples[f"B[{e}]"] = (w(0, e), w(1, e), w(2, e))
        triples[f"C[{e}]"] = (w0(1, i), v_prime(2, i), w(1, e))
        triples[f"D[{e}]"] = (w0(2, j), v_prime(1, j), w(2, e))
    for t in triples:
        values.setdefault(t, 1)

    js = range(1, n + 1)
    classes: dict[str, int] = {}
    classes.update({w(0, e): 1 for e in edge_ends})
    classes.update({w0(i, j): 1 for i in (1, 2) for j in js})
    classes.update({x: 2 for j in js for x in (v(1, j), v_prime(1, j))})
    classes.update({w(1, e): 2 for e in edge_ends})
    classes.update({x: 3 for j in js for x in (v(2, j), v_prime(2, j))})
    classes.update({w(2, e): 3 for e in edge_ends})
    config = TriangularConfiguration.from_triangles(triples, vertices=classes)

    orders = _aligned_orders(graph, edge_ends, triples, classes)
    tensor = vertex_adjacency(config, classes, values, orders)
    logger.info("built T(G) for n=%d with |E|=%d, side %d", n, len(edge_ends), len(orders[0]))
    return TConstruction(rows, graph, edge_ends, config, classes, orders, values, tensor)


def _aligned_orders(graph, edge_ends, triples, classes) -> tuple[tuple[str, ...], ...]:
    """Index orders where a reference strong matching sits on the diagonal.

    Every contributing term then has sign +1, not just a common sign.
    """
    axes = [sorted(x for x, c in classes.items() if c == k) for k in (1, 2, 3)]
    if not graph.has_perfect_matching():
        return tuple(tuple(axis) for axis in axes)
    reference = sorted(graph.maximum_matching().items())
    lookup = {(v(1, i), v(2, j)): e for e, (i, j) in edge_ends.items()}
    chosen = {lookup[pair] for pair in reference}
    strong = [f"A[{e}]" if e in chosen else f"B[{e}]" for e in edge_ends]
    strong += [f"{kind}[{e}]" for e in sorted(chosen) for kind in ("C", "D")]
    partner: dict[str, tuple[str, str]] = {}
    for t in strong:
        by_class = {classes[x]: x for x in triples[t]}
        partner[by_class[1]] = (by_class[2], by_class[3])
    w0_order = axes[0]
    return (
        tuple(w0_order),
        tuple(partner[x][0] for x in w0_order),
        tuple(partner[x][1] for x in w0_order),
    )


@dataclass(frozen=True)
class SignCertificate:
    passed: bool
    terms: int
    witness: Term | None

    @property
    def detail(self) -> str:
        if self.passed:
            return f"{self.terms} contributing terms, all with sign +1"
        return f"term sigma1={list(self.witness.sigma1)} sigma2={list(self.witness.sigma2)} has sign -1"  # type: ignore


def certify_trivial_signing_of(tensor: Tensor3, threads: int | None = None) -> SignCertificate:
    check_guard("CERTIFY_SIDE", tensor.side)
    terms = contributing_terms(tensor, threads)
    for term in terms:
        if term.sign < 0:
            logger.error("negative term %s / %s", term.sigma1, term.sigma2)
            return SignCertificate(False, len(terms), term)
    return SignCertificate(True, len(terms), None)


def certify_trivial_signing(tc: TConstruction, threads: int | None = None) -> SignCertificate:
    return certify_trivial_signing_of(tc.tensor, threads)


@dataclass(frozen=True)
class BijectionReport:
    passed: bool
    graph_matchings: int
    strong_matchings: int
    detail: str


def strong_matching_bijection_check(tc: TConstruction, threads: int | None = None) -> BijectionReport:
    check_guard("BIJECTION_EDGES", len(tc.edge_ends))
    pms = tc.graph.perfect_matchings(threads)
    strong = set(enumerate_perfect_strong_matchings(tc.config, threads))
    problems = []
    images = []
    for pm in pms:
        image = tc.image(pm)
        images.append(image)
        if image not in strong:
            problems.append(f"image of {pm} is not a perfect strong matching")
            continue
        rows = {v(1, i): i for i in range(1, tc.n + 1)}
        cols = {v(2, j): j for j in range(1, tc.n + 1)}
        expected = ring_product(tc.matrix[rows[a] - 1][cols[b] - 1] for a, b in pm)
        got = ring_product(tc.entry_values[t] for t in image)
        if expected != got:
            problems.append(f"entry product {got} differs from matrix product {expected}")
    if len(set(images)) != len(images):
        problems.append("two perfect matchings share an image")
    if len(strong) != len(pms):
        problems.append(f"{len(strong)} strong matchings but {len(pms)} perfect matchings")
    return BijectionReport(not problems, len(pms), len(strong), "; ".join(problems) or "bijection holds")


def projection_structure_check(tc: TConstruction) -> list[str]:
    """Compare the components of both projection graphs with the shapes the construction predicts.

    G1 is a union of single edges w(0,2,j) v'(1,j) and of deg(v(1,i)) disjoint
    3-paths between v(1,i) and w(0,1,i); G2 mirrors it on the other side.
    """
    graphs = projection_graphs(tc.tensor)
    problems = []
    for level, graph in ((1, graphs.g1), (2, graphs.g2)):
        axis = tc.orders[level]
        names = {f"a{x}": name for x, name in enumerate(tc.orders[0])}
        names.update({f"{'b' if level == 1 else 'c'}{x}": name for x, name in enumerate(axis)})
        actual = {frozenset(names[x] for x in comp) for comp in graph.connected_components()}
        other = 2 if level == 1 else 1
        expected = set()
        pairs = 0
        for j in range(1, tc.n + 1):
            if any(ends[other - 1] == j for ends in tc.edge_ends.values()):
                expected.add(frozenset({w0(other, j), v_prime(level, j)}))
                pairs += 1
            else:
                expected |= {frozenset({w0(other, j)}), frozenset({v_prime(level, j)})}
            hub = v(level, j)
            edges = [e for e, ends in tc.edge_ends.items() if ends[level - 1] == j]
            if edges:
                expected.add(frozenset({hub, w0(level, j)} | {w(0, e) for e in edges} | {w(level, e) for e in edges}))
            else:
                expected |= {frozenset({hub}), frozenset({w0(level, j)})}
        if actual != expected:
            problems.append(f"G{level} components differ from the predicted paths and pairs")
        n_edges = len(graph.edges)
        if n_edges != 3 * len(tc.edge_ends) + pairs:
            problems.append(f"G{level} has {n_edges} edges, expected {3 * len(tc.edge_ends) + pairs}")
    return problems
