import logging
from dataclasses import dataclass
from typing import Sequence

import networkx as nx

from app.exact_cover import bit_index, exact_cover, mask_of

logger = logging.getLogger(__name__)

Edge = tuple[str, str]


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph with ordered sides; edges run left -> right."""

    left: tuple[str, ...]
    right: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if set(self.left) & set(self.right):
            raise ValueError("the two sides must be disjoint")
        lefts, rights = set(self.left), set(self.right)
        for a, b in self.edges:
            if a not in lefts or b not in rights:
                raise ValueError(f"edge ({a}, {b}) does not run left to right")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("repeated edge")

    @classmethod
    def build(cls, left: Sequence[str], right: Sequence[str], edges) -> "BipartiteGraph":
        return cls(tuple(left), tuple(right), tuple(sorted((str(a), str(b)) for a, b in edges)))

    @classmethod
    def support(cls, matrix: Sequence[Sequence], row_names: Sequence[str], col_names: Sequence[str]):
        edges = [
            (row_names[i], col_names[j])
            for i, row in enumerate(matrix)
            for j, value in enumerate(row)
            if value != 0
        ]
        return cls(tuple(row_names), tuple(col_names), tuple(edges))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.left, bipartite=0)
        graph.add_nodes_from(self.right, bipartite=1)
        graph.add_edges_from(self.edges)
        return graph

    def biadjacency(self) -> list[list[int]]:
        rows, cols = bit_index(self.left), bit_index(self.right)
        matrix = [[0] * len(self.right) for _ in self.left]
        for a, b in self.edges:
            matrix[rows[a]][cols[b]] = 1
        return matrix

    def degree(self, v: str) -> int:
        return sum(v in edge for edge in self.edges)

    def spanning_forest(self) -> list[Edge]:
        """Edges of a spanning forest, in the graph's own (left, right) orientation."""
        oriented = set(self.edges)
        forest = []
        for u, v in nx.minimum_spanning_edges(self.to_networkx(), algorithm="kruskal", data=False):
            forest.append((u, v) if (u, v) in oriented else (v, u))
        return sorted(forest)

    def connected_components(self) -> list[frozenset[str]]:
        comps = [frozenset(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(comps, key=lambda c: sorted(c))

    def maximum_matching(self) -> dict[str, str]:
        """Hopcroft-Karp maximum matching as a left -> right map."""
        found = nx.bipartite.hopcroft_karp_matching(self.to_networkx(), top_nodes=self.left)
        return {a: found[a] for a in self.left if a in found}

    def has_perfect_matching(self) -> bool:
        return len(self.left) == len(self.right) and len(self.maximum_matching()) == len(self.left)

    def perfect_matchings(self, threads: int | None = None) -> list[tuple[Edge, ...]]:
        if len(self.left) != len(self.right):
            return []
        bits = bit_index(self.left + self.right)
        options = [mask_of(bits, edge) for edge in self.edges]
        solutions = exact_cover(options, mask_of(bits, bits), threads)
        logger.debug("%d perfect matchings on %d edges", len(solutions), len(self.edges))
        return sorted(tuple(self.edges[i] for i in sol) for sol in solutions)
