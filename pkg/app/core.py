"""Triangular configurations: data model, matchings, defects, tripartitions and cycle spaces."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from app.algebra import Polynomial, gf_p_nullspace, span_weight_enumerator
from app.errors import (
    CompositionError,
    InvalidConfiguration,
    MissingVertexData,
    NotAMatching,
    check_guard,
)
from app.exact_cover import bit_index, exact_cover, mask_of

logger = logging.getLogger(__name__)

Matching = frozenset[str]
Weighting = Mapping[str, int]
EdgeTripartition = dict[str, int]
VertexTripartition = dict[str, int]

CLASSES = (1, 2, 3)


def edge_name(u: str, v: str) -> str:
    a, b = sorted((u, v))
    return f"{a}|{b}"


def canonical(matchings: Iterable[Iterable[str]]) -> list[Matching]:
    """Sort matchings by their sorted id tuples."""
    return [frozenset(m) for m in sorted(tuple(sorted(m)) for m in matchings)]


@dataclass(frozen=True)
class TriangularConfiguration:
    """Vertices, edges (optionally with their vertex pair) and triangles (edge triples).

    Construction never rejects data: invariant breaches are reported by ``validate``.
    """

    vertices: frozenset[str] = frozenset()
    edges: Mapping[str, tuple[str, str] | None] = field(default_factory=dict)
    triangles: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        vertices: Iterable[str] = (),
        edges: Mapping[str, Sequence[str] | None] | Iterable[str] = (),
        triangles: Mapping[str, Sequence[str]] | None = None,
    ) -> TriangularConfiguration:
        if not isinstance(edges, Mapping):
            edges = {e: None for e in edges}
        norm_edges = {
            str(e): (tuple(sorted(str(v) for v in ends)) if ends is not None else None)  # type: ignore
            for e, ends in edges.items()
        }
        norm_triangles = {str(t): tuple(sorted(str(e) for e in es)) for t, es in (triangles or {}).items()}
        return cls(frozenset(str(v) for v in vertices), norm_edges, norm_triangles)

    @classmethod
    def from_triangles(
        cls, triples: Mapping[str, Sequence[str]], vertices: Iterable[str] = ()
    ) -> TriangularConfiguration:
        """Vertex-carrying configuration from vertex triples; edges are named ``u|v``."""
        all_vertices = set(vertices)
        edges: dict[str, tuple[str, str]] = {}
        triangles: dict[str, list[str]] = {}
        for t, (a, b, c) in triples.items():
            all_vertices.update((a, b, c))
            names = []
            for u, v in ((a, b), (b, c), (a, c)):
                name = edge_name(u, v)
                edges[name] = (u, v)
                names.append(name)
            triangles[t] = names
        return cls.build(all_vertices, edges, triangles)

    @property
    def has_vertex_data(self) -> bool:
        return all(ends is not None for ends in self.edges.values())

    def sorted_edges(self) -> list[str]:
        return sorted(self.edges)

    def sorted_triangles(self) -> list[str]:
        return sorted(self.triangles)

    def vertex_triple(self, t: str) -> tuple[str, ...]:
        ends = [self.edges.get(e) for e in self.triangles[t]]
        if any(pair is None for pair in ends):
            raise MissingVertexData(f"triangle {t} has edges without vertex data")
        return tuple(sorted({v for pair in ends for v in pair}))  # type: ignore

    def edges_of(self, triangles: Iterable[str]) -> set[str]:
        return {e for t in triangles for e in self.triangles[t]}

    def triangles_at_edge(self) -> dict[str, list[str]]:
        at: dict[str, list[str]] = {e: [] for e in self.edges}
        for t in self.sorted_triangles():
            for e in set(self.triangles[t]):
                at.setdefault(e, []).append(t)
        return at

    def counts(self) -> tuple[int, int, int]:
        return len(self.vertices), len(self.edges), len(self.triangles)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: tuple[str, ...]
    message: str


def validate(config: TriangularConfiguration) -> list[Violation]:
    violations: list[Violation] = []

    def add(kind: str, subject: Iterable[str], message: str):
        violations.append(Violation(kind, tuple(subject), message))

    for e in config.sorted_edges():
        ends = config.edges[e]
        if ends is None:
            continue
        if ends[0] == ends[1]:
            add("degenerate edge", (e,), f"edge {e} joins {ends[0]} to itself")
        for v in ends:
            if v not in config.vertices:
                add("unknown vertex", (e, v), f"edge {e} uses unknown vertex {v}")

    by_pair: dict[tuple[str, str], list[str]] = {}
    for e in config.sorted_edges():
        ends = config.edges[e]
        if ends is not None:
            by_pair.setdefault(ends, []).append(e)
    for pair, ids in sorted(by_pair.items()):
        if len(ids) > 1:
            add("parallel edges", ids, f"edges {', '.join(ids)} all join {pair[0]} and {pair[1]}")

    seen: dict[tuple[str, ...], str] = {}
    for t in config.sorted_triangles():
        es = config.triangles[t]
        missing = [e for e in es if e not in config.edges]
        for e in missing:
            add("dangling edge", (t, e), f"triangle {t} references missing edge {e}")
        if len(es) != 3 or len(set(es)) != 3:
            add("repeated edge", (t,), f"triangle {t} does not have three distinct edges")
            continue
        if es in seen:
            add("duplicate triangle", (seen[es], t), f"triangles {seen[es]} and {t} share edges {es}")
        else:
            seen[es] = t
        if missing:
            continue
        pairs = [config.edges[e] for e in es]
        if all(pair is not None for pair in pairs):
            corners = {v for pair in pairs for v in pair}  # type: ignore
            if len(corners) != 3 or len(set(pairs)) != 3:
                add("not a triangle", (t,), f"edges of {t} do not bound a triangle")

    sets = [(t, set(config.triangles[t])) for t in config.sorted_triangles()]
    for i, (t1, s1) in enumerate(sets):
        for t2, s2 in sets[i + 1 :]:
            if len(s1 & s2) == 2:
                add("shared two edges", (t1, t2), f"triangles {t1} and {t2} share two edges")
    return violations


def require_valid(config: TriangularConfiguration) -> None:
    violations = validate(config)
    if violations:
        raise InvalidConfiguration("; ".join(v.message for v in violations))


def is_matching(config: TriangularConfiguration, matching: Iterable[str]) -> bool:
    seen: set[str] = set()
    for t in matching:
        if t not in config.triangles:
            return False
        es = set(config.triangles[t])
        if es & seen:
            return False
        seen |= es
    return True


def defect(config: TriangularConfiguration, matching: Iterable[str]) -> frozenset[str]:
    matching = list(matching)
    if not is_matching(config, matching):
        raise NotAMatching(f"triangles {sorted(matching)} overlap or are unknown")
    return frozenset(config.edges) - config.edges_of(matching)


def _edge_cover(config: TriangularConfiguration, triangles: Sequence[str]):
    bits = bit_index(config.sorted_edges())
    options = []
    for t in triangles:
        unknown = [e for e in config.triangles[t] if e not in bits]
        if unknown:
            raise InvalidConfiguration(f"triangle {t} references missing edges {unknown}")
        options.append(mask_of(bits, config.triangles[t]))
    return bits, options


def enumerate_matchings_with_defect_within(
    config: TriangularConfiguration, allowed: Iterable[str], threads: int | None = None
) -> list[Matching]:
    """All matchings whose uncovered edges lie inside ``allowed``, canonically ordered."""
    allowed = set(allowed)
    if not allowed <= set(config.edges):
        raise InvalidConfiguration(f"allowed edges {sorted(allowed - set(config.edges))} not in configuration")
    triangles = config.sorted_triangles()
    bits, options = _edge_cover(config, triangles)
    required = mask_of(bits, set(config.edges) - allowed)
    logger.debug("matchings within %d allowed edges: %s", len(allowed), config.counts())
    solutions = exact_cover(options, required, threads)
    return canonical([triangles[i] for i in sol] for sol in solutions)


def perfect_matchings(config: TriangularConfiguration, threads: int | None = None) -> list[Matching]:
    return enumerate_matchings_with_defect_within(config, (), threads)


def matching_weight(weighting: Weighting | None, matching: Iterable[str]) -> int:
    if weighting is None:
        return sum(1 for _ in matching)
    return sum(weighting.get(t, 1) for t in matching)


def perfect_matching_polynomial(
    config: TriangularConfiguration, weighting: Weighting | None = None, threads: int | None = None
) -> Polynomial:
    terms: dict[int, int] = {}
    for m in perfect_matchings(config, threads):
        w = matching_weight(weighting, m)
        terms[w] = terms.get(w, 0) + 1
    poly = Polynomial(terms)
    logger.info("perfect matching polynomial %s on %s", poly, config.counts())
    return poly


def enumerate_perfect_strong_matchings(
    config: TriangularConfiguration, threads: int | None = None
) -> list[Matching]:
    if not config.has_vertex_data:
        raise MissingVertexData("strong matchings need vertex data on every edge")
    triangles = config.sorted_triangles()
    bits = bit_index(sorted(config.vertices))
    options = [mask_of(bits, config.vertex_triple(t)) for t in triangles]
    solutions = exact_cover(options, mask_of(bits, config.vertices), threads)
    return canonical([triangles[i] for i in sol] for sol in solutions)


def _rainbow_search(
    elements: Sequence[str], groups: Sequence[tuple[str, ...]], pins: Mapping[str, int]
) -> dict[str, int] | None:
    """Assign classes 1..3 so that every group of three gets one of each.

    Depth-first with propagation; classes are tried in ascending order and free
    elements in sorted order, so the first solution found is canonical.
    """
    known = set(elements)
    for key, cls in pins.items():
        if key not in known:
            raise ValueError(f"pinned id {key} not in configuration")
        if cls not in CLASSES:
            raise ValueError(f"class {cls} for {key} is not in 1..3")
    member: dict[str, list[int]] = {x: [] for x in elements}
    for gi, group in enumerate(groups):
        for x in set(group):
            member[x].append(gi)
    order = sorted(elements)

    def propagate(assign: dict[str, int], queue: list[str]) -> bool:
        while queue:
            x = queue.pop()
            for gi in member[x]:
                group = groups[gi]
                if len(set(group)) != 3:
                    return False
                labels = [assign.get(y) for y in group]
                present = [c for c in labels if c is not None]
                if len(set(present)) != len(present):
                    return False
                if len(present) == 2:
                    missing = next(y for y, c in zip(group, labels) if c is None)
                    assign[missing] = (set(CLASSES) - set(present)).pop()
                    queue.append(missing)
        return True

    def choose(assign: dict[str, int]) -> str | None:
        fallback = None
        for x in order:
            if x in assign:
                continue
            if any(any(y in assign for y in groups[gi]) for gi in member[x]):
                return x
            if fallback is None:
                fallback = x
        return fallback

    def search(assign: dict[str, int]) -> dict[str, int] | None:
        x = choose(assign)
        if x is None:
            return assign
        for cls in CLASSES:
            trial = dict(assign)
            trial[x] = cls
            if propagate(trial, [x]):
                found = search(trial)
                if found is not None:
                    return found
        return None

    start = dict(pins)
    if not propagate(start, list(start)):
        return None
    return search(start)


def find_edge_tripartition(
    config: TriangularConfiguration, pins: Mapping[str, int] | None = None
) -> EdgeTripartition | None:
    if validate(config):
        logger.warning("no edge tripartition for an invalid configuration")
        return None
    groups = [config.triangles[t] for t in config.sorted_triangles()]
    return _rainbow_search(config.sorted_edges(), groups, pins or {})


def find_vertex_tripartition(
    config: TriangularConfiguration, pins: Mapping[str, int] | None = None
) -> VertexTripartition | None:
    if not config.has_vertex_data:
        raise MissingVertexData("vertex tripartition needs vertex data")
    if validate(config):
        logger.warning("no vertex tripartition for an invalid configuration")
        return None
    groups = [config.vertex_triple(t) for t in config.sorted_triangles()]
    return _rainbow_search(sorted(config.vertices), groups, pins or {})


def _tripartition_problems(ids: Iterable[str], groups: Mapping[str, Sequence[str]], classes: Mapping[str, int]):
    problems = [f"{x} has no class" for x in sorted(ids) if classes.get(x) not in CLASSES]
    for t, group in sorted(groups.items()):
        if sorted(classes.get(x, 0) for x in group) != list(CLASSES):
            problems.append(f"triangle {t} is not rainbow")
    return problems


def check_edge_tripartition(config: TriangularConfiguration, classes: Mapping[str, int]) -> list[str]:
    """Problems with an edge 3-colouring; empty means valid."""
    return _tripartition_problems(config.edges, config.triangles, classes)


def check_vertex_tripartition(config: TriangularConfiguration, classes: Mapping[str, int]) -> list[str]:
    groups = {t: config.vertex_triple(t) for t in config.triangles}
    return _tripartition_problems(config.vertices, groups, classes)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # the smaller key (earlier component) stays representative
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _prefixed(prefix: str | None, name: str) -> str:
    return name if prefix is None else f"{prefix}/{name}"


def compose(
    configs: Sequence[TriangularConfiguration],
    identifications: Iterable[tuple[tuple[int, str], tuple[int, str]]] = (),
    prefixes: Sequence[str | None] | None = None,
) -> TriangularConfiguration:
    """Disjoint union of ``configs`` with the given edges identified.

    Each identification pairs ``(component index, edge id)`` ends. Vertices of
    identified edges are glued so that identified edges sharing a vertex on one
    side share the matching vertex on the other.
    """
    prefixes = list(prefixes) if prefixes is not None else [None] * len(configs)
    if len(prefixes) != len(configs):
        raise CompositionError("one prefix per component is required")
    pairs = [(tuple(a), tuple(b)) for a, b in identifications]
    for a, b in pairs:
        for ci, e in (a, b):
            if not 0 <= ci < len(configs) or e not in configs[ci].edges:
                raise CompositionError(f"unknown edge {e} in component {ci}")

    with_vertices = all(c.has_vertex_data for c in configs)
    # keys sort by component first, so representatives come from the earliest component
    edges = _UnionFind()
    for ci, config in enumerate(configs):
        for e in config.sorted_edges():
            edges.find((ci, e))
    for a, b in pairs:
        edges.union(a, b)

    verts = _UnionFind()
    if with_vertices:
        for ci, config in enumerate(configs):
            for v in sorted(config.vertices):
                verts.find((ci, v))
        _glue_vertices(configs, pairs, verts)

    def edge_id(ci: int, e: str) -> str:
        rci, re = edges.find((ci, e))
        return _prefixed(prefixes[rci], re)

    def vertex_id(ci: int, v: str) -> str:
        rci, rv = verts.find((ci, v))
        return _prefixed(prefixes[rci], rv)

    new_edges: dict[str, tuple[str, str] | None] = {}
    origin: dict[str, tuple[int, str]] = {}
    vertex_origin: dict[str, tuple[int, str]] = {}
    new_triangles: dict[str, list[str]] = {}
    for ci, config in enumerate(configs):
        if with_vertices:
            for v in sorted(config.vertices):
                vid, root = vertex_id(ci, v), verts.find((ci, v))
                if vertex_origin.setdefault(vid, root) != root:
                    raise CompositionError(f"vertex id {vid} produced by two unrelated vertices")
        for e in config.sorted_edges():
            eid = edge_id(ci, e)
            if edges.find(origin.setdefault(eid, (ci, e))) != edges.find((ci, e)):
                raise CompositionError(f"edge id {eid} produced by two unrelated edges")
            ends = None
            if with_vertices:
                u, v = config.edges[e]  # type: ignore
                ends = tuple(sorted((vertex_id(ci, u), vertex_id(ci, v))))
            if eid in new_edges and new_edges[eid] != ends:
                raise CompositionError(f"edge {eid} glued to inconsistent vertex pairs {new_edges[eid]} and {ends}")
            new_edges[eid] = ends  # type: ignore
        for t in config.sorted_triangles():
            tid = _prefixed(prefixes[ci], t)
            if tid in new_triangles:
                raise CompositionError(f"triangle id {tid} occurs in two components")
            mapped = [edge_id(ci, e) for e in config.triangles[t]]
            if len(set(mapped)) != 3:
                raise CompositionError(f"triangle {tid} would repeat an edge")
            new_triangles[tid] = mapped

    result = TriangularConfiguration.build(vertex_origin, new_edges, new_triangles)
    violations = validate(result)
    if violations:
        raise CompositionError("; ".join(v.message for v in violations))
    logger.debug("composed %d components into %s", len(configs), result.counts())
    return result


def _glue_vertices(configs, pairs, verts: _UnionFind) -> None:
    def ends(key):
        ci, e = key
        return [(ci, v) for v in configs[ci].edges[e]]

    for a, b in pairs:
        ea, eb = ends(a), ends(b)
        if ea[0][1] == ea[1][1] or eb[0][1] == eb[1][1]:
            raise CompositionError(f"degenerate edge in identification {a} ~ {b}")
        mapping = None
        # orientation from vertices already glued
        for x in ea:
            for y in eb:
                if verts.find(x) == verts.find(y):
                    mapping = {x: y, _other(ea, x): _other(eb, y)}
                    break
            if mapping:
                break
        # orientation from a neighbouring identification
        if mapping is None:
            neighbours = [(c, d) for c, d in pairs if (c, d) != (a, b)]
            for c, d in neighbours + [(d, c) for c, d in neighbours]:
                ec, ed = ends(c), ends(d)
                shared_a = [x for x in ea if x in ec]
                shared_b = [y for y in eb if y in ed]
                if len(shared_a) == 1 and len(shared_b) == 1:
                    x, y = shared_a[0], shared_b[0]
                    mapping = {x: y, _other(ea, x): _other(eb, y)}
                    break
        if mapping is None:
            mapping = {ea[0]: eb[0], ea[1]: eb[1]}
        for x, y in mapping.items():
            verts.union(x, y)
    for a, b in pairs:
        ga = sorted(verts.find(x) for x in ends(a))
        gb = sorted(verts.find(y) for y in ends(b))
        if ga != gb or ga[0] == ga[1]:
            raise CompositionError(f"inconsistent vertex unification for {a} ~ {b}")


def _other(pair, x):
    return pair[1] if pair[0] == x else pair[0]


def remove_triangles(config: TriangularConfiguration, triangles: Iterable[str]) -> TriangularConfiguration:
    drop = set(triangles)
    unknown = drop - set(config.triangles)
    if unknown:
        raise InvalidConfiguration(f"unknown triangles {sorted(unknown)}")
    kept = {t: es for t, es in config.triangles.items() if t not in drop}
    return TriangularConfiguration(config.vertices, dict(config.edges), kept)


def strip_vertices(config: TriangularConfiguration) -> TriangularConfiguration:
    return TriangularConfiguration(frozenset(), {e: None for e in config.edges}, dict(config.triangles))


def incidence_matrix(config: TriangularConfiguration) -> tuple[list[str], list[str], list[list[int]]]:
    """0/1 edge-by-triangle incidence matrix with its row and column ids."""
    rows, cols = config.sorted_edges(), config.sorted_triangles()
    pos = bit_index(rows)
    matrix = [[0] * len(cols) for _ in rows]
    for j, t in enumerate(cols):
        for e in config.triangles[t]:
            matrix[pos[e]][j] = 1
    return rows, cols, matrix


def cycle_space_weight_enumerator(config: TriangularConfiguration, p: int) -> Polynomial:
    rows, cols, matrix = incidence_matrix(config)
    basis = gf_p_nullspace(matrix, p, n_cols=len(cols))
    check_guard("KERNEL_DIM", len(basis))
    logger.debug("kernel over GF(%d): dimension %d of %d", p, len(basis), len(cols))
    return span_weight_enumerator(basis, len(cols), p)
