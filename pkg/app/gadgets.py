"""Gadget constructions and their certification, plus the reduction to edge-tripartite configurations.

Every shipped gadget is re-certified by exhaustive enumeration when it is built;
a gadget whose certificate has a failing check is never returned.
"""

from __future__ import annotations

import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from app.core import (
    EdgeTripartition,
    Matching,
    TriangularConfiguration,
    Weighting,
    check_edge_tripartition,
    compose,
    defect,
    edge_name,
    enumerate_matchings_with_defect_within,
    find_edge_tripartition,
    remove_triangles,
    require_valid,
)
from app.errors import CertificationError, CompositionError, TripartitionError, worker_threads

logger = logging.getLogger(__name__)

End = tuple[str, str, str]

TUNNEL = "tunnel"
S5 = "s5"
MTT = "mtt"
KINDS = (TUNNEL, S5, MTT)

MTT_END_LABELS = ("abc", "123", "alpha")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Gadget:
    kind: str
    config: TriangularConfiguration
    ends: tuple[End, ...]
    end_labels: tuple[str, ...]
    certificate: tuple[Check, ...] = ()
    edge_classes: Mapping[str, int] = field(default_factory=dict)

    @property
    def end_edges(self) -> set[str]:
        return {e for end in self.ends for e in end}

    @property
    def certified(self) -> bool:
        return bool(self.certificate) and all(check.passed for check in self.certificate)


def _end(config: TriangularConfiguration, a: str, b: str, c: str) -> End:
    names = tuple(sorted((edge_name(a, b), edge_name(b, c), edge_name(a, c))))
    missing = [e for e in names if e not in config.edges]
    if missing:
        raise CertificationError(f"end ({a}, {b}, {c}) lacks edges {missing}")
    return names  # type: ignore


def _ids(matching: Iterable[str]) -> str:
    return "{" + ", ".join(sorted(matching)) + "}"


def _tunnel_config() -> tuple[TriangularConfiguration, tuple[End, End]]:
    """Antiprism band between end triangles l0 l1 l2 and r0 r1 r2."""
    triples = {}
    for i in range(3):
        j = (i + 1) % 3
        triples[f"L{i}"] = (f"l{i}", f"l{j}", f"r{i}")
        triples[f"R{i}"] = (f"r{i}", f"r{j}", f"l{j}")
    config = TriangularConfiguration.from_triangles(triples)
    return config, (_end(config, "l0", "l1", "l2"), _end(config, "r0", "r1", "r2"))


def _s5_config() -> tuple[TriangularConfiguration, tuple[End, End, End]]:
    triples = {
        "t1": ("u1", "u2", "v1"),
        "t2": ("u2", "u3", "v2"),
        "t3": ("u1", "u2", "u3"),
        "t4": ("u3", "u1", "v3"),
        "t5": ("v1", "v2", "v3"),
    }
    config = TriangularConfiguration.from_triangles(triples)
    ends = (
        _end(config, "u2", "v1", "v2"),
        _end(config, "u3", "v2", "v3"),
        _end(config, "u1", "v3", "v1"),
    )
    return config, ends


def _finish(gadget: Gadget) -> Gadget:
    checks, classes = _run_suite(gadget)
    failed = [check for check in checks if not check.passed]
    if failed:
        for check in failed:
            logger.error("%s gadget failed %s: %s", gadget.kind, check.name, check.detail)
        raise CertificationError(f"{gadget.kind} gadget failed {', '.join(c.name for c in failed)}")
    return Gadget(gadget.kind, gadget.config, gadget.ends, gadget.end_labels, checks, classes)


@functools.cache
def make_tunnel() -> Gadget:
    config, ends = _tunnel_config()
    return _finish(Gadget(TUNNEL, config, ends, ("left", "right")))


@functools.cache
def make_s5() -> Gadget:
    config, ends = _s5_config()
    return _finish(Gadget(S5, config, ends, ("A", "B", "C")))


@functools.cache
def make_matching_triangular_triangle() -> Gadget:
    """S5 with a tunnel glued on each of its ends; the tunnels' far ends are the outer ends."""
    s5, tunnel = make_s5(), make_tunnel()
    components = [s5.config, tunnel.config, tunnel.config, tunnel.config]
    prefixes = ["s5", "T1", "T2", "T3"]
    identifications = []
    for k, s5_end in enumerate(s5.ends, start=1):
        for e, f in zip(s5_end, tunnel.ends[0]):
            identifications.append(((0, e), (k, f)))
    config = compose(components, identifications, prefixes)
    ends = tuple(tuple(f"T{k}/{e}" for e in tunnel.ends[1]) for k in (1, 2, 3))
    return _finish(Gadget(MTT, config, ends, MTT_END_LABELS))  # type: ignore


def make_gadget(kind: str) -> Gadget:
    builders = {TUNNEL: make_tunnel, S5: make_s5, MTT: make_matching_triangular_triangle}
    if kind not in builders:
        raise ValueError(f"unknown gadget {kind!r}, expected one of {', '.join(KINDS)}")
    return builders[kind]()


def _tripartition_checks(gadget: Gadget, pins: Mapping[str, int]) -> tuple[list[Check], EdgeTripartition]:
    classes = find_edge_tripartition(gadget.config, pins)
    if classes is None:
        return [Check("edge_tripartite", False, f"no tripartition extends pins on {len(pins)} end edges")], {}
    problems = check_edge_tripartition(gadget.config, classes)
    checks = [Check("edge_tripartite", not problems, "; ".join(problems) or "every triangle rainbow")]
    end_classes = [sorted({classes[e] for e in end}) for end in gadget.ends]
    mono = all(len(c) == 1 for c in end_classes)
    checks.append(Check("ends_monochromatic", mono, f"end classes {end_classes}"))
    return checks, classes


def _run_suite(gadget: Gadget) -> tuple[tuple[Check, ...], EdgeTripartition]:
    if gadget.kind == TUNNEL:
        checks, classes = _tunnel_suite(gadget)
    elif gadget.kind == S5:
        checks, classes = _s5_suite(gadget)
    elif gadget.kind == MTT:
        checks, classes = _mtt_suite(gadget)
    else:
        raise ValueError(f"unknown gadget kind {gadget.kind!r}")
    return tuple(checks), classes


def _tunnel_suite(gadget: Gadget) -> tuple[list[Check], EdgeTripartition]:
    config, (left, right) = gadget.config, gadget.ends
    found = enumerate_matchings_with_defect_within(config, gadget.end_edges)
    defects = sorted(tuple(sorted(defect(config, m))) for m in found)
    checks = [
        Check("matchings_within_ends", len(found) == 2, f"{len(found)} matchings: {', '.join(map(_ids, found))}"),
        Check("defect_left_end", defects.count(tuple(left)) == 1, f"defects {defects}"),
        Check("defect_right_end", defects.count(tuple(right)) == 1, f"defects {defects}"),
    ]
    more, classes = _tripartition_checks(gadget, {e: 1 for e in left})
    checks += more
    if classes:
        sizes = sorted((sum(1 for c in classes.values() if c == k) for k in (1, 2, 3)), reverse=True)
        checks.append(Check("class_sizes", sizes == [6, 3, 3], f"class sizes {sizes}"))
        end_class = {classes[e] for e in left} | {classes[e] for e in right}
        shared = len(end_class) == 1 and sum(1 for c in classes.values() if c in end_class) == 6
        checks.append(Check("ends_share_class", shared, f"end classes {sorted(end_class)}"))
    return checks, classes


def _s5_suite(gadget: Gadget) -> tuple[list[Check], EdgeTripartition]:
    config = gadget.config
    perfect = enumerate_matchings_with_defect_within(config, ())
    checks = [
        Check(
            "unique_perfect_matching",
            len(perfect) == 1 and len(perfect[0]) == 4,
            f"{len(perfect)} perfect matchings: {', '.join(map(_ids, perfect))}",
        )
    ]
    ends = gadget.end_edges
    full = [m for m in enumerate_matchings_with_defect_within(config, ends) if defect(config, m) == ends]
    checks.append(
        Check(
            "unique_all_ends_defect",
            len(full) == 1 and len(full[0]) == 1,
            f"{len(full)} matchings with defect on all ends: {', '.join(map(_ids, full))}",
        )
    )
    pins = {e: k for k, end in enumerate(gadget.ends, start=1) for e in end}
    more, classes = _tripartition_checks(gadget, pins)
    return checks + more, classes


def _mtt_suite(gadget: Gadget) -> tuple[list[Check], EdgeTripartition]:
    config = gadget.config
    ends = gadget.end_edges
    found = enumerate_matchings_with_defect_within(config, ends)
    defects = [defect(config, m) for m in found]
    perfect = [m for m, d in zip(found, defects) if not d]
    empty_all = [m for m, d in zip(found, defects) if d == ends]
    checks = [
        Check("matchings_within_ends", len(found) == 2, f"{len(found)} matchings with defect inside the outer ends"),
        Check("unique_perfect_matching", len(perfect) == 1, f"{len(perfect)} perfect"),
        Check("unique_all_ends_defect", len(empty_all) == 1, f"{len(empty_all)} with defect on all 9 end edges"),
        Check(
            "no_partial_defect",
            len(perfect) + len(empty_all) == len(found),
            f"{len(found) - len(perfect) - len(empty_all)} matchings with a proper partial defect",
        ),
    ]
    s5, tunnel = make_s5(), make_tunnel()
    if perfect:
        s5_perfect = enumerate_matchings_with_defect_within(s5.config, ())
        tunnel_left = _tunnel_blocks(tunnel)[0]
        expected = {f"s5/{t}" for m in s5_perfect for t in m} | {
            f"T{k}/{t}" for k in (1, 2, 3) for t in tunnel_left
        }
        checks.append(
            Check("perfect_is_s5_plus_tunnels", perfect[0] == expected, f"perfect matching {_ids(perfect[0])}")
        )
    pins = {e: k for k, end in enumerate(gadget.ends, start=1) for e in end}
    more, classes = _tripartition_checks(gadget, pins)
    return checks + more, classes


def _tunnel_blocks(tunnel: Gadget) -> tuple[Matching, Matching]:
    """(matching leaving the left end uncovered, matching leaving the right end uncovered)."""
    found = enumerate_matchings_with_defect_within(tunnel.config, tunnel.end_edges)
    by_defect = {tuple(sorted(defect(tunnel.config, m))): m for m in found}
    return by_defect[tunnel.ends[0]], by_defect[tunnel.ends[1]]


def certify(gadget: Gadget) -> tuple[Check, ...]:
    """Recompute the gadget's certificate from scratch."""
    checks, _ = _run_suite(gadget)
    return checks


def certify_many(gadgets: Sequence[Gadget], threads: int | None = None) -> list[tuple[Check, ...]]:
    with ThreadPoolExecutor(max_workers=worker_threads(threads)) as executor:
        return list(executor.map(certify, gadgets))


@functools.cache
def mtt_blocks() -> tuple[Matching, Matching]:
    """(M1, M0) of the shipped MTT: its perfect matching and the one with all outer ends uncovered."""
    mtt = make_matching_triangular_triangle()
    found = enumerate_matchings_with_defect_within(mtt.config, mtt.end_edges)
    m1 = next(m for m in found if not defect(mtt.config, m))
    m0 = next(m for m in found if defect(mtt.config, m) == mtt.end_edges)
    return m1, m0


def link_by_mtt(
    config: TriangularConfiguration, t1: str, t2: str, t3: str, prefix: str = "T"
) -> TriangularConfiguration:
    """Glue a fresh MTT whose three outer ends are the edges of ``t1``, ``t2`` and ``t3``."""
    targets = (t1, t2, t3)
    for t in targets:
        if t not in config.triangles:
            raise CompositionError(f"unknown triangle {t}")
    for i, a in enumerate(targets):
        for b in targets[i + 1 :]:
            if set(config.triangles[a]) & set(config.triangles[b]):
                raise CompositionError(f"triangles {a} and {b} are not edge-disjoint")
    mtt = make_matching_triangular_triangle()
    identifications = [
        ((0, e), (1, f))
        for t, end in zip(targets, mtt.ends)
        for e, f in zip(sorted(config.triangles[t]), end)
    ]
    return compose([config, mtt.config], identifications, [None, prefix])


@dataclass(frozen=True)
class ReductionResult:
    config: TriangularConfiguration
    weighting: dict[str, int]
    edge_classes: dict[str, int]
    blocks: dict[str, tuple[Matching, Matching]]
    designated: dict[str, str]

    def forward(self, triangles: Iterable[str]) -> Matching:
        """Image of a set of source triangles: M1 of their blocks, M0 of every other block."""
        chosen = set(triangles)
        unknown = chosen - set(self.blocks)
        if unknown:
            raise ValueError(f"unknown source triangles {sorted(unknown)}")
        picked: set[str] = set()
        for t, (m1, m0) in self.blocks.items():
            picked |= m1 if t in chosen else m0
        return frozenset(picked)


def block_prefix(t: str) -> str:
    return f"T[{t}]"


def tripartite_reduction(config: TriangularConfiguration, weighting: Weighting | None = None) -> ReductionResult:
    require_valid(config)
    weighting = dict(weighting or {})
    copies = ("1", "2", "3")
    reduced = compose([config, config, config], (), list(copies))
    mtt = make_matching_triangular_triangle()
    m1, m0 = mtt_blocks()

    blocks: dict[str, tuple[Matching, Matching]] = {}
    designated: dict[str, str] = {}
    new_weights: dict[str, int] = {}
    classes: dict[str, int] = {}
    for cls, copy in enumerate(copies, start=1):
        classes.update({f"{copy}/{e}": cls for e in config.edges})

    for t in config.sorted_triangles():
        prefix = block_prefix(t)
        reduced = link_by_mtt(reduced, *(f"{copy}/{t}" for copy in copies), prefix=prefix)
        block_m1 = frozenset(f"{prefix}/{x}" for x in m1)
        block_m0 = frozenset(f"{prefix}/{x}" for x in m0)
        blocks[t] = (block_m1, block_m0)
        designated[t] = min(block_m1)
        for x in mtt.config.triangles:
            new_weights[f"{prefix}/{x}"] = 0
        new_weights[designated[t]] = weighting.get(t, 1)
        outer = mtt.end_edges
        classes.update({f"{prefix}/{e}": c for e, c in mtt.edge_classes.items() if e not in outer})

    reduced = remove_triangles(reduced, [f"{copy}/{t}" for copy in copies for t in config.triangles])
    problems = check_edge_tripartition(reduced, classes)
    if problems:
        logger.error("reduced configuration lost its tripartition: %s", problems[:5])
        raise TripartitionError("; ".join(problems))
    logger.info("reduced %s to %s", config.counts(), reduced.counts())
    return ReductionResult(reduced, new_weights, classes, blocks, designated)
