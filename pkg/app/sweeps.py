"""Seeded randomized sweeps over the pipeline identities, reported as DataFrames."""

import logging
import random

import pandas as pd

from app.core import TriangularConfiguration, defect, is_matching, perfect_matching_polynomial, perfect_matchings
from app.gadgets import tripartite_reduction
from app.kasteleyn_construct import build_T, certify_trivial_signing
from app.tensor3 import (
    RectMatrixTriple,
    Tensor3,
    binet_cauchy_C,
    binet_cauchy_rhs,
    determinant3,
    kasteleyn_sign_via_k1,
    permanent2,
    permanent3,
    triadjacency,
)

logger = logging.getLogger(__name__)


def random_configuration(rng: random.Random, max_triangles: int = 6) -> TriangularConfiguration:
    """Edge-only configuration: a few disjoint triangles plus extras reusing their edges."""
    edges: list[str] = []
    triangles: dict[str, tuple[str, ...]] = {}

    def fresh() -> str:
        edges.append(f"e{len(edges)}")
        return edges[-1]

    for _ in range(rng.randint(1, min(3, max_triangles))):
        triangles[f"t{len(triangles)}"] = (fresh(), fresh(), fresh())
    for _ in range(rng.randint(0, max_triangles - len(triangles))):
        reused = set(rng.sample(edges, rng.randint(1, 3)))
        if any(len(reused & set(es)) >= 2 for es in triangles.values()):
            # one shared edge never clashes with an existing triangle
            reused = {rng.choice(sorted(reused))}
        new = [fresh() for _ in range(3 - len(reused))]
        triangles[f"t{len(triangles)}"] = tuple(sorted(reused | set(new)))
    return TriangularConfiguration.build((), edges, triangles)


def reduction_sweep(count: int = 50, seed: int = 0, max_triangles: int = 6, threads: int | None = None) -> pd.DataFrame:
    rng = random.Random(seed)
    rows = []
    for case in range(count):
        config = random_configuration(rng, max_triangles)
        weights = {t: rng.randint(0, 5) for t in config.triangles}
        source = perfect_matching_polynomial(config, weights, threads)
        result = tripartite_reduction(config, weights)
        reduced = perfect_matching_polynomial(result.config, result.weighting, threads)
        sizes = [sum(1 for c in result.edge_classes.values() if c == k) for k in (1, 2, 3)]
        weight_preserved = True
        for m in perfect_matchings(config, threads):
            image = result.forward(m)
            w_src = sum(weights[t] for t in m)
            w_img = sum(result.weighting[t] for t in image)
            if w_src != w_img or not is_matching(result.config, image) or defect(result.config, image):
                weight_preserved = False
        triadjacency_match = None
        if len(set(sizes)) == 1:
            tensor = triadjacency(result.config, result.edge_classes, result.weighting)
            triadjacency_match = permanent3(tensor, threads=threads) == reduced
        rows.append(
            {
                "case": case,
                "triangles": len(config.triangles),
                "P": str(source),
                "P_reduced": str(reduced),
                "equal": source == reduced,
                "class_sizes": tuple(sizes),
                "balanced": len(set(sizes)) == 1 or source == 0,
                "weight_preserved": weight_preserved,
                "triadjacency_match": triadjacency_match,
            }
        )
    logger.info("reduction sweep: %d cases from seed %d", count, seed)
    return pd.DataFrame(rows)


def random_matrix(rng: random.Random, n: int, signed: bool) -> list[list[int]]:
    if signed:
        return [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
    return [[rng.randint(0, 1) for _ in range(n)] for _ in range(n)]


def construction_sweep(count: int = 100, seed: int = 0, max_n: int = 4, threads: int | None = None) -> pd.DataFrame:
    """Per(M) against the permanent and determinant of the T(G) 3-matrix."""
    rng = random.Random(seed)
    rows = []
    for case in range(count):
        n = rng.randint(1, max_n)
        matrix = random_matrix(rng, n, signed=case % 2 == 1)
        tc = build_T(matrix)
        per = permanent2(matrix)
        per3 = permanent3(tc.tensor, threads=threads)
        det3 = determinant3(tc.tensor, threads=threads)
        rows.append(
            {
                "case": case,
                "n": n,
                "edges": len(tc.edge_ends),
                "m": tc.m,
                "per": per,
                "per3": per3,
                "det3": det3,
                "equal": per == per3 == det3,
                "size_ok": tc.m == 2 * n + len(tc.edge_ends) <= n * n + 2 * n,
                "trivial_signing": certify_trivial_signing(tc, threads).passed,
            }
        )
    return pd.DataFrame(rows)


def random_sparse_tensor(rng: random.Random, n: int, density: float = 0.4) -> Tensor3:
    entries = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if rng.random() < density:
                    entries[(i, j, k)] = rng.randint(1, 3)
    return Tensor3.build((n, n, n), entries)


def projection_signing_sweep(
    count: int = 20, seed: int = 0, max_n: int = 3, max_attempts: int = 500, threads: int | None = None
) -> pd.DataFrame:
    """Collect ``count`` random tensors whose projection graphs are signable and compare det(A') with Per(A)."""
    rng = random.Random(seed)
    rows = []
    attempts = 0
    while len(rows) < count and attempts < max_attempts:
        attempts += 1
        tensor = random_sparse_tensor(rng, rng.randint(1, max_n))
        signed = kasteleyn_sign_via_k1(tensor, threads)
        if signed is None:
            continue
        per = permanent3(tensor, threads=threads)
        det = determinant3(signed.tensor, threads=threads)
        rows.append({"attempt": attempts, "n": tensor.side, "nnz": tensor.nnz, "per": per, "det_signed": det, "equal": per == det})
    return pd.DataFrame(rows)


def random_triple(rng: random.Random, r: int, n: int) -> RectMatrixTriple:
    def block():
        return [[rng.randint(-3, 3) for _ in range(n)] for _ in range(r)]

    return RectMatrixTriple.build(block(), block(), block())


def binet_cauchy_sweep(
    count: int = 100, seed: int = 0, r: int | None = None, n: int | None = None, threads: int | None = None
) -> pd.DataFrame:
    """det of the contracted 3-matrix against the column-subset sum; r and n are drawn when not given."""
    rng = random.Random(seed)
    rows = []
    for case in range(count):
        rr = r if r is not None else rng.randint(1, 3)
        nn = n if n is not None else rng.randint(rr, 5)
        triple = random_triple(rng, rr, nn)
        lhs = determinant3(binet_cauchy_C(triple), threads=threads)
        rhs = binet_cauchy_rhs(triple)
        rows.append({"case": case, "r": rr, "n": nn, "det_C": lhs, "rhs": rhs, "equal": lhs == rhs})
    return pd.DataFrame(rows)
