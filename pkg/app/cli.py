"""Subcommand dispatch for ``manage.py kas3``.

``run`` never raises for operation errors: it returns a CommandResult whose
status is 1 for a failed operation and 2 for malformed input.
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass, replace
from typing import Any, Sequence

from app import formats
from app.algebra import Polynomial, fold_enumerator, weight_enumerator
from app.core import cycle_space_weight_enumerator, find_edge_tripartition, perfect_matching_polynomial
from app.errors import Kas3Error, SchemaError, TripartitionError
from app.gadgets import KINDS, certify, make_gadget, tripartite_reduction
from app.kasteleyn_construct import (
    build_T,
    certify_trivial_signing,
    projection_structure_check,
    strong_matching_bijection_check,
)
from app.lattice import cubic_lattice, dimer_polynomial, embed_T, to_off
from app.sweeps import binet_cauchy_sweep
from app.tensor3 import determinant3, kasteleyn_sign_via_k1, permanent2, permanent3, triadjacency

logger = logging.getLogger(__name__)


class UsageError(SchemaError):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class CommandResult:
    status: int
    payload: dict[str, Any]
    summary: str
    as_json: bool = False

    def render(self) -> str:
        if self.as_json or self.status != 0:
            return formats.payload_to_str(self.payload)
        return self.summary


def _global_flags(parser: argparse.ArgumentParser, default_json, default_threads):
    parser.add_argument("--json", action="store_true", default=default_json, help="print the JSON payload")
    parser.add_argument("--threads", type=int, default=default_threads, help="worker threads (default KAS3_THREADS or 1)")


def build_parser() -> Parser:
    # flags may follow the subcommand too; SUPPRESS keeps a top-level value from being reset
    common = Parser(add_help=False)
    _global_flags(common, argparse.SUPPRESS, argparse.SUPPRESS)

    parser = Parser(prog="kas3")
    _global_flags(parser, False, None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("gadget", parents=[common], help="build a reference gadget")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--certify", action="store_true")

    p = sub.add_parser("reduce", parents=[common], help="edge-tripartite reduction of a configuration")
    p.add_argument("config")

    for name in ("per3", "det3"):
        p = sub.add_parser(name, parents=[common], help=f"{name} of a tensor file")
        p.add_argument("tensor")
        p.add_argument("--dense", action="store_true", help="double-permutation oracle (small sides only)")

    p = sub.add_parser("triadj", parents=[common], help="triadjacency 3-matrix of a tripartite configuration")
    p.add_argument("config")

    p = sub.add_parser("kasteleyn", parents=[common], help="T(G) construction")
    p.add_argument("action", choices=["build"])
    p.add_argument("matrix")
    p.add_argument("--certify", action="store_true")

    p = sub.add_parser("sign-k1", parents=[common], help="sign a tensor from Pfaffian signings of its projections")
    p.add_argument("tensor")

    p = sub.add_parser("lattice", parents=[common], help="cubic box lattice")
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.add_argument("c", type=int)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--dimers", action="store_true")
    mode.add_argument("--export-off", metavar="PATH")

    p = sub.add_parser("code", parents=[common], help="binary code tools")
    p.add_argument("action", choices=["wenum"])
    p.add_argument("code")

    p = sub.add_parser("fold", parents=[common], help="fold a polynomial's exponents modulo e")
    p.add_argument("poly")
    p.add_argument("--e", type=int, required=True)

    p = sub.add_parser("kernel-wenum", parents=[common], help="cycle space weight enumerator over GF(p)")
    p.add_argument("config")
    p.add_argument("--p", type=int, required=True)

    p = sub.add_parser("bc-check", parents=[common], help="randomized Binet-Cauchy identity check")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    return parser


def _value_text(value) -> str:
    return str(value)


def cmd_gadget(args) -> CommandResult:
    gadget = make_gadget(args.kind)
    payload = formats.gadget_to_dict(gadget)
    vertices, edges, triangles = gadget.config.counts()
    summary = f"{gadget.kind}: {triangles} triangles, {edges} edges, {vertices} vertices"
    if args.certify:
        checks = certify(gadget)
        payload["certificate"] = formats.certificate_to_list(checks)
        passed = sum(c.passed for c in checks)
        summary += f"\ncertificate: {passed}/{len(checks)} checks passed"
        summary += "".join(f"\n  {'ok  ' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in checks)
        if passed != len(checks):
            raise Kas3Error(f"{gadget.kind} certificate has failing checks")
    return CommandResult(0, payload, summary)


def cmd_reduce(args) -> CommandResult:
    bundle = formats.config_from_dict(formats.load_json(args.config))
    source = perfect_matching_polynomial(bundle.config, bundle.weights, args.threads)
    result = tripartite_reduction(bundle.config, bundle.weights)
    reduced = perfect_matching_polynomial(result.config, result.weighting, args.threads)
    payload = formats.config_to_dict(result.config, result.weighting, result.edge_classes)
    payload["P"] = str(source)
    payload["P_reduced"] = str(reduced)
    _, edges, triangles = result.config.counts()
    summary = f"reduced to {triangles} triangles on {edges} edges\nP  = {source}\nP' = {reduced}"
    return CommandResult(0, payload, summary)


def cmd_tensor_value(args) -> CommandResult:
    tensor = formats.tensor_from_dict(formats.load_json(args.tensor))
    method = "dense" if args.dense else "sparse"
    fn = permanent3 if args.command == "per3" else determinant3
    value = fn(tensor, method=method, threads=args.threads)
    return CommandResult(0, {"value": value}, _value_text(value))


def cmd_triadj(args) -> CommandResult:
    bundle = formats.config_from_dict(formats.load_json(args.config))
    classes = bundle.edge_classes or find_edge_tripartition(bundle.config)
    if classes is None:
        raise TripartitionError("configuration has no edge tripartition")
    tensor = triadjacency(bundle.config, classes, bundle.weights)
    return CommandResult(0, formats.tensor_to_dict(tensor), f"{tensor.side}-sided tensor with {tensor.nnz} nonzeros")


def cmd_kasteleyn(args) -> CommandResult:
    matrix = formats.matrix_from_dict(formats.load_json(args.matrix))
    tc = build_T(matrix)
    payload: dict[str, Any] = {
        "m": tc.m,
        "config": formats.config_to_dict(tc.config, vertex_classes=tc.vertex_classes),
        "tensor": formats.tensor_to_dict(tc.tensor),
    }
    summary = f"T(G): n={tc.n}, |E|={len(tc.edge_ends)}, m={tc.m}"
    if args.certify:
        signing = certify_trivial_signing(tc, args.threads)
        bijection = strong_matching_bijection_check(tc, args.threads)
        structure = projection_structure_check(tc)
        per = permanent2(matrix)
        per3 = permanent3(tc.tensor, threads=args.threads)
        det3 = determinant3(tc.tensor, threads=args.threads)
        payload["certification"] = {
            "trivial_signing": {"passed": signing.passed, "terms": signing.terms, "detail": signing.detail},
            "bijection": {
                "passed": bijection.passed,
                "graph_matchings": bijection.graph_matchings,
                "strong_matchings": bijection.strong_matchings,
                "detail": bijection.detail,
            },
            "projection_structure": {"passed": not structure, "problems": structure},
            "per": per,
            "per3": per3,
            "det3": det3,
        }
        summary += f"\nPer(M) = {per}, Per(A) = {per3}, det(A) = {det3}"
        summary += f"\ntrivial signing: {signing.detail}\nbijection: {bijection.detail}"
        if not (signing.passed and bijection.passed and not structure and per == per3 == det3):
            raise Kas3Error("T(G) certification failed")
    return CommandResult(0, payload, summary)


def _signing_to_dict(signing) -> dict[str, int]:
    return {f"{a}|{b}": s for (a, b), s in sorted(signing.items())}


def cmd_sign_k1(args) -> CommandResult:
    tensor = formats.tensor_from_dict(formats.load_json(args.tensor))
    signed = kasteleyn_sign_via_k1(tensor, args.threads)
    if signed is None:
        return CommandResult(0, {"certified": False}, "not certified")
    payload = {
        "certified": True,
        "verified": signed.verified,
        "tensor": formats.tensor_to_dict(signed.tensor),
        "s1": _signing_to_dict(signed.s1),
        "s2": _signing_to_dict(signed.s2),
    }
    return CommandResult(0, payload, "certified" + (" and verified" if signed.verified else ""))


def cmd_lattice(args) -> CommandResult:
    lattice = cubic_lattice(args.a, args.b, args.c)
    dims = list(lattice.dims)
    if args.dimers:
        result = dimer_polynomial(lattice, threads=args.threads)
        payload = {
            "dims": dims,
            "count": result.count,
            "polynomial": str(result.polynomial),
            "side": result.side,
            "flagged": result.flagged,
        }
        return CommandResult(0, payload, str(result.count))
    if args.export_off:
        emb = embed_T(lattice)
        text = to_off(emb)
        with open(args.export_off, "w") as f:
            f.write(text)
        payload = {"dims": dims, "path": args.export_off, "vertices": len(emb.coords), "faces": len(emb.config.triangles)}
        return CommandResult(0, payload, f"wrote {len(emb.coords)} vertices and {len(emb.config.triangles)} faces")
    payload = {"dims": dims, "vertices": len(lattice.points), "edges": len(lattice.edges)}
    return CommandResult(0, payload, f"{len(lattice.points)} vertices, {len(lattice.edges)} edges")


def cmd_code(args) -> CommandResult:
    code = formats.code_from_dict(formats.load_json(args.code))
    wenum = weight_enumerator(code)
    return CommandResult(0, {"n": code.n, "k": code.k, "wenum": str(wenum)}, str(wenum))


def cmd_fold(args) -> CommandResult:
    try:
        poly = Polynomial.parse(args.poly)
    except ValueError as e:
        raise SchemaError(str(e)) from e
    folded = fold_enumerator(poly, args.e)
    return CommandResult(0, {"input": str(poly), "e": args.e, "folded": str(folded)}, str(folded))


def cmd_kernel_wenum(args) -> CommandResult:
    bundle = formats.config_from_dict(formats.load_json(args.config))
    wenum = cycle_space_weight_enumerator(bundle.config, args.p)
    return CommandResult(0, {"p": args.p, "wenum": str(wenum)}, str(wenum))


def cmd_bc_check(args) -> CommandResult:
    df = binet_cauchy_sweep(args.count, args.seed, args.r, args.n, args.threads)
    all_equal = bool(df["equal"].all()) if len(df) else True
    payload = {"r": args.r, "n": args.n, "seed": args.seed, "cases": len(df), "all_equal": all_equal, "rows": df.to_dict(orient="records")}
    if not all_equal:
        raise Kas3Error(f"Binet-Cauchy identity failed on {int((~df['equal']).sum())} cases")
    return CommandResult(0, payload, f"{len(df)} cases, identity holds in all")


COMMANDS = {
    "gadget": cmd_gadget,
    "reduce": cmd_reduce,
    "per3": cmd_tensor_value,
    "det3": cmd_tensor_value,
    "triadj": cmd_triadj,
    "kasteleyn": cmd_kasteleyn,
    "sign-k1": cmd_sign_k1,
    "lattice": cmd_lattice,
    "code": cmd_code,
    "fold": cmd_fold,
    "kernel-wenum": cmd_kernel_wenum,
    "bc-check": cmd_bc_check,
}


def _error(status: int, exc: Exception) -> CommandResult:
    name = "UsageError" if isinstance(exc, UsageError) else type(exc).__name__
    return CommandResult(status, {"error": {"type": name, "message": str(exc)}}, str(exc))


def run(argv: Sequence[str], threads: int | None = None, as_json: bool = False) -> CommandResult:
    try:
        args = build_parser().parse_args(list(argv))
    except SchemaError as e:
        return _error(2, e)
    if args.threads is None:
        args.threads = threads
    logger.info("kas3 %s", " ".join(argv))
    try:
        result = COMMANDS[args.command](args)
    except SchemaError as e:
        return _error(2, e)
    except (Kas3Error, ValueError, OSError) as e:
        logger.warning("kas3 %s failed: %s", args.command, e)
        return _error(1, e)
    return replace(result, as_json=as_json or args.json)
