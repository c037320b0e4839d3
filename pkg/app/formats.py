"""JSON codecs for configurations, gadgets, tensors, matrices, codes and certificates."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from app.algebra import BinaryCode, Polynomial
from app.core import TriangularConfiguration
from app.errors import SchemaError
from app.gadgets import Check, Gadget
from app.tensor3 import Tensor3


class Kas3Encoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, Polynomial):
            return poly_to_dict(obj)
        if isinstance(obj, Fraction):
            return str(obj)
        if isinstance(obj, (set, frozenset)):
            return sorted(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        return super().default(obj)


def payload_to_str(payload: Any) -> str:
    return json.dumps(payload, cls=Kas3Encoder, indent=4, sort_keys=True)


def load_json(path: str) -> Any:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e})") from e


def _require(data: Any, key: str, kind: type | tuple[type, ...], where: str):
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(f"{where}: missing key {key!r}")
    if not isinstance(data[key], kind):
        raise SchemaError(f"{where}: {key!r} has the wrong type")
    return data[key]


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool):
        raise SchemaError(f"{where}: expected an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
    raise SchemaError(f"{where}: expected an integer, got {value!r}")


def _classes(data: Mapping, key: str) -> dict[str, int] | None:
    raw = data.get(key)
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise SchemaError(f"{key} must be an object")
    out = {}
    for x, c in raw.items():
        c = _int(c, key)
        if c not in (1, 2, 3):
            raise SchemaError(f"{key}: class {c} of {x} is not 1, 2 or 3")
        out[str(x)] = c
    return out


@dataclass(frozen=True)
class ConfigBundle:
    config: TriangularConfiguration
    weights: dict[str, int] | None = None
    edge_classes: dict[str, int] | None = None
    vertex_classes: dict[str, int] | None = None
    extra: dict[str, Any] = field(default_factory=dict)


def config_from_dict(data: Any) -> ConfigBundle:
    edges_raw = _require(data, "edges", list, "configuration")
    triangles_raw = _require(data, "triangles", list, "configuration")
    vertices = data.get("vertices", [])
    if not isinstance(vertices, list):
        raise SchemaError("configuration: 'vertices' must be a list")
    edges: dict[str, Any] = {}
    for item in edges_raw:
        eid = str(_require(item, "id", (str, int), "edge"))
        ends = item.get("ends")
        if ends is not None and (not isinstance(ends, list) or len(ends) != 2):
            raise SchemaError(f"edge {eid}: 'ends' must list two vertices")
        if eid in edges:
            raise SchemaError(f"edge {eid} listed twice")
        edges[eid] = ends
    triangles: dict[str, list] = {}
    for item in triangles_raw:
        tid = str(_require(item, "id", (str, int), "triangle"))
        es = _require(item, "edges", list, f"triangle {tid}")
        if tid in triangles:
            raise SchemaError(f"triangle {tid} listed twice")
        triangles[tid] = es
    config = TriangularConfiguration.build(vertices, edges, triangles)
    weights = None
    if data.get("weights") is not None:
        if not isinstance(data["weights"], dict):
            raise SchemaError("weights must be an object")
        weights = {str(t): _int(w, f"weight of {t}") for t, w in data["weights"].items()}
    extra = {"ends": data["ends"]} if "ends" in data else {}
    return ConfigBundle(config, weights, _classes(data, "edge_classes"), _classes(data, "vertex_classes"), extra)


def config_to_dict(
    config: TriangularConfiguration,
    weights: Mapping[str, int] | None = None,
    edge_classes: Mapping[str, int] | None = None,
    vertex_classes: Mapping[str, int] | None = None,
) -> dict[str, Any]:
    data: dict[str, Any] = {
        "vertices": sorted(config.vertices),
        "edges": [
            {"id": e, "ends": list(config.edges[e])} if config.edges[e] is not None else {"id": e}
            for e in config.sorted_edges()
        ],
        "triangles": [{"id": t, "edges": list(config.triangles[t])} for t in config.sorted_triangles()],
    }
    if weights is not None:
        data["weights"] = dict(sorted(weights.items()))
    if edge_classes is not None:
        data["edge_classes"] = dict(sorted(edge_classes.items()))
    if vertex_classes is not None:
        data["vertex_classes"] = dict(sorted(vertex_classes.items()))
    return data


def certificate_to_list(checks: tuple[Check, ...]) -> list[dict[str, Any]]:
    return [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]


def gadget_to_dict(gadget: Gadget, with_certificate: bool = False) -> dict[str, Any]:
    data = config_to_dict(gadget.config, edge_classes=dict(gadget.edge_classes) or None)
    data["kind"] = gadget.kind
    data["ends"] = [list(end) for end in gadget.ends]
    data["end_labels"] = list(gadget.end_labels)
    if with_certificate:
        data["certificate"] = certificate_to_list(gadget.certificate)
    return data


def poly_to_dict(poly: Polynomial) -> dict[str, Any]:
    return {"poly": {str(e): c for e, c in poly.terms}}


def poly_from_dict(data: Any) -> Polynomial:
    raw = _require(data, "poly", dict, "polynomial")
    try:
        return Polynomial({_int(e, "exponent"): _int(c, "coefficient") for e, c in raw.items()})
    except ValueError as e:
        raise SchemaError(str(e)) from e


def value_from_json(value: Any, where: str):
    if isinstance(value, dict):
        return poly_from_dict(value)
    return _int(value, where)


def tensor_from_dict(data: Any) -> Tensor3:
    dims = _require(data, "dims", list, "tensor")
    if len(dims) != 3:
        raise SchemaError("tensor: 'dims' must have three entries")
    dims = [_int(d, "dims") for d in dims]
    entries = []
    for item in _require(data, "entries", list, "tensor"):
        if not isinstance(item, list) or len(item) != 4:
            raise SchemaError(f"tensor entry {item!r} must be [i, j, k, value]")
        i, j, k = (_int(x, "index") for x in item[:3])
        entries.append((i, j, k, value_from_json(item[3], f"entry {item[:3]}")))
    try:
        return Tensor3.build(dims, entries)
    except ValueError as e:
        raise SchemaError(f"tensor: {e}") from e


def tensor_to_dict(tensor: Tensor3) -> dict[str, Any]:
    return {
        "dims": list(tensor.dims),
        "entries": [[i, j, k, value] for (i, j, k), value in sorted(tensor.entries.items())],
    }


def matrix_from_dict(data: Any) -> list[list[int]]:
    n = _int(_require(data, "n", (int, str), "matrix"), "n")
    rows = _require(data, "rows", list, "matrix")
    if len(rows) != n or any(not isinstance(row, list) or len(row) != n for row in rows):
        raise SchemaError(f"matrix: 'rows' must be {n} rows of {n} entries")
    return [[_int(x, "matrix entry") for x in row] for row in rows]


def code_from_dict(data: Any) -> BinaryCode:
    k = _int(_require(data, "k", (int, str), "code"), "k")
    n = _int(_require(data, "n", (int, str), "code"), "n")
    rows = _require(data, "rows", list, "code")
    if len(rows) != k:
        raise SchemaError(f"code: expected {k} rows, got {len(rows)}")
    try:
        return BinaryCode.from_rows([[_int(b, "code entry") for b in row] for row in rows], n)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"code: {e}") from e
