"""JSON graph-description files and complex-number encoding."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import QGError
from .graph import MetricGraph, VoltageAssignment, build_graph
from .groups import (FiniteGroup, IrrepSet, Representation, characters_abelian, cyclic_group,
                     product_group)


class FileFormatError(QGError, ValueError):
    """Parse or validation failure; ``field`` names the offending entry."""

    def __init__(self, message, field=None, source=None):
        self.field = field
        self.source = source
        where = f"{source}: " if source else ""
        at = f" [{field}]" if field else ""
        super().__init__(f"{where}{message}{at}")


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(v, field=None) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        return complex(v[0], v[1])
    raise FileFormatError("expected a number or a [re, im] pair", field)


def to_jsonable(obj):
    """Recursively turn complex values / arrays into JSON-ready data."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(doc) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=False, allow_nan=True)


@dataclass(frozen=True, eq=False)
class GraphFile:
    name: str
    graph: MetricGraph
    group: FiniteGroup | None
    voltage: VoltageAssignment | None
    irreps: IrrepSet | None
    raw: dict


BUNDLED = ("k3_z2", "k4", "theta_klein", "k3_s3")


def bundled_path(name: str):
    return resources.files("qgzeta") / "data" / f"{name}.json"


def resolve(path) -> Path | object:
    p = Path(path)
    if p.exists():
        return p
    if str(path) in BUNDLED:
        return bundled_path(str(path))
    raise FileFormatError(f"no such file {path!r} (bundled: {', '.join(BUNDLED)})")


def parse_graph_file(path) -> GraphFile:
    src = resolve(path)
    text = src.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                              source=str(path)) from None
    try:
        return parse_graph_doc(doc, name=Path(str(src)).stem)
    except FileFormatError as exc:
        exc.source = str(path)
        raise
    except QGError as exc:
        raise FileFormatError(str(exc), source=str(path)) from exc


def _require(doc, key, typ, field=None):
    if key not in doc:
        raise FileFormatError(f"missing required block {key!r}", field or key)
    val = doc[key]
    if not isinstance(val, typ):
        raise FileFormatError(f"{key!r} has the wrong type", field or key)
    return val


def _parse_group(g) -> FiniteGroup:
    kind = g.get("type")
    if kind == "cyclic":
        return cyclic_group(int(_require(g, "order", int, "group.order")))
    if kind == "product":
        return product_group(_require(g, "orders", list, "group.orders"))
    if kind == "table":
        elems = _require(g, "elements", list, "group.elements")
        table = _require(g, "table", list, "group.table")
        return FiniteGroup(tuple(str(e) for e in elems), np.array(table, dtype=int))
    raise FileFormatError(f"unknown group type {kind!r}", "group.type")


def _parse_matrix(rows, field):
    """A matrix is a list of rows of complex entries; a bare number or
    [re, im] pair stands for a 1x1 matrix."""
    if not isinstance(rows, list) or not any(isinstance(r, list) for r in rows):
        return np.array([[decode_complex(rows, field)]])
    if not all(isinstance(r, list) and len(r) == len(rows) for r in rows):
        raise FileFormatError("matrix must be a square list of rows", field)
    return np.array([[decode_complex(v, f"{field}[{i}][{j}]") for j, v in enumerate(row)]
                     for i, row in enumerate(rows)])


def parse_graph_doc(doc: dict, name: str = "graph") -> GraphFile:
    if not isinstance(doc, dict):
        raise FileFormatError("top level must be a JSON object")
    vertices = _require(doc, "vertices", list)
    edges = _require(doc, "edges", list)
    parsed_edges = []
    for j, e in enumerate(edges):
        field = f"edges[{j}]"
        if not isinstance(e, dict):
            raise FileFormatError("edge must be an object", field)
        for key in ("from", "to", "length"):
            if key not in e:
                raise FileFormatError(f"missing field {key!r}", f"{field}.{key}")
        for key in ("length", "potential"):
            if key in e and (not isinstance(e[key], (int, float)) or isinstance(e[key], bool)):
                raise FileFormatError(f"{key} must be a number", f"{field}.{key}")
        parsed_edges.append({k: e[k] for k in ("id", "from", "to", "length", "potential") if k in e})
    lam_raw = doc.get("lambda", {})
    if isinstance(lam_raw, dict):
        lam = {v: decode_complex(val, f"lambda.{v}") for v, val in lam_raw.items()}
    else:
        lam = decode_complex(lam_raw, "lambda")
    try:
        graph = build_graph(vertices, parsed_edges, lam,
                            orient_by_vertex_order=bool(doc.get("orient_by_vertex_order", False)))
    except QGError as exc:
        raise FileFormatError(str(exc), "edges") from exc

    group = None
    if "group" in doc:
        group = _parse_group(_require(doc, "group", dict))
    voltage = None
    if any("voltage" in e for e in edges):
        if group is None:
            raise FileFormatError("edge voltages given without a 'group' block", "group")
        volt = np.zeros(graph.num_arcs, dtype=int)
        for j, e in enumerate(edges):
            v = e.get("voltage", 0)
            field = f"edges[{j}].voltage"
            try:
                if isinstance(v, list):
                    if len(v) != 2:
                        raise FileFormatError("voltage pair must be [forward, reverse]", field)
                    volt[2 * j], volt[2 * j + 1] = group.index(v[0]), group.index(v[1])
                else:
                    volt[2 * j] = group.index(v)
                    volt[2 * j + 1] = group.inverse[volt[2 * j]]
            except QGError as exc:
                if isinstance(exc, FileFormatError):
                    raise
                raise FileFormatError(str(exc), field) from exc
        try:
            voltage = VoltageAssignment(graph, group, volt)
        except QGError as exc:
            raise FileFormatError(str(exc), "edges.voltage") from exc
    elif group is not None:
        voltage = VoltageAssignment.trivial(graph, group)

    irreps = None
    if "representations" in doc:
        if group is None:
            raise FileFormatError("representations given without a 'group' block", "group")
        reps = []
        for i, r in enumerate(_require(doc, "representations", list)):
            field = f"representations[{i}]"
            mats = _require(r, "matrices", list, f"{field}.matrices")
            if len(mats) != group.order:
                raise FileFormatError(f"need {group.order} matrices", f"{field}.matrices")
            arr = np.array([_parse_matrix(M, f"{field}.matrices[{g}]") for g, M in enumerate(mats)])
            reps.append(Representation(group, arr, r.get("name", f"rho{i}")))
        try:
            irreps = IrrepSet(tuple(reps))
        except QGError as exc:
            raise FileFormatError(str(exc), "representations") from exc
    elif group is not None and group.is_abelian():
        irreps = characters_abelian(group)

    return GraphFile(doc.get("name", name), graph, group, voltage, irreps, doc)
