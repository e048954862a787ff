"""Metric graphs with paired arcs, voltage assignments and derived coverings.

Arcs are stored in the interleaved order ``e_1, e_1^-1, ..., e_m, e_m^-1``:
arc ``2j`` is edge ``j`` read in its listed direction, arc ``2j+1`` its
inverse.  Every matrix in the library is laid out in this order.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GraphError
from .groups import FiniteGroup

INVERSE_SUFFIX = "^-1"


@dataclass(frozen=True)
class Arc:
    id: str
    origin: str
    terminus: str
    inverse: str


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Finite graph with per-arc length/potential and per-vertex lambda.

    Index arrays ``origin``, ``terminus`` and ``inverse`` map arc positions
    to vertex positions (resp. the inverse arc position).
    """

    vertices: tuple[str, ...]
    edge_ids: tuple[str, ...]
    origin: np.ndarray
    terminus: np.ndarray
    length: np.ndarray
    potential: np.ndarray
    lam: np.ndarray
    connected: bool = True
    _vindex: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edge_ids)

    @property
    def num_arcs(self) -> int:
        return 2 * self.m

    @property
    def inverse(self) -> np.ndarray:
        return np.arange(self.num_arcs) ^ 1

    @property
    def degree(self) -> np.ndarray:
        return np.bincount(self.origin, minlength=self.n)

    @property
    def arc_ids(self) -> tuple[str, ...]:
        out = []
        for e in self.edge_ids:
            out += [e, e + INVERSE_SUFFIX]
        return tuple(out)

    @property
    def arcs(self) -> tuple[Arc, ...]:
        ids = self.arc_ids
        return tuple(
            Arc(ids[a], self.vertices[self.origin[a]], self.vertices[self.terminus[a]], ids[a ^ 1])
            for a in range(self.num_arcs)
        )

    @property
    def betti_number(self) -> int:
        return self.m - self.n + self.num_components

    @property
    def num_components(self) -> int:
        return len(_components(self.n, self.origin, self.terminus))

    def vertex_index(self, v: str) -> int:
        try:
            return self._vindex[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def arc_index(self, arc_id: str) -> int:
        try:
            return self.arc_ids.index(arc_id)
        except ValueError:
            raise GraphError(f"unknown arc {arc_id!r}") from None

    def with_parameters(self, length=None, potential=None, lam=None) -> "MetricGraph":
        """Same topology, new data.  ``length``/``potential`` are per edge
        (listed direction); ``lam`` is per vertex.  Scalars broadcast."""
        kw = {}
        if length is not None:
            L = np.broadcast_to(np.asarray(length, dtype=float), (self.m,))
            if np.any(L <= 0):
                raise GraphError("edge lengths must be positive")
            kw["length"] = _frozen(np.repeat(L, 2), float)
        if potential is not None:
            A = np.broadcast_to(np.asarray(potential, dtype=float), (self.m,))
            kw["potential"] = _frozen(np.stack([A, -A], axis=1).ravel(), float)
        if lam is not None:
            kw["lam"] = _frozen(np.broadcast_to(np.asarray(lam, dtype=complex), (self.n,)), complex)
        return replace(self, **kw)

    def __repr__(self):
        return f"MetricGraph(n={self.n}, m={self.m}, connected={self.connected})"


def _components(n, origin, terminus):
    adj = [[] for _ in range(n)]
    for u, v in zip(origin, terminus):
        adj[u].append(v)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [s], deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def _parse_edge(item, j):
    if isinstance(item, Mapping):
        try:
            u, v = item["from"], item["to"]
        except KeyError as exc:
            raise GraphError(f"edge {j}: missing field {exc.args[0]!r}") from None
        if "length" not in item:
            raise GraphError(f"edge {j}: missing field 'length'")
        return item.get("id", f"e{j + 1}"), u, v, item["length"], item.get("potential", 0.0)
    item = tuple(item)
    if len(item) not in (3, 4):
        raise GraphError(f"edge {j}: expected (u, v, length[, potential])")
    u, v, L = item[:3]
    A = item[3] if len(item) == 4 else 0.0
    return f"e{j + 1}", u, v, L, A


def build_graph(vertices, edges, lam=None, *, orient_by_vertex_order=False,
                allow_disconnected=False) -> MetricGraph:
    """Build a :class:`MetricGraph`.

    ``edges`` holds mappings ``{id, from, to, length, potential}`` or tuples
    ``(u, v, length[, potential])``.  The potential is attached to the arc in
    the listed direction and negated on its inverse.  With
    ``orient_by_vertex_order`` it is attached to the arc running from the
    lower-indexed to the higher-indexed vertex instead.

    ``lam`` may be a mapping vertex -> complex, a sequence in vertex order, or
    a scalar; missing vertices default to 0.
    """
    vertices = tuple(str(v) for v in vertices)
    if not vertices:
        raise GraphError("graph has no vertices")
    vindex = {v: i for i, v in enumerate(vertices)}
    if len(vindex) != len(vertices):
        raise GraphError("duplicate vertex ids")

    ids, origin, terminus, length, potential = [], [], [], [], []
    for j, item in enumerate(edges):
        eid, u, v, L, A = _parse_edge(item, j)
        u, v = str(u), str(v)
        for w in (u, v):
            if w not in vindex:
                raise GraphError(f"edge {eid!r}: unknown vertex {w!r}")
        L, A = float(L), float(A)
        if not np.isfinite(L) or L <= 0:
            raise GraphError(f"edge {eid!r}: length must be positive, got {L}")
        if not np.isfinite(A):
            raise GraphError(f"edge {eid!r}: potential must be finite")
        iu, iv = vindex[u], vindex[v]
        if orient_by_vertex_order and iu > iv:
            A = -A
        ids.append(str(eid))
        origin += [iu, iv]
        terminus += [iv, iu]
        length += [L, L]
        potential += [A, -A]
    if not ids:
        raise GraphError("graph has no edges")
    if len(set(ids)) != len(ids):
        raise GraphError("duplicate edge ids")

    lam_arr = np.zeros(len(vertices), dtype=complex)
    if lam is None:
        pass
    elif isinstance(lam, Mapping):
        for v, val in lam.items():
            if str(v) not in vindex:
                raise GraphError(f"lambda: unknown vertex {v!r}")
            lam_arr[vindex[str(v)]] = complex(val)
    elif np.isscalar(lam):
        lam_arr[:] = complex(lam)
    else:
        lam_arr[:] = np.asarray(lam, dtype=complex)

    deg = np.bincount(origin, minlength=len(vertices))
    isolated = [vertices[i] for i in np.flatnonzero(deg == 0)]
    if isolated and not allow_disconnected:
        raise GraphError(f"isolated vertices {isolated}")
    connected = len(_components(len(vertices), origin, terminus)) == 1
    if not connected and not allow_disconnected:
        raise GraphError("graph is disconnected")

    return MetricGraph(
        vertices=vertices,
        edge_ids=tuple(ids),
        origin=_frozen(origin, int),
        terminus=_frozen(terminus, int),
        length=_frozen(length, float),
        potential=_frozen(potential, float),
        lam=_frozen(lam_arr, complex),
        connected=connected,
        _vindex=vindex,
    )


def random_graph(rng: np.random.Generator, n: int, m: int, *, loops=True, multi=True,
                 lam_scale=2.0, complex_lam=False) -> MetricGraph:
    """Random connected metric graph: spanning tree plus ``m - n + 1`` extra edges.

    Lengths in (0.5, 2), potentials in (-1, 1), real lambda in
    (-lam_scale, lam_scale).
    """
    if m < n - 1:
        raise GraphError("need m >= n - 1 for a connected graph")
    if n == 1 and not loops:
        raise GraphError("a one-vertex graph needs loops")
    edges = []
    for v in range(1, n):
        edges.append((int(rng.integers(v)), v))
    present = {tuple(sorted(e)) for e in edges}
    tries = 0
    while len(edges) < m:
        tries += 1
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v and (not loops or tries % 3):
            continue
        key = tuple(sorted((u, v)))
        if key in present and not multi:
            if tries > 100 * m:
                raise GraphError("cannot place edges without multi-edges")
            continue
        present.add(key)
        edges.append((u, v))
    rng.shuffle(edges)
    edge_list = [
        {"id": f"e{j + 1}", "from": f"v{u + 1}", "to": f"v{v + 1}",
         "length": rng.uniform(0.5, 2.0), "potential": rng.uniform(-1.0, 1.0)}
        for j, (u, v) in enumerate(edges)
    ]
    lam = rng.uniform(-lam_scale, lam_scale, n)
    if complex_lam:
        lam = lam + 1j * rng.uniform(-lam_scale, lam_scale, n)
    return build_graph([f"v{i + 1}" for i in range(n)], edge_list, lam)


@dataclass(frozen=True, eq=False)
class VoltageAssignment:
    """Arc labelling by group element indices with alpha(e^-1) = alpha(e)^-1."""

    graph: MetricGraph
    group: FiniteGroup
    voltage: np.ndarray

    def __post_init__(self):
        volt = np.asarray(self.voltage, dtype=int)
        if volt.shape != (self.graph.num_arcs,):
            raise GraphError(f"voltage map must cover all {self.graph.num_arcs} arcs")
        if volt.min() < 0 or volt.max() >= self.group.order:
            raise GraphError("voltage refers to an element outside the group")
        bad = np.flatnonzero(volt[self.graph.inverse] != self.group.inverse[volt])
        if bad.size:
            arc = self.graph.arc_ids[bad[0]]
            raise GraphError(f"voltage of {arc!r} is not inverse to that of its reverse arc")
        object.__setattr__(self, "voltage", _frozen(volt, int))

    @classmethod
    def from_edges(cls, graph: MetricGraph, group: FiniteGroup, edge_voltage) -> "VoltageAssignment":
        """``edge_voltage`` maps edge id (or position) to the voltage of the
        arc in listed direction; the reverse arc gets the inverse.  Missing
        edges get the identity."""
        volt = np.zeros(graph.num_arcs, dtype=int)
        items = edge_voltage.items() if isinstance(edge_voltage, Mapping) else enumerate(edge_voltage)
        for key, g in items:
            j = key if isinstance(key, (int, np.integer)) else _edge_pos(graph, key)
            g = group.index(g)
            volt[2 * j] = g
            volt[2 * j + 1] = group.inverse[g]
        return cls(graph, group, volt)

    @classmethod
    def trivial(cls, graph: MetricGraph, group: FiniteGroup | None = None) -> "VoltageAssignment":
        from .groups import cyclic_group

        group = group or cyclic_group(1)
        return cls(graph, group, np.zeros(graph.num_arcs, dtype=int))


def _edge_pos(graph, eid):
    try:
        return graph.edge_ids.index(str(eid))
    except ValueError:
        raise GraphError(f"voltage: unknown edge {eid!r}") from None


@dataclass(frozen=True, eq=False)
class CoveringGraph:
    """Derived graph G^alpha with both fibre maps.

    Covering vertex ``i`` projects to ``(vertex_proj[i], vertex_elem[i])``;
    covering arc ``a`` to ``(arc_proj[a], arc_elem[a])``.  ``vertex_lift`` and
    ``arc_lift`` index the other way round: ``[base index, element]``.
    """

    base: MetricGraph
    voltage: VoltageAssignment
    covering: MetricGraph
    vertex_proj: np.ndarray
    vertex_elem: np.ndarray
    arc_proj: np.ndarray
    arc_elem: np.ndarray
    vertex_lift: np.ndarray
    arc_lift: np.ndarray

    @property
    def connected(self) -> bool:
        return self.covering.connected

    def act(self, g: int) -> tuple[np.ndarray, np.ndarray]:
        """Left action g.(v, h) = (v, gh) as permutations of covering
        vertices and arcs."""
        mul = self.voltage.group.table
        vperm = self.vertex_lift[self.vertex_proj, mul[g, self.vertex_elem]]
        aperm = self.arc_lift[self.arc_proj, mul[g, self.arc_elem]]
        return vperm, aperm


def derived_covering(base: MetricGraph, va: VoltageAssignment) -> CoveringGraph:
    """Build G^alpha: vertices (v, g), arcs (e, g) from (o(e), g) to
    (t(e), g alpha(e)); length, potential and lambda are lifted."""
    if va.graph is not base and (va.graph.num_arcs != base.num_arcs):
        raise GraphError("voltage assignment belongs to a different graph")
    group = va.group
    p = group.order
    names = group.labels
    vnames = [f"({v},{names[g]})" for g in range(p) for v in base.vertices]
    edges = []
    for g in range(p):
        for j, eid in enumerate(base.edge_ids):
            a = 2 * j
            h = group.table[g, va.voltage[a]]
            edges.append({
                "id": f"({eid},{names[g]})",
                "from": vnames[g * base.n + base.origin[a]],
                "to": vnames[h * base.n + base.terminus[a]],
                "length": base.length[a],
                "potential": base.potential[a],
            })
    lam = np.tile(base.lam, p)
    cover = build_graph(vnames, edges, lam, allow_disconnected=True)

    vertex_proj = np.tile(np.arange(base.n), p)
    vertex_elem = np.repeat(np.arange(p), base.n)
    # covering edge (j, g) has arcs (e_j, g) and (e_j^-1, g alpha(e_j))
    arc_proj = np.empty(cover.num_arcs, dtype=int)
    arc_elem = np.empty(cover.num_arcs, dtype=int)
    for g in range(p):
        for j in range(base.m):
            c = 2 * (g * base.m + j)
            arc_proj[c], arc_elem[c] = 2 * j, g
            arc_proj[c + 1], arc_elem[c + 1] = 2 * j + 1, group.table[g, va.voltage[2 * j]]
    vertex_lift = np.empty((base.n, p), dtype=int)
    vertex_lift[vertex_proj, vertex_elem] = np.arange(cover.n)
    arc_lift = np.empty((base.num_arcs, p), dtype=int)
    arc_lift[arc_proj, arc_elem] = np.arange(cover.num_arcs)
    return CoveringGraph(
        base=base,
        voltage=va,
        covering=cover,
        vertex_proj=_frozen(vertex_proj, int),
        vertex_elem=_frozen(vertex_elem, int),
        arc_proj=_frozen(arc_proj, int),
        arc_elem=_frozen(arc_elem, int),
        vertex_lift=_frozen(vertex_lift, int),
        arc_lift=_frozen(arc_lift, int),
    )
