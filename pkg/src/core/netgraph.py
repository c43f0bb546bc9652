"""
Unitary networks as directed graphs.

A network holds vertex tensors, edges joining an outgoing leg to an incoming
leg, and ports (sources/sinks) binding the remaining legs to lattice sites.
Ports of kind "bond" are horizontal externals of OBC windows or legs promoted
when a sub-network is cut out; their site is a boundary coordinate or None.

Graph algorithms run on a networkx MultiDiGraph view in which every source
and sink is an explicit node (``in[k]`` / ``out[k]``).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import networkx as nx

from src.core.errors import LegError, NotUnitaryError, DimensionError, UnitaryNetworkError, UnknownVertexError
from src.core.tensor import (TOL, GeneralTensor, UnitaryTensor, contract_legs, local_unitarity_residual,
                             merge_legs, trace_pair)

logger = logging.getLogger(__name__)

PHYS, BOND = "phys", "bond"


@dataclass(frozen=True)
class Port:
    vertex: str
    leg: str
    site: int | None = None
    kind: str = PHYS
    tag: str = ""


@dataclass(frozen=True)
class Edge:
    src: str
    src_leg: str
    dst: str
    dst_leg: str
    length: float | None = None  # None: |x_src - x_dst| (horizontal a = 1, vertical 0)
    wraps: int = 0               # +1 / -1: crosses the periodic seam moving right / left

    @property
    def key(self) -> str:
        return f"{self.src}.{self.src_leg}->{self.dst}.{self.dst_leg}"


@dataclass(frozen=True, eq=False)
class UnitaryNetwork:
    vertices: dict
    edges: tuple = ()
    sources: tuple = ()
    sinks: tuple = ()
    coords: dict = field(default_factory=dict)  # vertex -> (x, layer)
    d: int = 2
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertices", dict(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "sinks", tuple(self.sinks))
        coords = {v: tuple(self.coords.get(v, (0, 0))) for v in self.vertices}
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "meta", dict(self.meta))

    def tensor(self, vid: str) -> GeneralTensor:
        try:
            return self.vertices[vid]
        except KeyError:
            raise UnknownVertexError(f"unknown vertex {vid!r}") from None

    def x(self, vid: str) -> float:
        return self.coords[vid][0]

    def edge_length(self, e: Edge) -> float:
        if e.length is not None:
            return float(e.length)
        if e.wraps:
            return 1.0
        return float(abs(self.x(e.src) - self.x(e.dst)))

    def edge_dim(self, e: Edge) -> int:
        return self.tensor(e.src).leg(e.src_leg).dim

    def port_dim(self, p: Port) -> int:
        return self.tensor(p.vertex).leg(p.leg).dim

    @property
    def phys_sites(self) -> list[int]:
        return sorted({p.site for p in self.sources + self.sinks if p.kind == PHYS and p.site is not None})

    @property
    def periodic(self) -> bool:
        return any(e.wraps for e in self.edges)

    def with_meta(self, **kw) -> "UnitaryNetwork":
        return replace(self, meta={**self.meta, **kw})


class NetworkBuilder:
    """Incremental assembly. References are checked here; dims and directions are left to validate()."""

    def __init__(self, d: int = 2, **meta):
        self.d = d
        self.meta = dict(meta)
        self._vertices: dict[str, GeneralTensor] = {}
        self._coords: dict[str, tuple[float, int]] = {}
        self._edges: list[Edge] = []
        self._sources: list[Port] = []
        self._sinks: list[Port] = []

    def add(self, vid: str, tensor: GeneralTensor, x: float = 0, layer: int = 0) -> "NetworkBuilder":
        if vid in self._vertices:
            raise UnitaryNetworkError(f"vertex {vid!r} added twice")
        self._vertices[vid] = tensor
        self._coords[vid] = (x, layer)
        return self

    def _check(self, vid: str, leg: str):
        if vid not in self._vertices:
            raise UnknownVertexError(f"unknown vertex {vid!r}")
        self._vertices[vid].leg(leg)

    def connect(self, src: str, src_leg: str, dst: str, dst_leg: str, length: float | None = None,
                wraps: int = 0) -> "NetworkBuilder":
        self._check(src, src_leg)
        self._check(dst, dst_leg)
        self._edges.append(Edge(src, src_leg, dst, dst_leg, length, wraps))
        return self

    def source(self, vid: str, leg: str, site: int | None = None, kind: str = PHYS, tag: str = ""):
        self._check(vid, leg)
        self._sources.append(Port(vid, leg, site, kind, tag))
        return self

    def sink(self, vid: str, leg: str, site: int | None = None, kind: str = PHYS, tag: str = ""):
        self._check(vid, leg)
        self._sinks.append(Port(vid, leg, site, kind, tag))
        return self

    def build(self) -> UnitaryNetwork:
        return UnitaryNetwork(self._vertices, self._edges, self._sources, self._sinks, self._coords,
                              self.d, self.meta)


def source_node(k: int) -> str:
    return f"in[{k}]"


def sink_node(k: int) -> str:
    return f"out[{k}]"


def graph(net: UnitaryNetwork) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    for vid in net.vertices:
        g.add_node(vid, kind="vertex", x=net.x(vid), layer=net.coords[vid][1])
    for k, p in enumerate(net.sources):
        g.add_node(source_node(k), kind="source", site=p.site, port=p)
    for k, p in enumerate(net.sinks):
        g.add_node(sink_node(k), kind="sink", site=p.site, port=p)
    for e in net.edges:
        g.add_edge(e.src, e.dst, key=e.key, dim=net.edge_dim(e), length=net.edge_length(e), wraps=e.wraps)
    for k, p in enumerate(net.sources):
        length = abs(p.site - net.x(p.vertex)) if p.site is not None else 0.0
        g.add_edge(source_node(k), p.vertex, key=f"in[{k}]", dim=net.port_dim(p), length=length, wraps=0)
    for k, p in enumerate(net.sinks):
        length = abs(p.site - net.x(p.vertex)) if p.site is not None else 0.0
        g.add_edge(p.vertex, sink_node(k), key=f"out[{k}]", dim=net.port_dim(p), length=length, wraps=0)
    return g


def _vertex_digraph(net: UnitaryNetwork) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(net.vertices)
    g.add_edges_from((e.src, e.dst) for e in net.edges)
    return g


#  Validation
@dataclass
class Diagnostics:
    errors: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    non_unitary: list = field(default_factory=list)
    dag: bool = True
    cycle: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors and not self.non_unitary and self.dag

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "dag": self.dag,
            "errors": list(self.errors),
            "non_unitary": list(self.non_unitary),
            "residuals": {k: (None if v == float("inf") else v) for k, v in self.residuals.items()},
            "cycle": [list(c) for c in self.cycle],
        }


def validate(net: UnitaryNetwork, tol: float = TOL) -> Diagnostics:
    diag = Diagnostics()
    bound: dict[tuple[str, str], int] = {}

    def bind(vid, leg):
        bound[(vid, leg)] = bound.get((vid, leg), 0) + 1

    for e in net.edges:
        a = net.tensor(e.src).leg(e.src_leg)
        b = net.tensor(e.dst).leg(e.dst_leg)
        if a.incoming:
            diag.errors.append(f"edge {e.key}: {e.src}.{e.src_leg} is incoming, an edge must start on an outgoing leg")
        if not b.incoming:
            diag.errors.append(f"edge {e.key}: {e.dst}.{e.dst_leg} is outgoing, an edge must end on an incoming leg")
        if a.dim != b.dim:
            diag.errors.append(f"edge {e.key}: dim mismatch {e.src}.{e.src_leg}={a.dim} vs {e.dst}.{e.dst_leg}={b.dim}")
        bind(e.src, e.src_leg)
        bind(e.dst, e.dst_leg)
    for k, p in enumerate(net.sources):
        if not net.tensor(p.vertex).leg(p.leg).incoming:
            diag.errors.append(f"source in[{k}]: {p.vertex}.{p.leg} is not an incoming leg")
        bind(p.vertex, p.leg)
    for k, p in enumerate(net.sinks):
        if net.tensor(p.vertex).leg(p.leg).incoming:
            diag.errors.append(f"sink out[{k}]: {p.vertex}.{p.leg} is not an outgoing leg")
        bind(p.vertex, p.leg)

    for vid, t in net.vertices.items():
        for leg in t.legs:
            n = bound.get((vid, leg.id), 0)
            if n == 0:
                diag.errors.append(f"leg {vid}.{leg.id} is not bound to an edge, source or sink")
            elif n > 1:
                diag.errors.append(f"leg {vid}.{leg.id} is bound {n} times")
        r = local_unitarity_residual(t)
        diag.residuals[vid] = r
        if r > tol:
            diag.non_unitary.append(vid)

    topo = topological_sort(net)
    diag.dag = topo.ok
    diag.cycle = topo.cycle or []
    if not diag.dag:
        logger.warning("network %s has a directed loop: %s", net.meta.get("name", "?"), diag.cycle)
    return diag


class TopoOrder(NamedTuple):
    order: list | None
    cycle: list | None

    @property
    def ok(self) -> bool:
        return self.order is not None


def topological_sort(net: UnitaryNetwork) -> TopoOrder:
    """Ties are broken by vertex insertion order, so results are deterministic."""
    g = _vertex_digraph(net)
    rank = {v: k for k, v in enumerate(net.vertices)}
    try:
        return TopoOrder(list(nx.lexicographical_topological_sort(g, key=rank.get)), None)
    except nx.NetworkXUnfeasible:
        cycle = [(u, v) for u, v, *_ in nx.find_cycle(g)]
        return TopoOrder(None, cycle)


#  Sub-networks, cones, distances
@dataclass(frozen=True, eq=False)
class SubNetwork:
    network: UnitaryNetwork
    parent_vertices: tuple = ()
    internal_edges: tuple = ()
    promoted: dict = field(default_factory=dict)  # Port -> parent Edge


def extract_subnetwork(net: UnitaryNetwork, vertex_set: Iterable[str]) -> SubNetwork:
    chosen = set(vertex_set)
    for v in chosen:
        net.tensor(v)
    keep = [v for v in net.vertices if v in chosen]
    internal = [e for e in net.edges if e.src in chosen and e.dst in chosen]
    sources = [p for p in net.sources if p.vertex in chosen]
    sinks = [p for p in net.sinks if p.vertex in chosen]
    promoted = {}
    for e in net.edges:
        if e.dst in chosen and e.src not in chosen:
            p = Port(e.dst, e.dst_leg, None, BOND, e.key)
            sources.append(p)
            promoted[p] = e
        elif e.src in chosen and e.dst not in chosen:
            p = Port(e.src, e.src_leg, None, BOND, e.key)
            sinks.append(p)
            promoted[p] = e
    sub = UnitaryNetwork({v: net.vertices[v] for v in keep}, internal, sources, sinks,
                         {v: net.coords[v] for v in keep}, net.d,
                         {"name": f"{net.meta.get('name', 'net')}[{','.join(keep)}]"})
    return SubNetwork(sub, tuple(keep), tuple(internal), promoted)


@dataclass(frozen=True, eq=False)
class CausalCone:
    apex: str
    cone: SubNetwork
    base: frozenset


def causal_cone(net: UnitaryNetwork, apex: str) -> CausalCone:
    g = graph(net)
    if apex not in g:
        raise UnknownVertexError(f"unknown vertex {apex!r}")
    reach = nx.descendants(g, apex) | {apex}
    base = set()
    for n in reach:
        attrs = g.nodes[n]
        if attrs["kind"] == "sink" and attrs["port"].kind == PHYS and attrs["site"] is not None:
            base.add(attrs["site"])
    cone = extract_subnetwork(net, [v for v in net.vertices if v in reach])
    return CausalCone(apex, cone, frozenset(base))


def network_distance(net: UnitaryNetwork, s: str, t: str) -> float:
    g = graph(net)
    for v in (s, t):
        if v not in g:
            raise UnknownVertexError(f"unknown vertex {v!r}")
    try:
        return float(nx.dijkstra_path_length(g, s, t, weight="length"))
    except nx.NetworkXNoPath:
        return float("inf")


class CanonicalCheck(NamedTuple):
    ok: bool
    witness: str | None
    reason: str


def canonical_form_check(net: UnitaryNetwork, center: Iterable[str]) -> CanonicalCheck:
    """The center can sit consecutively in some topological order iff no outside
    vertex lies on a directed path between two center vertices."""
    center = set(center)
    for v in center:
        net.tensor(v)
    topo = topological_sort(net)
    if not topo.ok:
        return CanonicalCheck(False, None, "not a DAG")
    g = _vertex_digraph(net)
    below, above = set(), set()
    for v in center:
        below |= nx.descendants(g, v)
        above |= nx.ancestors(g, v)
    between = (below & above) - center
    if between:
        witness = next(v for v in topo.order if v in between)
        return CanonicalCheck(False, witness, f"{witness} lies on a path between center vertices")
    return CanonicalCheck(True, None, "")


#  Rewrites used by constructions
def _unitary_if_possible(t: GeneralTensor) -> GeneralTensor:
    if t.in_dim != t.out_dim:
        return t
    try:
        return UnitaryTensor.from_general(t)
    except (NotUnitaryError, DimensionError):
        return t


def contract_vertices(net: UnitaryNetwork, group: Sequence[str], new_id: str | None = None,
                      x: float | None = None, layer: int | None = None) -> UnitaryNetwork:
    """Replace `group` by one vertex holding its contraction. Surviving legs are renamed
    '<vertex>.<leg>'. Loops through the rest of the network are allowed to appear."""
    group = list(dict.fromkeys(group))
    if not group:
        raise UnitaryNetworkError("contract_vertices needs a non-empty group")
    for v in group:
        net.tensor(v)
    new_id = new_id or "".join(group)
    if new_id in net.vertices and new_id not in group:
        raise UnitaryNetworkError(f"vertex id {new_id!r} already in use")
    members: set[str] = set()
    done: set[int] = set()
    acc = None
    for v in group:
        t = net.vertices[v].relabel({leg.id: f"{v}.{leg.id}" for leg in net.vertices[v].legs})
        if acc is None:
            acc = t.general()
        else:
            pairs = []
            for k, e in enumerate(net.edges):
                if k in done:
                    continue
                if e.src in members and e.dst == v:
                    pairs.append((f"{e.src}.{e.src_leg}", f"{v}.{e.dst_leg}"))
                    done.add(k)
                elif e.dst in members and e.src == v:
                    pairs.append((f"{e.dst}.{e.dst_leg}", f"{v}.{e.src_leg}"))
                    done.add(k)
            acc = contract_legs(acc, t, pairs, label=new_id)
        members.add(v)
        for k, e in enumerate(net.edges):
            if k not in done and e.src in members and e.dst in members:
                acc = trace_pair(acc, f"{e.src}.{e.src_leg}", f"{e.dst}.{e.dst_leg}", label=new_id)
                done.add(k)
    merged = _unitary_if_possible(acc.with_label(new_id))
    logger.debug("contracted %s into %s (%d legs)", group, new_id, len(merged.legs))

    def rename(vid: str, leg: str) -> tuple[str, str]:
        return (new_id, f"{vid}.{leg}") if vid in members else (vid, leg)

    vertices, coords = {}, {}
    first = group[0]
    for v, t in net.vertices.items():
        if v == first:
            vertices[new_id] = merged
            xs = [net.x(g) for g in group]
            coords[new_id] = (x if x is not None else xs[0],
                              layer if layer is not None else min(net.coords[g][1] for g in group))
        elif v not in members:
            vertices[v] = t
            coords[v] = net.coords[v]
    edges = []
    for k, e in enumerate(net.edges):
        if k in done:
            continue
        s, sl = rename(e.src, e.src_leg)
        t_, tl = rename(e.dst, e.dst_leg)
        edges.append(Edge(s, sl, t_, tl, e.length, e.wraps))
    sources = [replace(p, vertex=rename(p.vertex, p.leg)[0], leg=rename(p.vertex, p.leg)[1]) for p in net.sources]
    sinks = [replace(p, vertex=rename(p.vertex, p.leg)[0], leg=rename(p.vertex, p.leg)[1]) for p in net.sinks]
    return UnitaryNetwork(vertices, edges, sources, sinks, coords, net.d, net.meta)


def merge_parallel_edges(net: UnitaryNetwork, src: str, dst: str) -> UnitaryNetwork:
    """Fuse every src->dst edge into one bond whose dim is the product."""
    par = [e for e in net.edges if e.src == src and e.dst == dst]
    if len(par) < 2:
        return net
    out_ids = [e.src_leg for e in par]
    in_ids = [e.dst_leg for e in par]
    out_new, in_new = "+".join(out_ids), "+".join(in_ids)
    vertices = dict(net.vertices)
    vertices[src] = merge_legs(vertices[src], out_ids, out_new)
    if src == dst:
        vertices[dst] = merge_legs(vertices[dst], in_ids, in_new)
    else:
        vertices[dst] = merge_legs(net.vertices[dst], in_ids, in_new)
    edges, placed = [], False
    for e in net.edges:
        if e in par:
            if not placed:
                edges.append(Edge(src, out_new, dst, in_new, e.length, e.wraps))
                placed = True
            continue
        edges.append(e)
    return UnitaryNetwork(vertices, edges, net.sources, net.sinks, net.coords, net.d, net.meta)


def close_horizontal(net: UnitaryNetwork) -> UnitaryNetwork:
    """Join each bond sink to the bond source with the same tag (port order when untagged)
    by a periodic edge. Purely structural; unitarity of the result is not checked here."""
    bsrc = [p for p in net.sources if p.kind == BOND]
    bsnk = [p for p in net.sinks if p.kind == BOND]
    if len(bsrc) != len(bsnk):
        raise LegError(f"{len(bsnk)} horizontal outputs cannot pair with {len(bsrc)} horizontal inputs")
    if all(p.tag for p in bsrc + bsnk):
        by_tag = {p.tag: p for p in bsrc}
        missing = [p.tag for p in bsnk if p.tag not in by_tag]
        if missing:
            raise LegError(f"no horizontal input tagged {missing}")
        pairs = [(s, by_tag[s.tag]) for s in bsnk]
    else:
        pairs = list(zip(bsnk, bsrc))
    edges = list(net.edges)
    for snk, src in pairs:
        a, b = net.port_dim(snk), net.port_dim(src)
        if a != b:
            raise DimensionError(f"horizontal legs {snk.vertex}.{snk.leg} (dim {a}) and "
                                 f"{src.vertex}.{src.leg} (dim {b}) cannot be joined")
        wraps = 1 if net.x(snk.vertex) >= net.x(src.vertex) else -1
        edges.append(Edge(snk.vertex, snk.leg, src.vertex, src.leg, None, wraps))
    name = net.meta.get("name", "net")
    return UnitaryNetwork(net.vertices, edges, [p for p in net.sources if p.kind != BOND],
                          [p for p in net.sinks if p.kind != BOND], net.coords, net.d,
                          {**net.meta, "name": f"{name}_pbc", "periodic": True})


def bound_leg(net: UnitaryNetwork, vid: str, leg: str):
    """The edge or port a leg is bound to (first match), else raise."""
    for e in net.edges:
        if (e.src, e.src_leg) == (vid, leg) or (e.dst, e.dst_leg) == (vid, leg):
            return e
    for p in net.sources + net.sinks:
        if (p.vertex, p.leg) == (vid, leg):
            return p
    raise LegError(f"leg {vid}.{leg} is unbound")
