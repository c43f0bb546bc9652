"""
Information flow on unitary networks.

Every leg of dim D carries log_d D units of flow. Flows are kept exact
(fractions.Fraction) whenever D is a rational power of d, so conservation and
cut-independence are checked without float equality.

Usage
-----
    from src.analysis.flow import net_flow, cost_total
    nf = net_flow(net)          # nf.value, nf.defined, nf.cuts, nf.witness
    print(cost_total(net).total)
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from src.core.errors import InfeasibleConcatenation
from src.core.netgraph import BOND, PHYS, Edge, Port, UnitaryNetwork
from src.core.tensor import haar_random_tensor, identity_tensor

logger = logging.getLogger(__name__)

Flow = Fraction | float


#  Exact logarithms
def _factorize(n: int) -> dict[int, int]:
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def log_dim(dim: int, d: int) -> Flow:
    """log_d(dim): a Fraction when dim is a rational power of d, else a float."""
    if dim < 1 or d < 2:
        raise ValueError(f"log_dim needs dim >= 1 and d >= 2, got dim={dim}, d={d}")
    if dim == 1:
        return Fraction(0)
    fd, fn = _factorize(d), _factorize(dim)
    if set(fd) == set(fn):
        ratios = {Fraction(fn[p], fd[p]) for p in fd}
        if len(ratios) == 1:
            return ratios.pop()
    return math.log(dim) / math.log(d)


def log_ratio(num: int, den: int, d: int) -> Flow:
    a, b = log_dim(num, d), log_dim(den, d)
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a - b
    return float(a) - float(b)


def flow_sum(values: Iterable[Flow]) -> Flow:
    total: Flow = Fraction(0)
    for v in values:
        if isinstance(total, Fraction) and isinstance(v, Fraction):
            total += v
        else:
            total = float(total) + float(v)
    return total


def as_number(v: Flow) -> int | float:
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return float(v)


def exact_str(v: Flow) -> str:
    return str(v) if isinstance(v, Fraction) else f"{v:.12g}"


def edge_flow(dim: int, d: int) -> Flow:
    return log_dim(dim, d)


def conservation_check(net: UnitaryNetwork, d: int | None = None) -> dict[str, Flow]:
    """|sum of outgoing flow - sum of incoming flow| per vertex. Sources/sinks are not vertices."""
    d = d or net.d
    out = {}
    for vid, t in net.vertices.items():
        r = log_ratio(t.out_dim, t.in_dim, d)
        out[vid] = abs(r)
    return out


#  Vertical cuts
@dataclass
class VerticalCut:
    position: float
    rightward: list = field(default_factory=list)  # (label, dim)
    leftward: list = field(default_factory=list)

    def flow(self, d: int) -> Flow:
        right = flow_sum(log_dim(dim, d) for _, dim in self.rightward)
        left = flow_sum(log_dim(dim, d) for _, dim in self.leftward)
        return flow_sum([right, -left if isinstance(left, Fraction) else -float(left)])


def _between(a: float, b: float, c: float) -> bool:
    return min(a, b) < c < max(a, b)


def cut_crossings(net: UnitaryNetwork, position: float) -> VerticalCut:
    """Classify every leg crossing the vertical line x = position. A wrap edge crosses every
    cut outside the interval spanned by its endpoints, in the direction of its `wraps` sign."""
    cut = VerticalCut(float(position))
    for e in net.edges:
        x1, x2 = net.x(e.src), net.x(e.dst)
        dim = net.edge_dim(e)
        if e.wraps:
            if not (min(x1, x2) <= position <= max(x1, x2)):
                (cut.rightward if e.wraps > 0 else cut.leftward).append((e.key, dim))
        elif _between(x1, x2, position):
            (cut.rightward if x2 > x1 else cut.leftward).append((e.key, dim))
    for k, p in enumerate(net.sources):
        if p.site is not None and _between(p.site, net.x(p.vertex), position):
            side = cut.rightward if net.x(p.vertex) > p.site else cut.leftward
            side.append((f"in[{k}]", net.port_dim(p)))
    for k, p in enumerate(net.sinks):
        if p.site is not None and _between(net.x(p.vertex), p.site, position):
            side = cut.rightward if p.site > net.x(p.vertex) else cut.leftward
            side.append((f"out[{k}]", net.port_dim(p)))
    return cut


def interior_cuts(net: UnitaryNetwork) -> list[float]:
    sites = net.phys_sites
    return [(a + b) / 2 for a, b in zip(sites, sites[1:])]


def net_flow_cut(net: UnitaryNetwork, cut: VerticalCut | float, d: int | None = None) -> Flow:
    """Rightward minus leftward flow across the cut."""
    if not isinstance(cut, VerticalCut):
        cut = cut_crossings(net, cut)
    return cut.flow(d or net.d)


@dataclass
class NetFlow:
    value: Flow | None
    defined: bool
    cuts: dict = field(default_factory=dict)   # position -> flow
    witness: tuple | None = None               # two disagreeing cut positions
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "value": None if self.value is None else as_number(self.value),
            "exact": None if self.value is None else exact_str(self.value),
            "defined": self.defined,
            "cuts": {str(k): as_number(v) for k, v in self.cuts.items()},
            "witness": list(self.witness) if self.witness else None,
            "reason": self.reason,
        }


def _site_imbalance(net: UnitaryNetwork) -> list[int]:
    dims_in: dict[int, int] = {}
    dims_out: dict[int, int] = {}
    for p in net.sources:
        if p.kind == PHYS:
            dims_in[p.site] = dims_in.get(p.site, 1) * net.port_dim(p)
    for p in net.sinks:
        if p.kind == PHYS:
            dims_out[p.site] = dims_out.get(p.site, 1) * net.port_dim(p)
    return sorted(s for s in set(dims_in) | set(dims_out) if dims_in.get(s, 1) != dims_out.get(s, 1))


def net_flow(net: UnitaryNetwork, d: int | None = None, positions: Iterable[float] | None = None) -> NetFlow:
    """Compares the given cuts, else meta['bulk_cuts'] when the builder recorded them, else every
    interior cut."""
    d = d or net.d
    if positions is None:
        positions = net.meta.get("bulk_cuts") or interior_cuts(net)
    positions = [float(c) for c in positions]
    if not positions:
        return NetFlow(None, False, {}, None, "no interior vertical cut")
    values = {c: net_flow_cut(net, c, d) for c in positions}
    first = positions[0]
    for c in positions[1:]:
        a, b = values[first], values[c]
        same = a == b if isinstance(a, Fraction) and isinstance(b, Fraction) else math.isclose(
            float(a), float(b), abs_tol=1e-12)
        if not same:
            reason = f"non-uniform: cuts at {first} and {c} disagree"
            bad = _site_imbalance(net)
            if bad:
                reason += f"; in/out dims differ at sites {bad}"
            logger.info("net flow of %s undefined (%s)", net.meta.get("name", "?"), reason)
            return NetFlow(None, False, values, (first, c), reason)
    return NetFlow(values[first], True, values, None, "")


def partition_flow(net: UnitaryNetwork, region: Iterable[str], d: int | None = None) -> Flow:
    """Flow leaving a vertex set minus flow entering it (general, non-vertical surfaces)."""
    d = d or net.d
    region = set(region)
    out, inn = [], []
    for e in net.edges:
        if e.src in region and e.dst not in region:
            out.append(log_dim(net.edge_dim(e), d))
        elif e.dst in region and e.src not in region:
            inn.append(log_dim(net.edge_dim(e), d))
    out += [log_dim(net.port_dim(p), d) for p in net.sinks if p.vertex in region]
    inn += [log_dim(net.port_dim(p), d) for p in net.sources if p.vertex in region]
    i = flow_sum(inn)
    return flow_sum([flow_sum(out), -i if isinstance(i, Fraction) else -float(i)])


def gnvw_log_index(a_dims, b_dims, d: int, m: int = 0) -> Flow:
    """log_d(b_{2m} / a_{2m}) for per-cell Margolus dims."""
    a, b = int(a_dims[2 * m]), int(b_dims[2 * m])
    if a < 1 or b < 1:
        raise ValueError("Margolus cell dims must be positive")
    return log_ratio(b, a, d)


#  Cost
@dataclass
class CostReport:
    per_edge: dict = field(default_factory=dict)
    total: float = 0.0
    unit: str = "qudits"

    def to_dict(self) -> dict:
        return {"unit": self.unit, "total": self.total, "per_edge": dict(self.per_edge)}


def cost_from_edges(items: Iterable[tuple[str, Flow, float]], unit: str = "qudits") -> CostReport:
    """items: (edge label, flow, length)."""
    per_edge = {}
    for key, f, length in items:
        per_edge[key] = float(f) * float(length)
    return CostReport(per_edge, float(math.fsum(per_edge.values())), unit)


def cost_total(net: UnitaryNetwork, d: int | None = None) -> CostReport:
    d = d or net.d
    return cost_from_edges((e.key, log_dim(net.edge_dim(e), d), net.edge_length(e)) for e in net.edges)


#  Report
@dataclass
class FlowReport:
    base_d: int
    edge_flows: dict
    vertex_residuals: dict
    cut_flows: dict
    net_flow: NetFlow

    def to_dict(self) -> dict:
        return {
            "base_d": self.base_d,
            "edge_flows": {k: as_number(v) for k, v in self.edge_flows.items()},
            "vertex_residuals": {k: as_number(v) for k, v in self.vertex_residuals.items()},
            "cut_flows": {str(k): as_number(v) for k, v in self.cut_flows.items()},
            "net_flow": self.net_flow.to_dict(),
        }


def flow_report(net: UnitaryNetwork, d: int | None = None) -> FlowReport:
    d = d or net.d
    nf = net_flow(net, d)
    return FlowReport(
        base_d=d,
        edge_flows={e.key: log_dim(net.edge_dim(e), d) for e in net.edges},
        vertex_residuals=conservation_check(net, d),
        cut_flows=dict(nf.cuts),
        net_flow=nf,
    )


#  Concatenation
def _crossing(net: UnitaryNetwork, lo: float, hi: float, keep_left: bool) -> tuple[list[Edge], list[Edge]]:
    """Edges between the kept side and the dropped side, split into (rightward, leftward)."""
    right, left = [], []
    for e in net.edges:
        if e.wraps:
            raise InfeasibleConcatenation(f"periodic edge {e.key}: concatenation needs open networks")
        xs, xd = net.x(e.src), net.x(e.dst)
        if keep_left:
            if xs < lo <= xd:
                right.append(e)
            elif xd < lo <= xs:
                left.append(e)
        else:
            if xs <= hi < xd:
                right.append(e)
            elif xd <= hi < xs:
                left.append(e)
    return right, left


def concatenate_crossover(net1: UnitaryNetwork, net2: UnitaryNetwork, junction_site: int,
                          seed: int = 0, filler: str = "auto") -> UnitaryNetwork:
    """net1 left of the junction, net2 right of it, one new column at the junction.

    The bottom filler takes net1's rightward bonds and the junction site, and feeds net2's
    rightward bonds plus a vertical leg; the top filler closes the leftward bonds. The dims
    balance exactly when both nets carry the same net flow."""
    f1, f2 = net_flow(net1), net_flow(net2)
    if not (f1.defined and f2.defined):
        raise InfeasibleConcatenation(f"net flow undefined ({f1.reason or f2.reason})")
    if not math.isclose(float(f1.value), float(f2.value), abs_tol=1e-12):
        raise InfeasibleConcatenation(
            f"net flows differ ({exact_str(f1.value)} vs {exact_str(f2.value)}); flow conservation forbids a crossover")
    if net1.d != net2.d:
        raise InfeasibleConcatenation(f"qudit dims differ ({net1.d} vs {net2.d})")
    j = junction_site
    r1, l1 = _crossing(net1, j, j, keep_left=True)
    r2, l2 = _crossing(net2, j, j, keep_left=False)
    phys_dims = [net1.port_dim(p) for p in net1.sources if p.kind == PHYS and p.site == j]
    p_dim = math.prod(phys_dims) if phys_dims else net1.d
    dr1 = [net1.edge_dim(e) for e in r1]
    dl1 = [net1.edge_dim(e) for e in l1]
    dr2 = [net2.edge_dim(e) for e in r2]
    dl2 = [net2.edge_dim(e) for e in l2]
    num, den = math.prod(dr1) * p_dim, math.prod(dr2)
    if num % den:
        raise InfeasibleConcatenation(f"bond dims {dr1} -> {dr2} cannot be balanced in one column")
    v = num // den
    if v * math.prod(dl2) != p_dim * math.prod(dl1):
        raise InfeasibleConcatenation("leftward bond dims do not balance at the junction")

    in_b = [(f"l{k}", dim) for k, dim in enumerate(dr1)] + [("p", p_dim)]
    out_b = [(f"r{k}", dim) for k, dim in enumerate(dr2)] + [("v", v)]
    in_t = [("v", v)] + [(f"r{k}", dim) for k, dim in enumerate(dl2)]
    out_t = [("p", p_dim)] + [(f"l{k}", dim) for k, dim in enumerate(dl1)]
    same = dr1 == dr2 and dl1 == dl2
    if filler == "identity" or (filler == "auto" and same):
        bottom = identity_tensor(in_b, out_b, "mid_b")
        top = identity_tensor(in_t, out_t, "mid_t")
    else:
        bottom = haar_random_tensor([dm for _, dm in in_b], [dm for _, dm in out_b], seed, "mid_b",
                                    [i for i, _ in in_b], [o for o, _ in out_b])
        top = haar_random_tensor([dm for _, dm in in_t], [dm for _, dm in out_t], seed + 1, "mid_t",
                                 [i for i, _ in in_t], [o for o, _ in out_t])

    keep1 = [v_ for v_ in net1.vertices if net1.x(v_) < j]
    keep2 = [v_ for v_ in net2.vertices if net2.x(v_) > j]
    vertices, coords = {}, {}
    for v_ in keep1:
        vertices[f"L_{v_}"] = net1.vertices[v_]
        coords[f"L_{v_}"] = net1.coords[v_]
    vertices["mid_b"], coords["mid_b"] = bottom, (j, 0)
    vertices["mid_t"], coords["mid_t"] = top, (j, 1)
    for v_ in keep2:
        vertices[f"R_{v_}"] = net2.vertices[v_]
        coords[f"R_{v_}"] = net2.coords[v_]

    edges = []
    for e in net1.edges:
        if e.src in keep1 and e.dst in keep1:
            edges.append(Edge(f"L_{e.src}", e.src_leg, f"L_{e.dst}", e.dst_leg, e.length))
    for k, e in enumerate(r1):
        edges.append(Edge(f"L_{e.src}", e.src_leg, "mid_b", f"l{k}", e.length))
    for k, e in enumerate(l1):
        edges.append(Edge("mid_t", f"l{k}", f"L_{e.dst}", e.dst_leg, e.length))
    edges.append(Edge("mid_b", "v", "mid_t", "v"))
    for k, e in enumerate(r2):
        edges.append(Edge("mid_b", f"r{k}", f"R_{e.dst}", e.dst_leg, e.length))
    for k, e in enumerate(l2):
        edges.append(Edge(f"R_{e.src}", e.src_leg, "mid_t", f"r{k}", e.length))
    for e in net2.edges:
        if e.src in keep2 and e.dst in keep2:
            edges.append(Edge(f"R_{e.src}", e.src_leg, f"R_{e.dst}", e.dst_leg, e.length))

    def ports(net, keep, prefix, which):
        return [Port(f"{prefix}{p.vertex}", p.leg, p.site, p.kind, p.tag)
                for p in getattr(net, which) if p.vertex in keep]

    sources = ports(net1, keep1, "L_", "sources") + [Port("mid_b", "p", j)] + ports(net2, keep2, "R_", "sources")
    sinks = ports(net1, keep1, "L_", "sinks") + [Port("mid_t", "p", j)] + ports(net2, keep2, "R_", "sinks")
    name = f"crossover({net1.meta.get('name', 'net1')},{net2.meta.get('name', 'net2')})@{j}"
    logger.info("%s: middle column vertical dim %d", name, v)
    return UnitaryNetwork(vertices, edges, sources, sinks, coords, net1.d, {"name": name, "junction": j})
