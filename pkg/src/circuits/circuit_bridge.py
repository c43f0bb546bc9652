"""
Unitary networks <-> sequential quantum circuits.

un_to_circuit walks the network in topological order; every leg of dim d^k
occupies k wires, and a vertex becomes one gate once its input wires have been
brought together by adjacent SWAPs. circuit_to_un pads every gate into a
bilayer block and compresses the blocks vertically site by site.

Usage
-----
    from src.circuits.circuit_bridge import un_to_circuit, circuit_to_un, verify_equivalence
    circ, report = un_to_circuit(net)
    back, _ = circuit_to_un(circ)
    verify_equivalence(back, circ)   # ~1e-15
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.core.errors import ConversionError, CycleError, DimensionError, NotUnitaryError
from src.core.evaluator import evaluate, site_matrix
from src.core.gates import SWAP, embed_gate, swap
from src.core.netgraph import NetworkBuilder, UnitaryNetwork, topological_sort
from src.core.tensor import identity_tensor, reshape_to_matrix
from src.sim.gallery import add_padding_block

logger = logging.getLogger(__name__)

GATE_TOL = 1e-9


@dataclass
class QuantumCircuit:
    n_wires: int
    gates: list = field(default_factory=list)      # (matrix, wires) in time order
    d: int = 2
    wire_site_map: dict = field(default_factory=dict)

    def __post_init__(self):
        checked = []
        for k, (g, wires) in enumerate(self.gates):
            g = np.asarray(g, dtype=complex)
            wires = [int(w) for w in wires]
            if any(not 0 <= w < self.n_wires for w in wires) or len(set(wires)) != len(wires):
                raise ConversionError(f"gate {k}: wires {wires} invalid for {self.n_wires} wires")
            if g.shape != (self.d ** len(wires),) * 2:
                raise DimensionError(f"gate {k}: shape {g.shape} does not act on {len(wires)} wires of dim {self.d}")
            res = np.linalg.norm(g.conj().T @ g - np.eye(g.shape[0]))
            if res > GATE_TOL:
                raise NotUnitaryError(f"gate {k} is not unitary (residual {res:.2e})")
            checked.append((g, wires))
        self.gates = checked
        if not self.wire_site_map:
            self.wire_site_map = {w: w for w in range(self.n_wires)}

    def append(self, gate, wires: Sequence[int]) -> "QuantumCircuit":
        self.gates.append((np.asarray(gate, dtype=complex), [int(w) for w in wires]))
        return self

    def matrix(self) -> np.ndarray:
        """Gate-by-gate dense product (first gate applied first)."""
        u = np.eye(self.d ** self.n_wires, dtype=complex)
        for g, wires in self.gates:
            u = embed_gate(g, wires, self.n_wires, self.d) @ u
        return u

    def sites(self) -> dict[int, int]:
        """wire -> lattice site; one wire per site."""
        smap = {w: int(self.wire_site_map.get(w, w)) for w in range(self.n_wires)}
        if len(set(smap.values())) != len(smap):
            raise ConversionError(f"wire_site_map {smap} places several wires on one site")
        return smap

    def site_ordered_matrix(self) -> np.ndarray:
        """matrix() with wires permuted into ascending site order (stable for shared sites)."""
        order = sorted(range(self.n_wires), key=lambda w: int(self.wire_site_map.get(w, w)))
        u = self.matrix()
        if order == list(range(self.n_wires)):
            return u
        t = u.reshape([self.d] * (2 * self.n_wires))
        t = np.transpose(t, order + [self.n_wires + w for w in order])
        return t.reshape(u.shape)

    def depth(self) -> int:
        level = [0] * self.n_wires
        for _, wires in self.gates:
            t = 1 + max((level[w] for w in wires), default=0)
            for w in wires:
                level[w] = t
        return max(level, default=0)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n_wires": self.n_wires,
            "wire_site_map": {str(k): v for k, v in sorted(self.wire_site_map.items())},
            "gates": [{"wires": list(w), "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in g]}
                      for g, w in self.gates],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "QuantumCircuit":
        gates = []
        for g in doc.get("gates", []):
            m = np.array([[complex(re, im) for re, im in row] for row in g["matrix"]], dtype=complex)
            gates.append((m, g["wires"]))
        wmap = {int(k): v for k, v in doc.get("wire_site_map", {}).items()}
        return cls(int(doc["n_wires"]), gates, int(doc.get("d", 2)), wmap)


@dataclass
class ConversionReport:
    swaps_inserted: int = 0
    layers: int = 0
    max_bond_dim: int = 1
    equivalence_residual: float = 0.0
    gate_count: int = 0

    def to_dict(self) -> dict:
        return {"swaps_inserted": self.swaps_inserted, "layers": self.layers, "max_bond_dim": self.max_bond_dim,
                "equivalence_residual": self.equivalence_residual, "gate_count": self.gate_count}


def _n_qudits(dim: int, d: int, what: str) -> int:
    k = round(math.log(dim, d)) if dim > 1 else 0
    if d ** k != dim:
        raise ConversionError(f"{what} has dim {dim}, not a power of {d}")
    return k


def _port_order(ports) -> list[int]:
    return sorted(range(len(ports)), key=lambda k: (ports[k].site if ports[k].site is not None else math.inf, k))


def _ordered_matrix(net: UnitaryNetwork) -> np.ndarray:
    """Global matrix with sources and sinks each sorted by site (all ports kept)."""
    t = evaluate(net)
    n_src = len(net.sources)
    src, snk = _port_order(net.sources), _port_order(net.sinks)
    data = np.transpose(t.data, [n_src + j for j in snk] + src)
    rows = math.prod(net.port_dim(net.sinks[j]) for j in snk)
    cols = math.prod(net.port_dim(net.sources[j]) for j in src)
    return data.reshape(rows, cols)


def verify_equivalence(a, b) -> float:
    """min_phi ||A - e^{i phi} B||_F / ||B||_F. Networks are read through site_matrix, circuits in site order."""
    def as_matrix(x):
        if isinstance(x, UnitaryNetwork):
            return site_matrix(x)
        if isinstance(x, QuantumCircuit):
            return x.site_ordered_matrix()
        return np.asarray(x, dtype=complex)

    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"cannot compare operators of shape {ma.shape} and {mb.shape}")
    overlap = np.vdot(mb, ma)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.linalg.norm(ma - phase * mb) / np.linalg.norm(mb))


#  Network -> circuit
def un_to_circuit(net: UnitaryNetwork) -> tuple[QuantumCircuit, ConversionReport]:
    if net.periodic:
        raise ConversionError("periodic networks have no circuit form; cut them open first")
    topo = topological_sort(net)
    if not topo.ok:
        raise CycleError(f"network has a directed loop through {topo.cycle}", topo.cycle)
    d = net.d
    producer = {}
    for e in net.edges:
        producer[(e.dst, e.dst_leg)] = (e.src, e.src_leg)
    wires: list[tuple] = []
    wire_site = {}
    for k in _port_order(net.sources):
        p = net.sources[k]
        for j in range(_n_qudits(net.port_dim(p), d, f"source {p.vertex}.{p.leg}")):
            wire_site[len(wires)] = p.site if p.site is not None else -1
            wires.append(("src", p.vertex, p.leg, j))

    circ = QuantumCircuit(len(wires), [], d, wire_site)
    swaps = 0

    def bring(labels: list[tuple]) -> int:
        nonlocal swaps
        if not labels:
            return 0
        start = min(wires.index(lbl) for lbl in labels)
        for j, lbl in enumerate(labels):
            idx = wires.index(lbl)
            while idx > start + j:
                wires[idx - 1], wires[idx] = wires[idx], wires[idx - 1]
                circ.append(SWAP if d == 2 else swap(d), [idx - 1, idx])
                swaps += 1
                idx -= 1
        return start

    for vid in topo.order:
        t = net.tensor(vid)
        if t.in_dim != t.out_dim:
            raise ConversionError(f"vertex {vid} is not square ({t.in_dim} -> {t.out_dim})")
        in_labels = []
        for leg in t.in_legs:
            origin = producer.get((vid, leg.id))
            for j in range(_n_qudits(leg.dim, d, f"leg {vid}.{leg.id}")):
                in_labels.append(("out",) + origin + (j,) if origin else ("src", vid, leg.id, j))
        out_labels = [("out", vid, leg.id, j) for leg in t.out_legs
                      for j in range(_n_qudits(leg.dim, d, f"leg {vid}.{leg.id}"))]
        start = bring(in_labels)
        span = list(range(start, start + len(in_labels)))
        circ.append(reshape_to_matrix(t), span)
        for w, lbl in zip(span, out_labels):
            wires[w] = lbl

    # final routing: sinks sorted by site
    targets = []
    for k in _port_order(net.sinks):
        p = net.sinks[k]
        targets += [("out", p.vertex, p.leg, j) for j in range(_n_qudits(net.port_dim(p), d, f"sink {p.vertex}.{p.leg}"))]
    bring(targets)
    circ = QuantumCircuit(circ.n_wires, circ.gates, d, wire_site)
    residual = verify_equivalence(_ordered_matrix(net), circ.matrix()) if circ.n_wires <= 12 else float("nan")
    report = ConversionReport(swaps, circ.depth(), max((net.edge_dim(e) for e in net.edges), default=1),
                              residual, len(circ.gates))
    logger.info("network -> circuit: %d gates (%d swaps) on %d wires", len(circ.gates), swaps, circ.n_wires)
    return circ, report


#  Circuit -> network
def _ascending(g: np.ndarray, wires: list[int], d: int) -> tuple[np.ndarray, list[int]]:
    """Reorder a gate so that its sites ascend; they must form a contiguous window."""
    order = sorted(range(len(wires)), key=lambda k: wires[k])
    sw = [wires[k] for k in order]
    if sw != list(range(sw[0], sw[0] + len(sw))):
        raise ConversionError(f"gate on sites {wires} is not contiguous; route it with swaps first")
    if order == list(range(len(wires))):
        return g, sw
    k = len(wires)
    t = g.reshape([d] * (2 * k))
    t = np.transpose(t, order + [k + j for j in order])
    return t.reshape(d ** k, d ** k), sw


def circuit_to_un(circuit: QuantumCircuit) -> tuple[UnitaryNetwork, ConversionReport]:
    """Every gate becomes a padding bilayer on the sites of its wires (wire_site_map). Blocks are
    compressed vertically: each column of a block takes the two lowest free layers of its site, so
    a site touched by n gates uses 2n layers."""
    d, n = circuit.d, circuit.n_wires
    site_of = circuit.sites()
    b = NetworkBuilder(d, name=f"circuit_{n}", n=n)
    current: dict[int, tuple[str, str]] = {}
    first: dict[int, tuple[str, str]] = {}
    height = {s: 0 for s in sorted(site_of.values())}
    for k, (g, wires) in enumerate(circuit.gates):
        g, sites = _ascending(g, [site_of[w] for w in wires], d)
        ins, outs = add_padding_block(b, f"g{k}_", g, sites, d, layer={s: height[s] for s in sites})
        for s in sites:
            if s in current:
                b.connect(*current[s], *ins[s])
            else:
                first[s] = ins[s]
            current[s] = outs[s]
            height[s] += 2
    for s in height:
        if s not in first:
            vid = f"w{s}"
            b.add(vid, identity_tensor([("p", d)], [("q", d)], vid), s, 0)
            first[s], current[s] = (vid, "p"), (vid, "q")
    for s in height:
        b.source(*first[s], site=s)
    for s in height:
        b.sink(*current[s], site=s)
    net = b.build()
    max_bond = max((net.edge_dim(e) for e in net.edges), default=1)
    residual = verify_equivalence(net, circuit) if n <= 12 else float("nan")
    layers = max([h or 1 for h in height.values()], default=0)
    report = ConversionReport(0, layers, max_bond, residual, len(circuit.gates))
    logger.info("circuit -> network: %d blocks in %d layers, max bond %d", len(circuit.gates), report.layers, max_bond)
    return net, report
