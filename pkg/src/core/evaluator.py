"""
Exact evaluation of unitary networks and what is built on it.

  - evaluate(): full contraction into the global tensor (legs in0.., out0..)
  - site_matrix(): square matrix on the physical sites, bond ports closed with |0>
  - heisenberg_transform(): O -> U O U^dag with support tightening
  - reduced_unitary() / reduction_gap(): normalized environment trace
  - apply_to_product_state(): column-grouped MPS of U|psi> with Schmidt data

Usage
-----
    from src.core.evaluator import evaluate_matrix, heisenberg_transform, DenseOperator
    u = evaluate_matrix(net, strategy="greedy")
    image = heisenberg_transform(net, DenseOperator.pauli({3: "Z"}))
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from src.core.errors import BudgetExceeded, DimensionError, UnitaryNetworkError
from src.core.gates import PAULIS
from src.core.netgraph import BOND, PHYS, SubNetwork, UnitaryNetwork, extract_subnetwork, topological_sort, validate
from src.core.tensor import GeneralTensor, contract_legs, trace_pair

logger = logging.getLogger(__name__)

#  Knobs
MEM_CAP = int(os.getenv("UNET_MEM_CAP", str(2 ** 26)))
SUPPORT_TOL = 1e-10
STRATEGIES = ("greedy", "topological")


#  Contraction engine
class _Contraction:
    """Clusters of vertices merged pairwise; each cluster holds one tensor."""

    def __init__(self, net: UnitaryNetwork, mem_cap: int):
        self.mem_cap = mem_cap
        self.order = list(net.vertices)
        port_ids = {}
        for k, p in enumerate(net.sources):
            port_ids[(p.vertex, p.leg)] = f"in{k}"
        for k, p in enumerate(net.sinks):
            port_ids[(p.vertex, p.leg)] = f"out{k}"
        self.clusters: dict[str, GeneralTensor] = {}
        for vid, t in net.vertices.items():
            mapping = {leg.id: port_ids.get((vid, leg.id), f"{vid}.{leg.id}") for leg in t.legs}
            self.clusters[vid] = t.general().relabel(mapping)
        self.owner = {vid: vid for vid in net.vertices}
        self.pending = [(e.src, f"{e.src}.{e.src_leg}", e.dst, f"{e.dst}.{e.dst_leg}") for e in net.edges]
        for vid in list(self.clusters):
            self._trace_loops(vid)

    def _trace_loops(self, c: str):
        keep = []
        for b in self.pending:
            if self.owner[b[0]] == c and self.owner[b[2]] == c:
                self.clusters[c] = trace_pair(self.clusters[c], b[1], b[3])
            else:
                keep.append(b)
        self.pending = keep

    def _pairs(self, a: str, b: str) -> list[tuple[str, str]]:
        pairs = []
        for s, sl, t, tl in self.pending:
            if self.owner[s] == a and self.owner[t] == b:
                pairs.append((sl, tl))
            elif self.owner[s] == b and self.owner[t] == a:
                pairs.append((tl, sl))
        return pairs

    def merged_size(self, a: str, b: str) -> int:
        pairs = self._pairs(a, b)
        shared = math.prod(self.clusters[a].leg(la).dim for la, _ in pairs)
        return self.clusters[a].size * self.clusters[b].size // (shared * shared)

    def merge(self, a: str, b: str):
        size = self.merged_size(a, b)
        if size > self.mem_cap:
            raise BudgetExceeded(f"intermediate tensor of {size} entries exceeds the memory cap {self.mem_cap}")
        pairs = self._pairs(a, b)
        used = {(la, lb) for la, lb in pairs}
        self.clusters[a] = contract_legs(self.clusters[a], self.clusters[b], pairs, label=a)
        del self.clusters[b]
        for v, c in self.owner.items():
            if c == b:
                self.owner[v] = a
        self.pending = [p for p in self.pending
                        if (p[1], p[3]) not in used and (p[3], p[1]) not in used]
        self._trace_loops(a)

    def connected_pairs(self) -> list[tuple[str, str]]:
        seen = []
        for s, _, t, _ in self.pending:
            a, b = self.owner[s], self.owner[t]
            key = tuple(sorted((a, b), key=self.order.index))
            if a != b and key not in seen:
                seen.append(key)
        return seen

    def run_greedy(self):
        while len(self.clusters) > 1:
            cands = self.connected_pairs()
            if not cands:
                live = sorted(self.clusters, key=self.order.index)
                cands = [(live[0], live[1])]
            a, b = min(cands, key=lambda ab: (self.merged_size(*ab), self.order.index(ab[0]),
                                                self.order.index(ab[1])))
            logger.debug("greedy merge %s + %s (%d entries)", a, b, self.merged_size(a, b))
            self.merge(a, b)

    def run_sequence(self, order: Sequence[str]):
        for v in order[1:]:
            a, b = self.owner[order[0]], self.owner[v]
            if a != b:
                self.merge(a, b)


def evaluate(net: UnitaryNetwork, strategy: str = "greedy", mem_cap: int | None = None) -> GeneralTensor:
    """Eval(U_Net). Legs: in{k} for each source k (incoming), then out{k} for each sink k."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    mem_cap = MEM_CAP if mem_cap is None else int(mem_cap)
    diag = validate(net)
    if diag.errors:
        raise UnitaryNetworkError(f"network is structurally invalid: {diag.errors[0]}")
    final = math.prod(net.port_dim(p) for p in net.sources + net.sinks)
    if final > mem_cap:
        raise BudgetExceeded(f"global tensor of {final} entries exceeds the memory cap {mem_cap}")
    if not net.vertices:
        return GeneralTensor((), np.array(1.0 + 0j), net.meta.get("name", "empty"))

    engine = _Contraction(net, mem_cap)
    if strategy == "greedy":
        engine.run_greedy()
    else:
        topo = topological_sort(net)
        engine.run_sequence(topo.order if topo.ok else list(net.vertices))
        engine.run_greedy()  # disconnected remainder, if any
    (t,) = engine.clusters.values()
    wanted = [f"in{k}" for k in range(len(net.sources))] + [f"out{k}" for k in range(len(net.sinks))]
    axes = [t.axis(i) for i in wanted]
    return GeneralTensor([t.legs[a] for a in axes], np.transpose(t.data, axes), net.meta.get("name", ""))


def evaluate_matrix(net: UnitaryNetwork, strategy: str = "greedy", mem_cap: int | None = None) -> np.ndarray:
    """Rows = sinks in order, cols = sources in order."""
    return evaluate(net, strategy, mem_cap).matrix()


def _ports_by_site(ports, keep_bonds: bool) -> list[int]:
    idx = [k for k, p in enumerate(ports)
           if p.kind == PHYS or (keep_bonds and p.site is not None)]
    return sorted(idx, key=lambda k: (ports[k].site, ports[k].kind != PHYS, k))


def site_layout(net: UnitaryNetwork, keep_bonds: bool = False, side: str = "sources") -> tuple[list[int], list[int]]:
    """(sites, local dims) of the input side of the site matrix, or of its output side with side='sinks'."""
    ports = net.sinks if side == "sinks" else net.sources
    sites: list[int] = []
    dims: list[int] = []
    for k in _ports_by_site(ports, keep_bonds):
        p = ports[k]
        if sites and sites[-1] == p.site:
            dims[-1] *= net.port_dim(p)
        else:
            sites.append(p.site)
            dims.append(net.port_dim(p))
    return sites, dims


def site_matrix(net: UnitaryNetwork, keep_bonds: bool = False, strategy: str = "greedy",
                mem_cap: int | None = None) -> np.ndarray:
    """Global matrix on physical sites (ordered by site). Bond sources are fed |0>, bond sinks
    projected on <0|; with keep_bonds, bond ports carrying a boundary coordinate stay as sites."""
    t = evaluate(net, strategy, mem_cap)
    src = _ports_by_site(net.sources, keep_bonds)
    snk = _ports_by_site(net.sinks, keep_bonds)
    n_in = len(net.sources)
    index = []
    for k in range(n_in):
        index.append(slice(None) if k in src else 0)
    for k in range(len(net.sinks)):
        index.append(slice(None) if k in snk else 0)
    data = t.data[tuple(index)]
    # remaining axes: kept sources in port order, then kept sinks in port order
    kept_src = [k for k in range(n_in) if k in src]
    kept_snk = [k for k in range(len(net.sinks)) if k in snk]
    perm = [len(kept_src) + kept_snk.index(k) for k in snk] + [kept_src.index(k) for k in src]
    data = np.transpose(data, perm)
    rows = math.prod(net.port_dim(net.sinks[k]) for k in snk)
    cols = math.prod(net.port_dim(net.sources[k]) for k in src)
    return data.reshape(rows, cols)


#  Dense operators
def _embed(m: np.ndarray, sub_dims: Sequence[int], positions: Sequence[int], all_dims: Sequence[int]) -> np.ndarray:
    k, n = len(positions), len(all_dims)
    positions = list(positions)
    g = np.asarray(m, dtype=complex).reshape(list(sub_dims) * 2)
    dim = math.prod(all_dims)
    eye = np.eye(dim, dtype=complex).reshape(list(all_dims) * 2)
    out = np.tensordot(g, eye, axes=(list(range(k, 2 * k)), positions))
    rest = [a for a in range(2 * n) if a not in positions]
    out = np.transpose(out, np.argsort(positions + rest))
    return out.reshape(dim, dim)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    n = len(dims)
    t = np.asarray(m).reshape(list(dims) * 2)
    for i in sorted((j for j in range(n) if j not in keep), reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    kd = math.prod(dims[j] for j in sorted(keep))
    return t.reshape(kd, kd)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    site_support: tuple
    local_dims: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        sites, dims = tuple(int(s) for s in self.site_support), tuple(int(d) for d in self.local_dims)
        if len(sites) != len(dims):
            raise DimensionError("one local dim per support site required")
        if list(sites) != sorted(set(sites)):
            raise DimensionError(f"support sites must be strictly increasing, got {sites}")
        n = math.prod(dims)
        if m.shape != (n, n):
            raise DimensionError(f"operator shape {m.shape} does not match local dims {dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "site_support", sites)
        object.__setattr__(self, "local_dims", dims)

    @classmethod
    def pauli(cls, ops: Mapping[int, str] | str, first_site: int = 0) -> "DenseOperator":
        """{3: 'Z', 4: 'X'} or 'ZX' starting at first_site."""
        if isinstance(ops, str):
            ops = {first_site + k: ch for k, ch in enumerate(ops)}
        sites = sorted(ops)
        m = np.eye(1, dtype=complex)
        for s in sites:
            m = np.kron(m, PAULIS[ops[s].upper()])
        return cls(m, tuple(sites), (2,) * len(sites))

    @classmethod
    def identity(cls, sites: Sequence[int] = (), dims: Sequence[int] = ()) -> "DenseOperator":
        return cls(np.eye(math.prod(dims), dtype=complex), tuple(sites), tuple(dims))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def norm(self) -> float:
        """||M||_F / sqrt(dim): unchanged by identity padding."""
        return float(np.linalg.norm(self.matrix) / math.sqrt(self.dim))

    def embed(self, sites: Sequence[int], dims: Sequence[int]) -> "DenseOperator":
        sites, dims = list(sites), list(dims)
        missing = [s for s in self.site_support if s not in sites]
        if missing:
            raise DimensionError(f"cannot embed: sites {missing} are outside {sites}")
        pos = [sites.index(s) for s in self.site_support]
        for s, dl in zip(self.site_support, self.local_dims):
            if dims[sites.index(s)] != dl:
                raise DimensionError(f"site {s}: local dim {dl} vs {dims[sites.index(s)]}")
        return DenseOperator(_embed(self.matrix, self.local_dims, pos, dims), tuple(sites), tuple(dims))

    def conditional_expectation(self, keep: Sequence[int]) -> "DenseOperator":
        """Normalized partial trace over sites outside `keep`, re-padded with identities."""
        keep_pos = [k for k, s in enumerate(self.site_support) if s in set(keep)]
        traced = math.prod(d for k, d in enumerate(self.local_dims) if k not in keep_pos)
        reduced = partial_trace(self.matrix, self.local_dims, keep_pos) / traced
        sub_dims = [self.local_dims[k] for k in keep_pos]
        return DenseOperator(_embed(reduced, sub_dims, keep_pos, self.local_dims), self.site_support,
                             self.local_dims)

    def nontrivial_sites(self, tol: float = SUPPORT_TOL) -> list[int]:
        scale = max(1.0, float(np.linalg.norm(self.matrix)))
        out = []
        for s in self.site_support:
            rest = [t for t in self.site_support if t != s]
            diff = self.matrix - self.conditional_expectation(rest).matrix
            if np.linalg.norm(diff) > tol * scale:
                out.append(s)
        return out

    def restrict(self, sites: Sequence[int]) -> "DenseOperator":
        """Drop identity factors: the operator on `sites` (normalized partial trace elsewhere)."""
        keep_pos = [k for k, s in enumerate(self.site_support) if s in set(sites)]
        traced = math.prod(d for k, d in enumerate(self.local_dims) if k not in keep_pos)
        m = partial_trace(self.matrix, self.local_dims, keep_pos) / traced
        return DenseOperator(m, tuple(self.site_support[k] for k in keep_pos),
                             tuple(self.local_dims[k] for k in keep_pos))

    def tightened(self, tol: float = SUPPORT_TOL) -> "DenseOperator":
        return self.restrict(self.nontrivial_sites(tol))

    def allclose(self, other: "DenseOperator", atol: float = 1e-10) -> bool:
        sites = sorted(set(self.site_support) | set(other.site_support))
        dims_map = dict(zip(self.site_support, self.local_dims))
        dims_map.update(zip(other.site_support, other.local_dims))
        dims = [dims_map[s] for s in sites]
        a, b = self.embed(sites, dims).matrix, other.embed(sites, dims).matrix
        return bool(np.allclose(a, b, atol=atol))


def heisenberg_transform(net: UnitaryNetwork, op: DenseOperator, strategy: str = "greedy",
                         mem_cap: int | None = None, u: np.ndarray | None = None) -> DenseOperator:
    """U O U^dag on the network's physical sites, support tightened to non-identity sites."""
    sites, dims = site_layout(net)
    if u is None:
        u = site_matrix(net, strategy=strategy, mem_cap=mem_cap)
    if u.shape[0] != u.shape[1]:
        raise DimensionError(f"site matrix is not square: {u.shape}")
    full = op.embed(sites, dims).matrix
    image = DenseOperator(u @ full @ u.conj().T, tuple(sites), tuple(dims))
    return image.tightened()


#  Reduced unitaries
def reduced_superoperator(u: np.ndarray, in_dims: Sequence[int], out_dims: Sequence[int],
                          keep_in: Sequence[int], keep_out: Sequence[int]) -> np.ndarray:
    """S[(a,b),(i,j)] = (1/D_Bout) sum_{e,f} U[a,e,i,f] conj U[b,e,j,f]: the map
    O_A -> Tr_B[U (O_A x I_B) U^dag] / dim B_out, as a matrix on vec(O)."""
    in_dims, out_dims = list(in_dims), list(out_dims)
    tr_in = [k for k in range(len(in_dims)) if k not in keep_in]
    tr_out = [k for k in range(len(out_dims)) if k not in keep_out]
    t = np.asarray(u).reshape(out_dims + in_dims)
    no = len(out_dims)
    perm = list(keep_out) + tr_out + [no + k for k in keep_in] + [no + k for k in tr_in]
    da = math.prod(out_dims[k] for k in keep_out)
    de = math.prod(out_dims[k] for k in tr_out)
    di = math.prod(in_dims[k] for k in keep_in)
    df = math.prod(in_dims[k] for k in tr_in)
    t = np.transpose(t, perm).reshape(da, de, di, df)
    s = np.einsum("aeif,bejf->abij", t, t.conj()) / de
    return s.reshape(da * da, di * di)


def reduced_unitary(target, subsystem: Sequence[int] | None = None, strategy: str = "greedy") -> np.ndarray:
    """For a UnitaryNetwork: trace every physical site outside `subsystem`.
    For a SubNetwork: keep its physical ports at `subsystem` sites (all of them when None) and
    trace the rest, i.e. the promoted parent bonds."""
    if isinstance(target, SubNetwork):
        net = target.network
        t = evaluate(net, strategy)
        in_dims = [net.port_dim(p) for p in net.sources]
        out_dims = [net.port_dim(p) for p in net.sinks]

        def keep(ports):
            idx = [k for k, p in enumerate(ports)
                   if p.kind == PHYS and (subsystem is None or p.site in set(subsystem))]
            return sorted(idx, key=lambda k: (ports[k].site, k))

        return reduced_superoperator(t.matrix(), in_dims, out_dims, keep(net.sources), keep(net.sinks))
    net = target
    sites, dims = site_layout(net)
    u = site_matrix(net, strategy=strategy)
    subsystem = sites if subsystem is None else list(subsystem)
    k = [sites.index(s) for s in sorted(subsystem)]
    return reduced_superoperator(u, dims, dims, k, k)


def reduction_gap(net: UnitaryNetwork, center: Sequence[str], sites: Sequence[int]) -> float:
    """Frobenius distance between the center sub-network's reduced unitary and the global one."""
    local = reduced_unitary(extract_subnetwork(net, center), sites)
    full = reduced_unitary(net, sites)
    if local.shape != full.shape:
        raise DimensionError(f"reduced unitaries differ in shape: {local.shape} vs {full.shape}")
    return float(np.linalg.norm(local - full))


#  Product states -> MPS
@dataclass
class MPSResult:
    tensors: list                               # (D_left, p, D_right); right-canonical from site 1 on
    bond_dims: list
    entropies: list                             # per cut, log base d
    schmidt_values: list = field(default_factory=list)
    site_dims: list = field(default_factory=list)
    sink_order: list = field(default_factory=list)  # parent sink index of each physical factor
    network_bond_dims: list = field(default_factory=list)
    factor_dims: list = field(default_factory=list)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.dense(reorder=False)))

    def dense(self, reorder: bool = True) -> np.ndarray:
        """State vector; with reorder, factors follow the network's sink order."""
        psi = np.ones((1, 1), dtype=complex)
        for a in self.tensors:
            psi = np.tensordot(psi, a, axes=([psi.ndim - 1], [0]))
        psi = psi.reshape(-1)
        if not reorder or not self.factor_dims:
            return psi
        t = psi.reshape(self.factor_dims)
        return np.transpose(t, np.argsort(self.sink_order)).reshape(-1)


def _local_vector(state, dim: int) -> np.ndarray:
    if isinstance(state, (int, np.integer)):
        v = np.zeros(dim, dtype=complex)
        v[int(state)] = 1.0
        return v
    v = np.asarray(state, dtype=complex).reshape(-1)
    if v.shape[0] != dim:
        raise DimensionError(f"local state of dim {v.shape[0]} on a leg of dim {dim}")
    return v


def _source_vectors(net: UnitaryNetwork, local_states) -> dict[int, np.ndarray]:
    phys = [k for k, p in enumerate(net.sources) if p.kind == PHYS]
    phys.sort(key=lambda k: (net.sources[k].site, k))
    if isinstance(local_states, Mapping):
        by_site = dict(local_states)
        states = [by_site[net.sources[k].site] for k in phys]
    else:
        states = list(local_states)
    if len(states) != len(phys):
        raise DimensionError(f"{len(states)} local states for {len(phys)} physical sources")
    vecs = {}
    for k, s in zip(phys, states):
        vecs[k] = _local_vector(s, net.port_dim(net.sources[k]))
    for k, p in enumerate(net.sources):
        if k not in vecs:
            vecs[k] = _local_vector(0, net.port_dim(p))
    return vecs


def product_state(net: UnitaryNetwork, local_states) -> np.ndarray:
    """Dense input vector over all sources in port order (bond sources in |0>)."""
    vecs = _source_vectors(net, local_states)
    psi = np.ones(1, dtype=complex)
    for k in range(len(net.sources)):
        psi = np.kron(psi, vecs[k])
    return psi


def apply_to_product_state(net: UnitaryNetwork, local_states, strategy: str = "greedy",
                           mem_cap: int | None = None, cutoff: float = 1e-12) -> MPSResult:
    """Each vertex column (same x) is contracted with its local inputs; bonds between neighbouring
    columns become the virtual index. A QR/SVD sweep then gives exact Schmidt data per cut."""
    vecs = _source_vectors(net, local_states)
    xs = sorted({net.x(v) for v in net.vertices})
    col_of = {v: xs.index(net.x(v)) for v in net.vertices}
    edge_index = {e: k for k, e in enumerate(net.edges)}
    for e in net.edges:
        if abs(col_of[e.src] - col_of[e.dst]) > 1 or e.wraps:
            raise UnitaryNetworkError(f"edge {e.key} does not join neighbouring columns; no MPS grouping")
    source_index = {(p.vertex, p.leg): k for k, p in enumerate(net.sources)}
    sink_index = {(p.vertex, p.leg): k for k, p in enumerate(net.sinks)}

    tensors, net_bonds, sink_order, factor_dims = [], [], [], []
    for c, x in enumerate(xs):
        members = [v for v in net.vertices if col_of[v] == c]
        sub = extract_subnetwork(net, members)
        t = evaluate(sub.network, strategy, mem_cap)
        labels = [f"in{k}" for k in range(len(sub.network.sources))] + \
                 [f"out{k}" for k in range(len(sub.network.sinks))]
        data = t.data
        left, right, phys = [], [], []
        for k, p in enumerate(sub.network.sources):
            if p in sub.promoted:
                e = sub.promoted[p]
                (left if col_of[e.src] < c else right).append((edge_index[e], f"in{k}"))
        for k, p in enumerate(sub.network.sinks):
            if p in sub.promoted:
                e = sub.promoted[p]
                (left if col_of[e.dst] < c else right).append((edge_index[e], f"out{k}"))
            else:
                phys.append((sink_index[(p.vertex, p.leg)], f"out{k}"))
        for k, p in enumerate(sub.network.sources):
            if p not in sub.promoted:
                ax = labels.index(f"in{k}")
                data = np.tensordot(data, vecs[source_index[(p.vertex, p.leg)]], axes=([ax], [0]))
                labels.pop(ax)
        left.sort()
        right.sort()
        order = [labels.index(lbl) for _, lbl in left] + [labels.index(lbl) for _, lbl in phys] + \
                [labels.index(lbl) for _, lbl in right]
        data = np.transpose(data, order)
        dl = math.prod(data.shape[:len(left)])
        dp = math.prod(data.shape[len(left):len(left) + len(phys)])
        tensors.append(data.reshape(dl, dp, -1))
        if c:
            net_bonds.append(dl)
        sink_order += [k for k, _ in phys]
        factor_dims += [net.port_dim(net.sinks[k]) for k, _ in phys]
    if not tensors:
        return MPSResult([], [], [], [], [], [], [], [])

    # left-canonical QR sweep
    for k in range(len(tensors) - 1):
        dl, dp, dr = tensors[k].shape
        q, r = np.linalg.qr(tensors[k].reshape(dl * dp, dr))
        tensors[k] = q.reshape(dl, dp, -1)
        tensors[k + 1] = np.tensordot(r, tensors[k + 1], axes=([1], [0]))
    # right-to-left SVD sweep with rank truncation at `cutoff`
    bonds, entropies, spectra = [], [], []
    base = math.log(net.d)
    for k in range(len(tensors) - 1, 0, -1):
        dl, dp, dr = tensors[k].shape
        u, s, vh = np.linalg.svd(tensors[k].reshape(dl, dp * dr), full_matrices=False)
        rank = max(1, int(np.sum(s > cutoff * max(s[0], 1e-300))))
        u, s, vh = u[:, :rank], s[:rank], vh[:rank]
        tensors[k] = vh.reshape(rank, dp, dr)
        tensors[k - 1] = np.tensordot(tensors[k - 1], u * s, axes=([2], [0]))
        p = (s / np.linalg.norm(s)) ** 2
        p = p[p > 0]
        bonds.append(rank)
        entropies.append(float(-np.sum(p * np.log(p)) / base))
        spectra.append(s)
    bonds.reverse()
    entropies.reverse()
    spectra.reverse()
    site_dims = [a.shape[1] for a in tensors]
    logger.debug("MPS bonds %s (network bonds %s)", bonds, net_bonds)
    return MPSResult(tensors, bonds, entropies, spectra, site_dims, sink_order, net_bonds, factor_dims)
