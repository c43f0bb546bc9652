"""
Deterministic builders for the reference networks.

Bilayer conventions: vertex x = site, layer 0 = bottom, layer 1 = top; bottom
bonds point right, top bonds point left. Open horizontal legs are bond ports
tagged so that netgraph.close_horizontal() can wrap them; their boundary
coordinates are -1 and n.

Usage
-----
    from src.sim.gallery import GalleryParams, build
    net = build("shift", GalleryParams(n_sites=4, variant="obc_bilayer"))

    python -m src.cli_io.cli gallery build stacked_cnot --n 6 --variant reversed --output stc.json
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from src.core.errors import DimensionError, UnitaryNetworkError
from src.core.gates import CNOT, H, SWAP, kron, xy_gate
from src.core.netgraph import BOND, NetworkBuilder, UnitaryNetwork, close_horizontal
from src.core.tensor import haar_random_tensor, haar_unitary, identity_tensor, tensor_from_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GalleryParams:
    n_sites: int = 4
    d: int = 2
    variant: str | None = None
    theta: float = 0.0
    seed: int = 0
    red_dim: int | None = None

    def __post_init__(self):
        if self.n_sites < 2:
            raise UnitaryNetworkError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.d < 2:
            raise UnitaryNetworkError(f"d must be >= 2, got {self.d}")


def _need_qubits(d: int, what: str):
    if d != 2:
        raise DimensionError(f"{what} is defined for qubits only (d=2), got d={d}")


#  Gate lists (time order: first applied first)
def stacked_cnot_gates(n: int, variant: str = "forward") -> list:
    pairs = [[k, k + 1] for k in range(n - 1)]
    if variant in ("forward", "pbc_cut"):
        pairs.reverse()
    elif variant != "reversed":
        raise UnitaryNetworkError(f"no gate list for stacked CNOT variant {variant!r}")
    return [(CNOT, w) for w in pairs]


def stacked_xy_gates(n: int, theta: float) -> list:
    """XY(2 theta) on (n-2, n-1) first, (0, 1) last; theta is the operator rotation angle."""
    g = xy_gate(2.0 * theta)
    return [(g, [k, k + 1]) for k in reversed(range(n - 1))]


def kw_gates(n: int) -> list:
    return stacked_cnot_gates(n, "forward") + [(H, [k]) for k in range(n)]


def swap_staircase_gates(n: int) -> list:
    """Right cyclic shift as SWAP(n-2, n-1), ..., SWAP(0, 1)."""
    return [(SWAP, [k, k + 1]) for k in reversed(range(n - 1))]


def gate_chain_network(gates: Sequence, n: int, d: int = 2, name: str = "circuit") -> UnitaryNetwork:
    """One vertex per gate (x = leftmost wire, layer = time step); wires become edges."""
    b = NetworkBuilder(d, name=name)
    last: dict[int, tuple[str, str]] = {}
    first: dict[int, tuple[str, str]] = {}
    for t, (g, wires) in enumerate(gates):
        vid = f"g{t}"
        k = len(wires)
        ins = [(f"i{j}", d) for j in range(k)]
        outs = [(f"o{j}", d) for j in range(k)]
        b.add(vid, tensor_from_matrix(g, ins, outs, vid), min(wires), t)
        for j, w in enumerate(wires):
            if w in last:
                b.connect(*last[w], vid, f"i{j}")
            else:
                first[w] = (vid, f"i{j}")
            last[w] = (vid, f"o{j}")
    for w in range(n):
        if w not in first:
            vid = f"w{w}"
            b.add(vid, identity_tensor([("i0", d)], [("o0", d)], vid), w, 0)
            first[w], last[w] = (vid, "i0"), (vid, "o0")
        b.source(*first[w], site=w)
    for w in range(n):
        b.sink(*last[w], site=w)
    return b.build()


#  Bilayer staircases
def _staircase(n_sites: int, gate: np.ndarray, d: int = 2, post: np.ndarray | None = None, **meta) -> UnitaryNetwork:
    """Bilayer evaluating to G_{0,1} G_{1,2} ... G_{n-2,n-1} (rightmost first), then `post` per site.
    Bottom: site x hands its qudit right and passes the incoming one up. Top: G acts on
    (vertical, right bond) and sends its first output left."""
    eye = np.eye(d, dtype=complex)
    post = eye if post is None else np.asarray(post, dtype=complex)
    top_gate = kron(eye, post) @ np.asarray(gate, dtype=complex)
    b = NetworkBuilder(d, **meta)
    for x in range(n_sites):
        if x == 0:
            t = identity_tensor([("p", d)], [("r", d)], "b0")
        elif x < n_sites - 1:
            t = identity_tensor([("l", d), ("p", d)], [("v", d), ("r", d)], f"b{x}")
        else:
            t = identity_tensor([("l", d), ("p", d)], [("v0", d), ("v1", d)], f"b{x}")
        b.add(f"b{x}", t, x, 0)
    for x in reversed(range(n_sites)):
        if x == n_sites - 1:
            t = tensor_from_matrix(top_gate, [("v0", d), ("v1", d)], [("l", d), ("p", d)], f"t{x}")
        elif x > 0:
            t = tensor_from_matrix(top_gate, [("v", d), ("r", d)], [("l", d), ("p", d)], f"t{x}")
        else:
            t = tensor_from_matrix(post, [("r", d)], [("p", d)], "t0")
        b.add(f"t{x}", t, x, 1)
    for x in range(1, n_sites):
        b.connect(f"b{x - 1}", "r", f"b{x}", "l")
        b.connect(f"t{x}", "l", f"t{x - 1}", "r")
    for x in range(1, n_sites - 1):
        b.connect(f"b{x}", "v", f"t{x}", "v")
    b.connect(f"b{n_sites - 1}", "v0", f"t{n_sites - 1}", "v0")
    b.connect(f"b{n_sites - 1}", "v1", f"t{n_sites - 1}", "v1")
    for x in range(n_sites):
        b.source(f"b{x}", "p", x)
        b.sink(f"t{x}", "p", x)
    return b.build()


def _reversed_cnot(n: int) -> UnitaryNetwork:
    """C_{n-2} ... C_0 with C_0 first: the bottom layer computes running parities, the top routes them back."""
    d = 2
    b = NetworkBuilder(d, name=f"stacked_cnot_reversed_{n}", variant="reversed", n=n)
    for x in range(n):
        if x == 0:
            t = identity_tensor([("p", d)], [("r", d)], "b0")
        elif x < n - 1:
            t = tensor_from_matrix(CNOT, [("l", d), ("p", d)], [("v", d), ("r", d)], f"b{x}")
        else:
            t = tensor_from_matrix(CNOT, [("l", d), ("p", d)], [("v0", d), ("v1", d)], f"b{x}")
        b.add(f"b{x}", t, x, 0)
    for x in reversed(range(n)):
        if x == n - 1:
            t = identity_tensor([("v0", d), ("v1", d)], [("l", d), ("p", d)], f"t{x}")
        elif x > 0:
            t = identity_tensor([("v", d), ("r", d)], [("l", d), ("p", d)], f"t{x}")
        else:
            t = identity_tensor([("r", d)], [("p", d)], "t0")
        b.add(f"t{x}", t, x, 1)
    for x in range(1, n):
        b.connect(f"b{x - 1}", "r", f"b{x}", "l")
        b.connect(f"t{x}", "l", f"t{x - 1}", "r")
    for x in range(1, n - 1):
        b.connect(f"b{x}", "v", f"t{x}", "v")
    b.connect(f"b{n - 1}", "v0", f"t{n - 1}", "v0")
    b.connect(f"b{n - 1}", "v1", f"t{n - 1}", "v1")
    for x in range(n):
        b.source(f"b{x}", "p", x)
        b.sink(f"t{x}", "p", x)
    return b.build()


def _ti_bilayer(n_sites: int, top: np.ndarray, d: int, **meta) -> UnitaryNetwork:
    """Translation-invariant bilayer with open horizontal legs: every bottom tensor passes the
    incoming bond up and its site right; every top tensor applies `top` to (vertical, right bond)."""
    b = NetworkBuilder(d, **meta)
    for x in range(n_sites):
        b.add(f"b{x}", identity_tensor([("l", d), ("p", d)], [("v", d), ("r", d)], f"b{x}"), x, 0)
    for x in reversed(range(n_sites)):
        b.add(f"t{x}", tensor_from_matrix(top, [("v", d), ("r", d)], [("l", d), ("p", d)], f"t{x}"), x, 1)
    for x in range(n_sites):
        b.connect(f"b{x}", "v", f"t{x}", "v")
    for x in range(1, n_sites):
        b.connect(f"b{x - 1}", "r", f"b{x}", "l")
        b.connect(f"t{x}", "l", f"t{x - 1}", "r")
    for x in range(n_sites):
        b.source(f"b{x}", "p", x)
    b.source("b0", "l", -1, BOND, "bottom")
    b.source(f"t{n_sites - 1}", "r", n_sites, BOND, "top")
    for x in range(n_sites):
        b.sink(f"t{x}", "p", x)
    b.sink(f"b{n_sites - 1}", "r", n_sites, BOND, "bottom")
    b.sink("t0", "l", -1, BOND, "top")
    return b.build()


def build_stacked_cnot(n: int, variant: str = "forward") -> UnitaryNetwork:
    """forward: C_0 C_1 ... C_{n-2}, C_{n-2} applied first (X_k -> X_k X_{k+1}, Z_k -> Z_0...Z_k).
    reversed: C_{n-2} ... C_0 (Z_k -> Z_{k-1} Z_k). pbc_cut: forward read on a ring cut between
    n-1 and 0. ti_open: translation-invariant bulk with open bonds; wrapping it is not unitary."""
    if n < 2:
        raise UnitaryNetworkError("stacked CNOT needs n >= 2")
    if variant == "forward":
        return _staircase(n, CNOT, name=f"stacked_cnot_forward_{n}", variant=variant, n=n)
    if variant == "reversed":
        return _reversed_cnot(n)
    if variant == "pbc_cut":
        return _staircase(n, CNOT, name=f"stacked_cnot_pbc_cut_{n}", variant=variant, n=n,
                          ring=True, cut=[n - 1, 0])
    if variant == "ti_open":
        return _ti_bilayer(n, CNOT, 2, name=f"stacked_cnot_ti_{n}", variant=variant, n=n)
    raise UnitaryNetworkError(f"unknown stacked CNOT variant {variant!r}")


def build_kw(n: int) -> UnitaryNetwork:
    """Stacked CNOT followed by a Hadamard on every site."""
    if n < 3:
        raise UnitaryNetworkError("the KW network needs n >= 3")
    return _staircase(n, CNOT, post=H, name=f"kw_{n}", n=n)


def build_stacked_xy(n: int, theta: float, variant: str = "obc") -> UnitaryNetwork:
    """obc: XY(2 theta) staircase. ti_open: the same gate in a translation-invariant bulk with
    open bonds; closing it leaks weight into the bond loop for theta away from pi/2."""
    if variant == "obc":
        return _staircase(n, xy_gate(2.0 * theta), name=f"stacked_xy_{n}", n=n, theta=float(theta))
    if variant == "ti_open":
        return _ti_bilayer(n, xy_gate(2.0 * theta), 2, name=f"stacked_xy_ti_{n}", variant=variant, n=n,
                           theta=float(theta))
    raise UnitaryNetworkError(f"unknown stacked XY variant {variant!r}")


#  Shifts and flows
def build_shift(n: int, variant: str = "obc_bilayer", d: int = 2) -> UnitaryNetwork:
    """Rightward shift: site x -> x + 1."""
    if variant == "swap_staircase_sqc":
        net = gate_chain_network(swap_staircase_gates(n), n, d, name=f"shift_sqc_{n}")
        return net.with_meta(variant=variant, n=n)
    b = NetworkBuilder(d, name=f"shift_{n}", variant="obc_bilayer", n=n)
    for x in range(n):
        b.add(f"b{x}", identity_tensor([("l", d), ("p", d)], [("v", d), ("r", d)], f"b{x}"), x, 0)
    for x in range(n):
        b.add(f"t{x}", identity_tensor([("v", d)], [("p", d)], f"t{x}"), x, 1)
    for x in range(n):
        b.connect(f"b{x}", "v", f"t{x}", "v")
        b.source(f"b{x}", "p", x)
        b.sink(f"t{x}", "p", x)
    for x in range(1, n):
        b.connect(f"b{x - 1}", "r", f"b{x}", "l")
    b.source("b0", "l", -1, BOND, "bottom")
    b.sink(f"b{n - 1}", "r", n, BOND, "bottom")
    net = b.build()
    if variant == "obc_bilayer":
        return net
    if variant == "pbc_wrapped":
        return close_horizontal(net).with_meta(variant=variant)
    raise UnitaryNetworkError(f"unknown shift variant {variant!r}")


def build_redundant_identity(n: int, red_dim: int | None = None, d: int = 2) -> UnitaryNetwork:
    """Identity on the sites plus a decoupled rightward mode of dim red_dim threading the chain."""
    red = d if red_dim is None else int(red_dim)
    if red < 1:
        raise UnitaryNetworkError("red_dim must be >= 1")
    b = NetworkBuilder(d, name=f"redundant_identity_{n}", n=n, red_dim=red)
    for x in range(n):
        b.add(f"v{x}", identity_tensor([("l", red), ("p", d)], [("r", red), ("q", d)], f"v{x}"), x, 0)
        b.source(f"v{x}", "p", x)
        b.sink(f"v{x}", "q", x)
    for x in range(1, n):
        b.connect(f"v{x - 1}", "r", f"v{x}", "l")
    b.source("v0", "l", -1, BOND, "red")
    b.sink(f"v{n - 1}", "r", n, BOND, "red")
    return b.build()


def build_nonuniform_impurity(seed: int = 0, d: int = 2) -> UnitaryNetwork:
    """An impurity mode enters at site 0 and leaves at site 1, so the cuts on either side of
    site 1 carry different flow."""
    b = NetworkBuilder(d, name="nonuniform_impurity", seed=seed)
    b.add("a", haar_random_tensor([d, d, d], [d, d, d], seed, "a", ["hl", "p", "imp"], ["q", "red", "h"]), 0, 0)
    b.add("b", haar_random_tensor([d, d, d], [d, d, d], seed + 1, "b", ["red", "h", "p"], ["imp", "q", "h_out"]), 1, 0)
    b.add("c", haar_random_tensor([d, d], [d, d], seed + 2, "c", ["h", "p"], ["q", "hr"]), 2, 0)
    b.connect("a", "red", "b", "red").connect("a", "h", "b", "h").connect("b", "h_out", "c", "h")
    b.source("a", "hl", -1, BOND, "h")
    b.source("a", "p", 0).source("a", "imp", 0)
    b.source("b", "p", 1).source("c", "p", 2)
    b.sink("a", "q", 0).sink("b", "imp", 1).sink("b", "q", 1).sink("c", "q", 2)
    b.sink("c", "hr", 3, BOND, "h")
    return b.build()


#  Bilayers
def build_identity_bilayer(n: int, d: int = 2) -> UnitaryNetwork:
    b = NetworkBuilder(d, name=f"identity_bilayer_{n}", n=n)
    for x in range(n):
        b.add(f"b{x}", identity_tensor([("p", d)], [("v", d)], f"b{x}"), x, 0)
    for x in reversed(range(n)):
        b.add(f"t{x}", identity_tensor([("v", d)], [("p", d)], f"t{x}"), x, 1)
    for x in range(n):
        b.connect(f"b{x}", "v", f"t{x}", "v")
        b.source(f"b{x}", "p", x)
        b.sink(f"t{x}", "p", x)
    return b.build()


def build_haar_bilayer(n: int, d: int = 2, seed: int = 0, translation_invariant: bool = False) -> UnitaryNetwork:
    """Right-canonical bilayer of Haar tensors, all bonds of dim d."""
    rng = np.random.default_rng(seed)
    bulk_b = haar_unitary(d * d, rng)
    bulk_t = haar_unitary(d * d, rng)
    b = NetworkBuilder(d, name=f"haar_bilayer_{n}", n=n, seed=seed, translation_invariant=translation_invariant)

    def bulk(m):
        return m if translation_invariant else haar_unitary(d * d, rng)

    for x in range(n):
        if x == 0:
            t = tensor_from_matrix(haar_unitary(d, rng), [("p", d)], [("r", d)], "b0")
        elif x < n - 1:
            t = tensor_from_matrix(bulk(bulk_b), [("l", d), ("p", d)], [("r", d), ("v", d)], f"b{x}")
        else:
            t = tensor_from_matrix(haar_unitary(d * d, rng), [("l", d), ("p", d)], [("v", d * d)], f"b{x}")
        b.add(f"b{x}", t, x, 0)
    for x in reversed(range(n)):
        if x == n - 1:
            t = tensor_from_matrix(haar_unitary(d * d, rng), [("v", d * d)], [("l", d), ("p", d)], f"t{x}")
        elif x > 0:
            t = tensor_from_matrix(bulk(bulk_t), [("v", d), ("r", d)], [("l", d), ("p", d)], f"t{x}")
        else:
            t = tensor_from_matrix(haar_unitary(d, rng), [("r", d)], [("p", d)], "t0")
        b.add(f"t{x}", t, x, 1)
    for x in range(1, n):
        b.connect(f"b{x - 1}", "r", f"b{x}", "l")
        b.connect(f"t{x}", "l", f"t{x - 1}", "r")
    for x in range(1, n):
        b.connect(f"b{x}", "v", f"t{x}", "v")
    for x in range(n):
        b.source(f"b{x}", "p", x)
        b.sink(f"t{x}", "p", x)
    return b.build()


def build_four_layer(n: int, d: int = 4, split: tuple[int, int] = (2, 2), seed: int = 0,
                     variant: str = "pbc") -> UnitaryNetwork:
    """Nearest-neighbour architecture: layer 0 splits each site into a vertical part and a part sent
    to the right neighbour's layer 1; layers 2/3 mirror it leftward. Wrapped, it has no directed loop."""
    s0, s1 = split
    if s0 * s1 != d:
        raise DimensionError(f"split {split} does not factor d={d}")
    b = NetworkBuilder(d, name=f"four_layer_{n}", n=n, seed=seed)
    for x in range(n):
        b.add(f"a{x}", haar_random_tensor([d], [s0, s1], seed + 4 * x, f"a{x}", ["p"], ["v", "r"]), x, 0)
    for x in range(n):
        b.add(f"e{x}", haar_random_tensor([s0, s1], [d], seed + 4 * x + 1, f"e{x}", ["vi", "l"], ["vo"]), x, 1)
    for x in range(n):
        b.add(f"g{x}", haar_random_tensor([d], [s0, s1], seed + 4 * x + 2, f"g{x}", ["vi"], ["vo", "l"]), x, 2)
    for x in range(n):
        b.add(f"j{x}", haar_random_tensor([s0, s1], [d], seed + 4 * x + 3, f"j{x}", ["v", "r"], ["p"]), x, 3)
    for x in range(n):
        b.connect(f"a{x}", "v", f"e{x}", "vi").connect(f"e{x}", "vo", f"g{x}", "vi").connect(f"g{x}", "vo", f"j{x}", "v")
        b.source(f"a{x}", "p", x)
        b.sink(f"j{x}", "p", x)
    for x in range(n - 1):
        b.connect(f"a{x}", "r", f"e{x + 1}", "l")
        b.connect(f"g{x + 1}", "l", f"j{x}", "r")
    b.source("e0", "l", -1, BOND, "right")
    b.sink(f"a{n - 1}", "r", n, BOND, "right")
    b.source(f"j{n - 1}", "r", n, BOND, "left")
    b.sink("g0", "l", -1, BOND, "left")
    net = b.build()
    if variant == "obc":
        return net.with_meta(variant="obc")
    if variant == "pbc":
        return close_horizontal(net).with_meta(variant="pbc")
    raise UnitaryNetworkError(f"unknown four-layer variant {variant!r}")


#  Padding (universality)
def add_padding_block(b: NetworkBuilder, prefix: str, u: np.ndarray, sites: Sequence[int], d: int,
                      layer: int | Mapping[int, int] = 0) -> tuple[dict, dict]:
    """Bottom tensors route the window's qudits rightward into one vertical leg, the top-right
    tensor applies u, the top row routes the result back. `layer` is the bottom layer, either
    shared or per site. Returns ({site: (vertex, leg)} inputs, {site: (vertex, leg)} outputs)."""
    sites = list(sites)
    m = len(sites)
    if np.asarray(u).shape != (d ** m, d ** m):
        raise DimensionError(f"gate of shape {np.asarray(u).shape} does not act on {m} qudits of dim {d}")
    base = {s: (layer[s] if isinstance(layer, Mapping) else layer) for s in sites}
    ins, outs = {}, {}
    for k, s in enumerate(sites):
        vid = f"{prefix}b{k}"
        if m == 1:
            t = identity_tensor([("p", d)], [("v", d)], vid)
        elif k == 0:
            t = identity_tensor([("p", d)], [("r", d)], vid)
        elif k < m - 1:
            t = identity_tensor([("l", d ** k), ("p", d)], [("r", d ** (k + 1))], vid)
        else:
            t = identity_tensor([("l", d ** k), ("p", d)], [("v", d ** m)], vid)
        b.add(vid, t, s, base[s])
        ins[s] = (vid, "p")
    for k in reversed(range(m)):
        s, vid = sites[k], f"{prefix}t{k}"
        if m == 1:
            t = tensor_from_matrix(u, [("v", d)], [("p", d)], vid)
        elif k == m - 1:
            t = tensor_from_matrix(u, [("v", d ** m)], [("l", d ** k), ("p", d)], vid)
        elif k > 0:
            t = identity_tensor([("r", d ** (k + 1))], [("l", d ** k), ("p", d)], vid)
        else:
            t = identity_tensor([("r", d)], [("p", d)], vid)
        b.add(vid, t, s, base[s] + 1)
        outs[s] = (vid, "p")
    for k in range(1, m):
        b.connect(f"{prefix}b{k - 1}", "r", f"{prefix}b{k}", "l")
        b.connect(f"{prefix}t{k}", "l", f"{prefix}t{k - 1}", "r")
    b.connect(f"{prefix}b{m - 1}", "v", f"{prefix}t{m - 1}", "v")
    return ins, outs


def build_universal_padding(u: np.ndarray, n: int, d: int = 2) -> UnitaryNetwork:
    """Any unitary on n qudits as a bilayer (bond dims grow as d^k)."""
    b = NetworkBuilder(d, name=f"universal_padding_{n}", n=n)
    ins, outs = add_padding_block(b, "", u, range(n), d)
    for s in range(n):
        b.source(*ins[s], site=s)
    for s in range(n):
        b.sink(*outs[s], site=s)
    return b.build()


def build_identity_networks(variant: str = "a", d: int = 2) -> UnitaryNetwork:
    """Two bilayers for the 3-qudit identity: (a) routes everything through the right column,
    (b) is purely vertical."""
    if variant == "a":
        return build_universal_padding(np.eye(d ** 3), 3, d).with_meta(name="identity_a", variant="a")
    if variant == "b":
        return build_identity_bilayer(3, d).with_meta(name="identity_b", variant="b")
    raise UnitaryNetworkError(f"unknown identity network variant {variant!r}")


#  Small fixtures
def build_abc_example(seed: int = 0) -> UnitaryNetwork:
    """Three vertices with a directed loop A -> B -> C -> A and a B <-> C pair."""
    b = NetworkBuilder(2, name="abc_example", seed=seed)
    b.add("A", haar_random_tensor([2, 2], [4], seed, "A", ["i", "c"], ["b"]), 0, 0)
    b.add("B", haar_random_tensor([4, 2], [4, 2], seed + 1, "B", ["a", "c"], ["to_c", "o"]), 1, 0)
    b.add("C", haar_random_tensor([4], [2, 2, 1], seed + 2, "C", ["b"], ["to_a", "to_b", "o"]), 2, 0)
    b.connect("A", "b", "B", "a").connect("C", "to_a", "A", "c")
    b.connect("B", "to_c", "C", "b").connect("C", "to_b", "B", "c")
    b.source("A", "i", 0)
    b.sink("B", "o", 1).sink("C", "o", 2)
    return b.build()


def build_dag_circuit(seed: int = 0) -> UnitaryNetwork:
    """A -> B -> C with an extra A -> C bond; the circuit order is A, B, C."""
    b = NetworkBuilder(2, name="dag_circuit", seed=seed)
    b.add("A", haar_random_tensor([4], [2, 2], seed, "A", ["i"], ["to_c", "to_b"]), 0, 0)
    b.add("B", haar_random_tensor([2], [1, 2], seed + 1, "B", ["a"], ["to_c", "o"]), 1, 1)
    b.add("C", haar_random_tensor([2, 1], [2], seed + 2, "C", ["a", "b"], ["o"]), 0, 2)
    b.connect("A", "to_c", "C", "a").connect("A", "to_b", "B", "a").connect("B", "to_c", "C", "b")
    b.source("A", "i", 0)
    b.sink("C", "o", 0).sink("B", "o", 1)
    return b.build()


def build_canonical_figure(seed: int = 0) -> UnitaryNetwork:
    """3-column bilayer whose center column {B1, B2} is consecutive in the order A1, C1, B1, B2, A2, C2."""
    b = NetworkBuilder(2, name="canonical_figure", seed=seed)
    b.add("A1", haar_random_tensor([2], [2, 1], seed, "A1", ["p"], ["r", "v"]), 0, 0)
    b.add("C1", haar_random_tensor([2], [2, 1], seed + 1, "C1", ["p"], ["l", "v"]), 2, 0)
    b.add("B1", haar_random_tensor([2, 2, 2], [8], seed + 2, "B1", ["p", "l", "r"], ["v"]), 1, 0)
    b.add("B2", haar_random_tensor([8], [2, 2, 2], seed + 3, "B2", ["v"], ["p", "l", "r"]), 1, 1)
    b.add("A2", haar_random_tensor([1, 2], [2], seed + 4, "A2", ["v", "r"], ["p"]), 0, 1)
    b.add("C2", haar_random_tensor([1, 2], [2], seed + 5, "C2", ["v", "l"], ["p"]), 2, 1)
    b.connect("A1", "r", "B1", "l").connect("C1", "l", "B1", "r").connect("B1", "v", "B2", "v")
    b.connect("B2", "l", "A2", "r").connect("B2", "r", "C2", "l")
    b.connect("A1", "v", "A2", "v").connect("C1", "v", "C2", "v")
    for vid, s in (("A1", 0), ("B1", 1), ("C1", 2)):
        b.source(vid, "p", s)
    for vid, s in (("A2", 0), ("B2", 1), ("C2", 2)):
        b.sink(vid, "p", s)
    return b.build()


def build_single_layer_ring(n: int = 3, d: int = 2, seed: int = 0) -> UnitaryNetwork:
    """One Haar tensor per site with bonds to both neighbours in both directions (periodic)."""
    b = NetworkBuilder(d, name=f"single_layer_ring_{n}", n=n, seed=seed)
    for x in range(n):
        b.add(f"u{x}", haar_random_tensor([d, d, d], [d, d, d], seed + x, f"u{x}",
                                          ["p", "from_l", "from_r"], ["q", "to_l", "to_r"]), x, 0)
        b.source(f"u{x}", "p", x)
        b.sink(f"u{x}", "q", x)
    for x in range(n - 1):
        b.connect(f"u{x}", "to_r", f"u{x + 1}", "from_l")
        b.connect(f"u{x + 1}", "to_l", f"u{x}", "from_r")
    b.connect(f"u{n - 1}", "to_r", "u0", "from_l", wraps=1)
    b.connect("u0", "to_l", f"u{n - 1}", "from_r", wraps=-1)
    return b.build()


def build_self_trace(dim_a: int = 2, dim_b: int = 2) -> UnitaryNetwork:
    """Identity on A (x) B with the B output fed back into the B input: evaluates to dim_b * I_A."""
    b = NetworkBuilder(dim_a, name="self_trace", dim_a=dim_a, dim_b=dim_b)
    b.add("I", identity_tensor([("a", dim_a), ("b", dim_b)], [("a_out", dim_a), ("b_out", dim_b)], "I"), 0, 0)
    b.connect("I", "b_out", "I", "b")
    b.source("I", "a", 0)
    b.sink("I", "a_out", 0)
    return b.build()


#  Registry
def _shift(p: GalleryParams):
    return build_shift(p.n_sites, p.variant or "obc_bilayer", p.d)


def _stacked_cnot(p: GalleryParams):
    _need_qubits(p.d, "stacked CNOT")
    return build_stacked_cnot(p.n_sites, p.variant or "forward")


def _kw(p: GalleryParams):
    _need_qubits(p.d, "the KW network")
    return build_kw(p.n_sites)


def _stacked_xy(p: GalleryParams):
    _need_qubits(p.d, "stacked XY")
    return build_stacked_xy(p.n_sites, p.theta, p.variant or "obc")


GALLERY: dict[str, Callable[[GalleryParams], UnitaryNetwork]] = {
    "shift": _shift,
    "stacked_cnot": _stacked_cnot,
    "kw": _kw,
    "stacked_xy": _stacked_xy,
    "redundant_identity": lambda p: build_redundant_identity(p.n_sites, p.red_dim, p.d),
    "nonuniform_impurity": lambda p: build_nonuniform_impurity(p.seed, p.d),
    "identity_bilayer": lambda p: build_identity_bilayer(p.n_sites, p.d),
    "haar_bilayer": lambda p: build_haar_bilayer(p.n_sites, p.d, p.seed, p.variant == "ti"),
    "four_layer": lambda p: build_four_layer(p.n_sites, seed=p.seed, variant=p.variant or "pbc"),
    "identity_networks": lambda p: build_identity_networks(p.variant or "a", p.d),
    "abc_example": lambda p: build_abc_example(p.seed),
    "dag_circuit": lambda p: build_dag_circuit(p.seed),
    "canonical_figure": lambda p: build_canonical_figure(p.seed),
    "single_layer_ring": lambda p: build_single_layer_ring(p.n_sites, p.d, p.seed),
    "self_trace": lambda p: build_self_trace(p.d, p.red_dim or p.d),
    "universal_padding": lambda p: build_universal_padding(
        haar_unitary(p.d ** p.n_sites, np.random.default_rng(p.seed)), p.n_sites, p.d),
}


def build(name: str, params: GalleryParams | None = None) -> UnitaryNetwork:
    try:
        builder = GALLERY[name]
    except KeyError:
        raise UnitaryNetworkError(f"unknown gallery network {name!r}; choose from {sorted(GALLERY)}") from None
    params = params or GalleryParams()
    net = builder(params)
    logger.debug("built %s: %d vertices, %d edges", net.meta.get("name"), len(net.vertices), len(net.edges))
    return net
