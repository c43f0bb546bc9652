"""
QCA machinery on top of the evaluator.

  - MargolusScheme / margolus_to_bilayer(): two-step partition -> bilayer with supercells
  - locality_radius(): smallest R with every single-site basis operator mapped into the R-ball
  - support_dims(): operator-Schmidt ranks per partition group
  - wrap_pbc(): close the horizontal externals of an OBC window and test unitarity
  - alpu_tails(): f(r) = ||u(O) - E_r u(O)|| / ||u(O)|| with an exponential fit

Usage
-----
    from src.analysis.qca import shift_margolus, margolus_to_bilayer, alpu_tails
    net = margolus_to_bilayer(shift_margolus(2, d=2, direction="left"))
    prof = alpu_tails(stacked_xy_gates(12, 0.785), site=9, r_list=range(1, 9), n=12)
    prof.to_csv("tails.csv")
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.analysis.pauli import PauliSum, propagate
from src.core.errors import BudgetExceeded, DimensionError, PartitionError, UnitaryNetworkError
from src.core.evaluator import DenseOperator, site_layout, site_matrix
from src.core.gates import clock_shift_basis, kron
from src.core.netgraph import BOND, NetworkBuilder, UnitaryNetwork, close_horizontal, contract_vertices
from src.core.tensor import TOL, haar_unitary, identity_tensor, reshape_to_matrix, tensor_from_matrix
from src.model.tail_fit import TailFit, fit_exponential

logger = logging.getLogger(__name__)

#  Knobs
WORKERS = int(os.getenv("UNET_WORKERS", "1"))
DENSE_MAX_DIM = 2 ** 14
RANK_TOL = 1e-10


#  Margolus schemes
def _as_matrix(block) -> np.ndarray:
    if hasattr(block, "legs"):
        return reshape_to_matrix(block)
    return np.asarray(block, dtype=complex)


@dataclass(frozen=True, eq=False)
class MargolusScheme:
    """w_blocks[m]: (a_2m, a_2m+1) -> (b_2m, b_2m+1); v_blocks[k-1]: (b_2k-1, b_2k) -> (a_2k-1, a_2k)."""
    w_blocks: tuple
    v_blocks: tuple
    a_dims: tuple
    b_dims: tuple
    d: int = 2

    def __post_init__(self):
        w = tuple(_as_matrix(b) for b in self.w_blocks)
        v = tuple(_as_matrix(b) for b in self.v_blocks)
        a, b = tuple(int(x) for x in self.a_dims), tuple(int(x) for x in self.b_dims)
        m = len(w)
        if m < 1:
            raise DimensionError("a Margolus scheme needs at least one cell")
        if len(a) != 2 * m or len(b) != 2 * m:
            raise DimensionError(f"{m} cells need {2 * m} a/b dims, got {len(a)} and {len(b)}")
        if len(v) != m - 1:
            raise DimensionError(f"{m} cells need {m - 1} second-step blocks, got {len(v)}")
        for k, blk in enumerate(w):
            rows, cols = b[2 * k] * b[2 * k + 1], a[2 * k] * a[2 * k + 1]
            if blk.shape != (rows, cols):
                raise DimensionError(f"w[{k}] has shape {blk.shape}, chain needs ({rows}, {cols})")
        for k, blk in enumerate(v, start=1):
            rows, cols = a[2 * k - 1] * a[2 * k], b[2 * k - 1] * b[2 * k]
            if blk.shape != (rows, cols):
                raise DimensionError(f"v[{k}] has shape {blk.shape}, chain needs ({rows}, {cols})")
        for name, blocks in (("w", w), ("v", v)):
            for k, blk in enumerate(blocks):
                res = np.linalg.norm(blk.conj().T @ blk - np.eye(blk.shape[1]))
                if res > TOL:
                    raise DimensionError(f"{name}[{k}] is not unitary (residual {res:.2e})")
        object.__setattr__(self, "w_blocks", w)
        object.__setattr__(self, "v_blocks", v)
        object.__setattr__(self, "a_dims", a)
        object.__setattr__(self, "b_dims", b)

    @property
    def n_cells(self) -> int:
        return len(self.w_blocks)

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    def dense_matrix(self) -> np.ndarray:
        """(I_b0 x V_1 x ... x V_{M-1} x I_b_last) (W_0 x ... x W_{M-1})."""
        w_all = kron(*self.w_blocks)
        v_all = kron(np.eye(self.b_dims[0]), *self.v_blocks, np.eye(self.b_dims[-1]))
        return v_all @ w_all


def shift_margolus(n_cells: int, d: int = 2, direction: str = "left") -> MargolusScheme:
    """Translation by one site as a Margolus scheme; every block is an identity routing."""
    if direction == "left":
        b = [d * d, 1] * n_cells
    elif direction == "right":
        b = [1, d * d] * n_cells
    else:
        raise UnitaryNetworkError(f"direction must be 'left' or 'right', got {direction!r}")
    eye = np.eye(d * d, dtype=complex)
    return MargolusScheme([eye] * n_cells, [eye] * (n_cells - 1), [d] * (2 * n_cells), b, d)


def haar_margolus(n_cells: int, a_dims: Sequence[int] | None = None, b_dims: Sequence[int] | None = None,
                  seed: int = 0, d: int = 2) -> MargolusScheme:
    a = list(a_dims) if a_dims is not None else [d] * (2 * n_cells)
    b = list(b_dims) if b_dims is not None else list(a)
    rng = np.random.default_rng(seed)
    w = [haar_unitary(a[2 * m] * a[2 * m + 1], rng) for m in range(n_cells)]
    v = [haar_unitary(b[2 * k - 1] * b[2 * k], rng) for k in range(1, n_cells)]
    return MargolusScheme(w, v, a, b, d)


def margolus_network(scheme: MargolusScheme) -> UnitaryNetwork:
    """Plain two-step network: w blocks on layer 0, v blocks on layer 1."""
    a, b, m_cells = scheme.a_dims, scheme.b_dims, scheme.n_cells
    nb = NetworkBuilder(scheme.d, name=f"margolus_{m_cells}")
    for m, blk in enumerate(scheme.w_blocks):
        nb.add(f"w{m}", tensor_from_matrix(blk, [("a0", a[2 * m]), ("a1", a[2 * m + 1])],
                                           [("b0", b[2 * m]), ("b1", b[2 * m + 1])], f"w{m}"), 2 * m, 0)
    for k, blk in enumerate(scheme.v_blocks, start=1):
        nb.add(f"v{k}", tensor_from_matrix(blk, [("l", b[2 * k - 1]), ("r", b[2 * k])],
                                           [("a0", a[2 * k - 1]), ("a1", a[2 * k])], f"v{k}"), 2 * k - 1, 1)
        nb.connect(f"w{k - 1}", "b1", f"v{k}", "l").connect(f"w{k}", "b0", f"v{k}", "r")
    for m in range(m_cells):
        nb.source(f"w{m}", "a0", 2 * m).source(f"w{m}", "a1", 2 * m + 1)
    nb.sink("w0", "b0", 0)
    for k in range(1, m_cells):
        nb.sink(f"v{k}", "a0", 2 * k - 1).sink(f"v{k}", "a1", 2 * k)
    nb.sink(f"w{m_cells - 1}", "b1", 2 * m_cells - 1)
    return nb.build()


def _margolus_fine(scheme: MargolusScheme) -> UnitaryNetwork:
    """Each w block padded into two columns: A routes a_2m right, B applies w, D splits the
    result, C routes b_2m left; V blocks sit on a third layer."""
    a, b, m_cells, d = scheme.a_dims, scheme.b_dims, scheme.n_cells, scheme.d
    nb = NetworkBuilder(d)
    for m, blk in enumerate(scheme.w_blocks):
        a0, a1, b0, b1 = a[2 * m], a[2 * m + 1], b[2 * m], b[2 * m + 1]
        nb.add(f"A{m}", identity_tensor([("a", a0)], [("r", a0)], f"A{m}"), 2 * m, 0)
        nb.add(f"B{m}", tensor_from_matrix(blk, [("l", a0), ("a", a1)], [("v0", b0), ("v1", b1)], f"B{m}"),
               2 * m + 1, 0)
        nb.add(f"D{m}", identity_tensor([("v0", b0), ("v1", b1)], [("l", b0), ("b", b1)], f"D{m}"), 2 * m + 1, 1)
        nb.add(f"C{m}", identity_tensor([("r", b0)], [("b", b0)], f"C{m}"), 2 * m, 1)
        nb.connect(f"A{m}", "r", f"B{m}", "l")
        nb.connect(f"B{m}", "v0", f"D{m}", "v0").connect(f"B{m}", "v1", f"D{m}", "v1")
        nb.connect(f"D{m}", "l", f"C{m}", "r")
        nb.source(f"A{m}", "a", 2 * m).source(f"B{m}", "a", 2 * m + 1)
    for k, blk in enumerate(scheme.v_blocks, start=1):
        nb.add(f"V{k}", tensor_from_matrix(blk, [("l", b[2 * k - 1]), ("r", b[2 * k])],
                                           [("a0", a[2 * k - 1]), ("a1", a[2 * k])], f"V{k}"), 2 * k, 2)
        nb.connect(f"D{k - 1}", "b", f"V{k}", "l").connect(f"C{k}", "b", f"V{k}", "r")
    nb.sink("C0", "b", 0)
    for k in range(1, m_cells):
        nb.sink(f"V{k}", "a0", 2 * k - 1).sink(f"V{k}", "a1", 2 * k)
    nb.sink(f"D{m_cells - 1}", "b", 2 * m_cells - 1)
    return nb.build()


def margolus_to_bilayer(scheme: MargolusScheme) -> UnitaryNetwork:
    """Supercell m (x = 2m, sites 2m-1 and 2m) holds the right half of cell m-1 and the left half
    of cell m: bottom = [B_{m-1}, A_m], top = [D_{m-1}, C_m, V_m]. Bottom bonds carry a_2m
    rightward, top bonds b_2m leftward. The last interior cut is a boundary cut and is left out
    of meta['bulk_cuts']."""
    fine = _margolus_fine(scheme)
    m_cells = scheme.n_cells
    net = fine
    for m in range(m_cells + 1):
        bottom = ([f"B{m - 1}"] if m > 0 else []) + ([f"A{m}"] if m < m_cells else [])
        top = ([f"D{m - 1}"] if m > 0 else []) + ([f"C{m}"] if m < m_cells else []) + \
              ([f"V{m}"] if 0 < m < m_cells else [])
        net = contract_vertices(net, bottom, f"bot{m}", x=2 * m, layer=0)
        net = contract_vertices(net, top, f"top{m}", x=2 * m, layer=1)
    split = {m: {"L": [f"A{m}", f"C{m}"], "R": [f"B{m}", f"D{m}"]} for m in range(m_cells)}
    bulk = [k + 0.5 for k in range(2 * m_cells - 2)]
    logger.info("Margolus scheme with %d cells -> bilayer with %d supercells", m_cells, m_cells + 1)
    return net.with_meta(name=f"margolus_bilayer_{m_cells}", n=2 * m_cells, lr_split=split,
                         bulk_cuts=bulk, a_dims=list(scheme.a_dims), b_dims=list(scheme.b_dims))


#  Locality
@dataclass
class LocalityReport:
    per_site: dict                 # site -> radius, None when above max_r
    max_r: int
    radius: int | None             # network level; None when some site exceeds max_r
    method: str = "dense"

    @property
    def exceeded(self) -> bool:
        return self.radius is None

    def to_dict(self) -> dict:
        return {"per_site": {str(k): v for k, v in self.per_site.items()}, "max_r": self.max_r,
                "radius": self.radius, "exceeded": self.exceeded, "method": self.method}


def _gates_and_n(target, n: int | None):
    gates = list(getattr(target, "gates", target))
    n = n if n is not None else getattr(target, "n_wires", None)
    if n is None:
        raise UnitaryNetworkError("a gate list needs the number of wires")
    return gates, n


def _dense_u(net: UnitaryNetwork, u: np.ndarray | None = None):
    sites, dims = site_layout(net)
    if math.prod(dims) > DENSE_MAX_DIM:
        raise BudgetExceeded(f"dense transport on dim {math.prod(dims)} exceeds {DENSE_MAX_DIM}")
    if u is None:
        u = site_matrix(net)
    if u.shape != (math.prod(dims), math.prod(dims)):
        raise DimensionError(f"site matrix {u.shape} does not match input sites {dims}")
    return u, sites, dims


def _image_radius(support: Sequence[int], site: int) -> int:
    return max((abs(t - site) for t in support), default=0)


def locality_radius(target, max_r: int, n: int | None = None, sites: Sequence[int] | None = None) -> LocalityReport:
    """UnitaryNetwork: dense transport of the clock/shift basis per site.
    Gate list (or object with .gates/.n_wires, qubits): Pauli propagation of X, Y, Z."""
    per_site: dict[int, int | None] = {}
    if isinstance(target, UnitaryNetwork):
        u, all_sites, dims = _dense_u(target)
        method = "dense"
        for s in (sites if sites is not None else all_sites):
            k = all_sites.index(s)
            r = 0
            for op in clock_shift_basis(dims[k])[1:]:
                full = DenseOperator(op, (s,), (dims[k],)).embed(all_sites, dims).matrix
                image = DenseOperator(u @ full @ u.conj().T, tuple(all_sites), tuple(dims))
                r = max(r, _image_radius(image.nontrivial_sites(), s))
            per_site[s] = r if r <= max_r else None
    else:
        gates, n = _gates_and_n(target, n)
        method = "pauli"
        for s in (sites if sites is not None else range(n)):
            r = 0
            for letter in "XYZ":
                image = propagate(PauliSum.single(n, s, letter), gates)
                r = max(r, _image_radius(image.support(), s))
            per_site[s] = r if r <= max_r else None
    values = list(per_site.values())
    radius = None if any(v is None for v in values) else max(values, default=0)
    logger.info("locality radius (%s, max_r=%d): %s", method, max_r, radius if radius is not None else "exceeded")
    return LocalityReport(per_site, max_r, radius, method)


#  Support algebras
@dataclass
class SupportReport:
    groups: list
    ranks: list
    nontrivial: list

    def to_dict(self) -> dict:
        return {"groups": self.groups, "ranks": self.ranks, "nontrivial": self.nontrivial}


def _schmidt_rank(m: np.ndarray, dims: Sequence[int], group: Sequence[int]) -> int:
    n = len(dims)
    rest = [k for k in range(n) if k not in group]
    t = m.reshape(list(dims) * 2)
    perm = list(group) + [n + k for k in group] + rest + [n + k for k in rest]
    dg = math.prod(dims[k] for k in group) ** 2
    t = np.transpose(t, perm).reshape(dg, -1)
    s = np.linalg.svd(t, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > RANK_TOL * s[0]))


def support_dims(op: DenseOperator, site_partition: Sequence[Sequence[int]] | None = None) -> SupportReport:
    """Operator-Schmidt rank of `op` across each group / rest cut, plus whether op acts
    non-trivially on the group."""
    groups = [list(g) for g in site_partition] if site_partition is not None else [[s] for s in op.site_support]
    flat = [s for g in groups for s in g]
    if sorted(flat) != sorted(op.site_support) or len(set(flat)) != len(flat):
        raise PartitionError(f"partition {groups} does not cover the support {list(op.site_support)} exactly")
    nontrivial_sites = set(op.nontrivial_sites())
    ranks, flags = [], []
    for g in groups:
        pos = [op.site_support.index(s) for s in g]
        ranks.append(_schmidt_rank(op.matrix, op.local_dims, pos))
        flags.append(any(s in nontrivial_sites for s in g))
    return SupportReport(groups, ranks, flags)


#  PBC wrapping
@dataclass
class WrapResult:
    network: UnitaryNetwork
    residual: float                 # ||U^dag U - I||_F of the wrapped site matrix
    relative_residual: float        # residual / sqrt(dim)
    leakage: float                  # largest outgoing-bond weight of a transported incoming-bond operator
    condition_ok: bool
    witness: dict | None = None     # two basis states with the same image

    @property
    def unitary(self) -> bool:
        return self.residual < max(TOL, 1e-8)

    def to_dict(self) -> dict:
        return {"residual": self.residual, "relative_residual": self.relative_residual,
                "leakage": self.leakage, "condition_ok": self.condition_ok,
                "unitary": self.unitary, "witness": self.witness}


def _digits(idx: int, dims: Sequence[int]) -> str:
    return "".join(str(int(v)) for v in np.unravel_index(idx, list(dims)))


def _collision(u: np.ndarray, dims: Sequence[int], max_dim: int = 2 ** 12) -> dict | None:
    if u.shape[1] > max_dim:
        return None
    seen: dict[bytes, int] = {}
    for j in range(u.shape[1]):
        col = u[:, j]
        if np.linalg.norm(col) < 1e-9:
            continue
        key = np.round(col, 8).tobytes()
        if key in seen:
            i = seen[key]
            image = int(np.argmax(np.abs(col)))
            return {"inputs": [_digits(i, dims), _digits(j, dims)], "image": _digits(image, dims)}
        seen[key] = j
    return None


def _bond_leakage(net_obc: UnitaryNetwork) -> float:
    in_sites, in_dims = site_layout(net_obc, keep_bonds=True)
    out_sites, out_dims = site_layout(net_obc, keep_bonds=True, side="sinks")
    bond_in = sorted({p.site for p in net_obc.sources if p.kind == BOND and p.site is not None})
    phys_out = [s for s in out_sites if s in net_obc.phys_sites]
    u = site_matrix(net_obc, keep_bonds=True)
    if u.shape[0] != u.shape[1]:
        raise DimensionError(f"OBC matrix {u.shape} is not square on sites {in_sites} -> {out_sites}")
    worst = 0.0
    for s in bond_in:
        k = in_sites.index(s)
        for b in clock_shift_basis(in_dims[k])[1:]:
            full = DenseOperator(b, (s,), (in_dims[k],)).embed(in_sites, in_dims).matrix
            image = DenseOperator(u @ full @ u.conj().T, tuple(out_sites), tuple(out_dims))
            kept = image.conditional_expectation(phys_out)
            worst = max(worst, float(np.linalg.norm(image.matrix - kept.matrix) / np.linalg.norm(image.matrix)))
    return worst


def wrap_pbc(net_obc: UnitaryNetwork) -> WrapResult:
    """Join the horizontal externals into periodic bonds and measure how far the result is from unitary.
    The condition check transports the incoming-bond algebra through the open window and reports how
    much of it lands on the outgoing bonds."""
    wrapped = close_horizontal(net_obc)
    u = site_matrix(wrapped)
    _, dims = site_layout(wrapped)
    residual = float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])))
    leakage = _bond_leakage(net_obc)
    witness = _collision(u, dims) if residual > 1e-8 else None
    if residual > 1e-8:
        logger.warning("wrapped %s is not unitary (residual %.3g)", net_obc.meta.get("name", "network"), residual)
    return WrapResult(wrapped, residual, residual / math.sqrt(u.shape[1]), leakage, leakage < 1e-8, witness)


#  Tails
@dataclass
class TailProfile:
    radii: list
    f_values: list
    spectral: list = field(default_factory=list)
    norm_kind: str = "frobenius"
    fit: TailFit | None = None
    site: int | None = None
    operator: str = ""
    xi_formula: float | None = None

    @property
    def xi_ratio(self) -> float | None:
        """Fitted over predicted decay length; None without a prediction or a finite fit."""
        if not self.xi_formula or self.fit is None or not math.isfinite(self.fit.xi):
            return None
        if not math.isfinite(self.xi_formula):
            return None
        return float(self.fit.xi / self.xi_formula)

    def _fitted(self) -> np.ndarray:
        r = np.asarray(self.radii, dtype=float)
        if self.fit is None or not np.isfinite(self.fit.xi) or not np.isfinite(self.fit.amplitude):
            return np.full(r.shape, np.nan)
        return self.fit.amplitude * np.exp(-r / self.fit.xi)

    def to_frame(self) -> pd.DataFrame:
        fitted = self._fitted()
        df = pd.DataFrame({"r": self.radii, "f": self.f_values,
                           "spectral": self.spectral or [np.nan] * len(self.radii), "fit": fitted})
        df["fit_residual"] = df["f"] - df["fit"]
        return df

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)

    def to_json(self) -> dict:
        fit = None
        if self.fit is not None:
            fit = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                   for k, v in self.fit._asdict().items()}
        return {"site": self.site, "operator": self.operator, "norm_kind": self.norm_kind,
                "radii": list(self.radii), "f": [float(v) for v in self.f_values],
                "spectral": [float(v) for v in self.spectral], "fit": fit,
                "xi_formula": self.xi_formula, "xi_ratio": self.xi_ratio}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _ball(site: int, r: int, sites: Sequence[int]) -> list[int]:
    return [s for s in sites if abs(s - site) <= r]


def alpu_tails(target, site: int, r_list: Sequence[int], op: str | DenseOperator = "X",
               n: int | None = None, u: np.ndarray | None = None,
               xi_formula: float | None = None) -> TailProfile:
    """Tail profile of u(O) for O at `site`. The spectral column is the operator-norm distance
    (dense) or the l1 weight outside the ball, an upper bound on it (Pauli). `xi_formula` is an
    optional predicted decay length; stacked-XY networks fill it from their theta."""
    if xi_formula is None and isinstance(target, UnitaryNetwork) and "theta" in target.meta \
            and str(target.meta.get("name", "")).startswith("stacked_xy"):
        xi_formula = xy_decay_length(float(target.meta["theta"]))
    radii = sorted(int(r) for r in r_list)
    f_vals, spec = [], []
    if isinstance(target, UnitaryNetwork):
        u, sites, dims = _dense_u(target, u)
        k = sites.index(site)
        if isinstance(op, str):
            if dims[k] != 2:
                raise DimensionError("Pauli letters need a qubit site; pass a DenseOperator")
            o = DenseOperator.pauli({site: op})
        else:
            o = op
        full = o.embed(sites, dims).matrix
        image = DenseOperator(u @ full @ u.conj().T, tuple(sites), tuple(dims))
        frob = np.linalg.norm(image.matrix)
        opn = np.linalg.norm(image.matrix, 2)
        for r in radii:
            diff = image.matrix - image.conditional_expectation(_ball(site, r, sites)).matrix
            f_vals.append(float(np.linalg.norm(diff) / frob))
            spec.append(float(np.linalg.norm(diff, 2) / opn))
        label = op if isinstance(op, str) else "custom"
    else:
        if not isinstance(op, str):
            raise UnitaryNetworkError("gate lists are propagated as Pauli strings; pass a letter")
        gates, n = _gates_and_n(target, n)
        image = propagate(PauliSum.single(n, site, op), gates)
        total = image.norm()
        for r in radii:
            frob, l1 = image.weight_outside(_ball(site, r, range(n)))
            f_vals.append(frob / total)
            spec.append(l1 / total)
        label = op
    fit = fit_exponential(radii, f_vals)
    logger.debug("tails at site %d: f=%s xi_fit=%.4g", site, np.round(f_vals, 6).tolist(), fit.xi)
    return TailProfile(radii, f_vals, spec, "frobenius", fit, site, label, xi_formula)


def tail_profiles(target, sites: Sequence[int], r_list: Sequence[int], op: str = "X", n: int | None = None,
                  n_jobs: int | None = None, xi_formula: float | None = None) -> list[TailProfile]:
    """Independent sites in parallel (joblib); the dense matrix is built once."""
    u = _dense_u(target)[0] if isinstance(target, UnitaryNetwork) else None
    jobs = n_jobs or WORKERS
    return Parallel(n_jobs=jobs)(delayed(alpu_tails)(target, s, r_list, op, n, u, xi_formula) for s in sites)


def xy_decay_length(theta: float, a: float = 1.0) -> float:
    """a / (-ln sqrt(1 - cos^4 theta)): 0 at theta = 0, inf at theta = pi/2."""
    c4 = math.cos(theta) ** 4
    if c4 >= 1.0 - 1e-15:
        return 0.0
    q = math.sqrt(1.0 - c4)
    if q >= 1.0:
        return math.inf
    return a / (-math.log(q))
