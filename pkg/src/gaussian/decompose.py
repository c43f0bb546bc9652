"""
Left-to-right CSD sweep of a mode unitary into a bilayer mode network.

At cut j the remaining unitary acts on (bond modes from the left, site j, the
rest). A CSD with p = q = bonds + site modes splits it into a bottom block
W_A^dag, a top block V_A and a smaller remainder (I (+) V_B) R' (I (+) W_B^dag)
in which only the retained rotation pairs still couple the two sides. Those
pairs become the bond modes of the next step.

Usage
-----
    from src.gaussian.decompose import decompose_gaussian
    mnet = decompose_gaussian(haar_mode_unitary(8, seed=3), [2, 2, 2, 2], epsilon=0.0)
    [c.n_bond_modes for c in mnet.cuts]    # rank of each off-diagonal block
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from src.analysis.flow import cost_from_edges
from src.core.errors import PartitionError
from src.gaussian.csd import ZERO_TOL, csd, is_local
from src.gaussian.modes import ModeBlock, ModeNetwork, ModeUnitary, default_labels, dsum, mode_network_matrix

logger = logging.getLogger(__name__)

EPSILON = 1e-10


@dataclass
class CutInfo:
    cut: int                       # between site `cut` and `cut + 1`
    c: list = field(default_factory=list)
    s: list = field(default_factory=list)
    n_bond_modes: int = 0
    n_local_pairs: int = 0
    truncated_weight: float = 0.0  # sqrt(sum s^2) of the pairs dropped by epsilon

    def to_dict(self) -> dict:
        return {"cut": self.cut, "c": self.c, "s": self.s, "n_bond_modes": self.n_bond_modes,
                "n_local_pairs": self.n_local_pairs, "truncated_weight": self.truncated_weight}


def _pairs(r: np.ndarray, p: int, epsilon: float):
    """(A index, B index, c, s) of every rotated pair, and the local A indices, read off the R block."""
    pairs, local = [], []
    for i in range(p):
        col = r[p:, i]
        j = int(np.argmax(np.abs(col))) if col.size else 0
        s = float(abs(col[j])) if col.size else 0.0
        c = float(abs(r[i, i]))
        if s > ZERO_TOL and not is_local(c, s, epsilon):
            pairs.append((i, j, c, s))
        else:
            local.append((i, j, c, s))
    return pairs, local


def _truncate(r: np.ndarray, p: int, dropped) -> np.ndarray:
    rt = np.array(r, dtype=complex)
    for i, j, _, s in dropped:
        if s <= ZERO_TOL:
            continue
        rt[i, :] = 0.0
        rt[:, i] = 0.0
        rt[p + j, :] = 0.0
        rt[:, p + j] = 0.0
        rt[i, i] = 1.0
        rt[p + j, p + j] = 1.0
    return rt


def decompose_gaussian(u, modes_per_site: Sequence[int], epsilon: float = EPSILON) -> ModeNetwork:
    if isinstance(u, ModeUnitary):
        m, in_labels, out_labels = u.matrix, list(u.in_labels), list(u.out_labels)
    else:
        m = np.asarray(u, dtype=complex)
        in_labels, out_labels = default_labels(m.shape[0])
    sizes = [int(k) for k in modes_per_site]
    if any(k < 1 for k in sizes) or sum(sizes) != m.shape[0]:
        raise PartitionError(f"sites {sizes} do not partition {m.shape[0]} modes")

    cur, cur_in, cur_out = m, list(in_labels), list(out_labels)
    bottoms, tops, cuts = [], [], []
    k_prev = 0
    for j, pj in enumerate(sizes[:-1]):
        p = k_prev + pj
        f = csd(cur, p, p)
        pairs, local = _pairs(f.r, p, epsilon)
        dropped = [x for x in local if x[3] > ZERO_TOL]
        rt = _truncate(f.r, p, dropped)
        k = len(pairs)
        right = [f"b{j}.{t}" for t in range(k)]
        left = [f"c{j}.{t}" for t in range(k)]
        pos = {i: t for t, (i, _, _, _) in enumerate(pairs)}
        mids = [right[pos[i]] if i in pos else f"l{j}.{i}" for i in range(p)]
        mids_top = [left[pos[i]] if i in pos else f"l{j}.{i}" for i in range(p)]
        bottoms.append(ModeBlock(f"W{j}", ModeUnitary(f.w_a.conj().T, cur_in[:p], mids), j, 0))
        tops.append(ModeBlock(f"V{j}", ModeUnitary(f.v_a, mids_top, cur_out[:p]), j, 1))
        n = cur.shape[0]
        idx = [i for i, _, _, _ in pairs] + list(range(p, n))
        r_sub = rt[np.ix_(idx, idx)]
        cur = dsum(np.eye(k), f.v_b) @ r_sub @ dsum(np.eye(k), f.w_b.conj().T)
        cur_in, cur_out = right + cur_in[p:], left + cur_out[p:]
        k_prev = k
        cuts.append(CutInfo(j, [c for _, _, c, _ in pairs], [s for _, _, _, s in pairs], k,
                            p - k, float(math.sqrt(sum(s * s for _, _, _, s in dropped)))))
        logger.debug("cut %d: %d bond modes, %d local, truncated weight %.3g", j, k, p - k,
                     cuts[-1].truncated_weight)
    last = len(sizes) - 1
    blocks = bottoms + [ModeBlock(f"U{last}", ModeUnitary(cur, cur_in, cur_out), last, 0)] + tops[::-1]
    cost = cost_from_edges(
        [(f"cut{c.cut}:{side}", Fraction(c.n_bond_modes), 1.0) for c in cuts for side in ("right", "left")],
        unit="modes")
    mnet = ModeNetwork(blocks, list(in_labels), list(out_labels), cuts, cost, epsilon)
    logger.info("gaussian sweep over %d sites: bond modes per cut %s", len(sizes), [c.n_bond_modes for c in cuts])
    return mnet


def reconstruction_residual(mnet: ModeNetwork, u) -> float:
    m = u.matrix if isinstance(u, ModeUnitary) else np.asarray(u, dtype=complex)
    return float(np.linalg.norm(mode_network_matrix(mnet) - m))


def cut_rank(u, n_left: int, tol: float = ZERO_TOL) -> int:
    """Numerical rank of the block sending the first n_left inputs to the remaining outputs."""
    m = u.matrix if isinstance(u, ModeUnitary) else np.asarray(u, dtype=complex)
    s = np.linalg.svd(m[n_left:, :n_left], compute_uv=False)
    return int(np.sum(s > tol))
