"""
Cosine-sine decomposition of mode unitaries.

U = V R W^dag with V = V_A (+) V_B, W = W_A (+) W_B and R the rotation block
(scipy.linalg.cossin layout). Rows split at p (outputs A | B), columns at q
(inputs a | b).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cossin

from src.core.errors import PartitionError
from src.gaussian.modes import ModeUnitary, dsum

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CSDFactors:
    v_a: np.ndarray
    v_b: np.ndarray
    w_a: np.ndarray
    w_b: np.ndarray
    r: np.ndarray          # full rotation block, identity paddings included
    c: np.ndarray          # cosines of the rotated pairs, descending
    s: np.ndarray          # matching sines
    p: int
    q: int

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def n_cross_identity(self) -> int:
        """Modes of b sent into A with unit weight by the identity padding of R."""
        k11 = max(0, self.p + self.q - self.n)
        return self.q - len(self.c) - k11

    def v(self) -> np.ndarray:
        return dsum(self.v_a, self.v_b)

    def w(self) -> np.ndarray:
        return dsum(self.w_a, self.w_b)

    def reconstruct(self) -> np.ndarray:
        return self.v() @ self.r @ self.w().conj().T

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "c": self.c.tolist(), "s": self.s.tolist()}


def csd(u, p: int, q: int) -> CSDFactors:
    m = u.matrix if isinstance(u, ModeUnitary) else np.asarray(u, dtype=complex)
    n = m.shape[0]
    if not (0 < p < n and 0 < q < n):
        raise PartitionError(f"partition sizes must lie strictly between 0 and {n}, got p={p}, q={q}")
    left, r, right = cossin(m, p=p, q=q)
    _, theta, _ = cossin(m, p=p, q=q, separate=True)
    order = np.argsort(theta)
    theta = np.asarray(theta)[order]
    c = np.clip(np.cos(theta), 0.0, 1.0)
    s = np.clip(np.sin(theta), 0.0, 1.0)
    w = right.conj().T
    f = CSDFactors(left[:p, :p], left[p:, p:], w[:q, :q], w[q:, q:], np.asarray(r, dtype=complex), c, s, p, q)
    logger.debug("csd N=%d p=%d q=%d: %d rotated pairs, reconstruction %.2e", n, p, q, len(c),
                 float(np.linalg.norm(f.reconstruct() - m)))
    return f


@dataclass
class RotationReduction:
    r_reduced: np.ndarray     # 2k x 2k [[C, -S], [S, C]] of the retained pairs
    n_local_pairs: int
    n_bond_modes: int
    retained: np.ndarray      # indices into factors.c

    def to_dict(self) -> dict:
        return {"n_local_pairs": self.n_local_pairs, "n_bond_modes": self.n_bond_modes,
                "retained": self.retained.tolist()}


def is_local(c: float, s: float, epsilon: float) -> bool:
    return s <= ZERO_TOL or c >= 1.0 - epsilon


def reduce_rotation(factors: CSDFactors, epsilon: float = ZERO_TOL) -> RotationReduction:
    """Pairs with c >= 1 - epsilon (or numerically zero s) stay local; the others need bond modes."""
    keep = np.array([k for k, (c, s) in enumerate(zip(factors.c, factors.s)) if not is_local(c, s, epsilon)],
                    dtype=int)
    ck, sk = factors.c[keep], factors.s[keep]
    r_red = np.block([[np.diag(ck), -np.diag(sk)], [np.diag(sk), np.diag(ck)]]) if keep.size else np.zeros((0, 0))
    n_local = len(factors.c) - keep.size + max(0, factors.p + factors.q - factors.n)
    n_bond = int(keep.size) + factors.n_cross_identity
    return RotationReduction(r_red, n_local, n_bond, keep)
