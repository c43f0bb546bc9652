"""
Mode (single-particle) unitaries and networks of them.

A ModeUnitary maps its incoming mode labels to its outgoing ones. Networks are
contracted by tracking which labels are live: a block consumes its incoming
labels and puts its outgoing labels in the same slots.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from src.core.errors import DimensionError, DirectionError, LegError, NotUnitaryError
from src.core.tensor import haar_unitary

logger = logging.getLogger(__name__)

MODE_TOL = 1e-10


def dsum(*blocks) -> np.ndarray:
    """Block-diagonal sum; empty blocks are skipped."""
    parts = [np.asarray(b, dtype=complex) for b in blocks if np.asarray(b).size]
    return block_diag(*parts) if parts else np.zeros((0, 0), dtype=complex)


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    matrix: np.ndarray
    in_labels: tuple
    out_labels: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = m.shape[0]
        if m.shape != (n, n):
            raise DimensionError(f"mode unitary must be square, got {m.shape}")
        ins, outs = tuple(str(x) for x in self.in_labels), tuple(str(x) for x in self.out_labels)
        if len(ins) != n or len(outs) != n:
            raise LegError(f"{n} modes need {n} labels per side, got {len(ins)} in and {len(outs)} out")
        if len(set(ins)) != n or len(set(outs)) != n:
            raise LegError("mode labels must be distinct on each side")
        res = float(np.linalg.norm(m.conj().T @ m - np.eye(n)))
        if res > MODE_TOL:
            raise NotUnitaryError(f"mode matrix is not unitary (residual {res:.2e})")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "in_labels", ins)
        object.__setattr__(self, "out_labels", outs)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def square(cls, matrix, labels: Sequence[str], out_suffix: str = "'") -> "ModeUnitary":
        labels = [str(x) for x in labels]
        return cls(matrix, labels, [f"{x}{out_suffix}" for x in labels])


def default_labels(n: int) -> tuple[list[str], list[str]]:
    return [f"a{k}" for k in range(n)], [f"A{k}" for k in range(n)]


def haar_mode_unitary(n: int, seed: int = 0, in_labels: Sequence[str] | None = None,
                      out_labels: Sequence[str] | None = None) -> ModeUnitary:
    ins, outs = default_labels(n)
    return ModeUnitary(haar_unitary(n, np.random.default_rng(seed)), in_labels or ins, out_labels or outs)


def mode_direct_sum(u1: ModeUnitary, u2: ModeUnitary) -> ModeUnitary:
    """U1 (+) U2 on disjoint mode sets."""
    clash = (set(u1.in_labels) & set(u2.in_labels)) | (set(u1.out_labels) & set(u2.out_labels))
    if clash:
        raise LegError(f"direct sum needs disjoint labels, shared: {sorted(clash)}")
    return ModeUnitary(dsum(u1.matrix, u2.matrix), u1.in_labels + u2.in_labels,
                       u1.out_labels + u2.out_labels)


def mode_partial_contract(u1: ModeUnitary, u2: ModeUnitary, shared: Sequence[str]) -> ModeUnitary:
    """U2 first, then U1; the `shared` outputs of U2 are inputs of U1. Result:
    (U1 (+) I_C)(I_A (+) U2) with A = U1's other inputs and C = U2's other outputs."""
    shared = [str(x) for x in shared]
    if any(s in u1.out_labels and s in u2.in_labels for s in shared):
        raise DirectionError("shared labels run from U1 into U2; swap the arguments")
    missing = [s for s in shared if s not in u2.out_labels or s not in u1.in_labels]
    if missing:
        raise LegError(f"labels {missing} are not outputs of U2 and inputs of U1")
    a = [x for x in u1.in_labels if x not in shared]
    c = [x for x in u2.out_labels if x not in shared]
    ins = a + list(u2.in_labels)
    outs = list(u1.out_labels) + c
    if len(set(ins)) != len(ins) or len(set(outs)) != len(outs):
        raise LegError("contracted network would reuse a mode label")
    step2 = dsum(np.eye(len(a)), u2.matrix)           # ins -> a + u2.out
    mid = a + list(u2.out_labels)
    perm = np.zeros((len(mid), len(mid)))
    order = list(u1.in_labels) + c                          # u1.in order, then C
    for r, lbl in enumerate(order):
        perm[r, mid.index(lbl)] = 1.0
    step1 = dsum(u1.matrix, np.eye(len(c)))
    return ModeUnitary(step1 @ perm @ step2, ins, outs)


@dataclass
class ModeBlock:
    name: str
    unitary: ModeUnitary
    site: int = 0
    layer: int = 0


@dataclass
class ModeNetwork:
    blocks: list                               # ModeBlock in contraction order
    in_labels: list
    out_labels: list
    cuts: list = field(default_factory=list)   # per-cut spectra from decompositions
    cost: object | None = None
    epsilon: float = 0.0

    def to_json(self) -> dict:
        def cplx(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

        return {
            "in_labels": list(self.in_labels),
            "out_labels": list(self.out_labels),
            "epsilon": self.epsilon,
            "blocks": [{"name": b.name, "site": b.site, "layer": b.layer,
                        "in_labels": list(b.unitary.in_labels), "out_labels": list(b.unitary.out_labels),
                        "matrix": cplx(b.unitary.matrix)} for b in self.blocks],
            "cuts": [c.to_dict() if hasattr(c, "to_dict") else c for c in self.cuts],
            "cost": self.cost.to_dict() if hasattr(self.cost, "to_dict") else self.cost,
        }


def slot_sequence(mnet: ModeNetwork) -> tuple[list[tuple[ModeBlock, list[int]]], list[str]]:
    """Slot positions each block acts on, and the label held by every slot at the end."""
    live = list(mnet.in_labels)
    steps = []
    for b in mnet.blocks:
        try:
            slots = [live.index(lbl) for lbl in b.unitary.in_labels]
        except ValueError:
            raise LegError(f"block {b.name} consumes a label that is not live; blocks are out of order") from None
        for s, lbl in zip(slots, b.unitary.out_labels):
            live[s] = lbl
        steps.append((b, slots))
    return steps, live


def embed_block(u: ModeUnitary, slots: Sequence[int], n: int) -> np.ndarray:
    m = np.eye(n, dtype=complex)
    m[np.ix_(list(slots), list(slots))] = u.matrix
    return m


def slot_matrix(mnet: ModeNetwork) -> np.ndarray:
    """Product of the embedded blocks, rows in final slot order."""
    n = len(mnet.in_labels)
    steps, _ = slot_sequence(mnet)
    m = np.eye(n, dtype=complex)
    for b, slots in steps:
        m = embed_block(b.unitary, slots, n) @ m
    return m


def mode_network_matrix(mnet: ModeNetwork) -> np.ndarray:
    """Contracted mode unitary, rows in mnet.out_labels order, cols in mnet.in_labels order."""
    steps, live = slot_sequence(mnet)
    if sorted(live) != sorted(mnet.out_labels):
        raise LegError(f"network ends on labels {live}, expected {list(mnet.out_labels)}")
    m = slot_matrix(mnet)
    return m[[live.index(lbl) for lbl in mnet.out_labels], :]
