"""
Sparse Pauli-string propagation for qubit gate sequences.

An operator is a dict {label: coefficient}, label a string over 'IXYZ' of
length n (site 0 first). Conjugating by a gate only touches the factors on
its wires, so each gate is tabulated once as the images of its 4^k local
Paulis. Coefficients below UNET_PRUNE are dropped.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from src.core.errors import DimensionError
from src.core.gates import PAULIS, kron

logger = logging.getLogger(__name__)

#  Knobs
PRUNE = float(os.getenv("UNET_PRUNE", "1e-12"))

_LETTERS = "IXYZ"


def _local_labels(k: int) -> list[str]:
    return ["".join(p) for p in product(_LETTERS, repeat=k)]


def gate_table(gate: np.ndarray) -> dict[str, list[tuple[str, complex]]]:
    """Images G P G^dag of every k-qubit Pauli P, expanded in the Pauli basis."""
    g = np.asarray(gate, dtype=complex)
    k = int(round(math.log2(g.shape[0])))
    if 2 ** k != g.shape[0]:
        raise DimensionError(f"gate of dim {g.shape[0]} is not a qubit gate")
    labels = _local_labels(k)
    mats = {lbl: kron(*(PAULIS[c] for c in lbl)) for lbl in labels}
    table = {}
    for p in labels:
        image = g @ mats[p] @ g.conj().T
        terms = []
        for q in labels:
            c = np.trace(mats[q].conj().T @ image) / 2 ** k
            if abs(c) > 1e-14:
                terms.append((q, complex(c)))
        table[p] = terms
    return table


@lru_cache(maxsize=64)
def _cached_table(key: bytes, dim: int) -> dict:
    return gate_table(np.frombuffer(key, dtype=complex).reshape(dim, dim))


@dataclass
class PauliSum:
    n: int
    terms: dict = field(default_factory=dict)

    @classmethod
    def single(cls, n: int, site: int, letter: str, coeff: complex = 1.0) -> "PauliSum":
        if not 0 <= site < n:
            raise DimensionError(f"site {site} outside 0..{n - 1}")
        label = ["I"] * n
        label[site] = letter.upper()
        return cls(n, {"".join(label): complex(coeff)})

    @classmethod
    def from_string(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        return cls(len(label), {label.upper(): complex(coeff)})

    def conjugate(self, gate: np.ndarray, wires: Sequence[int], prune: float = PRUNE) -> "PauliSum":
        g = np.ascontiguousarray(gate, dtype=complex)
        table = _cached_table(g.tobytes(), g.shape[0])
        wires = list(wires)
        out: dict[str, complex] = {}
        for label, c in self.terms.items():
            local = "".join(label[w] for w in wires)
            chars = list(label)
            for q, a in table[local]:
                for w, ch in zip(wires, q):
                    chars[w] = ch
                key = "".join(chars)
                out[key] = out.get(key, 0.0) + c * a
        return PauliSum(self.n, {k: v for k, v in out.items() if abs(v) > prune})

    def norm(self) -> float:
        """Normalized Frobenius norm: sqrt(sum |c|^2)."""
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def support(self) -> list[int]:
        return sorted({k for label in self.terms for k, ch in enumerate(label) if ch != "I"})

    def weight_outside(self, region: Iterable[int]) -> tuple[float, float]:
        """(Frobenius weight, sum of |c|) of the strings not contained in `region`."""
        region = set(region)
        sq, ab = 0.0, 0.0
        for label, c in self.terms.items():
            if any(ch != "I" and k not in region for k, ch in enumerate(label)):
                sq += abs(c) ** 2
                ab += abs(c)
        return math.sqrt(sq), ab

    def to_dict(self, digits: int = 12) -> dict:
        out = {}
        for label, c in sorted(self.terms.items()):
            c = complex(round(c.real, digits), round(c.imag, digits))
            out[label] = c.real if c.imag == 0 else [c.real, c.imag]
        return out


def propagate(op: PauliSum, gates: Iterable[tuple[np.ndarray, Sequence[int]]],
              prune: float = PRUNE) -> PauliSum:
    """U O U^dag for U = product of `gates` given in time order (first applied first)."""
    for g, wires in gates:
        op = op.conjugate(g, wires, prune)
    logger.debug("propagated to %d Pauli strings", len(op.terms))
    return op
