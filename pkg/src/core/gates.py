"""Gate matrices and small operator bases (row-major, first factor most significant)."""
from __future__ import annotations

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

# control = first qubit
CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=complex)


def swap(d1: int, d2: int | None = None) -> np.ndarray:
    """|a b> -> |b a> for a in C^d1, b in C^d2."""
    d2 = d1 if d2 is None else d2
    m = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for a in range(d1):
        for b in range(d2):
            m[b * d1 + a, a * d2 + b] = 1.0
    return m


SWAP = swap(2)


def xy_gate(theta: float) -> np.ndarray:
    """exp[i theta/2 (XX + YY)/2]; c = cos(theta/2), s = sin(theta/2)."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[1, 0, 0, 0],
                     [0, c, 1j * s, 0],
                     [0, 1j * s, c, 0],
                     [0, 0, 0, 1]], dtype=complex)


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def pauli_string(label: str) -> np.ndarray:
    """'XIZ' -> X (x) I (x) Z."""
    return kron(*(PAULIS[ch] for ch in label.upper()))


def clock_shift_basis(d: int) -> list[np.ndarray]:
    """Generalized Pauli basis X^a Z^b, a, b in 0..d-1; orthogonal under Tr(A^dag B) = d delta.
    The first element is the identity."""
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    basis = []
    for a in range(d):
        for b in range(d):
            basis.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
    return basis


def shift_matrix(n: int, d: int = 2, step: int = 1) -> np.ndarray:
    """Cyclic translation of n qudits: the qudit at site x moves to site x + step (mod n)."""
    dim = d ** n
    m = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        digits = np.unravel_index(idx, [d] * n)
        moved = [0] * n
        for x in range(n):
            moved[(x + step) % n] = digits[x]
        m[np.ravel_multi_index(moved, [d] * n), idx] = 1.0
    return m


def embed_gate(gate: np.ndarray, wires: list[int], n: int, d: int = 2) -> np.ndarray:
    """Dense matrix of `gate` acting on `wires` (in gate order) of an n-qudit register."""
    k = len(wires)
    g = np.asarray(gate, dtype=complex).reshape([d] * (2 * k))
    eye = np.eye(d ** n, dtype=complex).reshape([d] * (2 * n))
    out = np.tensordot(g, eye, axes=(list(range(k, 2 * k)), wires))
    # tensordot puts the gate's output axes first; move them back onto the wires
    rest = [w for w in range(2 * n) if w not in wires]
    order = list(np.argsort(wires + rest))
    out = np.transpose(out, order)
    return out.reshape(d ** n, d ** n)
