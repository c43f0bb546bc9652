"""
Many-body (Fock space) representation of mode unitaries.

Occupation basis |n_0 n_1 ... n_{N-1}>, mode 0 most significant; annihilators
carry Jordan-Wigner strings of Z on the lower modes. rho(e^{ih}) = e^{iH} with
H = sum h_ab c_a^dag c_b; from a mode unitary h is -i times the principal log.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm, logm

from src.core.errors import BudgetExceeded, DimensionError
from src.core.gates import I2, Z, kron
from src.gaussian.modes import ModeNetwork, ModeUnitary, embed_block, slot_matrix, slot_sequence

logger = logging.getLogger(__name__)

MAX_MODES = 12
BRANCH_TOL = 1e-12
NUDGE = 1e-8

_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)   # |1> -> |0>


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    n_modes: int
    nudged: bool = False

    def unitarity_residual(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))

    def number_commutator(self) -> float:
        n = fock_number_operator(self.n_modes)
        return float(np.linalg.norm(self.matrix @ n - n @ self.matrix))


def _check_modes(n: int):
    if n > MAX_MODES:
        raise BudgetExceeded(f"{n} modes: Fock dimension 2^{n} exceeds the 2^{MAX_MODES} budget")


@lru_cache(maxsize=16)
def annihilators(n: int) -> tuple:
    _check_modes(n)
    ops = []
    for a in range(n):
        factors = [Z] * a + [_LOWER] + [I2] * (n - a - 1)
        ops.append(kron(*factors))
    return tuple(ops)


def fock_number_operator(n: int) -> np.ndarray:
    return np.diag([bin(k).count("1") for k in range(2 ** n)]).astype(complex)


def quadratic_hamiltonian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    c = annihilators(n)
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for a in range(n):
        for b in range(n):
            if h[a, b] != 0:
                out += h[a, b] * (c[a].conj().T @ c[b])
    return out


def mode_generator(u: np.ndarray) -> tuple[np.ndarray, bool]:
    """Hermitian h with e^{ih} = u (principal branch). An eigenvalue at -1 has no principal
    log; u is then rotated by a global phase NUDGE and the flag is returned."""
    u = np.asarray(u, dtype=complex)
    nudged = False
    if u.size and np.min(np.abs(np.linalg.eigvals(u) + 1.0)) < BRANCH_TOL:
        u = u * np.exp(1j * NUDGE)
        nudged = True
        logger.warning("mode unitary has eigenvalue -1; principal log taken after a %.0e phase nudge", NUDGE)
    h = -1j * logm(u)
    return (h + h.conj().T) / 2.0, nudged


def many_body_rep(h: np.ndarray | None = None, u_mode=None) -> FockOperator:
    if (h is None) == (u_mode is None):
        raise DimensionError("pass exactly one of h or u_mode")
    nudged = False
    if h is None:
        m = u_mode.matrix if isinstance(u_mode, ModeUnitary) else u_mode
        h, nudged = mode_generator(m)
    h = np.asarray(h, dtype=complex)
    _check_modes(h.shape[0])
    return FockOperator(expm(1j * quadratic_hamiltonian(h)), h.shape[0], nudged)


def phase_residual(a: np.ndarray, b: np.ndarray) -> float:
    """min_phi ||a - e^{i phi} b||_F / ||b||_F."""
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.linalg.norm(a - phase * b) / np.linalg.norm(b))


def verify_mode_network_homomorphism(mnet: ModeNetwork) -> float:
    """Compare rho(contracted network) with the product of the blocks' rho, slot by slot."""
    n = len(mnet.in_labels)
    _check_modes(n)
    steps, _ = slot_sequence(mnet)
    total = np.eye(2 ** n, dtype=complex)
    for b, slots in steps:
        total = many_body_rep(u_mode=embed_block(b.unitary, slots, n)).matrix @ total
    whole = many_body_rep(u_mode=slot_matrix(mnet)).matrix
    return phase_residual(whole, total)
