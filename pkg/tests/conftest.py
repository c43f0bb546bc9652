import numpy as np
import pytest

from src.sim.gallery import build_identity_bilayer, build_shift, build_stacked_cnot


def phase_distance(a, b):
    """min_phi ||a - e^{i phi} b||_F / ||b||_F"""
    a, b = np.asarray(a), np.asarray(b)
    ov = np.vdot(b, a)
    ph = ov / abs(ov) if abs(ov) > 1e-300 else 1.0
    return float(np.linalg.norm(a - ph * b) / np.linalg.norm(b))


def unitarity_residual(m):
    m = np.asarray(m)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[1])))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def shift4():
    return build_shift(4, "obc_bilayer")


@pytest.fixture
def identity3():
    return build_identity_bilayer(3)


@pytest.fixture
def stc8():
    return build_stacked_cnot(8, "forward")
