"""Seeded randomized sweeps. The default run covers a few seeds per family; the `slow` tests
run the full counts."""
import math

import numpy as np
import pytest

from src.analysis.flow import concatenate_crossover, gnvw_log_index, net_flow
from src.analysis.qca import haar_margolus, margolus_to_bilayer, wrap_pbc
from src.circuits.circuit_bridge import QuantumCircuit, circuit_to_un, un_to_circuit, verify_equivalence
from src.core.evaluator import site_matrix
from src.core.netgraph import NetworkBuilder
from src.core.tensor import haar_random_tensor, haar_unitary
from src.gaussian.csd import csd
from src.sim.gallery import (build_haar_bilayer, build_identity_bilayer, build_kw, build_shift, build_stacked_cnot,
                             build_stacked_xy, build_universal_padding)
from tests.conftest import unitarity_residual

MAX_DAG_DIM = 256


def _out_dims(in_dims: list[int], rng) -> list[int]:
    total = math.prod(in_dims)
    options = [list(reversed(in_dims))]
    if len(in_dims) > 1 and total <= 4:
        options.append([total])
    if in_dims == [4]:
        options.append([2, 2])
    return options[int(rng.integers(len(options)))]


def random_dag_network(seed: int):
    """Haar vertices wired as a DAG: each vertex eats one or two open wires (or a fresh input)."""
    rng = np.random.default_rng(seed)
    b = NetworkBuilder(2, name=f"random_dag_{seed}")
    pool = [(None, None, int(rng.choice([2, 3, 4]))) for _ in range(int(rng.integers(1, 4)))]
    total = math.prod(dim for _, _, dim in pool)
    n_src = n_snk = 0
    for i in range(int(rng.integers(1, 9))):
        k = min(int(rng.integers(1, 3)), len(pool))
        picked = sorted(rng.choice(len(pool), size=k, replace=False).tolist())
        wires = [pool[j] for j in picked]
        pool = [w for j, w in enumerate(pool) if j not in picked]
        if total * 2 <= MAX_DAG_DIM and rng.random() < 0.3:
            wires.append((None, None, 2))
            total *= 2
        in_dims = [dim for _, _, dim in wires]
        out_dims = _out_dims(in_dims, rng)
        vid = f"u{i}"
        in_ids = [f"i{k}" for k in range(len(in_dims))]
        out_ids = [f"o{k}" for k in range(len(out_dims))]
        b.add(vid, haar_random_tensor(in_dims, out_dims, seed * 100 + i, vid, in_ids, out_ids), i, 0)
        for leg, (src, src_leg, _) in zip(in_ids, wires):
            if src is None:
                b.source(vid, leg, n_src)
                n_src += 1
            else:
                b.connect(src, src_leg, vid, leg)
        pool += [(vid, leg, dim) for leg, dim in zip(out_ids, out_dims)]
    for vid, leg, _ in pool:
        if vid is not None:
            b.sink(vid, leg, n_snk)
            n_snk += 1
    return b.build()


def random_circuit(seed: int) -> QuantumCircuit:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    gates = []
    for _ in range(int(rng.integers(1, 7))):
        k = int(rng.integers(1, min(3, n) + 1))
        start = int(rng.integers(0, n - k + 1))
        wires = [int(w) for w in rng.permutation(np.arange(start, start + k))]
        gates.append((haar_unitary(2 ** k, rng), wires))
    return QuantumCircuit(n, gates)


def random_margolus(seed: int):
    rng = np.random.default_rng(seed)
    d = int(rng.choice([2, 3]))
    cells = 2 if d == 3 else int(rng.integers(2, 4))
    x = int(rng.choice([1, d, d * d]))
    return haar_margolus(cells, [d] * (2 * cells), [x, d * d // x] * cells, seed=seed, d=d)


_FLOW_ZERO = (lambda s: build_haar_bilayer(4, seed=s), lambda s: build_stacked_cnot(4),
              lambda s: build_kw(4), lambda s: build_identity_bilayer(4))


def random_crossover(seed: int):
    rng = np.random.default_rng(seed)
    if rng.random() < 0.25:
        left, right = build_shift(4), build_shift(4)
    else:
        i, j = rng.integers(len(_FLOW_ZERO), size=2)
        left, right = _FLOW_ZERO[int(i)](seed), _FLOW_ZERO[int(j)](seed + 1)
    junction = int(rng.integers(1, 3))
    filler = str(rng.choice(["haar", "auto"]))
    return concatenate_crossover(left, right, junction, seed=seed, filler=filler)


#  checks shared by the quick and the full runs
def check_random_dag(seed: int):
    u = site_matrix(random_dag_network(seed))
    assert u.shape[0] == u.shape[1]
    assert unitarity_residual(u) < 1e-8, seed


def check_padding(seed: int):
    d = (2, 3)[seed % 2]
    u = haar_unitary(d ** 3, np.random.default_rng(seed))
    got = site_matrix(build_universal_padding(u, 3, d))
    assert np.linalg.norm(got - u) < 1e-10, seed


def check_margolus(seed: int):
    scheme = random_margolus(seed)
    net = margolus_to_bilayer(scheme)
    nf = net_flow(net)
    assert nf.defined, seed
    assert -nf.value == gnvw_log_index(scheme.a_dims, scheme.b_dims, scheme.d), seed
    np.testing.assert_allclose(site_matrix(net), scheme.dense_matrix(), atol=1e-9)


def check_crossover(seed: int):
    joined = random_crossover(seed)
    assert unitarity_residual(site_matrix(joined, keep_bonds=True)) < 1e-8, seed


def check_circuit_round_trip(seed: int):
    circ = random_circuit(seed)
    net, rep = circuit_to_un(circ)
    assert rep.equivalence_residual < 1e-8, seed
    assert net_flow(net).value == 0
    back, _ = un_to_circuit(net)
    assert verify_equivalence(back, circ) < 1e-8, seed


def check_csd(seed: int):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 17))
    p, q = int(rng.integers(1, n)), int(rng.integers(1, n))
    u = haar_unitary(n, rng)
    f = csd(u, p, q)
    assert np.linalg.norm(f.reconstruct() - u) < 1e-10, seed
    # the Ba block carries the sines, the identity padding and zeros
    sv = np.linalg.svd(u[p:, :q], compute_uv=False)
    zeros = min(n - p, q) - len(f.s) - f.n_cross_identity
    assert zeros >= 0
    want = np.concatenate([f.s, np.ones(f.n_cross_identity), np.zeros(zeros)])
    np.testing.assert_allclose(np.sort(sv), np.sort(want), atol=1e-10)


SWEEPS = {
    "random_dag": (check_random_dag, 200),
    "padding": (check_padding, 50),
    "margolus": (check_margolus, 20),
    "crossover": (check_crossover, 20),
    "circuit_round_trip": (check_circuit_round_trip, 50),
    "csd": (check_csd, 1000),
}


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("family", sorted(SWEEPS))
def test_sweep_quick(family, seed):
    SWEEPS[family][0](seed)


@pytest.mark.slow
@pytest.mark.parametrize("family", sorted(SWEEPS))
def test_sweep_full(family):
    check, count = SWEEPS[family]
    for seed in range(count):
        check(seed)


def test_random_dag_generator_varies():
    sizes = {len(random_dag_network(s).vertices) for s in range(20)}
    assert len(sizes) > 2
    assert max(sizes) <= 8


@pytest.mark.slow
def test_xy_wrap_residual_halves_with_length():
    values = [wrap_pbc(build_stacked_xy(n, math.pi / 4, "ti_open")).relative_residual for n in (4, 6, 8, 10)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < values[0] / 4
