import numpy as np
import pytest

from src.core.errors import DimensionError, DirectionError, LegError, NotUnitaryError
from src.core.gates import CNOT, SWAP, clock_shift_basis, embed_gate, kron, shift_matrix, swap, xy_gate, X, Z
from src.core.tensor import (GeneralTensor, LegSpec, UnitaryTensor, contract_legs, contract_pair, dagger,
                             haar_random_tensor, haar_unitary, identity_tensor, local_unitarity_residual,
                             matrix_to_tensor, merge_legs, reshape_to_matrix, split_leg, tensor_from_matrix,
                             trace_pair, unitarity_check)
from tests.conftest import unitarity_residual


def test_legspec_rejects_bad_direction_and_dim():
    with pytest.raises(DirectionError):
        LegSpec("a", 2, "sideways")
    with pytest.raises(DimensionError):
        LegSpec("a", 0, "in")
    assert LegSpec("a", 2, "incoming").direction == "in"


def test_duplicate_leg_ids_rejected():
    with pytest.raises(LegError):
        GeneralTensor([LegSpec("a", 2, "in"), LegSpec("a", 2, "out")], np.eye(2))


def test_matrix_round_trip_through_tensor():
    t = tensor_from_matrix(CNOT, [("c", 2), ("t", 2)], [("c'", 2), ("t'", 2)], "cnot")
    np.testing.assert_array_equal(reshape_to_matrix(t), CNOT)
    back = matrix_to_tensor(reshape_to_matrix(t), t.legs)
    np.testing.assert_array_equal(back.data, t.data)


def test_unitary_tensor_rejects_non_unitary_matrix():
    with pytest.raises(NotUnitaryError):
        tensor_from_matrix(2 * np.eye(2), [("i", 2)], [("o", 2)])
    with pytest.raises(DimensionError):
        UnitaryTensor([LegSpec("i", 2, "in"), LegSpec("o", 3, "out")], np.zeros((2, 3)))


def test_haar_tensor_is_unitary():
    t = haar_random_tensor([2, 3], [3, 2], seed=7)
    assert local_unitarity_residual(t) < 1e-10
    assert unitarity_check(t).structural_mismatch is False


def test_non_square_tensor_residual_is_infinite():
    t = GeneralTensor([LegSpec("i", 2, "in"), LegSpec("o", 3, "out")], np.zeros((2, 3)))
    assert local_unitarity_residual(t) == float("inf")
    assert unitarity_check(t).structural_mismatch


def test_dagger_is_conjugate_transpose():
    u = haar_unitary(4, np.random.default_rng(0))
    t = tensor_from_matrix(u, [("a", 2), ("b", 2)], [("c", 2), ("d", 2)])
    np.testing.assert_allclose(reshape_to_matrix(dagger(t)), u.conj().T)


def test_contract_pair_checks_directions():
    a = identity_tensor([("i", 2)], [("o", 2)], "a")
    b = identity_tensor([("i", 2)], [("o", 2)], "b")
    with pytest.raises(DirectionError):
        contract_pair(a, "i", b, "i")
    c = contract_legs(a, b.relabel({"i": "x", "o": "y"}), [("o", "x")])
    np.testing.assert_allclose(c.matrix(), np.eye(2))


def test_contraction_of_gates_is_matrix_product():
    g1 = tensor_from_matrix(CNOT, [("a", 2), ("b", 2)], [("a1", 2), ("b1", 2)])
    g2 = tensor_from_matrix(SWAP, [("a1", 2), ("b1", 2)], [("a2", 2), ("b2", 2)]).relabel(
        {"a1": "p", "b1": "q"})
    c = contract_legs(g1, g2, [("a1", "p"), ("b1", "q")])
    np.testing.assert_allclose(c.matrix(), SWAP @ CNOT)


def test_trace_of_routing_loop_gives_dimension_times_identity():
    t = identity_tensor([("a", 2), ("b", 3)], [("a_out", 2), ("b_out", 3)])
    traced = trace_pair(t, "b_out", "b")
    np.testing.assert_array_equal(traced.matrix(), 3 * np.eye(2))


def test_merge_then_split_restores_data():
    t = haar_random_tensor([2, 3], [6], seed=1, in_ids=["x", "y"], out_ids=["z"])
    merged = merge_legs(t, ["x", "y"], "xy")
    assert merged.leg("xy").dim == 6
    split = split_leg(merged, "xy", [2, 3], ["x", "y"])
    np.testing.assert_array_equal(split.data, t.data)
    with pytest.raises(DirectionError):
        merge_legs(t, ["x", "z"])
    with pytest.raises(DimensionError):
        split_leg(merged, "xy", [4, 2])


def test_gate_helpers():
    assert unitarity_residual(xy_gate(0.3)) < 1e-12
    np.testing.assert_array_equal(swap(2), SWAP)
    assert swap(2, 3).shape == (6, 6)
    basis = clock_shift_basis(3)
    assert len(basis) == 9
    np.testing.assert_array_equal(basis[0], np.eye(3))
    np.testing.assert_allclose(embed_gate(X, [1], 2), kron(np.eye(2), X))
    np.testing.assert_allclose(embed_gate(CNOT, [1, 0], 2), SWAP @ CNOT @ SWAP)
    # translation moves |10> to |01> on two sites
    v = np.zeros(4)
    v[2] = 1
    assert np.argmax(shift_matrix(2) @ v) == 1
    np.testing.assert_allclose(embed_gate(Z, [0], 1), Z)
