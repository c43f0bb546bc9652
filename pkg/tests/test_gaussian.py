import logging

import numpy as np
import pytest

from src.core.errors import BudgetExceeded, DimensionError, DirectionError, LegError, NotUnitaryError, PartitionError
from src.core.tensor import haar_unitary
from src.gaussian.csd import csd, reduce_rotation
from src.gaussian.decompose import cut_rank, decompose_gaussian, reconstruction_residual
from src.gaussian.fock import (annihilators, fock_number_operator, many_body_rep, mode_generator, phase_residual,
                               quadratic_hamiltonian, verify_mode_network_homomorphism)
from src.gaussian.modes import (ModeUnitary, dsum, haar_mode_unitary, mode_direct_sum, mode_network_matrix,
                                mode_partial_contract)


class TestModeUnitary:
    def test_validation(self):
        with pytest.raises(NotUnitaryError):
            ModeUnitary(2 * np.eye(2), ["a", "b"], ["A", "B"])
        with pytest.raises(LegError):
            ModeUnitary(np.eye(2), ["a", "a"], ["A", "B"])
        with pytest.raises(DimensionError):
            ModeUnitary(np.ones((2, 3)), ["a", "b"], ["A", "B"])

    def test_direct_sum(self):
        u1 = haar_mode_unitary(2, 1, ["a", "b"], ["A", "B"])
        u2 = haar_mode_unitary(1, 2, ["c"], ["C"])
        s = mode_direct_sum(u1, u2)
        assert s.in_labels == ("a", "b", "c")
        np.testing.assert_allclose(s.matrix, dsum(u1.matrix, u2.matrix))
        with pytest.raises(LegError):
            mode_direct_sum(u1, u1)

    def test_partial_contract_is_product_on_shared_modes(self):
        u2 = haar_mode_unitary(2, 3, ["a", "b"], ["x", "y"])
        u1 = haar_mode_unitary(2, 4, ["x", "y"], ["A", "B"])
        joined = mode_partial_contract(u1, u2, ["x", "y"])
        np.testing.assert_allclose(joined.matrix, u1.matrix @ u2.matrix, atol=1e-12)
        assert joined.in_labels == ("a", "b") and joined.out_labels == ("A", "B")

    def test_partial_contract_with_spectators(self):
        u2 = haar_mode_unitary(2, 5, ["a", "b"], ["x", "c"])
        u1 = haar_mode_unitary(2, 6, ["d", "x"], ["D", "X"])
        joined = mode_partial_contract(u1, u2, ["x"])
        assert joined.in_labels == ("d", "a", "b")
        assert joined.out_labels == ("D", "X", "c")
        assert joined.n_modes == 3
        with pytest.raises(DirectionError):
            mode_partial_contract(u2, u1, ["x"])


class TestCSD:
    def test_reconstruction(self):
        u = haar_unitary(6, np.random.default_rng(2))
        f = csd(u, 2, 2)
        np.testing.assert_allclose(f.reconstruct(), u, atol=1e-10)
        np.testing.assert_allclose(f.c ** 2 + f.s ** 2, 1.0, atol=1e-12)
        assert np.all(np.diff(f.c) <= 1e-12)

    def test_block_diagonal_has_no_rotation(self):
        rng = np.random.default_rng(3)
        u = dsum(haar_unitary(2, rng), haar_unitary(2, rng))
        f = csd(u, 2, 2)
        np.testing.assert_allclose(f.c, 1.0, atol=1e-10)
        red = reduce_rotation(f)
        assert red.n_bond_modes == 0
        assert red.r_reduced.shape == (0, 0)

    def test_generic_rotation_needs_bonds(self):
        f = csd(haar_unitary(4, np.random.default_rng(4)), 2, 2)
        red = reduce_rotation(f)
        assert red.n_bond_modes == 2
        assert red.r_reduced.shape == (4, 4)

    def test_bad_partition(self):
        with pytest.raises(PartitionError):
            csd(np.eye(3), 0, 1)


class TestSweep:
    def test_bond_modes_match_cut_ranks(self):
        u = haar_mode_unitary(8, seed=3)
        mnet = decompose_gaussian(u, [2, 2, 2, 2], epsilon=0.0)
        assert [c.n_bond_modes for c in mnet.cuts] == [cut_rank(u, k) for k in (2, 4, 6)] == [2, 4, 2]
        assert reconstruction_residual(mnet, u) < 1e-9
        assert mnet.cost.total == pytest.approx(16.0)
        assert mnet.cost.unit == "modes"

    def test_local_unitary_needs_no_bonds(self):
        rng = np.random.default_rng(5)
        u = dsum(haar_unitary(2, rng), haar_unitary(3, rng), haar_unitary(1, rng))
        mnet = decompose_gaussian(u, [2, 3, 1])
        assert [c.n_bond_modes for c in mnet.cuts] == [0, 0]
        assert reconstruction_residual(mnet, u) < 1e-9

    def test_lossy_epsilon_truncates(self):
        u = haar_mode_unitary(6, seed=7)
        mnet = decompose_gaussian(u, [2, 2, 2], epsilon=1.0)
        assert all(c.n_bond_modes == 0 for c in mnet.cuts)
        assert mnet.cuts[0].truncated_weight > 0
        assert reconstruction_residual(mnet, u) > 1e-3

    def test_labels_follow_the_input(self):
        u = haar_mode_unitary(4, seed=1)
        mnet = decompose_gaussian(u, [2, 2])
        assert mnet.in_labels == list(u.in_labels)
        np.testing.assert_allclose(mode_network_matrix(mnet), u.matrix, atol=1e-9)
        doc = mnet.to_json()
        assert len(doc["blocks"]) == 3
        assert doc["cuts"][0]["n_bond_modes"] == 2

    def test_partition_must_cover_modes(self):
        with pytest.raises(PartitionError):
            decompose_gaussian(haar_mode_unitary(4), [2, 1])


class TestFock:
    def test_canonical_anticommutation(self):
        c = annihilators(3)
        for a in range(3):
            for b in range(3):
                anti = c[a] @ c[b].conj().T + c[b].conj().T @ c[a]
                np.testing.assert_allclose(anti, np.eye(8) if a == b else 0, atol=1e-12)

    def test_number_operator(self):
        h = np.eye(3)
        np.testing.assert_allclose(quadratic_hamiltonian(h), fock_number_operator(3))

    def test_single_particle_sector_is_the_mode_unitary(self):
        n = 4
        u = haar_unitary(n, np.random.default_rng(6))
        rho = many_body_rep(u_mode=u)
        assert rho.unitarity_residual() < 1e-9
        assert rho.number_commutator() < 1e-9
        idx = [2 ** (n - 1 - a) for a in range(n)]
        np.testing.assert_allclose(rho.matrix[np.ix_(idx, idx)], u, atol=1e-8)

    def test_representation_is_multiplicative(self):
        rng = np.random.default_rng(7)
        u1, u2 = haar_unitary(3, rng), haar_unitary(3, rng)
        prod = many_body_rep(u_mode=u1 @ u2).matrix
        sep = many_body_rep(u_mode=u1).matrix @ many_body_rep(u_mode=u2).matrix
        assert phase_residual(prod, sep) < 1e-8

    def test_minus_one_eigenvalue_is_nudged(self, caplog):
        with caplog.at_level(logging.WARNING):
            h, nudged = mode_generator(-np.eye(2))
        assert nudged
        np.testing.assert_allclose(h, h.conj().T)
        assert "phase nudge" in caplog.text
        assert many_body_rep(u_mode=-np.eye(2)).nudged

    def test_argument_rules(self):
        with pytest.raises(DimensionError):
            many_body_rep()
        with pytest.raises(DimensionError):
            many_body_rep(h=np.eye(2), u_mode=np.eye(2))
        with pytest.raises(BudgetExceeded):
            many_body_rep(h=np.zeros((13, 13)))

    def test_sweep_network_homomorphism(self):
        mnet = decompose_gaussian(haar_mode_unitary(6, seed=11), [2, 2, 2], epsilon=0.0)
        assert verify_mode_network_homomorphism(mnet) < 1e-7
