import numpy as np
import pytest

from src.analysis.flow import net_flow
from src.circuits.circuit_bridge import QuantumCircuit, circuit_to_un, un_to_circuit, verify_equivalence
from src.core.errors import ConversionError, CycleError, DimensionError, NotUnitaryError
from src.core.evaluator import site_matrix
from src.core.gates import CNOT, H, SWAP, X, xy_gate
from src.core.netgraph import validate
from src.core.tensor import haar_unitary
from src.sim.gallery import (build_abc_example, build_haar_bilayer, build_kw, build_shift, build_stacked_cnot,
                             kw_gates)


@pytest.fixture
def small_circuit():
    rng = np.random.default_rng(8)
    return QuantumCircuit(3, [(CNOT, [0, 1]), (haar_unitary(4, rng), [2, 1]), (H, [0]), (xy_gate(0.3), [1, 2])])


class TestQuantumCircuit:
    def test_validation(self):
        with pytest.raises(ConversionError):
            QuantumCircuit(2, [(CNOT, [0, 2])])
        with pytest.raises(ConversionError):
            QuantumCircuit(2, [(CNOT, [1, 1])])
        with pytest.raises(DimensionError):
            QuantumCircuit(2, [(CNOT, [0])])
        with pytest.raises(NotUnitaryError):
            QuantumCircuit(1, [(2 * X, [0])])

    def test_matrix_respects_wire_order(self):
        c = QuantumCircuit(2, [(CNOT, [1, 0])])
        np.testing.assert_allclose(c.matrix(), SWAP @ CNOT @ SWAP)

    def test_depth(self, small_circuit):
        assert small_circuit.depth() == 3
        assert QuantumCircuit(3, [(H, [0]), (H, [1]), (H, [2])]).depth() == 1

    def test_json_round_trip(self, small_circuit):
        back = QuantumCircuit.from_json(small_circuit.to_json())
        assert back.n_wires == 3
        np.testing.assert_array_equal(back.matrix(), small_circuit.matrix())


class TestCircuitToNetwork:
    def test_equivalence(self, small_circuit):
        net, rep = circuit_to_un(small_circuit)
        assert validate(net).ok
        assert rep.equivalence_residual < 1e-12
        assert rep.gate_count == 4
        assert rep.max_bond_dim <= 4

    def test_converted_network_carries_no_flow(self, small_circuit):
        net, _ = circuit_to_un(small_circuit)
        assert net_flow(net).value == 0

    def test_idle_wires_get_identity(self):
        net, rep = circuit_to_un(QuantumCircuit(3, [(H, [1])]))
        assert {"w0", "w2"} <= set(net.vertices)
        assert rep.equivalence_residual < 1e-12

    def test_non_contiguous_gate(self):
        with pytest.raises(ConversionError):
            circuit_to_un(QuantumCircuit(3, [(CNOT, [0, 2])]))

    def test_kw_gate_list(self):
        net, _ = circuit_to_un(QuantumCircuit(5, kw_gates(5)))
        assert verify_equivalence(net, build_kw(5)) < 1e-12

    def test_staircase_compresses_to_four_layers(self):
        circ = QuantumCircuit(4, [(CNOT, [0, 1]), (CNOT, [1, 2]), (CNOT, [2, 3])])
        net, rep = circuit_to_un(circ)
        assert rep.layers == 4
        assert max(layer for _, layer in net.coords.values()) == 3
        assert rep.equivalence_residual < 1e-12
        assert validate(net).dag

    def test_wide_gate_staircase(self):
        rng = np.random.default_rng(12)
        gates = [(haar_unitary(4, rng), [0, 1]), (haar_unitary(8, rng), [1, 2, 3]), (haar_unitary(8, rng), [2, 3, 4])]
        net, rep = circuit_to_un(QuantumCircuit(5, gates))
        assert rep.layers == 4
        assert rep.max_bond_dim <= 2 ** (2 * 3 * 2)
        assert rep.equivalence_residual < 1e-10

    def test_layers_count_gates_per_site(self):
        _, rep = circuit_to_un(QuantumCircuit(3, [(H, [0]), (H, [0]), (H, [0]), (CNOT, [1, 2])]))
        assert rep.layers == 6

    def test_wire_site_map_places_wires(self):
        circ = QuantumCircuit(2, [(CNOT, [0, 1])], wire_site_map={0: 1, 1: 0})
        net, rep = circuit_to_un(circ)
        assert sorted(p.site for p in net.sources) == [0, 1]
        np.testing.assert_allclose(site_matrix(net), SWAP @ CNOT @ SWAP, atol=1e-12)
        assert rep.equivalence_residual < 1e-12

    def test_shared_sites_are_rejected(self):
        with pytest.raises(ConversionError):
            circuit_to_un(QuantumCircuit(2, [(CNOT, [0, 1])], wire_site_map={0: 0, 1: 0}))

    def test_gates_must_be_contiguous_in_sites(self):
        with pytest.raises(ConversionError):
            circuit_to_un(QuantumCircuit(2, [(CNOT, [0, 1])], wire_site_map={0: 0, 1: 2}))


class TestNetworkToCircuit:
    @pytest.mark.parametrize("builder", [lambda: build_stacked_cnot(5), lambda: build_kw(4),
                                         lambda: build_haar_bilayer(3, seed=1), lambda: build_shift(3)])
    def test_equivalence(self, builder):
        circ, rep = un_to_circuit(builder())
        assert rep.equivalence_residual < 1e-10
        assert rep.gate_count == len(circ.gates)

    def test_round_trip(self):
        net = build_haar_bilayer(3, seed=6)
        circ, _ = un_to_circuit(net)
        back, rep = circuit_to_un(circ)
        assert rep.equivalence_residual < 1e-12
        assert verify_equivalence(site_matrix(back), site_matrix(net)) < 1e-10

    def test_loop_is_rejected(self):
        with pytest.raises(CycleError) as err:
            un_to_circuit(build_abc_example())
        assert err.value.cycle

    def test_periodic_is_rejected(self):
        with pytest.raises(ConversionError):
            un_to_circuit(build_shift(4, "pbc_wrapped"))


def test_verify_equivalence_ignores_global_phase():
    u = haar_unitary(4, np.random.default_rng(0))
    assert verify_equivalence(np.exp(0.7j) * u, u) < 1e-14
    assert verify_equivalence(u, np.eye(4)) > 0.1
    with pytest.raises(DimensionError):
        verify_equivalence(u, np.eye(2))
