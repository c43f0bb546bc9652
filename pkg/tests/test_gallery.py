import math

import pytest

from src.analysis.qca import wrap_pbc
from src.circuits.circuit_bridge import QuantumCircuit
from src.core.errors import DimensionError, UnitaryNetworkError
from src.core.evaluator import site_matrix
from src.core.netgraph import validate
from src.sim.gallery import (GALLERY, GalleryParams, build, build_four_layer, build_kw, build_stacked_cnot,
                             build_stacked_xy, kw_gates, stacked_cnot_gates, stacked_xy_gates)
from tests.conftest import phase_distance, unitarity_residual


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_every_entry_builds(name):
    net = build(name)
    assert net.vertices
    assert validate(net).errors == []


def test_unknown_name():
    with pytest.raises(UnitaryNetworkError, match="unknown gallery network"):
        build("möbius")


def test_param_checks():
    with pytest.raises(UnitaryNetworkError):
        GalleryParams(n_sites=1)
    with pytest.raises(UnitaryNetworkError):
        GalleryParams(d=1)
    with pytest.raises(DimensionError):
        build("kw", GalleryParams(d=3))


def test_variant_is_passed_through():
    net = build("shift", GalleryParams(n_sites=3, variant="pbc_wrapped"))
    assert any(e.wraps for e in net.edges)


class TestStaircases:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_stacked_cnot_matches_its_gate_list(self, n):
        net = build_stacked_cnot(n)
        assert net.meta["n"] == n
        want = QuantumCircuit(n, stacked_cnot_gates(n)).matrix()
        assert phase_distance(site_matrix(net), want) < 1e-10

    def test_kw_matches_its_gate_list(self):
        net = build_kw(4)
        assert net.meta["n"] == 4
        assert phase_distance(site_matrix(net), QuantumCircuit(4, kw_gates(4)).matrix()) < 1e-10

    @pytest.mark.parametrize("theta", [0.3, math.pi / 4])
    def test_stacked_xy_matches_its_gate_list(self, theta):
        net = build_stacked_xy(4, theta)
        assert net.meta["theta"] == pytest.approx(theta)
        want = QuantumCircuit(4, stacked_xy_gates(4, theta)).matrix()
        assert phase_distance(site_matrix(net), want) < 1e-10

    @pytest.mark.parametrize("builder", [lambda n: build_stacked_cnot(n, "ti_open"),
                                         lambda n: build_stacked_xy(n, 0.4, "ti_open")])
    def test_translation_invariant_variants(self, builder):
        net = builder(4)
        assert net.meta["n"] == 4
        assert net.meta["variant"] == "ti_open"
        assert validate(net).errors == []


class TestFourLayer:
    def test_leg_names_are_distinct(self):
        net = build_four_layer(3)
        for vid, t in net.vertices.items():
            names = [leg.id for leg in t.legs]
            assert len(names) == len(set(names)), vid
        assert validate(net).errors == []

    def test_wrapped_is_unitary(self):
        res = wrap_pbc(build_four_layer(3, seed=1, variant="obc"))
        assert res.residual < 1e-10
        assert res.witness is None

    def test_periodic_site_matrix_is_unitary(self):
        assert unitarity_residual(site_matrix(build_four_layer(3, seed=2))) < 1e-10

    def test_split_must_factor(self):
        with pytest.raises(DimensionError):
            build_four_layer(3, d=4, split=(2, 3))
