import math
from fractions import Fraction

import pytest

from src.analysis.flow import (concatenate_crossover, conservation_check, cost_total, cut_crossings, flow_report,
                               gnvw_log_index, interior_cuts, log_dim, log_ratio, net_flow, net_flow_cut,
                               partition_flow)
from src.core.errors import InfeasibleConcatenation
from src.core.netgraph import validate
from src.sim.gallery import (build_identity_bilayer, build_kw, build_nonuniform_impurity, build_redundant_identity,
                             build_shift, build_stacked_cnot)


class TestLogs:
    def test_exact_powers(self):
        assert log_dim(8, 2) == Fraction(3)
        assert log_dim(8, 4) == Fraction(3, 2)
        assert log_dim(1, 5) == 0
        assert isinstance(log_dim(1, 5), Fraction)

    def test_irrational_falls_back_to_float(self):
        v = log_dim(3, 2)
        assert isinstance(v, float)
        assert v == pytest.approx(math.log2(3))

    def test_ratio(self):
        assert log_ratio(2, 8, 2) == Fraction(-2)
        with pytest.raises(ValueError):
            log_dim(0, 2)

    def test_gnvw_index(self):
        assert gnvw_log_index([2, 2], [4, 1], 2) == Fraction(1)
        assert gnvw_log_index([4, 1], [4, 1], 2) == 0


class TestNetFlow:
    @pytest.mark.parametrize("variant", ["obc_bilayer", "pbc_wrapped", "swap_staircase_sqc"])
    def test_shift(self, variant):
        nf = net_flow(build_shift(5, variant))
        assert nf.defined
        expected = 0 if variant == "swap_staircase_sqc" else 1
        assert nf.value == expected
        assert isinstance(nf.value, Fraction)

    @pytest.mark.parametrize("builder", [lambda: build_identity_bilayer(4), lambda: build_stacked_cnot(5),
                                         lambda: build_stacked_cnot(5, "reversed"), lambda: build_kw(5)])
    def test_zero_flow(self, builder):
        nf = net_flow(builder())
        assert nf.defined and nf.value == 0

    @pytest.mark.parametrize("d,red_dim", [(2, 2), (3, 3), (2, 4)])
    def test_redundant_identity(self, d, red_dim):
        nf = net_flow(build_redundant_identity(4, red_dim, d))
        assert nf.value == log_dim(red_dim, d)

    def test_non_uniform_is_undefined(self):
        nf = net_flow(build_nonuniform_impurity())
        assert not nf.defined
        assert nf.value is None
        assert nf.witness is not None
        assert "non-uniform" in nf.reason
        out = nf.to_dict()
        assert out["defined"] is False and out["value"] is None

    def test_explicit_positions(self, shift4):
        nf = net_flow(shift4, positions=[1.5])
        assert list(nf.cuts) == [1.5]
        assert net_flow(build_identity_bilayer(2), positions=[]).defined is False

    def test_interior_cuts(self, shift4):
        assert interior_cuts(shift4) == [0.5, 1.5, 2.5]

    def test_cut_crossings_direction(self, shift4):
        cut = cut_crossings(shift4, 1.5)
        assert [k for k, _ in cut.rightward] == ["b1.r->b2.l"]
        assert cut.leftward == []
        assert net_flow_cut(shift4, 1.5) == 1

    def test_wrap_edge_crosses_outside_cuts(self):
        ring = build_shift(4, "pbc_wrapped")
        cut = cut_crossings(ring, 3.5)
        assert [k for k, _ in cut.rightward] == ["b3.r->b0.l"]


def test_conservation_holds_for_unitary_vertices(stc8):
    assert set(conservation_check(stc8).values()) == {0}
    assert set(conservation_check(build_nonuniform_impurity()).values()) == {0}


def test_partition_flow_of_unitary_region_is_zero(shift4):
    assert partition_flow(shift4, ["b0", "b1", "t0", "t1"]) == 0
    assert partition_flow(shift4, ["b1"]) == 0


def test_cost(shift4):
    rep = cost_total(shift4)
    assert rep.total == pytest.approx(3.0)
    assert rep.unit == "qudits"
    assert rep.per_edge["b0.v->t0.v"] == 0.0
    assert cost_total(build_redundant_identity(3, 4, 2)).total == pytest.approx(4.0)


def test_flow_report(shift4):
    out = flow_report(shift4).to_dict()
    assert out["net_flow"]["exact"] == "1"
    assert out["edge_flows"]["b0.r->b1.l"] == 1
    assert set(out["vertex_residuals"].values()) == {0}
    assert out["base_d"] == 2


class TestConcatenation:
    def test_same_flow_is_feasible(self):
        joined = concatenate_crossover(build_shift(4), build_shift(4), 2)
        assert validate(joined).ok
        nf = net_flow(joined)
        assert nf.defined and nf.value == 1
        assert "mid_b" in joined.vertices and "mid_t" in joined.vertices

    def test_haar_filler_keeps_unitarity(self):
        joined = concatenate_crossover(build_stacked_cnot(4), build_kw(4), 2, seed=3, filler="haar")
        assert validate(joined).ok
        assert net_flow(joined).value == 0

    def test_different_flows_are_rejected(self):
        with pytest.raises(InfeasibleConcatenation, match="net flows differ"):
            concatenate_crossover(build_shift(4), build_identity_bilayer(4), 2)

    def test_periodic_input_rejected(self):
        with pytest.raises(InfeasibleConcatenation):
            concatenate_crossover(build_shift(4, "pbc_wrapped"), build_shift(4, "pbc_wrapped"), 2)
