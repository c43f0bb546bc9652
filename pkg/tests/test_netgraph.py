import math

import numpy as np
import pytest

from src.core.errors import DimensionError, LegError, UnknownVertexError
from src.core.netgraph import (BOND, NetworkBuilder, bound_leg, canonical_form_check, causal_cone, close_horizontal,
                               contract_vertices, extract_subnetwork, graph, merge_parallel_edges,
                               network_distance, topological_sort, validate)
from src.core.tensor import GeneralTensor, LegSpec, haar_random_tensor, identity_tensor
from src.sim.gallery import (build_abc_example, build_canonical_figure, build_dag_circuit, build_four_layer,
                             build_self_trace, build_shift, build_single_layer_ring)


def _pair_with_parallel_edges():
    b = NetworkBuilder(2, name="parallel")
    b.add("s", identity_tensor([("p", 2), ("q", 2)], [("r1", 2), ("r2", 2)], "s"), 0, 0)
    b.add("t", identity_tensor([("l1", 2), ("l2", 2)], [("p", 2), ("q", 2)], "t"), 1, 0)
    b.connect("s", "r1", "t", "l1").connect("s", "r2", "t", "l2")
    b.source("s", "p", 0).source("s", "q", 1)
    b.sink("t", "p", 0).sink("t", "q", 1)
    return b.build()


def test_builder_rejects_unknown_references():
    b = NetworkBuilder(2)
    b.add("a", identity_tensor([("i", 2)], [("o", 2)], "a"))
    with pytest.raises(UnknownVertexError):
        b.connect("a", "o", "zz", "i")
    with pytest.raises(LegError):
        b.source("a", "nope")


def test_validate_reports_structural_problems_without_raising():
    b = NetworkBuilder(2)
    b.add("a", identity_tensor([("i", 2)], [("o", 2)], "a"))
    b.add("c", identity_tensor([("i", 3)], [("o", 3)], "c"))
    b.connect("a", "o", "c", "i")
    b.source("a", "i", 0)
    diag = validate(b.build())
    assert not diag.ok
    assert any("dim mismatch" in e for e in diag.errors)
    assert any("c.o" in e and "not bound" in e for e in diag.errors)


def test_validate_flags_non_unitary_vertex():
    b = NetworkBuilder(2)
    b.add("g", GeneralTensor([LegSpec("i", 2, "in"), LegSpec("o", 2, "out")], 2 * np.eye(2)))
    b.source("g", "i", 0).sink("g", "o", 0)
    diag = validate(b.build())
    assert diag.non_unitary == ["g"]
    assert diag.residuals["g"] > 1
    assert diag.to_dict()["ok"] is False


@pytest.mark.parametrize("builder", [build_abc_example, lambda: build_self_trace(2, 3)])
def test_loops_are_diagnosed_not_raised(builder):
    net = builder()
    diag = validate(net)
    assert diag.dag is False
    assert diag.cycle
    assert topological_sort(net).order is None


def test_gallery_networks_are_valid(shift4, stc8):
    for net in (shift4, stc8, build_dag_circuit(), build_canonical_figure()):
        diag = validate(net)
        assert diag.errors == []
        assert diag.non_unitary == []
        assert diag.dag


def test_dag_circuit_order():
    assert topological_sort(build_dag_circuit()).order == ["A", "B", "C"]


def test_wrapped_four_layer_has_no_loop():
    net = build_four_layer(3)
    assert net.periodic
    assert validate(net).dag


def test_single_layer_ring_has_loop():
    assert not validate(build_single_layer_ring(3)).dag


def test_graph_has_port_nodes(shift4):
    g = graph(shift4)
    assert "in[0]" in g and "out[0]" in g
    assert g.nodes["in[0]"]["kind"] == "source"
    assert g.number_of_edges() == len(shift4.edges) + len(shift4.sources) + len(shift4.sinks)


def test_canonical_form_check():
    net = build_canonical_figure()
    assert canonical_form_check(net, ["B1", "B2"]).ok
    bad = canonical_form_check(net, ["A1", "A2"])
    assert not bad.ok
    assert bad.witness == "B1"


def test_extract_subnetwork_promotes_cut_edges(shift4):
    sub = extract_subnetwork(shift4, ["b1", "t1"])
    assert set(sub.parent_vertices) == {"b1", "t1"}
    assert len(sub.internal_edges) == 1
    promoted_kinds = {p.kind for p in sub.promoted}
    assert promoted_kinds == {BOND}
    # b0.r -> b1.l enters, b1.r -> b2.l leaves
    assert len(sub.promoted) == 2
    with pytest.raises(UnknownVertexError):
        extract_subnetwork(shift4, ["nope"])


def test_causal_cone_base(shift4):
    cone = causal_cone(shift4, "b1")
    assert cone.base == frozenset({1, 2, 3})
    assert causal_cone(shift4, "t0").base == frozenset({0})


def test_network_distance(shift4):
    assert network_distance(shift4, "b0", "b3") == pytest.approx(3.0)
    assert network_distance(shift4, "b0", "t0") == pytest.approx(0.0)
    assert math.isinf(network_distance(shift4, "t3", "b0"))


def test_contract_vertices_keeps_evaluation(shift4):
    from src.core.evaluator import site_matrix
    merged = contract_vertices(shift4, ["b0", "t0"], "c0")
    assert "c0" in merged.vertices and "b0" not in merged.vertices
    np.testing.assert_allclose(site_matrix(merged, keep_bonds=True), site_matrix(shift4, keep_bonds=True),
                               atol=1e-12)


def test_merge_parallel_edges():
    net = _pair_with_parallel_edges()
    merged = merge_parallel_edges(net, "s", "t")
    assert len(merged.edges) == 1
    assert merged.edge_dim(merged.edges[0]) == 4
    assert validate(merged).ok


def test_close_horizontal(shift4):
    ring = close_horizontal(shift4)
    assert ring.periodic
    assert not [p for p in ring.sources if p.kind == BOND]
    wrap = [e for e in ring.edges if e.wraps]
    assert len(wrap) == 1 and wrap[0].src == "b3" and wrap[0].dst == "b0"
    assert ring.edge_length(wrap[0]) == 1.0


def test_close_horizontal_dimension_mismatch():
    b = NetworkBuilder(2)
    b.add("u", haar_random_tensor([2, 3], [3, 2], seed=0, in_ids=["l", "p"], out_ids=["r", "q"]), 0, 0)
    b.source("u", "l", -1, BOND, "h").source("u", "p", 0)
    b.sink("u", "r", 1, BOND, "h").sink("u", "q", 0)
    with pytest.raises(DimensionError):
        close_horizontal(b.build())


def test_bound_leg(shift4):
    e = bound_leg(shift4, "b0", "r")
    assert (e.src, e.dst) == ("b0", "b1")
    assert bound_leg(shift4, "b0", "p").site == 0
