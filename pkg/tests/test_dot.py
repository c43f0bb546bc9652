from src.cli_io.dot import export_dot
from src.sim.gallery import build_shift


def test_dot_lists_vertices_ports_and_edges(shift4, tmp_path):
    p = tmp_path / "shift.dot"
    text = export_dot(shift4, p)
    assert p.read_text() == text
    assert text.startswith("digraph ")
    assert text.rstrip().endswith("}")
    for vid in shift4.vertices:
        assert f'"{vid}" [shape=box' in text
    assert text.count(" -> ") == len(shift4.edges) + len(shift4.sources) + len(shift4.sinks)
    assert "dim=2" in text


def test_wrapping_edges_are_labelled():
    text = export_dot(build_shift(3, "pbc_wrapped"))
    assert "wraps=" in text


def test_output_is_stable(shift4):
    assert export_dot(shift4) == export_dot(shift4)
