import json

import pytest

from src.cli_io.cli import main


def _build(tmp_path, name, *extra):
    p = tmp_path / f"{name}.json"
    assert main(["gallery", "build", name, "--output", str(p), *extra]) == 0
    return p


def _report(path):
    return json.loads(path.read_text())


def test_flow_of_the_shift(tmp_path):
    net = _build(tmp_path, "shift", "--n", "4")
    out = tmp_path / "flow.json"
    assert main(["flow", "--input", str(net), "--output", str(out)]) == 0
    doc = _report(out)
    assert doc["kind"] == "flow"
    assert doc["payload"]["net_flow"]["exact"] == "1"
    assert doc["provenance"]["command"].startswith("flow --input")


def test_validate_reports_loops_with_exit_zero(tmp_path, capsys):
    net = _build(tmp_path, "abc_example")
    assert main(["validate", "--input", str(net)]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["payload"]["dag"] is False
    assert "directed loop" in captured.err


def test_eval_and_cost(tmp_path):
    net = _build(tmp_path, "shift", "--n", "3")
    out = tmp_path / "eval.json"
    main(["eval", "--input", str(net), "--output", str(out), "--strategy", "topological"])
    payload = _report(out)["payload"]
    assert payload["shape"] == [8, 8]
    assert payload["keep_bonds"] is False
    main(["eval", "--input", str(net), "--output", str(out), "--keep-bonds"])
    payload = _report(out)["payload"]
    assert payload["shape"] == [16, 16]
    assert payload["unitarity_residual"] < 1e-9
    main(["cost", "--input", str(net), "--output", str(out)])
    assert _report(out)["payload"]["unit"] == "qudits"


def test_csd_reports_are_deterministic(capsys):
    argv = ["csd-decompose", "--modes-per-site", "2,2,2,2", "--seed", "3", "--epsilon", "0"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
    payload = json.loads(first)["payload"]
    assert payload["cut_ranks"] == [2, 4, 2]
    assert [c["n_bond_modes"] for c in payload["cuts"]] == [2, 4, 2]
    assert payload["reconstruction_residual"] < 1e-9


def test_convert_both_ways(tmp_path):
    net = _build(tmp_path, "kw", "--n", "4")
    circ = tmp_path / "circ.json"
    back = tmp_path / "back.json"
    rep = tmp_path / "rep.json"
    main(["convert", "un-to-circuit", "--input", str(net), "--target", str(circ), "--output", str(rep)])
    assert _report(rep)["payload"]["equivalence_residual"] < 1e-9
    main(["convert", "circuit-to-un", "--input", str(circ), "--target", str(back), "--output", str(rep)])
    assert back.exists()
    main(["locality", "--circuit", str(circ), "--max-r", "4", "--output", str(rep)])
    assert _report(rep)["kind"] == "locality"


def test_mps_and_tails(tmp_path):
    net = _build(tmp_path, "identity_bilayer", "--n", "3")
    rep = tmp_path / "rep.json"
    main(["mps", "--input", str(net), "--states", "010", "--output", str(rep)])
    assert _report(rep)["payload"]["bond_dims"] == [1, 1]
    csv = tmp_path / "tails.csv"
    main(["tails", "--input", str(net), "--site", "1", "--radii", "0..1", "--csv", str(csv), "--output", str(rep)])
    assert csv.read_text().splitlines()[0] == "r,f,spectral,fit,fit_residual"


def test_tails_reports_predicted_length(tmp_path):
    net = _build(tmp_path, "stacked_xy", "--n", "6", "--theta", "0.5236")
    rep = tmp_path / "tails.json"
    assert main(["tails", "--input", str(net), "--site", "3", "--radii", "1..2", "--theta", "0.5236",
                 "--output", str(rep)]) == 0
    payload = _report(rep)["payload"]
    assert payload["xi_formula"] == pytest.approx(2.419, rel=1e-3)


def test_wrap_and_dot(tmp_path):
    net = _build(tmp_path, "shift", "--n", "4")
    rep = tmp_path / "wrap.json"
    wrapped = tmp_path / "wrapped.json"
    main(["wrap-pbc", "--input", str(net), "--network-output", str(wrapped), "--output", str(rep)])
    assert _report(rep)["payload"]["unitary"] is True
    dot = tmp_path / "shift.dot"
    assert main(["dot", "--input", str(wrapped), "--output", str(dot)]) == 0
    assert "wraps=" in dot.read_text()


def test_gallery_list(capsys):
    main(["gallery", "list"])
    assert "shift" in capsys.readouterr().out.split()


def test_domain_error_exits_with_message(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["flow", "--input", str(tmp_path / "missing.json")])
    assert str(info.value.code).startswith("[ERR]")


def test_unknown_version_is_a_usage_error(tmp_path):
    net = _build(tmp_path, "shift")
    doc = json.loads(net.read_text())
    doc["format_version"] = "9"
    net.write_text(json.dumps(doc))
    with pytest.raises(SystemExit) as info:
        main(["validate", "--input", str(net)])
    assert info.value.code == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        main(["gallery", "build", "nosuch"])
    assert info.value.code == 2


@pytest.mark.parametrize("argv", [
    ["csd-decompose", "--modes-per-site", "2,x"],
    ["csd-decompose", "--modes-per-site", ""],
    ["mps", "--input", "net.json", "--states", "01a1"],
    ["tails", "--input", "net.json", "--site", "1", "--radii", "1..z"],
])
def test_malformed_lists_are_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
    assert "usage:" in capsys.readouterr().err
