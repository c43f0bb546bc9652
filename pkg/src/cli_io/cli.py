"""
Command-line entry point.

Usage
-----
    python -m src.cli_io.cli gallery build shift --n 4 --output shift.json
    python -m src.cli_io.cli flow --input shift.json          # net_flow 1
    python -m src.cli_io.cli validate --input loop.json       # exit 0, dag=false in the report
    python -m src.cli_io.cli csd-decompose --modes-per-site 2,2,2,2 --seed 3 --epsilon 0

Reports are JSON on stdout (or --output); status lines go to stderr.
Exit codes: 0 success, 1 domain error, 2 usage error or unknown document version.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from src.analysis.flow import cost_total, flow_report
from src.analysis.qca import alpu_tails, locality_radius, wrap_pbc, xy_decay_length
from src.circuits.circuit_bridge import circuit_to_un, un_to_circuit
from src.cli_io.documents import (decode_complex, dumps_network, dumps_report, encode_complex, load_circuit,
                                  load_json, load_network, make_report, save_json, save_network)
from src.cli_io.dot import export_dot
from src.core.errors import UnitaryNetworkError, VersionError
from src.core.evaluator import STRATEGIES, apply_to_product_state, site_matrix
from src.core.netgraph import validate
from src.core.tensor import TOL
from src.gaussian.decompose import EPSILON, cut_rank, decompose_gaussian, reconstruction_residual
from src.gaussian.modes import ModeUnitary, default_labels, haar_mode_unitary
from src.sim.gallery import GALLERY, GalleryParams, build

logger = logging.getLogger(__name__)

MAX_PRINTED_DIM = 64


def _status(msg: str):
    print(msg, file=sys.stderr)


def _ints(text: str) -> list[int]:
    """'2,2,2' -> [2, 2, 2]; argparse turns the error into a usage message."""
    try:
        out = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def _radii(text: str) -> list[int]:
    """'1..8' or '1,2,4'."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad radius range {text!r}") from None
    return _ints(text)


def _states(text: str) -> list[int]:
    """'0101' or '0,1,0,1'."""
    digits = text.replace(",", "").replace(" ", "")
    if not digits.isdigit():
        raise argparse.ArgumentTypeError(f"states must be basis-state digits, got {text!r}")
    return [int(c) for c in digits]


#  Subcommands: each returns (report kind, payload)
def cmd_validate(args):
    net, _ = load_network(args.input)
    diag = validate(net, args.tol)
    if diag.errors:
        _status(f"[WARN] {len(diag.errors)} structural problem(s): {diag.errors[0]}")
    elif not diag.dag:
        _status(f"[WARN] directed loop {diag.cycle}")
    elif diag.non_unitary:
        _status(f"[WARN] non-unitary vertices {diag.non_unitary}")
    else:
        _status("[OK] valid unitary network")
    return "validate", diag.to_dict()


def cmd_eval(args):
    """Site matrix under the OBC convention (bond sources fed |0>, bond sinks projected on <0|);
    --keep-bonds keeps bond ports with a boundary coordinate as extra sites."""
    net, _ = load_network(args.input)
    m = site_matrix(net, args.keep_bonds, args.strategy)
    payload = {"shape": list(m.shape), "strategy": args.strategy, "keep_bonds": args.keep_bonds}
    if m.shape[0] == m.shape[1]:
        payload["unitarity_residual"] = float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[1])))
    if max(m.shape) <= MAX_PRINTED_DIM:
        payload["matrix"] = encode_complex(m)
    _status(f"[OK] evaluated to a {m.shape[0]}x{m.shape[1]} matrix")
    return "eval", payload


def cmd_flow(args):
    net, _ = load_network(args.input)
    rep = flow_report(net, args.d)
    nf = rep.net_flow
    if nf.defined:
        _status(f"[OK] net_flow {nf.to_dict()['exact']}")
    else:
        _status(f"[WARN] net_flow undefined: {nf.reason}")
    return "flow", rep.to_dict()


def cmd_cost(args):
    net, _ = load_network(args.input)
    rep = cost_total(net, args.d)
    _status(f"[OK] total cost {rep.total:g} {rep.unit}")
    return "cost", rep.to_dict()


def cmd_gallery(args):
    if args.gallery_cmd == "list":
        print("\n".join(sorted(GALLERY)))
        return None
    params = GalleryParams(n_sites=args.n, d=args.d or 2, variant=args.variant, theta=args.theta,
                           seed=args.seed, red_dim=args.red_dim)
    net = build(args.name, params)
    if args.output:
        save_network(net, args.output)
        _status(f"[OK] {net.meta.get('name', args.name)} -> {args.output}")
    else:
        print(dumps_network(net))
    return None


def cmd_wrap_pbc(args):
    net, _ = load_network(args.input)
    res = wrap_pbc(net)
    if args.network_output:
        save_network(res.network, args.network_output)
    _status("[OK] wrapped network is unitary" if res.unitary else
            f"[WARN] wrapped network is not unitary (residual {res.residual:.3g})")
    return "wrap", res.to_dict()


def _target(args):
    if args.circuit:
        return load_circuit(args.circuit)
    if not args.input:
        raise UnitaryNetworkError("pass --input (network) or --circuit")
    return load_network(args.input)[0]


def cmd_locality(args):
    rep = locality_radius(_target(args), args.max_r)
    _status(f"[WARN] radius exceeds {args.max_r}" if rep.exceeded else f"[OK] radius {rep.radius}")
    return "locality", rep.to_dict()


def cmd_tails(args):
    xi_formula = xy_decay_length(args.theta) if args.theta is not None else None
    prof = alpu_tails(_target(args), args.site, args.radii, args.op, xi_formula=xi_formula)
    if args.csv:
        prof.to_csv(args.csv)
    fit = prof.fit
    _status(f"[OK] xi_fit {fit.xi:.4g} (R^2 {fit.r_squared:.3f})" if fit and math.isfinite(fit.xi)
            else "[WARN] no exponential fit")
    if prof.xi_ratio is not None:
        _status(f"[OK] xi_formula {prof.xi_formula:.4g}, ratio {prof.xi_ratio:.3f}")
    return "tails", prof.to_json()


def cmd_convert(args):
    if args.direction == "un-to-circuit":
        net, _ = load_network(args.input)
        circ, rep = un_to_circuit(net)
        if args.target:
            save_json(circ.to_json(), args.target)
    else:
        net, rep = circuit_to_un(load_circuit(args.input))
        if args.target:
            save_network(net, args.target)
    _status(f"[OK] {rep.gate_count} gates, equivalence residual {rep.equivalence_residual:.2e}")
    return "conversion", {"direction": args.direction, **rep.to_dict()}


def _mode_input(path, n: int) -> ModeUnitary:
    raw = load_json(path)
    m = raw.get("matrix") if isinstance(raw, dict) else None
    if m is None:
        raise UnitaryNetworkError(f"{path}: expected an object with a 'matrix' of [re, im] pairs")
    m = decode_complex(m, (n, n), "/matrix")
    ins, outs = default_labels(n)
    return ModeUnitary(m, raw.get("in_labels", ins), raw.get("out_labels", outs))


def cmd_csd(args):
    sizes = args.modes_per_site
    n = sum(sizes)
    u = _mode_input(args.input, n) if args.input else haar_mode_unitary(n, args.seed)
    eps = EPSILON if args.epsilon is None else args.epsilon
    mnet = decompose_gaussian(u, sizes, eps)
    if args.target:
        save_json(mnet.to_json(), args.target)
    edges = np.cumsum(sizes)[:-1]
    payload = {
        "modes_per_site": sizes,
        "epsilon": eps,
        "cuts": [c.to_dict() for c in mnet.cuts],
        "cut_ranks": [cut_rank(u, int(k)) for k in edges],
        "cost": mnet.cost.to_dict(),
        "reconstruction_residual": reconstruction_residual(mnet, u),
    }
    _status(f"[OK] bond modes per cut {[c.n_bond_modes for c in mnet.cuts]}")
    return "csd", payload


def cmd_mps(args):
    net, _ = load_network(args.input)
    res = apply_to_product_state(net, args.states, args.strategy)
    _status(f"[OK] bond dims {res.bond_dims}")
    return "mps", {"bond_dims": res.bond_dims, "entropies": res.entropies,
                   "network_bond_dims": res.network_bond_dims, "site_dims": res.site_dims,
                   "norm": res.norm}


def cmd_dot(args):
    net, _ = load_network(args.input)
    text = export_dot(net, args.output)
    if not args.output:
        print(text, end="")
    return None


#  Parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("--d", type=int, default=None, help="local dimension / flow base")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=TOL, help="local unitarity tolerance")
    common.add_argument("--strategy", choices=STRATEGIES, default="greedy")

    ap = argparse.ArgumentParser(prog="unet", description="Unitary network toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_, needs_input=True, output=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        if needs_input:
            p.add_argument("--input", required=True)
        if output:
            p.add_argument("--output", default=None, help="report path (default stdout)")
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate, "structural and unitarity diagnostics")
    p = add("eval", cmd_eval, "contract to the site matrix")
    p.add_argument("--keep-bonds", action="store_true", dest="keep_bonds", help="keep boundary bond ports as sites")
    add("flow", cmd_flow, "edge flows, cut flows and net flow")
    add("cost", cmd_cost, "information-flow cost")
    add("dot", cmd_dot, "Graphviz export (--output is the .dot path)")

    g = sub.add_parser("gallery", help="reference networks")
    gsub = g.add_subparsers(dest="gallery_cmd", required=True)
    gsub.add_parser("list").set_defaults(fn=cmd_gallery)
    gb = gsub.add_parser("build", parents=[common])
    gb.add_argument("name", choices=sorted(GALLERY))
    gb.add_argument("--n", type=int, default=4)
    gb.add_argument("--variant", default=None)
    gb.add_argument("--theta", type=float, default=0.0)
    gb.add_argument("--red-dim", type=int, default=None, dest="red_dim")
    gb.add_argument("--output", default=None, help="network path (default stdout)")
    gb.set_defaults(fn=cmd_gallery)

    p = add("wrap-pbc", cmd_wrap_pbc, "close the horizontal legs and test unitarity")
    p.add_argument("--network-output", default=None, dest="network_output")

    for name, fn, help_ in (("locality", cmd_locality, "locality radius"),
                            ("tails", cmd_tails, "ALPU tail profile")):
        p = add(name, fn, help_, needs_input=False)
        p.add_argument("--input", default=None, help="network document")
        p.add_argument("--circuit", default=None, help="circuit document (Pauli propagation)")
        if name == "locality":
            p.add_argument("--max-r", type=int, default=4, dest="max_r")
        else:
            p.add_argument("--site", type=int, required=True)
            p.add_argument("--radii", type=_radii, default=[1, 2, 3, 4], help="'1..4' or '1,2,4'")
            p.add_argument("--op", default="X", choices=list("XYZ"))
            p.add_argument("--csv", default=None)
            p.add_argument("--theta", type=float, default=None, help="XY angle for the predicted decay length")

    p = add("convert", cmd_convert, "network <-> sequential circuit")
    p.add_argument("direction", choices=["un-to-circuit", "circuit-to-un"])
    p.add_argument("--target", default=None, help="converted artifact path")

    p = add("csd-decompose", cmd_csd, "Gaussian mode-unitary sweep", needs_input=False)
    p.add_argument("--input", default=None, help="JSON with a 'matrix' (default: seeded Haar)")
    p.add_argument("--modes-per-site", type=_ints, required=True, dest="modes_per_site")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--target", default=None, help="mode network JSON path")

    p = add("mps", cmd_mps, "apply to a product state and report MPS bonds")
    p.add_argument("--states", type=_states, required=True, help="local basis states, e.g. 0101")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO)
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        out = args.fn(args)
    except VersionError as exc:
        ap.error(str(exc))
    except UnitaryNetworkError as exc:
        raise SystemExit(f"[ERR] {exc}")
    except OSError as exc:
        raise SystemExit(f"[ERR] {exc}")
    if out is None:
        return 0
    kind, payload = out
    text = dumps_report(make_report(kind, payload, " ".join(argv), getattr(args, "seed", None)))
    dest = getattr(args, "output", None)
    if dest:
        Path(dest).write_text(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
