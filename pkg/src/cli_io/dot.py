"""Graphviz DOT export. Node and edge order follow the network's own order, so output is stable."""
from __future__ import annotations

import logging
from pathlib import Path

from src.core.netgraph import UnitaryNetwork, graph

logger = logging.getLogger(__name__)


def _q(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:g}"


def export_dot(net: UnitaryNetwork, path=None) -> str:
    g = graph(net)
    lines = [f"digraph {_q(net.meta.get('name', 'network'))} {{"]
    for node, attrs in g.nodes(data=True):
        if attrs["kind"] == "vertex":
            pos = _q(_num(attrs["x"]) + "," + str(attrs["layer"]))
            lines.append(f"  {_q(node)} [shape=box, pos={pos}];")
        else:
            site = "" if attrs["site"] is None else f" site={attrs['site']}"
            lines.append(f"  {_q(node)} [shape=plaintext, label={_q(node + site)}];")
    for u, v, _, attrs in g.edges(keys=True, data=True):
        label = f"dim={attrs['dim']} len={_num(attrs['length'])}"
        if attrs["wraps"]:
            label += f" wraps={attrs['wraps']:+d}"
        lines.append(f"  {_q(u)} -> {_q(v)} [label={_q(label)}];")
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
        logger.info("wrote %s (%d nodes, %d edges)", path, g.number_of_nodes(), g.number_of_edges())
    return text
