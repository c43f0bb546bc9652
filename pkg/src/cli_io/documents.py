"""
JSON documents for networks, reports, circuits and mode networks.

Tensor data is stored in declared leg order as nested arrays whose innermost
entries are [re, im] pairs. Floats go through json's shortest repr, so
save(load(save(x))) reproduces the same bytes.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src import __version__
from src.circuits.circuit_bridge import QuantumCircuit
from src.core.errors import SchemaError, UnitaryNetworkError, VersionError
from src.core.netgraph import PHYS, Diagnostics, NetworkBuilder, UnitaryNetwork, validate
from src.core.tensor import TOL, GeneralTensor, LegSpec, UnitaryTensor, local_unitarity_residual

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"


#  Schema
class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LegDoc(_Strict):
    id: str
    dim: int = Field(ge=1)
    direction: Literal["in", "out"]


class VertexDoc(_Strict):
    id: str
    legs: List[LegDoc]
    data: Any
    x: float | int = 0
    layer: int = 0
    label: str = ""
    kind: Literal["unitary", "general"] = "unitary"


class EdgeDoc(_Strict):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    from_: str = Field(alias="from")
    from_leg: str
    to: str
    to_leg: str
    length: Optional[float] = None
    wraps: int = 0


class PortDoc(_Strict):
    vertex: str
    leg: str
    site: Optional[int] = None
    kind: Literal["phys", "bond"] = PHYS
    tag: str = ""


class NetworkDocument(_Strict):
    format_version: str
    d: int = Field(ge=2)
    vertices: List[VertexDoc] = []
    edges: List[EdgeDoc] = []
    sources: List[PortDoc] = []
    sinks: List[PortDoc] = []
    meta: dict = {}


class Provenance(_Strict):
    command: str = ""
    seed: Optional[int] = None
    version: str = __version__


class ReportDocument(_Strict):
    format_version: str = FORMAT_VERSION
    kind: Literal["validate", "eval", "flow", "cost", "tails", "conversion", "csd", "locality", "wrap", "mps"]
    payload: dict
    provenance: Provenance = Provenance()


#  Helpers
def _pointer(loc) -> str:
    return "/" + "/".join(str(p) for p in loc) if loc else "/"


def _plain(v):
    """JSON-ready copy of builder metadata."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


def encode_complex(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_complex(data, shape: tuple, path: str = "/") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("data must be a nested array of [re, im] pairs", path) from None
    if arr.shape != tuple(shape) + (2,):
        raise SchemaError(f"data has shape {arr.shape[:-1]}, legs need {tuple(shape)}", path)
    out = np.empty(tuple(shape), dtype=complex)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    return out


#  Networks
def to_document(net: UnitaryNetwork) -> NetworkDocument:
    vertices = []
    for vid, t in net.vertices.items():
        x, layer = net.coords[vid]
        vertices.append(VertexDoc(
            id=vid, legs=[LegDoc(id=leg.id, dim=leg.dim, direction=leg.direction) for leg in t.legs],
            data=encode_complex(t.data), x=x, layer=layer, label=t.label,
            kind="unitary" if isinstance(t, UnitaryTensor) else "general"))
    edges = [EdgeDoc(from_=e.src, from_leg=e.src_leg, to=e.dst, to_leg=e.dst_leg, length=e.length, wraps=e.wraps)
             for e in net.edges]
    ports = lambda ps: [PortDoc(vertex=p.vertex, leg=p.leg, site=p.site, kind=p.kind, tag=p.tag) for p in ps]
    return NetworkDocument(format_version=FORMAT_VERSION, d=net.d, vertices=vertices, edges=edges,
                           sources=ports(net.sources), sinks=ports(net.sinks), meta=_plain(net.meta))


def parse_document(raw: dict) -> NetworkDocument:
    if not isinstance(raw, dict):
        raise SchemaError("network document must be a JSON object")
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION!r})",
                           "/format_version")
    try:
        return NetworkDocument.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise SchemaError(err["msg"], _pointer(err["loc"])) from None


def from_document(doc: NetworkDocument | dict) -> UnitaryNetwork:
    if isinstance(doc, dict):
        doc = parse_document(doc)
    elif doc.format_version != FORMAT_VERSION:
        raise VersionError(f"unsupported format_version {doc.format_version!r}", "/format_version")
    b = NetworkBuilder(doc.d)
    b.meta.update(doc.meta)
    for k, v in enumerate(doc.vertices):
        path = f"/vertices/{k}"
        legs = [LegSpec(leg.id, leg.dim, leg.direction) for leg in v.legs]
        data = decode_complex(v.data, tuple(leg.dim for leg in legs), f"{path}/data")
        try:
            t = GeneralTensor(legs, data, v.label)
        except UnitaryNetworkError as exc:
            raise SchemaError(str(exc), f"{path}/legs") from None
        if v.kind == "unitary":
            if local_unitarity_residual(t) <= TOL:
                t = UnitaryTensor.from_general(t)
            else:
                logger.warning("vertex %s is marked unitary but is not; loaded as a general tensor", v.id)
        try:
            b.add(v.id, t, v.x, v.layer)
        except UnitaryNetworkError as exc:
            raise SchemaError(str(exc), f"{path}/id") from None
    for what, items, attach in (("edges", doc.edges, None), ("sources", doc.sources, b.source),
                                ("sinks", doc.sinks, b.sink)):
        for k, item in enumerate(items):
            try:
                if attach is None:
                    b.connect(item.from_, item.from_leg, item.to, item.to_leg, item.length, item.wraps)
                else:
                    attach(item.vertex, item.leg, item.site, item.kind, item.tag)
            except UnitaryNetworkError as exc:
                raise SchemaError(str(exc), f"/{what}/{k}") from None
    return b.build()


def dumps_network(net: UnitaryNetwork) -> str:
    return json.dumps(to_document(net).model_dump(mode="json", by_alias=True), indent=1)


def save_network(net: UnitaryNetwork, path) -> NetworkDocument:
    doc = to_document(net)
    Path(path).write_text(dumps_network(net))
    logger.info("wrote %s (%d vertices)", path, len(doc.vertices))
    return doc


def load_network(path) -> tuple[UnitaryNetwork, Diagnostics]:
    """Loads, then runs validate(); analytic findings (loops, non-unitary vertices) are in the diagnostics."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    net = from_document(raw)
    diag = validate(net)
    if diag.non_unitary:
        logger.warning("%s: non-unitary vertices %s", path, diag.non_unitary)
    return net, diag


#  Reports and other artifacts
def make_report(kind: str, payload: dict, command: str = "", seed: int | None = None) -> ReportDocument:
    return ReportDocument(kind=kind, payload=_plain(payload), provenance=Provenance(command=command, seed=seed))


def dumps_report(report: ReportDocument) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=1, sort_keys=True)


def save_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(_plain(obj), indent=1, sort_keys=True))


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from None


def load_circuit(path) -> QuantumCircuit:
    raw = load_json(path)
    try:
        return QuantumCircuit.from_json(raw)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UnitaryNetworkError):
            raise
        raise SchemaError(f"not a circuit document ({exc})") from None
