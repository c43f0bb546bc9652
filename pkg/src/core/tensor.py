"""
Directed tensors: legs with a dimension and a direction, dense complex data,
and the reshapes/contractions the rest of the package is built on.

Convention: merged multi-indices fuse in declared leg order, row-major. The
matrix of a tensor has rows = outgoing legs, cols = incoming legs.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from src.core.errors import DimensionError, DirectionError, LegError, NotUnitaryError

logger = logging.getLogger(__name__)

#  Knobs
TOL = float(os.getenv("UNET_TOL", "1e-9"))

IN, OUT = "in", "out"
_DIRECTIONS = {"in": IN, "out": OUT, "incoming": IN, "outgoing": OUT}


def _prod(dims: Iterable[int]) -> int:
    return int(math.prod(dims))


@dataclass(frozen=True)
class LegSpec:
    id: str
    dim: int
    direction: str

    def __post_init__(self):
        if self.direction not in _DIRECTIONS:
            raise DirectionError(f"leg {self.id!r}: direction must be 'in' or 'out', got {self.direction!r}")
        object.__setattr__(self, "direction", _DIRECTIONS[self.direction])
        if isinstance(self.dim, bool) or int(self.dim) != self.dim or self.dim < 1:
            raise DimensionError(f"leg {self.id!r}: dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def incoming(self) -> bool:
        return self.direction == IN

    def renamed(self, new_id: str) -> "LegSpec":
        return LegSpec(new_id, self.dim, self.direction)

    def flipped(self) -> "LegSpec":
        return LegSpec(self.id, self.dim, OUT if self.incoming else IN)


@dataclass(frozen=True, eq=False)
class GeneralTensor:
    """Dense tensor with directed legs; no unitarity requirement."""

    legs: tuple
    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        legs = tuple(self.legs)
        ids = [leg.id for leg in legs]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise LegError(f"tensor {self.label!r}: duplicate leg ids {dupes}")
        data = np.array(self.data, dtype=complex)
        shape = tuple(leg.dim for leg in legs)
        if data.shape != shape:
            raise DimensionError(f"tensor {self.label!r}: data shape {data.shape} does not match legs {shape}")
        data.setflags(write=False)
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "data", data)

    #  leg lookups
    @property
    def ids(self) -> list[str]:
        return [leg.id for leg in self.legs]

    @property
    def in_legs(self) -> list[LegSpec]:
        return [leg for leg in self.legs if leg.incoming]

    @property
    def out_legs(self) -> list[LegSpec]:
        return [leg for leg in self.legs if not leg.incoming]

    @property
    def in_dim(self) -> int:
        return _prod(leg.dim for leg in self.in_legs)

    @property
    def out_dim(self) -> int:
        return _prod(leg.dim for leg in self.out_legs)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def axis(self, leg_id: str) -> int:
        for k, leg in enumerate(self.legs):
            if leg.id == leg_id:
                return k
        raise LegError(f"tensor {self.label!r} has no leg {leg_id!r} (legs: {self.ids})")

    def leg(self, leg_id: str) -> LegSpec:
        return self.legs[self.axis(leg_id)]

    def matrix(self) -> np.ndarray:
        return reshape_to_matrix(self)

    def relabel(self, mapping: dict[str, str]) -> "GeneralTensor":
        legs = [leg.renamed(mapping.get(leg.id, leg.id)) for leg in self.legs]
        return type(self)(legs, self.data, self.label)

    def with_label(self, label: str) -> "GeneralTensor":
        return type(self)(self.legs, self.data, label)

    def general(self) -> "GeneralTensor":
        return GeneralTensor(self.legs, self.data, self.label)


@dataclass(frozen=True, eq=False)
class UnitaryTensor(GeneralTensor):
    """GeneralTensor whose matrix is unitary within TOL (Frobenius)."""

    def __post_init__(self):
        super().__post_init__()
        if self.in_dim != self.out_dim:
            raise DimensionError(
                f"tensor {self.label!r}: incoming dims multiply to {self.in_dim}, outgoing to {self.out_dim}")
        residual = local_unitarity_residual(self)
        if residual > TOL:
            raise NotUnitaryError(f"tensor {self.label!r}: unitarity residual {residual:.3e} exceeds {TOL:g}")

    @classmethod
    def from_general(cls, t: GeneralTensor) -> "UnitaryTensor":
        return cls(t.legs, t.data, t.label)


class UnitarityCheck(NamedTuple):
    residual: float
    structural_mismatch: bool


#  Reshapes
def reshape_to_matrix(t: GeneralTensor) -> np.ndarray:
    outs = [k for k, leg in enumerate(t.legs) if not leg.incoming]
    ins = [k for k, leg in enumerate(t.legs) if leg.incoming]
    rows = _prod(t.legs[k].dim for k in outs)
    cols = _prod(t.legs[k].dim for k in ins)
    return np.transpose(t.data, outs + ins).reshape(rows, cols)


def matrix_to_tensor(matrix, legs: Sequence[LegSpec], label: str = "", cls=GeneralTensor) -> GeneralTensor:
    legs = tuple(legs)
    outs = [k for k, leg in enumerate(legs) if not leg.incoming]
    ins = [k for k, leg in enumerate(legs) if leg.incoming]
    perm = outs + ins
    rows = _prod(legs[k].dim for k in outs)
    cols = _prod(legs[k].dim for k in ins)
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (rows, cols):
        raise DimensionError(f"matrix shape {m.shape} does not fit legs ({rows}, {cols})")
    data = m.reshape([legs[k].dim for k in perm]).transpose(np.argsort(perm))
    return cls(legs, data, label)


def tensor_from_matrix(matrix, in_legs: Sequence[tuple[str, int]], out_legs: Sequence[tuple[str, int]],
                       label: str = "", unitary: bool = True) -> GeneralTensor:
    """Declared order is incoming legs then outgoing legs."""
    legs = [LegSpec(i, d, IN) for i, d in in_legs] + [LegSpec(o, d, OUT) for o, d in out_legs]
    return matrix_to_tensor(matrix, legs, label, UnitaryTensor if unitary else GeneralTensor)


def identity_tensor(in_legs: Sequence[tuple[str, int]], out_legs: Sequence[tuple[str, int]],
                    label: str = "id") -> UnitaryTensor:
    """Routing tensor: merged incoming index equals merged outgoing index."""
    n = _prod(d for _, d in in_legs)
    return tensor_from_matrix(np.eye(n), in_legs, out_legs, label)


#  Unitarity
def local_unitarity_residual(t: GeneralTensor) -> float:
    if t.in_dim != t.out_dim:
        return math.inf
    m = reshape_to_matrix(t)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[1]), "fro"))


def unitarity_check(t: GeneralTensor) -> UnitarityCheck:
    return UnitarityCheck(local_unitarity_residual(t), t.in_dim != t.out_dim)


def dagger(t: GeneralTensor) -> GeneralTensor:
    """Conjugate transpose: every leg flips direction, data is conjugated."""
    return type(t)([leg.flipped() for leg in t.legs], t.data.conj(), f"{t.label}^dag")


#  Merge / split (fusion rules for legs sharing endpoints)
def merge_legs(t: GeneralTensor, leg_ids: Sequence[str], new_id: str | None = None) -> GeneralTensor:
    if not leg_ids:
        raise LegError("merge_legs needs at least one leg id")
    idx = [t.axis(i) for i in leg_ids]
    directions = {t.legs[k].direction for k in idx}
    if len(directions) > 1:
        raise DirectionError(f"cannot merge legs of mixed direction: {list(leg_ids)}")
    new_id = new_id or "*".join(leg_ids)
    rest = [k for k in range(len(t.legs)) if k not in idx]
    if new_id in {t.legs[k].id for k in rest}:
        raise LegError(f"merged leg id {new_id!r} collides with an existing leg")
    pos = min(idx)
    before = [k for k in rest if k < pos]
    after = [k for k in rest if k > pos]
    fused = LegSpec(new_id, _prod(t.legs[k].dim for k in idx), directions.pop())
    shape = [t.legs[k].dim for k in before] + [fused.dim] + [t.legs[k].dim for k in after]
    data = np.transpose(t.data, before + idx + after).reshape(shape)
    legs = [t.legs[k] for k in before] + [fused] + [t.legs[k] for k in after]
    return type(t)(legs, data, t.label)


def split_leg(t: GeneralTensor, leg_id: str, factor_dims: Sequence[int],
              new_ids: Sequence[str] | None = None) -> GeneralTensor:
    k = t.axis(leg_id)
    old = t.legs[k]
    factor_dims = [int(f) for f in factor_dims]
    if _prod(factor_dims) != old.dim:
        raise DimensionError(f"cannot split leg {leg_id!r} of dim {old.dim} into {factor_dims}")
    new_ids = list(new_ids) if new_ids is not None else [f"{leg_id}.{j}" for j in range(len(factor_dims))]
    if len(new_ids) != len(factor_dims):
        raise LegError("split_leg: one new id per factor required")
    parts = [LegSpec(i, f, old.direction) for i, f in zip(new_ids, factor_dims)]
    legs = list(t.legs[:k]) + parts + list(t.legs[k + 1:])
    shape = [leg.dim for leg in legs]
    return type(t)(legs, t.data.reshape(shape), t.label)


#  Contraction
def contract_legs(t1: GeneralTensor, t2: GeneralTensor, pairs: Sequence[tuple[str, str]],
                  label: str = "") -> GeneralTensor:
    """Contract each (leg of t1, leg of t2) pair; one leg of a pair must be incoming, the other outgoing.
    Remaining legs keep their ids, t1's first. An empty pair list is the outer product."""
    a_axes, b_axes = [], []
    for la, lb in pairs:
        a, b = t1.leg(la), t2.leg(lb)
        if a.direction == b.direction:
            raise DirectionError(f"cannot contract {a.direction} leg {la!r} with {b.direction} leg {lb!r}")
        if a.dim != b.dim:
            raise DimensionError(f"cannot contract leg {la!r} (dim {a.dim}) with {lb!r} (dim {b.dim})")
        a_axes.append(t1.axis(la))
        b_axes.append(t2.axis(lb))
    keep = [leg for k, leg in enumerate(t1.legs) if k not in a_axes]
    keep += [leg for k, leg in enumerate(t2.legs) if k not in b_axes]
    ids = [leg.id for leg in keep]
    clash = sorted({i for i in ids if ids.count(i) > 1})
    if clash:
        raise LegError(f"leg id collision after contraction: {clash}")
    data = np.tensordot(t1.data, t2.data, axes=(a_axes, b_axes))
    return GeneralTensor(keep, data, label or f"{t1.label}*{t2.label}")


def contract_pair(t1: GeneralTensor, out_leg: str, t2: GeneralTensor, in_leg: str) -> GeneralTensor:
    if t1.leg(out_leg).incoming:
        raise DirectionError(f"leg {out_leg!r} of {t1.label!r} is incoming; an outgoing leg is required")
    if not t2.leg(in_leg).incoming:
        raise DirectionError(f"leg {in_leg!r} of {t2.label!r} is outgoing; an incoming leg is required")
    return contract_legs(t1, t2, [(out_leg, in_leg)])


def trace_pair(t: GeneralTensor, out_leg: str, in_leg: str, label: str = "") -> GeneralTensor:
    """Self-contraction of an outgoing leg with an incoming leg of the same tensor (a loop)."""
    a, b = t.leg(out_leg), t.leg(in_leg)
    if a.incoming or not b.incoming:
        raise DirectionError(f"trace needs an outgoing and an incoming leg, got {out_leg!r}, {in_leg!r}")
    if a.dim != b.dim:
        raise DimensionError(f"cannot trace leg {out_leg!r} (dim {a.dim}) with {in_leg!r} (dim {b.dim})")
    ka, kb = t.axis(out_leg), t.axis(in_leg)
    legs = [leg for k, leg in enumerate(t.legs) if k not in (ka, kb)]
    return GeneralTensor(legs, np.trace(t.data, axis1=ka, axis2=kb), label or t.label)


#  Haar sampling
def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a complex Ginibre matrix with the R diagonal phases divided out."""
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_random_tensor(in_dims: Sequence[int], out_dims: Sequence[int], seed: int | None = None,
                       label: str = "haar", in_ids: Sequence[str] | None = None,
                       out_ids: Sequence[str] | None = None) -> UnitaryTensor:
    n_in, n_out = _prod(in_dims), _prod(out_dims)
    if n_in != n_out:
        raise DimensionError(f"haar tensor needs equal dimension products, got {n_in} in and {n_out} out")
    in_ids = list(in_ids) if in_ids is not None else [f"i{k}" for k in range(len(in_dims))]
    out_ids = list(out_ids) if out_ids is not None else [f"o{k}" for k in range(len(out_dims))]
    u = haar_unitary(n_in, np.random.default_rng(seed))
    return tensor_from_matrix(u, list(zip(in_ids, in_dims)), list(zip(out_ids, out_dims)), label)
