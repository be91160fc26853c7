"""Finite interpretations of diagrams: boolean relations and real tensors.

An interpretation assigns a dimension to every object and a tensor to every
box; a diagram then denotes the tensor obtained by contracting its layers,
with axes ordered domain-first: ``eval_rel``/``eval_vect`` return an array of
shape ``dims(dom) + dims(cod)`` (a closed diagram yields a scalar).

* **rel** — boolean tensors.  Contraction is relational composition (compose
  = "there exists a connecting element"), spiders and cups/caps are equality
  deltas, and ``Cut`` is elementwise complement.
* **vect** — float64 tensors.  Same contraction, but ``Cut`` has no linear
  meaning and raises.

Boxes with holes are interpreted by *operators*: named callables registered
on the interpretation that receive the box declaration and the evaluated
filling tensors and return the box's tensor.  ``VectInterp`` ships one
example operator, ``"twice"``, which runs its single filling twice
(``A -> A . A``).

``model_to_relinterp`` bridges the logic side: a finite first-order model
becomes a relational interpretation in which every object has the universe
as its dimension and every box tensor is the predicate's truth table.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import diagram as dg
from . import logic as lg
from .core import BoxDecl, MonoidalSignature
from .errors import EvalError, MissingSymbolError, ShapeMismatchError

__all__ = [
    "RelInterp",
    "VectInterp",
    "eval_rel",
    "eval_vect",
    "model_to_relinterp",
    "op_twice",
]

Operator = Callable[[BoxDecl, tuple[np.ndarray, ...]], np.ndarray]


def op_twice(decl: BoxDecl, fillings: tuple[np.ndarray, ...]) -> np.ndarray:
    """Compose the single filling with itself: ``A -> A . A``.

    Requires a one-hole box whose hole has equal-length dom and cod rows.
    """
    if len(fillings) != 1:
        raise EvalError(f"operator 'twice' needs exactly one filling, got {len(fillings)}")
    (a,) = fillings
    k = len(decl.holes[0].dom)
    if a.ndim != 2 * k:
        raise ShapeMismatchError(
            f"operator 'twice' needs a square filling, got {a.ndim} axes for {k} wires"
        )
    return np.tensordot(a, a, axes=(list(range(k, a.ndim)), list(range(k))))


class _InterpIO:
    """Shared JSON round-trip: {"dims": {obj: int}, "boxes": {name: nested lists}}."""

    @classmethod
    def from_json(cls, data: dict):
        return cls(
            dims=dict(data.get("dims", {})),
            boxes={
                name: np.asarray(entries, dtype=cls.dtype)
                for name, entries in data.get("boxes", {}).items()
            },
        )

    def to_json(self) -> dict:
        return {
            "dims": dict(sorted(self.dims.items())),
            "boxes": {
                name: np.asarray(arr, dtype=self.dtype).tolist()
                for name, arr in sorted(self.boxes.items())
            },
        }


@dataclass
class RelInterp(_InterpIO):
    """Boolean-relation interpretation: dims per object, 0/1 tensor per box."""

    dims: dict[str, int]
    boxes: dict[str, np.ndarray] = field(default_factory=dict)
    operators: dict[str, Operator] = field(default_factory=dict)

    dtype = bool


@dataclass
class VectInterp(_InterpIO):
    """Real-tensor interpretation (float64); ships the ``twice`` operator."""

    dims: dict[str, int]
    boxes: dict[str, np.ndarray] = field(default_factory=dict)
    operators: dict[str, Operator] = field(default_factory=lambda: {"twice": op_twice})

    dtype = np.float64


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=512)
def _normalized(d: dg.Diagram) -> dg.LayeredForm:
    return dg.normalize(d)


class _Evaluator:
    def __init__(self, interp, boolean: bool):
        self.interp = interp
        self.boolean = boolean

    def dim(self, obj: str) -> int:
        try:
            return self.interp.dims[obj]
        except KeyError:
            raise MissingSymbolError(f"object {obj!r} has no dimension") from None

    def dims(self, objs) -> tuple[int, ...]:
        return tuple(self.dim(o) for o in objs)

    def box_tensor(self, g: dg.BoxInstance) -> np.ndarray:
        decl = g.decl
        shape = self.dims(decl.dom) + self.dims(decl.cod)
        if decl.holes:
            try:
                op = self.interp.operators[decl.name]
            except KeyError:
                raise MissingSymbolError(
                    f"no operator registered for hole box {decl.name!r}"
                ) from None
            arr = np.asarray(op(decl, tuple(self.run(f) for f in g.fillings)))
        else:
            try:
                arr = self.interp.boxes[decl.name]
            except KeyError:
                raise MissingSymbolError(f"box {decl.name!r} has no tensor") from None
            arr = np.asarray(arr)
        if arr.shape != shape:
            raise ShapeMismatchError(
                f"tensor for {decl.name!r} has shape {arr.shape}, expected {shape}"
            )
        return arr

    def gen_tensor(self, g: dg.Diagram) -> np.ndarray:
        match g:
            case dg.BoxInstance():
                arr = self.box_tensor(g)
                return arr != 0 if self.boolean else arr.astype(np.float64)
            case dg.Spider(legs_in=m, legs_out=n, obj=obj):
                d = self.dim(obj)
                if m + n == 0:
                    return np.array(d, dtype=np.int64)
                arr = np.zeros((d,) * (m + n), dtype=np.int64)
                for i in range(d):
                    arr[(i,) * (m + n)] = 1
                return arr
            case dg.Cup(obj=obj) | dg.Cap(obj=obj):
                return np.eye(self.dim(obj), dtype=np.int64)
            case dg.Swap(top=a, bottom=b):
                da, db = self.dim(a), self.dim(b)
                arr = np.zeros((da, db, db, da), dtype=np.int64)
                for i in range(da):
                    for j in range(db):
                        arr[i, j, j, i] = 1
                return arr
            case dg.Cut(body):
                if not self.boolean:
                    raise EvalError("negation is not linear: no vect meaning for cut")
                return ~self.run(body)
        raise EvalError(f"unexpected generator {g!r}")

    def run(self, d: dg.Diagram) -> np.ndarray:
        dom_dims = self.dims(d.dom)
        k0 = len(dom_dims)
        if dom_dims:
            size = int(np.prod(dom_dims))
            start = np.eye(size, dtype=np.int64).reshape(dom_dims + dom_dims)
        else:
            start = np.ones((), dtype=np.int64)
        T = start if self.boolean else start.astype(np.float64)
        for layer in _normalized(d).layers:
            g = layer.gen
            s, m, c = len(layer.left), len(g.dom), len(g.cod)
            G = self.gen_tensor(g)
            A = T.astype(np.int64) if self.boolean else T
            B = G.astype(np.int64) if self.boolean else np.asarray(G, dtype=np.float64)
            if m:
                T = np.tensordot(A, B, axes=(list(range(k0 + s, k0 + s + m)), list(range(m))))
            else:
                T = np.tensordot(A, B, axes=0)
            if self.boolean:
                T = T > 0
            if c:
                T = np.moveaxis(T, list(range(T.ndim - c, T.ndim)), list(range(k0 + s, k0 + s + c)))
        # A layerless diagram leaves the int64 identity; complement needs bool.
        return (T != 0) if self.boolean else T


def eval_rel(d: dg.Diagram, interp: RelInterp) -> np.ndarray:
    """Evaluate as a boolean relation; axes are ``dims(dom) + dims(cod)``.

    Composition asks for a connecting element, spiders/cups/caps are equality
    deltas, and ``Cut`` complements the relation of its body.
    """
    return _Evaluator(interp, boolean=True).run(d)


def eval_vect(d: dg.Diagram, interp: VectInterp) -> np.ndarray:
    """Evaluate as a float64 tensor by contraction; ``Cut`` raises."""
    return _Evaluator(interp, boolean=False).run(d)


def model_to_relinterp(m: lg.Model, sig: MonoidalSignature) -> RelInterp:
    """Interpret every object as the model's universe and every box as the
    truth table of the predicate with the same name (missing -> all false)."""
    n = len(m.universe)
    if tuple(m.universe) != tuple(range(n)):
        raise EvalError("model universe must be 0..n-1")
    dims = {obj: n for obj in sig.objects}
    boxes: dict[str, np.ndarray] = {}
    for name, decl in sig.boxes.items():
        if decl.holes:
            continue
        arity = len(decl.dom) + len(decl.cod)
        arr = np.zeros((n,) * arity, dtype=bool)
        for row in m.predicates.get(name, ()):
            if len(row) != arity:
                raise ShapeMismatchError(
                    f"predicate {name!r} row {row} does not match box arity {arity}"
                )
            arr[row] = True
        boxes[name] = arr
    return RelInterp(dims=dims, boxes=boxes)
