"""Existential-graph reading of cut-diagrams: translation to first-order logic.

A diagram over states, effects, boxes, spiders, cups, caps, and cuts is read
as an existential graph: wires are lines of identity, boxes are predicate
spots whose arguments are the wires entering and leaving them, and each
``Cut`` is a negation region.  ``to_fol`` makes that reading precise:

* every wire segment is a node; spiders and cups merge nodes into classes
  (lines of identity), boxes contribute atoms over their classes;
* each class becomes one variable, quantified existentially in the outermost
  region its line touches;
* a cup that joins two lines *after* both already carry variables from
  enclosing regions contributes an equality atom instead of a merge.

Diagram wires that reach the outer boundary become free variables, so closed
diagrams (``dom == cod == ()``) translate to sentences.

``spider_fuse`` and ``double_cut_elim`` are semantics-preserving rewrites:
adjacent spiders sharing a wire fuse into one, identity spiders vanish, and a
cut whose body is exactly another cut (no whiskers, nothing else drawn
between the boundaries) cancels with it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import diagram as dg
from . import logic as lg
from .errors import EvalError, NoParseError
from .grammar import Lexicon, pipeline

__all__ = ["to_fol", "fol_of_sentence", "spider_fuse", "double_cut_elim"]


# ---------------------------------------------------------------------------
# Diagram -> first-order formula
# ---------------------------------------------------------------------------

_Path = tuple[int, ...]


@dataclass
class _Region:
    """One negation depth: the sheet of assertion or the inside of a cut."""

    path: _Path
    events: list = field(default_factory=list)
    children: dict[_Path, "_Region"] = field(default_factory=dict)
    resolved: list = field(default_factory=list)
    quantified: list[str] = field(default_factory=list)


class _Translator:
    def __init__(self) -> None:
        self.regions: dict[_Path, _Region] = {}
        self.parent: dict[int, int] = {}
        self.outermost: dict[int, _Path] = {}
        self.var: dict[int, tuple[int, str]] = {}  # class root -> (index, name)
        self.counter = 0
        self.boundary: set[int] = set()

    # -- phase 1: walk the diagram, recording events per region -------------

    def region(self, path: _Path) -> _Region:
        if path not in self.regions:
            self.regions[path] = _Region(path)
        return self.regions[path]

    def new_node(self, path: _Path) -> int:
        node = len(self.parent)
        self.parent[node] = node
        self.outermost[node] = path
        return node

    def surface(self, node: int, path: _Path) -> None:
        """Record that the wire of ``node`` reaches ``path``; keep the outermost."""
        best = self.outermost[node]
        if (len(path), path) < (len(best), best):
            self.outermost[node] = path

    def walk(self, lf: dg.LayeredForm, path: _Path, cur: list[int]) -> list[int]:
        region = self.region(path)
        for layer in lf.layers:
            g = layer.gen
            s = len(layer.left)
            e = s + len(g.dom)
            ins = cur[s:e]
            match g:
                case dg.BoxInstance():
                    if g.decl.holes:
                        raise EvalError(
                            f"box {g.decl.name!r} has holes and no first-order reading"
                        )
                    outs = [self.new_node(path) for _ in g.cod]
                    region.events.append(("atom", g.decl.name, tuple(ins + outs)))
                case dg.Spider(legs_in=m, legs_out=n):
                    rep = ins[0] if m else self.new_node(path)
                    for other in ins[1:]:
                        region.events.append(("union", rep, other))
                    outs = [rep] * n
                case dg.Cup():
                    region.events.append(("union", ins[0], ins[1]))
                    outs = []
                case dg.Cap():
                    rep = self.new_node(path)
                    outs = [rep, rep]
                case dg.Swap():
                    outs = [ins[1], ins[0]]
                case dg.Cut(body):
                    child = path + (len(region.children),)
                    region.children[child] = self.region(child)
                    region.events.append(("not", child))
                    outs = self.walk(dg.normalize(body), child, list(ins))
                    for node in outs:
                        self.surface(node, path)
                case _:
                    raise EvalError(f"unexpected generator {g!r}")
            cur[s:e] = outs
        return cur

    # -- union-find ----------------------------------------------------------

    def find(self, node: int) -> int:
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node] != root:
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a: int, b: int) -> tuple[str, str] | None:
        """Merge the classes of ``a`` and ``b``.

        Returns the (earlier, later) variable pair when both classes already
        carry variables — the caller then asserts equality instead.
        """
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        va, vb = self.var.get(ra), self.var.get(rb)
        self.parent[rb] = ra
        if va and vb:
            first, second = sorted((va, vb))
            self.var[ra] = first
            self.var.pop(rb, None)
            return first[1], second[1]
        if vb:
            self.var[ra] = vb
            self.var.pop(rb, None)
        return None

    # -- phase 2: assign variables and resolve events, outermost first ------

    def process(self, region: _Region) -> None:
        equalities: dict[int, tuple[str, str] | None] = {}
        for idx, ev in enumerate(region.events):
            if ev[0] == "union":
                equalities[idx] = self.union(ev[1], ev[2])

        groups: dict[int, list[int]] = {}
        for node in sorted(self.parent):
            groups.setdefault(self.find(node), []).append(node)
        for root, members in sorted(groups.items(), key=lambda kv: min(kv[1])):
            if root in self.var:
                continue
            outer = min((len(self.outermost[m]), self.outermost[m]) for m in members)[1]
            if outer != region.path:
                continue
            name = f"x{self.counter}"
            self.var[root] = (self.counter, name)
            self.counter += 1
            if not any(m in self.boundary for m in members):
                region.quantified.append(name)

        for idx, ev in enumerate(region.events):
            match ev:
                case ("atom", pred, nodes):
                    args = tuple(lg.TermV(self.var[self.find(n)][1]) for n in nodes)
                    region.resolved.append(lg.Atom(pred, args))
                case ("union", _, _):
                    pair = equalities[idx]
                    if pair is not None:
                        region.resolved.append(
                            lg.Atom("=", (lg.TermV(pair[0]), lg.TermV(pair[1])))
                        )
                case ("not", child):
                    region.resolved.append(("not", child))

        for child in region.children.values():
            self.process(child)

    def build(self, region: _Region) -> lg.Formula:
        conjuncts = [
            lg.Not(self.build(region.children[item[1]]))
            if isinstance(item, tuple)
            else item
            for item in region.resolved
        ]
        if conjuncts:
            body = conjuncts[0]
            for c in conjuncts[1:]:
                body = lg.And(body, c)
        else:
            body = lg.Top()
        for name in reversed(region.quantified):
            body = lg.Exists(name, body)
        return body


def to_fol(d: dg.Diagram) -> lg.Formula:
    """Read a cut-diagram as a first-order formula.

    Boxes become predicate atoms over their wires, cuts become negation,
    and each line of identity becomes a variable quantified in the outermost
    region it touches.  Boundary wires of an open diagram turn into free
    variables; a closed diagram yields a sentence.  Boxes with holes have no
    first-order reading and raise ``EvalError``.
    """
    tr = _Translator()
    root = tr.region(())
    cur = [tr.new_node(()) for _ in d.dom]
    tr.boundary.update(cur)
    out = tr.walk(dg.normalize(d), (), cur)
    tr.boundary.update(out)
    tr.process(root)
    return tr.build(root)


def fol_of_sentence(
    sentence: str | list[str],
    lex: Lexicon,
    target=None,
    *,
    rewrite_singletons: bool = True,
) -> lg.Formula:
    """Parse ``sentence`` with ``lex`` and return its first-order meaning.

    Uses the first parse.  Diagram-valued lexicons go through ``to_fol``;
    with ``rewrite_singletons`` (the default) predicates declared singleton in
    the signature are then inlined as constants, e.g. ``exists x. Alice(x) &
    sleeps(x)`` becomes ``sleeps(Alice)``.  Formula-valued lexicons return
    their meaning directly.
    """
    results = pipeline(sentence, lex, target)
    if not results:
        raise NoParseError(f"no parse of {sentence!r} at the target type")
    value = results[0].value
    if isinstance(value, lg.Formula):
        return value
    f = to_fol(value)
    if rewrite_singletons:
        f = lg.singleton_rewrite(f, lex.singletons())
    return f


# ---------------------------------------------------------------------------
# Rewrites
# ---------------------------------------------------------------------------


def _fuse_adjacent(first: dg.Layer, second: dg.Layer) -> dg.Layer | None:
    """Fuse two spider layers that share at least one wire, if possible."""
    g1, g2 = first.gen, second.gen
    if not (isinstance(g1, dg.Spider) and isinstance(g2, dg.Spider)):
        return None
    if g1.obj != g2.obj:
        return None
    a1, a2 = len(first.left), len(first.left) + g1.legs_out
    b1, b2 = len(second.left), len(second.left) + g2.legs_in
    shared = min(a2, b2) - max(a1, b1)
    if shared <= 0:
        return None
    legs_in = g1.legs_in + g2.legs_in - shared
    legs_out = g1.legs_out + g2.legs_out - shared
    start = min(a1, b1)
    dom = first.dom
    fused = dg.Layer(
        dom[:start], dg.Spider(legs_in, legs_out, g1.obj), dom[start + legs_in :]
    )
    if fused.dom != first.dom or fused.cod != second.cod:  # pragma: no cover
        raise EvalError("spider fusion produced a mismatched layer")
    return fused


def _is_identity_spider(g: dg.Diagram) -> bool:
    return isinstance(g, dg.Spider) and g.legs_in == 1 and g.legs_out == 1


def spider_fuse(d: dg.Diagram) -> dg.Diagram:
    """Fuse connected spiders and drop identity spiders, recursively.

    Works on the interchange normal form: any two spiders that share a wire
    and sit in adjacent layers merge into a single spider on the remaining
    legs; ``Spider(1, 1)`` layers are erased.  Cups, caps, and boxes are left
    alone.  The result is semantically equal to the input on every backend.
    """

    def rewrite_gen(g: dg.Diagram) -> dg.Diagram:
        if isinstance(g, dg.Cut):
            return dg.Cut(spider_fuse(g.body))
        if isinstance(g, dg.BoxInstance) and g.fillings:
            return dg.BoxInstance(g.decl, tuple(spider_fuse(f) for f in g.fillings))
        return g

    current = d
    while True:
        lf = dg.normalize(current)
        layers = [dg.Layer(l.left, rewrite_gen(l.gen), l.right) for l in lf.layers]
        for i, layer in enumerate(layers):
            if _is_identity_spider(layer.gen):
                del layers[i]
                break
        else:
            for i in range(len(layers) - 1):
                fused = _fuse_adjacent(layers[i], layers[i + 1])
                if fused is not None:
                    layers[i : i + 2] = [fused]
                    break
            else:
                return dg.reconstruct(dg.LayeredForm(lf.dom, tuple(layers)))
        current = dg.reconstruct(dg.LayeredForm(lf.dom, tuple(layers)))


def double_cut_elim(d: dg.Diagram) -> dg.Diagram:
    """Cancel doubled cuts: ``cut(cut(x))`` with nothing between becomes ``x``.

    The inner cut must be the *whole* body of the outer one (no boxes, no
    passing wires beside it); wires crossing both boundaries together are
    fine because they are part of ``x``.  Applied recursively everywhere,
    including inside cut bodies and hole fillings.
    """
    match d:
        case dg.Cut(body):
            inner = double_cut_elim(body)
            lf = dg.normalize(inner)
            if len(lf.layers) == 1:
                only = lf.layers[0]
                if isinstance(only.gen, dg.Cut) and not only.left and not only.right:
                    return double_cut_elim(only.gen.body)
            return dg.Cut(inner)
        case dg.Compose(first=a, second=b):
            return dg.Compose(double_cut_elim(a), double_cut_elim(b))
        case dg.Tensor(top=a, bottom=b):
            return dg.Tensor(double_cut_elim(a), double_cut_elim(b))
        case dg.BoxInstance(decl=decl, fillings=fillings) if fillings:
            return dg.BoxInstance(decl, tuple(double_cut_elim(f) for f in fillings))
        case _:
            return d
