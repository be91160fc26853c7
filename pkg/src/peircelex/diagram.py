"""String diagrams over a monoidal signature, with negation bubbles.

A diagram is a tree of constructors (identities, boxes, compose, tensor,
spiders, cups/caps, swaps, cuts). ``normalize`` flattens it into a
deterministic layered form (one generator per layer), and ``equal`` decides
interchange isotopy — the equality of the free monoidal category, under
which disjoint layers slide past one another. Boxes may carry holes filled
with other diagrams; ``Cut`` wraps a subdiagram in a negation region and is
the only hole-like constructor the logic translation accepts.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import count
from typing import Iterator

from .core import (
    BoxDecl,
    DiagramShape,
    MonoidalSignature,
    ObjectList,
    pretty_object_list,
)
from .errors import ShapeMismatchError


class Diagram:
    """Base class; concrete nodes are frozen dataclasses carrying a shape."""

    __slots__ = ()
    shape: DiagramShape

    @property
    def dom(self) -> ObjectList:
        return self.shape.dom

    @property
    def cod(self) -> ObjectList:
        return self.shape.cod

    def __rshift__(self, other: "Diagram") -> "Diagram":
        return Compose(self, other)

    def __matmul__(self, other: "Diagram") -> "Diagram":
        return Tensor(self, other)

    def __str__(self) -> str:
        return diagram_expr(self)

    def __repr__(self) -> str:
        return diagram_expr(self)


@dataclass(frozen=True, eq=True, repr=False)
class Id(Diagram):
    objects: ObjectList
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "shape", DiagramShape(self.objects, self.objects))


@dataclass(frozen=True, eq=True, repr=False)
class BoxInstance(Diagram):
    decl: BoxDecl
    fillings: tuple[Diagram, ...] = ()
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        if len(self.fillings) != len(self.decl.holes):
            raise ShapeMismatchError(
                f"box {self.decl.name!r} expects {len(self.decl.holes)} fillings, got {len(self.fillings)}"
            )
        for hole, filling in zip(self.decl.holes, self.fillings):
            if filling.shape != hole:
                raise ShapeMismatchError(
                    f"filling of box {self.decl.name!r} has shape {filling.shape}, hole wants {hole}"
                )
        object.__setattr__(self, "shape", self.decl.shape)

    @property
    def name(self) -> str:
        return self.decl.name


@dataclass(frozen=True, eq=True, repr=False)
class Compose(Diagram):
    """Left-to-right composition: the output of ``first`` feeds ``second``."""

    first: Diagram
    second: Diagram
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        if self.first.cod != self.second.dom:
            raise ShapeMismatchError(
                f"cannot compose {self.first.shape} with {self.second.shape}: "
                f"boundary ({pretty_object_list(self.first.cod)}) != ({pretty_object_list(self.second.dom)})"
            )
        object.__setattr__(self, "shape", DiagramShape(self.first.dom, self.second.cod))


@dataclass(frozen=True, eq=True, repr=False)
class Tensor(Diagram):
    """Parallel placement, read top to bottom."""

    top: Diagram
    bottom: Diagram
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "shape",
            DiagramShape(self.top.dom + self.bottom.dom, self.top.cod + self.bottom.cod),
        )


@dataclass(frozen=True, eq=True, repr=False)
class Spider(Diagram):
    """A line of identity: all legs carry the same object and are identified."""

    legs_in: int
    legs_out: int
    obj: str
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        if self.legs_in < 0 or self.legs_out < 0:
            raise ShapeMismatchError("spider legs must be non-negative")
        object.__setattr__(
            self,
            "shape",
            DiagramShape((self.obj,) * self.legs_in, (self.obj,) * self.legs_out),
        )


@dataclass(frozen=True, eq=True, repr=False)
class Cup(Diagram):
    obj: str
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "shape", DiagramShape((self.obj, self.obj), ()))


@dataclass(frozen=True, eq=True, repr=False)
class Cap(Diagram):
    obj: str
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "shape", DiagramShape((), (self.obj, self.obj)))


@dataclass(frozen=True, eq=True, repr=False)
class Swap(Diagram):
    top: str
    bottom: str
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "shape", DiagramShape((self.top, self.bottom), (self.bottom, self.top)))


@dataclass(frozen=True, eq=True, repr=False)
class Cut(Diagram):
    """Negation region around ``body``; wires may pass through freely."""

    body: Diagram
    shape: DiagramShape = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "shape", self.body.shape)


_GENERATORS = (BoxInstance, Spider, Cup, Cap, Swap, Cut)


# ---------------------------------------------------------------------------
# Helpers mirroring the constructors

def identity(objects: ObjectList) -> Diagram:
    return Id(tuple(objects))


def compose(first: Diagram, second: Diagram) -> Diagram:
    return Compose(first, second)


def tensor(top: Diagram, bottom: Diagram) -> Diagram:
    return Tensor(top, bottom)


def box(sig: MonoidalSignature, name: str, fillings: tuple[Diagram, ...] = ()) -> Diagram:
    return BoxInstance(sig.box(name), tuple(fillings))


def cut(body: Diagram) -> Diagram:
    return Cut(body)


def spider(legs_in: int, legs_out: int, obj: str) -> Diagram:
    return Spider(legs_in, legs_out, obj)


def _cups(objects: ObjectList) -> Diagram:
    """Nested cups: reverse(x) ++ x -> 1."""
    if not objects:
        return Id(())
    head, rest = objects[0], objects[1:]
    inner = Id(tuple(reversed(rest))) @ Cup(head) @ Id(rest)
    return inner >> _cups(rest)


def _caps(objects: ObjectList) -> Diagram:
    """Nested caps: 1 -> x ++ reverse(x)."""
    if not objects:
        return Id(())
    head, rest = objects[0], objects[1:]
    return Cap(head) >> (Id((head,)) @ _caps(rest) @ Id((head,)))


def transpose(d: Diagram) -> Diagram:
    """Bend a state (1, x) into an effect (reverse x, 1), or dually.

    Boundary wire order is reversed relative to ``d``.
    """
    if not d.dom and not d.cod:
        return d
    if not d.dom:
        x = d.cod
        return (Id(tuple(reversed(x))) @ d) >> _cups(x)
    if not d.cod:
        x = d.dom
        return _caps(x) >> (d @ Id(tuple(reversed(x))))
    raise ShapeMismatchError(f"transpose needs a state or an effect, got shape {d.shape}")


# ---------------------------------------------------------------------------
# Layered normal form

@dataclass(frozen=True, eq=True)
class Layer:
    """One generator whiskered by identity wires on both sides."""

    left: ObjectList
    gen: Diagram
    right: ObjectList

    @property
    def dom(self) -> ObjectList:
        return self.left + self.gen.dom + self.right

    @property
    def cod(self) -> ObjectList:
        return self.left + self.gen.cod + self.right


@dataclass(frozen=True, eq=True)
class LayeredForm:
    dom: ObjectList
    layers: tuple[Layer, ...]

    @property
    def cod(self) -> ObjectList:
        return self.layers[-1].cod if self.layers else self.dom

    @property
    def shape(self) -> DiagramShape:
        return DiagramShape(self.dom, self.cod)


def _canon_generator(g: Diagram) -> Diagram:
    """Normalize the diagrams nested inside a generator node."""
    if isinstance(g, Cut):
        return Cut(canonical(g.body))
    if isinstance(g, BoxInstance) and g.fillings:
        return BoxInstance(g.decl, tuple(canonical(f) for f in g.fillings))
    return g


def _decompose(d: Diagram) -> list[Layer]:
    match d:
        case Id():
            return []
        case Compose(first=a, second=b):
            return _decompose(a) + _decompose(b)
        case Tensor(top=a, bottom=b):
            out = [Layer(l.left, l.gen, l.right + b.dom) for l in _decompose(a)]
            out += [Layer(a.cod + l.left, l.gen, l.right) for l in _decompose(b)]
            return out
        case _:
            return [Layer((), _canon_generator(d), ())]


@lru_cache(maxsize=None)
def _gen_key(g: Diagram) -> str:
    """Total order key for generators; nested diagrams compare by ``_eq_key``.

    Cut bodies and hole fillings are keyed by their full equality invariant
    so that generators wrapping equal subdiagrams sort (and compare) alike.
    """
    if isinstance(g, Cut):
        return f"cut<{_eq_key(g.body)}>"
    if isinstance(g, BoxInstance) and g.fillings:
        inner = ";".join(_eq_key(f) for f in g.fillings)
        return f"{g.decl.name}<{inner}>"
    return diagram_expr(g)


def _enc(layer: Layer) -> tuple[int, str]:
    return (len(layer.left), _gen_key(layer.gen))


def _cross(first: Layer, second: Layer) -> list[tuple[Layer, Layer]]:
    """All ways to commute ``second`` directly before ``first``.

    Interchange applies when the two generators act on disjoint wire
    intervals: ``second`` may sit entirely left of ``first``'s action or
    entirely right of it.  Both conditions hold at once only in the
    degenerate case of a state meeting an effect at the same point; the two
    residual placements then differ, so both are returned.
    """
    offset_first, in_first = len(first.left), len(first.gen.dom)
    out_first = len(first.gen.cod)
    offset_second, in_second = len(second.left), len(second.gen.dom)
    delta_first = out_first - in_first
    delta_second = len(second.gen.cod) - in_second
    base = first.dom
    placements = []
    if offset_second + in_second <= offset_first:
        placements.append((offset_second, offset_first + delta_second))
    if offset_second >= offset_first + out_first:
        placements.append((offset_second - delta_first, offset_first))
    out: list[tuple[Layer, Layer]] = []
    for new_second_off, new_first_off in placements:
        new_first = Layer(
            base[:new_second_off], second.gen, base[new_second_off + in_second :]
        )
        mid = new_first.cod
        new_second = Layer(mid[:new_first_off], first.gen, mid[new_first_off + in_first :])
        if new_second.cod != second.cod:
            raise RuntimeError("interchange changed the boundary; this is a bug")
        if (new_first, new_second) not in out:
            out.append((new_first, new_second))
    return out


# Words are manipulated as (layer, tag) items; the tag is the layer's index
# in the original word, which lets callers recover where each layer went.
_Item = tuple[Layer, int]


def _tag(word: tuple[Layer, ...]) -> tuple[_Item, ...]:
    return tuple((layer, i) for i, layer in enumerate(word))


def _strip(items: tuple[_Item, ...]) -> tuple[Layer, ...]:
    return tuple(layer for layer, _ in items)


def _ienc(item: _Item) -> tuple[int, str]:
    return _enc(item[0])


def _icross(first: _Item, second: _Item) -> list[tuple[_Item, _Item]]:
    pairs = _cross(first[0], second[0])
    return [((a, second[1]), (b, first[1])) for a, b in pairs]


def _front_moves(word: tuple[_Item, ...], j: int) -> set[tuple[_Item, ...]]:
    """Every word reachable by commuting layer ``j`` to the front.

    Returns the empty set when some earlier layer blocks the move (the
    intervals interact), and every reachable variant otherwise — crossing a
    degenerate state/effect pair can leave the residue in two distinct
    placements, hence a set.
    """
    states = {word}
    for pos in range(j, 0, -1):
        next_states: set[tuple[_Item, ...]] = set()
        for current in states:
            for pair in _icross(current[pos - 1], current[pos]):
                next_states.add(current[: pos - 1] + pair + current[pos + 1 :])
        if not next_states:
            return set()
        if len(next_states) > 4096:
            raise RuntimeError("interchange search blew up; this is a bug")
        states = next_states
    return states


def _lexmin(word: tuple[_Item, ...], memo: dict) -> tuple[_Item, ...]:
    """Lexicographically least word reachable by front extractions.

    Words compare by the per-layer key (left-whisker width, generator key),
    with the original layer indices as a deterministic tiebreak.  Any
    equivalent word starts with some front-movable layer, so trying every
    extraction and recursing on the ties visits exactly the reachable heads;
    memoization keeps shared tails linear-ish.
    """
    if not word:
        return ()
    cached = memo.get(word)
    if cached is not None:
        return cached
    if len(memo) > 100_000:
        raise RuntimeError("interchange normalization exploded; this is a bug")
    options: list[tuple[tuple[int, str], tuple[_Item, ...]]] = []
    for j in range(len(word)):
        for moved in _front_moves(word, j):
            options.append((_ienc(moved[0]), moved))
    front = min(enc for enc, _ in options)
    best: tuple[_Item, ...] | None = None
    best_key: tuple | None = None
    tried: set[tuple[_Item, ...]] = set()
    for enc, moved in options:
        if enc != front or moved in tried:
            continue
        tried.add(moved)
        candidate = (moved[0],) + _lexmin(moved[1:], memo)
        key = (
            tuple(_ienc(item) for item in candidate),
            tuple(tag for _, tag in candidate),
        )
        if best_key is None or key < best_key:
            best, best_key = candidate, key
    assert best is not None
    memo[word] = best
    return best


def _least(items: tuple[_Item, ...]) -> tuple[_Item, ...]:
    """Iterate the front-extraction minimization to a fixed point.

    Each pass moves layers only via legal interchanges, so the result always
    denotes the same diagram; a pass can unlock cheaper placements for the
    next one, hence the iteration.  Every pass lowers the word in a
    well-founded order, so this terminates.
    """
    while True:
        improved = _lexmin(items, {})
        if _strip(improved) == _strip(items):
            return improved
        items = improved


def normalize(d: Diagram) -> LayeredForm:
    """Deterministic layered representative of the diagram.

    Rewrites the layered word toward the lexicographically least member
    reachable by front extractions (comparing layers by left-whisker width,
    then generator key).  The result is stable across runs and is what
    evaluation, rendering, and the logic reading traverse; the complete
    equality test lives in ``equal``, which additionally accounts for closed
    components sliding through time.
    """
    word = tuple(_decompose(d))
    return LayeredForm(d.dom, _strip(_least(_tag(word))))


def reconstruct(lf: LayeredForm) -> Diagram:
    """Rebuild a diagram whose normal form is ``lf``."""
    if not lf.layers:
        return Id(lf.dom)
    parts = []
    for layer in lf.layers:
        g: Diagram = layer.gen
        if layer.left:
            g = Tensor(Id(layer.left), g)
        if layer.right:
            g = Tensor(g, Id(layer.right))
        parts.append(g)
    out = parts[0]
    for p in parts[1:]:
        out = Compose(out, p)
    return out


def canonical(d: Diagram) -> Diagram:
    return reconstruct(normalize(d))


# ---------------------------------------------------------------------------
# Interchange equality
#
# Interchange lets layers acting on disjoint wire intervals slide past one
# another in time, so a diagram's identity is its drawing on a strip — wires
# and generator occurrences — read up to isotopy fixing the dom and cod
# boundary lines.  ``_eq_key`` records that drawing's complete combinatorial
# invariant:
#
#   * Each connected component of the wiring becomes a port graph:
#     occurrences with ordered in/out ports, wires between ports, boundary
#     attachments pinned.  Its certificate is a breadth-first traversal —
#     seeded from the boundary wires in order for a component that touches
#     the boundary, minimized over seeds for a closed one.  Equal
#     certificates exhibit a port- and boundary-preserving isomorphism, and
#     a connected drawing is determined up to isotopy by its port orders
#     plus pinned boundary, so certificate equality is exactly component
#     equality.  Word order within a component contributes nothing.
#   * The boundary pins components relative to each other: ``_eq_key``
#     stores which component owns each dom and cod position.  Components
#     touching the boundary are never strictly enclosed by anything, so
#     this is all the relative data they carry.
#   * A closed component can be scheduled into any moment of the face it
#     floats in, and only that face: wires are walls it cannot cross.
#     Faces are tracked per component by replaying the word with a gap
#     structure — a gap splits when a layer bears new wires into it, and
#     the flanking gaps merge when the wires between them die.  Gap classes
#     that reach the far left, the far right, or survive the component are
#     its ambient: a closed piece there slides around it through time.  The
#     remaining classes are true enclosures (a bubble's interior, the well
#     between legs welded by a cup, the column between a component's cod
#     legs and the cod line), and the innermost component enclosing each
#     closed piece places it in a nesting forest.  A face is named by its
#     sided wire boundary — each side of a wire bounds exactly one face, so
#     the name is intrinsic — and siblings in one face commute, so each
#     face carries a multiset of hierarchical keys.  Closed components in
#     the ambient are pinned only by the side they pass each boundary-
#     spanning component on.


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        while self.parent.get(x, x) != x:
            grand = self.parent.get(self.parent[x], self.parent[x])
            self.parent[x] = grand
            x = grand
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _trace(dom: ObjectList, word: tuple[Layer, ...]):
    """Replay the word once, numbering every wire.

    Returns per-layer events ``(position, consumed ids, produced ids)``, the
    final frontier of wire ids, and each wire's object label.
    """
    frontier = list(range(len(dom)))
    wire_obj = dict(enumerate(dom))
    next_id = len(dom)
    events = []
    for layer in word:
        p = len(layer.left)
        consumed = frontier[p : p + len(layer.gen.dom)]
        produced = list(range(next_id, next_id + len(layer.gen.cod)))
        for w, obj in zip(produced, layer.gen.cod):
            wire_obj[w] = obj
        next_id += len(produced)
        frontier[p : p + len(consumed)] = produced
        events.append((p, consumed, produced))
    return events, frontier, wire_obj


def _endpoints(dom: ObjectList, events: list, final: list):
    """Each wire's two ends: a boundary mark or an ``(occurrence, slot)``.

    ``src[w]`` is where the wire is produced — ``("d", position)`` on the dom
    boundary or ``(layer index, out slot)`` — and ``dst[w]`` where it is
    consumed — ``("c", position)`` on the cod boundary or ``(layer index,
    in slot)``.
    """
    src: dict = {w: ("d", w) for w in range(len(dom))}
    dst: dict = {}
    for i, (_, consumed, produced) in enumerate(events):
        for slot, w in enumerate(consumed):
            dst[w] = (i, slot)
        for slot, w in enumerate(produced):
            src[w] = (i, slot)
    for k, w in enumerate(final):
        dst[w] = ("c", k)
    return src, dst


def _component_cert(word, events, src, dst, layers, dom_wires, cod_wires, seed=None):
    """Canonical certificate and wire reference map for one component.

    Breadth-first traversal over the component's port graph, seeded from its
    boundary wires in order (or from occurrence ``seed`` for a closed
    component).  The certificate lists each occurrence's generator key with
    the far endpoint of every port in traversal numbering; the returned
    ``ref`` names the component's wires by their producing end, for use in
    face labels.
    """
    dom_local = {w: k for k, w in enumerate(dom_wires)}
    cod_local = {w: k for k, w in enumerate(cod_wires)}
    number: dict[int, int] = {}
    queue: deque = deque()

    def visit(i: int) -> None:
        if i not in number:
            number[i] = len(number)
            _, consumed, produced = events[i]
            queue.extend([*consumed, *produced])

    if seed is not None:
        visit(seed)
    queue.extend([*dom_wires, *cod_wires])
    while queue:
        w = queue.popleft()
        for end in (src[w], dst[w]):
            if isinstance(end[0], int):
                visit(end[0])

    def ref(w):
        s = src[w]
        if s[0] == "d":
            return ("d", dom_local[w])
        return ("n", number[s[0]], s[1])

    entries = []
    for i in sorted(layers, key=number.__getitem__):
        _, consumed, produced = events[i]
        outs = []
        for w in produced:
            t = dst[w]
            outs.append(("c", cod_local[w]) if t[0] == "c" else ("n", number[t[0]], t[1]))
        entries.append(
            (_gen_key(word[i].gen), tuple(ref(w) for w in consumed), tuple(outs))
        )
    return tuple(entries), ref


@lru_cache(maxsize=None)
def _eq_key(d: Diagram) -> str:
    """Complete invariant for interchange equality.

    Per connected component a canonical port-graph certificate; the sequence
    of component owners per dom and cod position; closed components arranged
    into a nesting forest by enclosing face, with ambient ones pinned only by
    the side they pass each boundary-spanning component on.
    """
    word = tuple(_decompose(d))
    dom = d.dom
    events, final, wire_obj = _trace(dom, word)
    src, dst = _endpoints(dom, events, final)
    uf = _UnionFind()
    for i, (_, consumed, produced) in enumerate(events):
        for w in consumed:
            uf.union(("layer", i), w)
        for w in produced:
            uf.union(("layer", i), w)
    comp_w = {w: uf.find(w) for w in wire_obj}
    comp_l = [uf.find(("layer", i)) for i in range(len(word))]
    anchored: list = []
    seen: set = set()
    for w in [*range(len(dom)), *final]:
        root = comp_w[w]
        if root not in seen:
            seen.add(root)
            anchored.append(root)
    inst = {root: k for k, root in enumerate(anchored)}
    floats: list = []
    for root in comp_l:
        if root not in inst and root not in floats:
            floats.append(root)
    roots = [*anchored, *floats]
    layers_of: dict = {root: [] for root in roots}
    for i, root in enumerate(comp_l):
        layers_of[root].append(i)
    dom_of = {r: [w for w in range(len(dom)) if comp_w[w] == r] for r in roots}
    cod_of = {r: [w for w in final if comp_w[w] == r] for r in roots}

    certs = {
        r: _component_cert(word, events, src, dst, layers_of[r], dom_of[r], cod_of[r])
        for r in anchored
    }
    variants: dict = {}
    for r in floats:
        best, kept = None, []
        for i in layers_of[r]:
            cert, ref = _component_cert(word, events, src, dst, layers_of[r], [], [], i)
            if best is None or cert < best:
                best, kept = cert, [(cert, ref)]
            elif cert == best:
                kept.append((cert, ref))
        variants[r] = kept

    # Replay the word once, maintaining every component's gap structure and
    # sampling, at each closed component's first layer, the gap it is born
    # into relative to every other component.
    counter = count()
    state: dict = {}
    for r in roots:
        gaps = [next(counter) for _ in range(len(dom_of[r]) + 1)]
        state[r] = {"gaps": gaps, "guf": _UnionFind(), "edge": {}, "init": (gaps[0], gaps[-1])}
    frontier = list(range(len(dom)))

    def absorb(r) -> None:
        st = state[r]
        live = [w for w in frontier if comp_w[w] == r]
        for k, g in enumerate(st["gaps"]):
            bag = st["edge"].setdefault(g, set())
            if k > 0:
                bag.add((live[k - 1], "r"))
            if k < len(live):
                bag.add((live[k], "l"))

    for r in roots:
        absorb(r)
    born: set = set()
    raw: dict = {}
    for i, (layer, (p, consumed, produced)) in enumerate(zip(word, events)):
        r = comp_l[i]
        if r not in born:
            born.add(r)
            if r not in inst:
                raw[r] = {}
                for m in roots:
                    if m != r:
                        left = sum(1 for w in frontier[:p] if comp_w[w] == m)
                        raw[r][m] = state[m]["gaps"][left]
        st = state[r]
        gaps = st["gaps"]
        left = sum(1 for w in frontier[:p] if comp_w[w] == r)
        a, b = len(consumed), len(produced)
        if a == 0 and b == 0:
            pass  # a point occurrence separates nothing
        elif a == 0:
            g = gaps[left]
            inner = [next(counter) for _ in range(b - 1)]
            gaps[left : left + 1] = [g, *inner, g]
        elif b == 0:
            st["guf"].union(gaps[left], gaps[left + a])
            gaps[left : left + a + 1] = [gaps[left]]
        else:
            inner = [next(counter) for _ in range(b - 1)]
            gaps[left : left + a + 1] = [gaps[left], *inner, gaps[left + a]]
        frontier[p : p + a] = list(produced)
        for m in roots:
            absorb(m)

    ambient: dict = {}
    for r in roots:
        st = state[r]
        marks = [*st["init"], st["gaps"][0], st["gaps"][-1]]
        ambient[r] = {st["guf"].find(g) for g in marks}

    cands = {
        f: [m for m in roots if m != f and state[m]["guf"].find(raw[f][m]) not in ambient[m]]
        for f in floats
    }
    depth = {r: 0 for r in anchored}
    depth.update({f: len(cands[f]) for f in floats})
    groups: dict = {}
    parent: dict = {}
    for f in floats:
        if cands[f]:
            m = max(cands[f], key=depth.__getitem__)
            parent[f] = m
            cls = state[m]["guf"].find(raw[f][m])
            groups.setdefault(m, {}).setdefault(cls, []).append(f)
        else:
            parent[f] = None

    fkey: dict = {}

    def content(r, ref) -> tuple:
        kids = groups.get(r)
        if not kids:
            return ()
        st = state[r]
        edges: dict = {}
        for g, bag in st["edge"].items():
            edges.setdefault(st["guf"].find(g), set()).update(bag)
        items = []
        for cls, members in kids.items():
            label = tuple(sorted((ref(w), side) for (w, side) in edges[cls]))
            items.append((label, tuple(sorted(fkey[m] for m in members))))
        return tuple(sorted(items))

    for f in sorted(floats, key=depth.__getitem__, reverse=True):
        fkey[f] = min(repr((cert, content(f, ref))) for cert, ref in variants[f])
    akeys = tuple(repr((cert, content(r, ref))) for r, (cert, ref) in certs.items())

    through = [r for r in anchored if dom_of[r] and cod_of[r]]
    profiled = []
    for f in floats:
        if parent[f] is None:
            prof = []
            for t in through:
                st = state[t]
                side = "L" if st["guf"].find(raw[f][t]) == st["guf"].find(st["init"][0]) else "R"
                prof.append((inst[t], side))
            profiled.append((tuple(prof), fkey[f]))
    dom_seq = tuple(inst[comp_w[w]] for w in range(len(dom)))
    cod_seq = tuple(inst[comp_w[w]] for w in final)
    return repr((",".join(dom), dom_seq, cod_seq, akeys, tuple(sorted(profiled))))


def equal(d1: Diagram, d2: Diagram) -> bool:
    """Equality in the free monoidal category (interchange isotopy)."""
    return d1.shape == d2.shape and _eq_key(d1) == _eq_key(d2)


def boxes_of(d: Diagram) -> Counter:
    """Multiset of box names, including boxes nested in fillings and cuts."""
    out: Counter = Counter()
    match d:
        case BoxInstance():
            out[d.name] += 1
            for f in d.fillings:
                out += boxes_of(f)
        case Compose(first=a, second=b) | Tensor(top=a, bottom=b):
            out += boxes_of(a)
            out += boxes_of(b)
        case Cut(body=b):
            out += boxes_of(b)
    return out


def iter_generators(d: Diagram, recursive: bool = True) -> Iterator[Diagram]:
    """Yield generator nodes in normalized layer order."""
    for layer in normalize(d).layers:
        g = layer.gen
        yield g
        if recursive:
            if isinstance(g, Cut):
                yield from iter_generators(g.body, recursive)
            elif isinstance(g, BoxInstance):
                for f in g.fillings:
                    yield from iter_generators(f, recursive)


# ---------------------------------------------------------------------------
# Printing and JSON

def diagram_expr(d: Diagram) -> str:
    """Render as a surface expression (``>>`` composition, ``@`` tensor)."""

    def tens_part(x: Diagram) -> str:
        s = diagram_expr(x)
        return f"({s})" if isinstance(x, Compose) else s

    match d:
        case Id(objects=objs):
            return f"id({pretty_object_list(objs)})"
        case BoxInstance():
            if d.fillings:
                return f"{d.name}({', '.join(diagram_expr(f) for f in d.fillings)})"
            return d.name
        case Compose(first=a, second=b):
            return f"{diagram_expr(a)} >> {diagram_expr(b)}"
        case Tensor(top=a, bottom=b):
            return f"{tens_part(a)} @ {tens_part(b)}"
        case Spider(legs_in=m, legs_out=n, obj=o):
            return f"spider({m}, {n}, {o})"
        case Cup(obj=o):
            return f"cup({o})"
        case Cap(obj=o):
            return f"cap({o})"
        case Swap(top=a, bottom=b):
            return f"swap({a}, {b})"
        case Cut(body=b):
            return f"cut({diagram_expr(b)})"
    raise TypeError(f"not a diagram: {d!r}")


def to_json(d: Diagram) -> dict:
    match d:
        case Id(objects=objs):
            return {"kind": "id", "objects": list(objs)}
        case BoxInstance():
            out = {"kind": "box", "name": d.name}
            if d.fillings:
                out["fillings"] = [to_json(f) for f in d.fillings]
            return out
        case Compose(first=a, second=b):
            return {"kind": "compose", "first": to_json(a), "second": to_json(b)}
        case Tensor(top=a, bottom=b):
            return {"kind": "tensor", "top": to_json(a), "bottom": to_json(b)}
        case Spider(legs_in=m, legs_out=n, obj=o):
            return {"kind": "spider", "legs_in": m, "legs_out": n, "object": o}
        case Cup(obj=o):
            return {"kind": "cup", "object": o}
        case Cap(obj=o):
            return {"kind": "cap", "object": o}
        case Swap(top=a, bottom=b):
            return {"kind": "swap", "top": a, "bottom": b}
        case Cut(body=b):
            return {"kind": "cut", "body": to_json(b)}
    raise TypeError(f"not a diagram: {d!r}")


def from_json(data: dict, sig: MonoidalSignature) -> Diagram:
    kind = data.get("kind")
    if kind == "id":
        return Id(tuple(data["objects"]))
    if kind == "box":
        fillings = tuple(from_json(f, sig) for f in data.get("fillings", []))
        return BoxInstance(sig.box(data["name"]), fillings)
    if kind == "compose":
        return Compose(from_json(data["first"], sig), from_json(data["second"], sig))
    if kind == "tensor":
        return Tensor(from_json(data["top"], sig), from_json(data["bottom"], sig))
    if kind == "spider":
        return Spider(data["legs_in"], data["legs_out"], data["object"])
    if kind == "cup":
        return Cup(data["object"])
    if kind == "cap":
        return Cap(data["object"])
    if kind == "swap":
        return Swap(data["top"], data["bottom"])
    if kind == "cut":
        return Cut(from_json(data["body"], sig))
    raise ShapeMismatchError(f"unknown diagram kind {kind!r} in JSON")
