"""Shared vocabulary: grammar types, object lists, shapes, signatures, semantic types.

Grammar types are the categorial side (atoms, Over ``x <- y``, Under ``y -> x``).
Semantic types classify meaning terms: diagram shapes over a monoidal signature,
arrows between them, prenex shape polymorphism, and the two logic sorts
(first-order terms and formulas).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .errors import MissingSymbolError, TypeSyntaxError


# ---------------------------------------------------------------------------
# Grammar types

class GrammarType:
    """Base class for categorial grammar types."""

    __slots__ = ()

    def __str__(self) -> str:
        return pretty_grammar_type(self)


@dataclass(frozen=True, slots=True)
class Atom(GrammarType):
    name: str


@dataclass(frozen=True, slots=True)
class Over(GrammarType):
    """``result <- argument``: takes its argument on the right."""

    result: GrammarType
    argument: GrammarType


@dataclass(frozen=True, slots=True)
class Under(GrammarType):
    """``argument -> result``: takes its argument on the left."""

    argument: GrammarType
    result: GrammarType


_TYPE_TOKEN = re.compile(r"\s*(<-|->|←|→|\(|\)|[A-Za-z_][A-Za-z0-9_']*)")


def _tokenize_type(text: str) -> list[tuple[str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TYPE_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise TypeSyntaxError(f"bad character in grammar type at column {pos + 1}: {text[pos:].strip()[0]!r}")
            break
        tok = m.group(1)
        tokens.append((tok, m.start(1)))
        pos = m.end()
    return tokens


def parse_grammar_type(text: str, atoms: set[str] | None = None) -> GrammarType:
    """Parse ``x <- y`` / ``y -> x`` with parentheses; arrows are non-associative.

    When ``atoms`` is given, undeclared atom names are rejected.
    """
    tokens = _tokenize_type(text)
    if not tokens:
        raise TypeSyntaxError("empty grammar type")

    def atom_or_group(i: int) -> tuple[GrammarType, int]:
        if i >= len(tokens):
            raise TypeSyntaxError("grammar type ends where an atom or group was expected")
        tok, col = tokens[i]
        if tok == "(":
            inner, i = arrow(i + 1)
            if i >= len(tokens) or tokens[i][0] != ")":
                raise TypeSyntaxError(f"missing ')' in grammar type after column {col + 1}")
            return inner, i + 1
        if tok in ("<-", "->", "←", "→", ")"):
            raise TypeSyntaxError(f"unexpected {tok!r} at column {col + 1}")
        if atoms is not None and tok not in atoms:
            raise MissingSymbolError(f"unknown atom {tok!r} in grammar type")
        return Atom(tok), i + 1

    def arrow(i: int) -> tuple[GrammarType, int]:
        left, i = atom_or_group(i)
        if i < len(tokens) and tokens[i][0] in ("<-", "←", "->", "→"):
            op, col = tokens[i]
            right, i = atom_or_group(i + 1)
            if i < len(tokens) and tokens[i][0] in ("<-", "←", "->", "→"):
                raise TypeSyntaxError(
                    f"arrows are non-associative; parenthesize the type at column {tokens[i][1] + 1}"
                )
            return (Over(left, right) if op in ("<-", "←") else Under(left, right)), i
        return left, i

    ty, i = arrow(0)
    if i != len(tokens):
        raise TypeSyntaxError(f"trailing input in grammar type at column {tokens[i][1] + 1}")
    return ty


def pretty_grammar_type(ty: GrammarType) -> str:
    """Inverse of parse_grammar_type; non-atomic subtrees are parenthesized."""

    def wrap(t: GrammarType) -> str:
        s = pretty_grammar_type(t)
        return s if isinstance(t, Atom) else f"({s})"

    match ty:
        case Atom(name):
            return name
        case Over(res, arg):
            return f"{wrap(res)} <- {wrap(arg)}"
        case Under(arg, res):
            return f"{wrap(arg)} -> {wrap(res)}"
    raise TypeError(f"not a grammar type: {ty!r}")


# ---------------------------------------------------------------------------
# Object lists and shapes

ObjectList = tuple  # tuple[str | TyVar, ...]; ground lists hold str only


_fresh_counter = itertools.count()


@dataclass(frozen=True, slots=True)
class TyVar:
    """A type variable occurring inside object lists (or as a whole list).

    kind 'list' stands for an object list and splices in place; kind 'obj'
    stands for a single object. flavor 'bound' only occurs under a PolyT
    binder, 'rigid' is a skolem introduced when checking against a PolyT,
    'flex' is a unification metavariable.
    """

    uid: int
    name: str
    kind: str = "list"  # "list" | "obj"
    flavor: str = "bound"  # "bound" | "rigid" | "flex"

    @staticmethod
    def fresh(name: str, kind: str = "list", flavor: str = "flex") -> "TyVar":
        return TyVar(next(_fresh_counter), name, kind, flavor)

    def __str__(self) -> str:
        return self.name


def object_list(items) -> ObjectList:
    """Build an object list from an iterable of object names / TyVars."""
    return tuple(items)


def parse_object_list(text: str, objects: set[str] | None = None) -> ObjectList:
    """Parse a whitespace-separated object list; '1' (or '') is the unit."""
    text = text.strip()
    if text in ("", "1"):
        return ()
    names = text.split()
    if objects is not None:
        for n in names:
            if n not in objects:
                raise MissingSymbolError(f"unknown object {n!r}")
    return tuple(names)


def pretty_object_list(objs: ObjectList) -> str:
    return " ".join(str(o) for o in objs) if objs else "1"


@dataclass(frozen=True, slots=True)
class DiagramShape:
    """Input/output boundary of a diagram: a pair of object lists."""

    dom: ObjectList
    cod: ObjectList

    def __str__(self) -> str:
        return f"({pretty_object_list(self.dom)}, {pretty_object_list(self.cod)})"


# ---------------------------------------------------------------------------
# Monoidal signatures

@dataclass(frozen=True, slots=True)
class BoxDecl:
    """A generator declaration. ``holes`` lists the shapes of diagram slots a
    box expects (an operator on homsets); plain boxes have none. ``singleton``
    marks a unary predicate as naming exactly one individual (a proper noun).
    """

    name: str
    dom: ObjectList
    cod: ObjectList
    holes: tuple[DiagramShape, ...] = ()
    singleton: bool = False

    @property
    def shape(self) -> DiagramShape:
        return DiagramShape(self.dom, self.cod)


@dataclass(frozen=True)
class MonoidalSignature:
    objects: frozenset[str]
    boxes: dict[str, BoxDecl] = field(default_factory=dict)

    def box(self, name: str) -> BoxDecl:
        try:
            return self.boxes[name]
        except KeyError:
            raise MissingSymbolError(f"unknown box {name!r}") from None

    def singletons(self) -> frozenset[str]:
        return frozenset(n for n, b in self.boxes.items() if b.singleton)

    @staticmethod
    def from_json(data: dict) -> "MonoidalSignature":
        objects = set(data.get("objects", []))
        boxes: dict[str, BoxDecl] = {}
        for spec in data.get("boxes", []):
            holes = tuple(
                DiagramShape(parse_object_list(h[0], objects), parse_object_list(h[1], objects))
                for h in spec.get("holes", [])
            )
            decl = BoxDecl(
                name=spec["name"],
                dom=parse_object_list(spec.get("dom", "1"), objects),
                cod=parse_object_list(spec.get("cod", "1"), objects),
                holes=holes,
                singleton=bool(spec.get("singleton", False)),
            )
            if decl.name in boxes:
                raise TypeSyntaxError(f"duplicate box {decl.name!r} in signature")
            boxes[decl.name] = decl
        sig = MonoidalSignature(frozenset(objects), boxes)
        validate_signature(sig)
        return sig

    def to_json(self) -> dict:
        return {
            "objects": sorted(self.objects),
            "boxes": [
                {
                    "name": b.name,
                    "dom": pretty_object_list(b.dom),
                    "cod": pretty_object_list(b.cod),
                    **({"holes": [[pretty_object_list(h.dom), pretty_object_list(h.cod)] for h in b.holes]} if b.holes else {}),
                    **({"singleton": True} if b.singleton else {}),
                }
                for _, b in sorted(self.boxes.items())
            ],
        }


def validate_signature(sig: MonoidalSignature) -> None:
    """Check every boundary and hole mentions declared objects only."""
    for b in sig.boxes.values():
        rows = [b.dom, b.cod]
        for h in b.holes:
            rows += [h.dom, h.cod]
        for row in rows:
            for obj in row:
                if obj not in sig.objects:
                    raise MissingSymbolError(f"box {b.name!r} uses undeclared object {obj!r}")


# ---------------------------------------------------------------------------
# Semantic types

class SemType:
    __slots__ = ()

    def __str__(self) -> str:
        return pretty_sem_type(self)


@dataclass(frozen=True, slots=True)
class DiagT(SemType):
    dom: ObjectList
    cod: ObjectList

    @property
    def shape(self) -> DiagramShape:
        return DiagramShape(self.dom, self.cod)


@dataclass(frozen=True, slots=True)
class ArrowT(SemType):
    arg: SemType
    res: SemType


@dataclass(frozen=True, slots=True)
class PolyT(SemType):
    """Prenex polymorphism over an object-list variable."""

    var: str
    body: SemType


@dataclass(frozen=True, slots=True)
class FormT(SemType):
    pass


@dataclass(frozen=True, slots=True)
class TermT(SemType):
    pass


@dataclass(frozen=True, slots=True)
class MetaT(SemType):
    """Unification metavariable at the semantic-type level (solver internal)."""

    uid: int

    @staticmethod
    def fresh() -> "MetaT":
        return MetaT(next(_fresh_counter))


def pretty_sem_type(ty: SemType) -> str:
    match ty:
        case DiagT(dom, cod):
            return f"({pretty_object_list(dom)}, {pretty_object_list(cod)})"
        case ArrowT(arg, res):
            left = pretty_sem_type(arg)
            if isinstance(arg, (ArrowT, PolyT)):
                left = f"({left})"
            return f"{left} -> {pretty_sem_type(res)}"
        case PolyT(var, body):
            return f"forall {var}. {pretty_sem_type(body)}"
        case FormT():
            return "form"
        case TermT():
            return "term"
        case MetaT(uid):
            return f"?{uid}"
    raise TypeError(f"not a semantic type: {ty!r}")


class _SemTypeParser:
    """Recursive-descent parser for the textual semantic-type syntax.

    grammar:  ty := 'forall' IDENT '.' ty | arrow
              arrow := part ('->' arrow)?
              part := 'form' | 'term' | '(' objs ',' objs ')' | '(' ty ')'
              objs := '1' | IDENT+
    """

    _TOK = re.compile(r"\s*(->|→|\(|\)|,|\.|[A-Za-z_][A-Za-z0-9_']*|1)")

    def __init__(self, text: str, objects: set[str] | None):
        self.toks: list[str] = []
        pos = 0
        while pos < len(text):
            m = self._TOK.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise TypeSyntaxError(f"bad character in semantic type: {text[pos:].strip()[0]!r}")
                break
            self.toks.append(m.group(1))
            pos = m.end()
        self.i = 0
        self.objects = objects
        self.bound: list[str] = []

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise TypeSyntaxError("unexpected end of semantic type")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise TypeSyntaxError(f"expected {tok!r} in semantic type, got {got!r}")

    def parse(self) -> SemType:
        ty = self.ty()
        if self.peek() is not None:
            raise TypeSyntaxError(f"trailing input in semantic type at {self.peek()!r}")
        return ty

    def ty(self) -> SemType:
        if self.peek() in ("forall", "∀"):
            self.next()
            var = self.next()
            self.expect(".")
            self.bound.append(var)
            body = self.ty()
            self.bound.pop()
            return PolyT(var, body)
        return self.arrow()

    def arrow(self) -> SemType:
        left = self.part()
        if self.peek() in ("->", "→"):
            self.next()
            return ArrowT(left, self.arrow())
        return left

    def objs(self, stop: str) -> ObjectList:
        items: list = []
        while self.peek() != stop:
            tok = self.next()
            if tok == "1":
                continue
            if tok in self.bound:
                items.append(TyVar(-1, tok, "list", "bound"))
            elif self.objects is not None and tok not in self.objects:
                raise MissingSymbolError(f"unknown object {tok!r} in semantic type")
            else:
                items.append(tok)
        return tuple(items)

    def part(self) -> SemType:
        tok = self.next()
        if tok == "form":
            return FormT()
        if tok == "term":
            return TermT()
        if tok != "(":
            raise TypeSyntaxError(f"unexpected {tok!r} in semantic type")
        # distinguish a shape '(objs, objs)' from a grouping '(ty)'
        depth, j, is_shape = 0, self.i, False
        while j < len(self.toks):
            t = self.toks[j]
            if t == "(":
                depth += 1
            elif t == ")":
                if depth == 0:
                    break
                depth -= 1
            elif t == "," and depth == 0:
                is_shape = True
                break
            j += 1
        if is_shape:
            dom = self.objs(",")
            self.expect(",")
            cod = self.objs(")")
            self.expect(")")
            return DiagT(dom, cod)
        inner = self.ty()
        self.expect(")")
        return inner


def parse_sem_type(text: str, objects: set[str] | None = None) -> SemType:
    return _SemTypeParser(text, objects).parse()


def semantic_type_of(ty: GrammarType, assignment: dict[str, SemType]) -> SemType:
    """Map a grammar type through an atom assignment, homomorphically on arrows."""
    match ty:
        case Atom(name):
            try:
                return assignment[name]
            except KeyError:
                raise MissingSymbolError(f"atom {name!r} has no semantic assignment") from None
        case Over(res, arg):
            return ArrowT(semantic_type_of(arg, assignment), semantic_type_of(res, assignment))
        case Under(arg, res):
            return ArrowT(semantic_type_of(arg, assignment), semantic_type_of(res, assignment))
    raise TypeError(f"not a grammar type: {ty!r}")
