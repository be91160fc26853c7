"""Simply-typed lambda calculus over diagram- or formula-building constants.

The calculus is the glue between grammar and semantics: lexicon entries are
surface-syntax terms, sentence meanings are applications of those terms, and
closed beta-normal terms of ground type evaluate to a
:class:`~peircelex.diagram.Diagram` or a :class:`~peircelex.logic.Formula`.

Typing is bidirectional.  Constants may carry prenex ``forall`` schemes over
object-list/object variables (the shape-indexed families ``compose``,
``tensor``, ``id`` and friends); these are instantiated with fresh flexible
variables at every use site and solved by unification on object rows.  Row
unification matches concrete prefixes and suffixes and binds a single list
variable to the remainder; anything genuinely underdetermined is retried from
a deferred queue and finally reported as an ambiguous instantiation, never
defaulted.  Checking a term against a ``forall`` type skolemizes the binder to
a rigid variable, which is exactly enough rank-2 polymorphism for lexicons
whose noun-phrase type quantifies over the missing wires.

``transpose`` gets special treatment: its type depends on whether the argument
is a state or an effect, so the checker records a constraint and resolves it
once the argument's shape is known.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from . import diagram as dg
from . import logic as lg
from .core import (
    ArrowT,
    DiagT,
    FormT,
    MetaT,
    MonoidalSignature,
    ObjectList,
    PolyT,
    SemType,
    TermT,
    TyVar,
    pretty_object_list,
    pretty_sem_type,
)
from .errors import (
    EvalError,
    MissingSymbolError,
    TermSyntaxError,
    TypeCheckError,
)

__all__ = [
    "Term",
    "Var",
    "Lam",
    "App",
    "Const",
    "parse_term",
    "pretty_term",
    "free_term_vars",
    "alpha_eq",
    "beta_normalize",
    "ConstantTable",
    "ConstRule",
    "diagram_constants",
    "logic_constants",
    "typecheck",
    "elaborate",
    "eval_closed",
]


# --------------------------------------------------------------------------
# Term AST
# --------------------------------------------------------------------------


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return pretty_term(self)

    def __repr__(self) -> str:
        return f"<Term {self}>"


@dataclass(frozen=True, slots=True, repr=False)
class Var(Term):
    name: str


@dataclass(frozen=True, slots=True, repr=False)
class Lam(Term):
    var: str
    body: Term


@dataclass(frozen=True, slots=True, repr=False)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True, slots=True, repr=False)
class Const(Term):
    """A named constant; ``inst`` records its (possibly solved) type.

    The surface parser fills ``inst`` for shape-anchored builtins such as
    ``id(N S)``; :func:`elaborate` replaces it with the fully solved use-site
    type, which evaluation later consults for shape information.
    """

    name: str
    inst: SemType | None = None


def free_term_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Lam(var, body):
            return free_term_vars(body) - {var}
        case App(fn, arg):
            return free_term_vars(fn) | free_term_vars(arg)
        case Const():
            return frozenset()
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Structural equality up to renaming of bound variables."""

    def go(a: Term, b: Term, env1: dict[str, int], env2: dict[str, int], depth: int) -> bool:
        match (a, b):
            case (Var(x), Var(y)):
                return env1.get(x, x) == env2.get(y, y)
            case (Lam(x, bx), Lam(y, by)):
                return go(bx, by, {**env1, x: depth}, {**env2, y: depth}, depth + 1)
            case (App(f1, a1), App(f2, a2)):
                return go(f1, f2, env1, env2, depth) and go(a1, a2, env1, env2, depth)
            case (Const(n1, _), Const(n2, _)):
                return n1 == n2
        return False

    return go(t1, t2, {}, {}, 0)


# --------------------------------------------------------------------------
# Surface syntax
# --------------------------------------------------------------------------

RESERVED = frozenset(
    {"cut", "id", "spider", "cup", "cap", "swap", "transpose", "forall", "exists", "true", "false"}
)

_TOKEN = re.compile(
    r"\s*(>>|->|→|\^T|ᵀ|∘|⊗|@|&|∧|\||∨|~|¬|=|\\|λ|\(|\)|,|\.|[0-9]+|[A-Za-z_][A-Za-z0-9_']*)"
)


def _tokenize_term(text: str) -> list[tuple[str, int]]:
    toks: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            rest = text[pos:].strip()
            if not rest:
                break
            raise TermSyntaxError(f"bad character {rest[0]!r} at position {pos}")
        toks.append((m.group(1), m.start(1)))
        pos = m.end()
    return toks


class _TermParser:
    """Precedence-climbing parser for the surface term syntax.

    From loosest to tightest: lambda / quantifier sugar, ``->`` (right
    associative), ``|``, ``&``, ``=``, composition (``>>`` reads left to
    right, ``∘`` is classical order), tensor (``⊗``/``@``), prefix ``~``,
    postfix transpose (``^T``/``ᵀ``), then call syntax ``f(a, b)``.
    """

    def __init__(self, text: str):
        self.toks = _tokenize_term(text)
        self.i = 0
        self.text = text

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise TermSyntaxError("unexpected end of term")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise TermSyntaxError(f"expected {tok!r}, got {got!r} in {self.text!r}")

    def parse(self, scope: frozenset[str] = frozenset()) -> Term:
        t = self.term(scope)
        if self.peek() is not None:
            raise TermSyntaxError(f"trailing input at {self.peek()!r} in {self.text!r}")
        return t

    def term(self, scope: frozenset[str]) -> Term:
        tok = self.peek()
        if tok in ("\\", "λ"):
            self.next()
            binders = self.binders(scope)
            body = self.term(scope | set(binders))
            for b in reversed(binders):
                body = Lam(b, body)
            return body
        if tok in ("forall", "exists"):
            self.next()
            binders = self.binders(scope)
            body = self.term(scope | set(binders))
            for b in reversed(binders):
                body = App(Const(tok), Lam(b, body))
            return body
        return self.implication(scope)

    def binders(self, scope: frozenset[str]) -> list[str]:
        names: list[str] = []
        while self.peek() != ".":
            name = self.next()
            if not name[0].isalpha() and name[0] != "_":
                raise TermSyntaxError(f"bad binder {name!r}")
            if name in RESERVED:
                raise TermSyntaxError(f"{name!r} is reserved and cannot be a binder")
            names.append(name)
        self.expect(".")
        if not names:
            raise TermSyntaxError("lambda with no binders")
        return names

    def implication(self, scope: frozenset[str]) -> Term:
        left = self.disjunction(scope)
        if self.peek() in ("->", "→"):
            self.next()
            right = self.implication(scope)
            return App(App(Const("->"), left), right)
        return left

    def disjunction(self, scope: frozenset[str]) -> Term:
        out = self.conjunction(scope)
        while self.peek() in ("|", "∨"):
            self.next()
            out = App(App(Const("|"), out), self.conjunction(scope))
        return out

    def conjunction(self, scope: frozenset[str]) -> Term:
        out = self.equation(scope)
        while self.peek() in ("&", "∧"):
            self.next()
            out = App(App(Const("&"), out), self.equation(scope))
        return out

    def equation(self, scope: frozenset[str]) -> Term:
        left = self.composition(scope)
        if self.peek() == "=":
            self.next()
            return App(App(Const("="), left), self.composition(scope))
        return left

    def composition(self, scope: frozenset[str]) -> Term:
        out = self.tensor(scope)
        while self.peek() in (">>", "∘"):
            op = self.next()
            rhs = self.tensor(scope)
            if op == ">>":
                out = App(App(Const("compose"), out), rhs)
            else:  # classical order: g ∘ f runs f first
                out = App(App(Const("compose"), rhs), out)
        return out

    def tensor(self, scope: frozenset[str]) -> Term:
        out = self.prefix(scope)
        while self.peek() in ("⊗", "@"):
            self.next()
            out = App(App(Const("tensor"), out), self.prefix(scope))
        return out

    def prefix(self, scope: frozenset[str]) -> Term:
        if self.peek() in ("~", "¬"):
            self.next()
            return App(Const("~"), self.prefix(scope))
        return self.postfix(scope)

    def postfix(self, scope: frozenset[str]) -> Term:
        out = self.application(scope)
        while self.peek() in ("^T", "ᵀ"):
            self.next()
            out = App(Const("transpose"), out)
        return out

    def application(self, scope: frozenset[str]) -> Term:
        out = self.atom(scope)
        while self.peek() == "(":
            self.next()
            args = [self.term(scope)]
            while self.peek() == ",":
                self.next()
                args.append(self.term(scope))
            self.expect(")")
            for a in args:
                out = App(out, a)
        return out

    def objlist(self, stop: str) -> ObjectList:
        items: list[str] = []
        while self.peek() != stop:
            tok = self.next()
            if tok == "1":
                continue
            if not (tok[0].isalpha() or tok[0] == "_"):
                raise TermSyntaxError(f"expected an object name, got {tok!r}")
            items.append(tok)
        return tuple(items)

    def atom(self, scope: frozenset[str]) -> Term:
        tok = self.next()
        if tok == "(":
            inner = self.term(scope)
            self.expect(")")
            return inner
        if tok == "cut":
            self.expect("(")
            inner = self.term(scope)
            self.expect(")")
            return App(Const("cut"), inner)
        if tok == "transpose":
            self.expect("(")
            inner = self.term(scope)
            self.expect(")")
            return App(Const("transpose"), inner)
        if tok == "id":
            self.expect("(")
            objs = self.objlist(")")
            self.expect(")")
            return Const("id", DiagT(objs, objs))
        if tok == "spider":
            self.expect("(")
            m = self.next()
            self.expect(",")
            n = self.next()
            if not (m.isdigit() and n.isdigit()):
                raise TermSyntaxError(f"spider legs must be numbers, got {m!r}, {n!r}")
            anchor = None
            if self.peek() == ",":
                self.next()
                obj = self.next()
                anchor = DiagT((obj,) * int(m), (obj,) * int(n))
            self.expect(")")
            return Const(f"spider_{int(m)}_{int(n)}", anchor)
        if tok == "cup" or tok == "cap":
            self.expect("(")
            obj = self.next()
            self.expect(")")
            shape = ((obj, obj), ()) if tok == "cup" else ((), (obj, obj))
            return Const(tok, DiagT(*shape))
        if tok == "swap":
            self.expect("(")
            a = self.next()
            self.expect(",")
            b = self.next()
            self.expect(")")
            return Const("swap", DiagT((a, b), (b, a)))
        if tok in ("true", "false"):
            return Const(tok)
        if tok[0].isalpha() or tok[0] == "_":
            return Var(tok) if tok in scope else Const(tok)
        raise TermSyntaxError(f"unexpected {tok!r} in {self.text!r}")


def parse_term(text: str) -> Term:
    """Parse the surface syntax; free identifiers become constants."""
    return _TermParser(text).parse()


# Pretty-printing with resugaring; precedence mirrors the parser.
_P_LAM, _P_IMPL, _P_OR, _P_AND, _P_EQ, _P_COMP, _P_TENS, _P_NOT, _P_POST, _P_APP = range(10)


def _show_const(name: str, inst: SemType | None) -> str:
    if name == "id" and isinstance(inst, DiagT):
        return f"id({pretty_object_list(inst.dom)})"
    if name == "cup" and isinstance(inst, DiagT) and len(inst.dom) == 2:
        return f"cup({inst.dom[0]})"
    if name == "cap" and isinstance(inst, DiagT) and len(inst.cod) == 2:
        return f"cap({inst.cod[0]})"
    if name == "swap" and isinstance(inst, DiagT) and len(inst.dom) == 2:
        return f"swap({inst.dom[0]}, {inst.dom[1]})"
    if name.startswith("spider_"):
        parts = name.split("_")
        if len(parts) == 3:
            if isinstance(inst, DiagT) and (inst.dom or inst.cod):
                obj = (inst.dom or inst.cod)[0]
                if isinstance(obj, str):
                    return f"spider({parts[1]}, {parts[2]}, {obj})"
            return f"spider({parts[1]}, {parts[2]})"
    return name


def pretty_term(t: Term) -> str:
    def show(t: Term, ctx: int) -> str:
        match t:
            case Var(name):
                return name
            case Const(name, inst):
                return _show_const(name, inst)
            case Lam(_, _):
                binders = []
                body = t
                while isinstance(body, Lam):
                    binders.append(body.var)
                    body = body.body
                text = f"\\{' '.join(binders)}. {show(body, _P_LAM)}"
                return f"({text})" if ctx > _P_LAM else text
            case App(App(Const("compose", _), a), b):
                text = f"{show(a, _P_COMP)} >> {show(b, _P_COMP + 1)}"
                return f"({text})" if ctx > _P_COMP else text
            case App(App(Const("tensor", _), a), b):
                text = f"{show(a, _P_TENS)} @ {show(b, _P_TENS + 1)}"
                return f"({text})" if ctx > _P_TENS else text
            case App(App(Const("&", _), a), b):
                text = f"{show(a, _P_AND)} & {show(b, _P_AND + 1)}"
                return f"({text})" if ctx > _P_AND else text
            case App(App(Const("|", _), a), b):
                text = f"{show(a, _P_OR)} | {show(b, _P_OR + 1)}"
                return f"({text})" if ctx > _P_OR else text
            case App(App(Const("->", _), a), b):
                text = f"{show(a, _P_IMPL + 1)} -> {show(b, _P_IMPL)}"
                return f"({text})" if ctx > _P_IMPL else text
            case App(App(Const("=", _), a), b):
                text = f"{show(a, _P_EQ + 1)} = {show(b, _P_EQ + 1)}"
                return f"({text})" if ctx > _P_EQ else text
            case App(Const("~", _), a):
                text = f"~{show(a, _P_NOT)}"
                return f"({text})" if ctx > _P_NOT else text
            case App(Const("cut", _), a):
                return f"cut({show(a, _P_LAM)})"
            case App(Const("transpose", _), a):
                text = f"{show(a, _P_POST + 1)}^T"
                return f"({text})" if ctx > _P_POST else text
            case App(Const(("forall" | "exists") as q, _), Lam(var, body)):
                text = f"{q} {var}. {show(body, _P_LAM)}"
                return f"({text})" if ctx > _P_LAM else text
            case App(_, _):
                head = t
                args: list[Term] = []
                while isinstance(head, App):
                    args.append(head.arg)
                    head = head.fn
                args.reverse()
                inner = ", ".join(show(a, _P_LAM) for a in args)
                return f"{show(head, _P_APP)}({inner})"
        raise TypeError(f"not a term: {t!r}")

    return show(t, _P_LAM)


# --------------------------------------------------------------------------
# Beta normalization
# --------------------------------------------------------------------------


def _fresh_name(base: str, avoid: frozenset[str]) -> str:
    if base not in avoid:
        return base
    for i in itertools.count():
        candidate = f"{base}{i}"
        if candidate not in avoid:
            return candidate
    raise AssertionError("unreachable")


def _subst(t: Term, name: str, value: Term) -> Term:
    match t:
        case Var(x):
            return value if x == name else t
        case Const():
            return t
        case App(fn, arg):
            return App(_subst(fn, name, value), _subst(arg, name, value))
        case Lam(x, body):
            if x == name:
                return t
            if x in free_term_vars(value) and name in free_term_vars(body):
                fresh = _fresh_name(x, free_term_vars(value) | free_term_vars(body) | {name})
                body = _subst(body, x, Var(fresh))
                x = fresh
            return Lam(x, _subst(body, name, value))
    raise TypeError(f"not a term: {t!r}")


def beta_normalize(t: Term, strategy: str = "normal", max_steps: int = 100_000) -> Term:
    """Full beta-normal form.

    ``strategy`` picks the redex order: "normal" contracts leftmost-outermost
    first, "applicative" normalizes arguments before contracting.  Both reach
    the same normal form on typed terms; the knob exists so tests can confirm
    that.
    """
    if strategy not in ("normal", "applicative"):
        raise ValueError(f"unknown strategy {strategy!r}")
    steps = 0

    def tick() -> None:
        nonlocal steps
        steps += 1
        if steps > max_steps:
            raise EvalError(f"no normal form within {max_steps} reductions")

    def go(t: Term) -> Term:
        match t:
            case Var() | Const():
                return t
            case Lam(x, body):
                return Lam(x, go(body))
            case App(fn, arg):
                if strategy == "applicative":
                    fn = go(fn)
                    arg = go(arg)
                    if isinstance(fn, Lam):
                        tick()
                        return go(_subst(fn.body, fn.var, arg))
                    return App(fn, arg)
                fn = go(fn)
                if isinstance(fn, Lam):
                    tick()
                    return go(_subst(fn.body, fn.var, arg))
                return App(fn, go(arg))
        raise TypeError(f"not a term: {t!r}")

    return go(t)


# --------------------------------------------------------------------------
# Constant tables
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstRule:
    """How a constant consumes evaluated arguments.

    ``build(args, inst)`` receives ``arity`` evaluated arguments plus the
    constant's solved use-site type.  Rules with ``needs_binder`` instead
    receive a variable name and an evaluated body (quantifiers).
    """

    arity: int
    build: object
    needs_binder: bool = False


def _bound(name: str, kind: str) -> TyVar:
    return TyVar(-1, name, kind, "bound")


def _poly(binders: list[tuple[str, str]], body: SemType) -> SemType:
    for name, _ in reversed(binders):
        body = PolyT(name, body)
    return body


class ConstantTable:
    """Typed constants with evaluation rules; the primitive vocabulary."""

    def __init__(self, kind: str, schemes: dict[str, SemType], rules: dict[str, ConstRule]):
        self.kind = kind
        self._schemes = schemes
        self._rules = rules

    def scheme(self, name: str) -> SemType:
        ty = self._schemes.get(name) or self._structural_scheme(name)
        if ty is None:
            raise MissingSymbolError(f"unknown constant {name!r}")
        return ty

    def rule(self, name: str) -> ConstRule:
        rule = self._rules.get(name) or self._structural_rule(name)
        if rule is None:
            raise MissingSymbolError(f"unknown constant {name!r}")
        return rule

    def knows(self, name: str) -> bool:
        try:
            self.scheme(name)
            return True
        except MissingSymbolError:
            return False

    # Shape-indexed families, generated on demand.

    def _structural_scheme(self, name: str) -> SemType | None:
        if self.kind != "diagram":
            return None
        x, y, z, w = (_bound(n, "list") for n in "xyzw")
        a, b = _bound("a", "obj"), _bound("b", "obj")
        if name == "compose":
            return _poly(
                [("x", "list"), ("y", "list"), ("z", "list")],
                ArrowT(DiagT((x,), (y,)), ArrowT(DiagT((y,), (z,)), DiagT((x,), (z,)))),
            )
        if name == "tensor":
            return _poly(
                [("x", "list"), ("y", "list"), ("z", "list"), ("w", "list")],
                ArrowT(
                    DiagT((x,), (y,)),
                    ArrowT(DiagT((z,), (w,)), DiagT((x, z), (y, w))),
                ),
            )
        if name == "cut":
            return _poly(
                [("x", "list"), ("y", "list")],
                ArrowT(DiagT((x,), (y,)), DiagT((x,), (y,))),
            )
        if name == "id":
            return _poly([("x", "list")], DiagT((x,), (x,)))
        if name == "cup":
            return _poly([("a", "obj")], DiagT((a, a), ()))
        if name == "cap":
            return _poly([("a", "obj")], DiagT((), (a, a)))
        if name == "swap":
            return _poly([("a", "obj"), ("b", "obj")], DiagT((a, b), (b, a)))
        if name.startswith("spider_"):
            try:
                _, m, n = name.split("_")
                m, n = int(m), int(n)
            except ValueError:
                return None
            return _poly([("a", "obj")], DiagT((a,) * m, (a,) * n))
        return None

    def _structural_rule(self, name: str) -> ConstRule | None:
        if self.kind != "diagram":
            return None
        if name == "compose":
            return ConstRule(2, lambda args, inst: dg.compose(args[0], args[1]))
        if name == "tensor":
            return ConstRule(2, lambda args, inst: dg.tensor(args[0], args[1]))
        if name == "cut":
            return ConstRule(1, lambda args, inst: dg.cut(args[0]))
        if name == "transpose":
            return ConstRule(1, lambda args, inst: dg.transpose(args[0]))
        if name == "id":
            return ConstRule(
                0, lambda args, inst: dg.identity(_concrete_row(_inst_diag(inst, "id").dom, "id"))
            )
        if name == "cup":
            return ConstRule(
                0, lambda args, inst: dg.Cup(_concrete_row(_inst_diag(inst, "cup").dom, "cup")[0])
            )
        if name == "cap":
            return ConstRule(
                0, lambda args, inst: dg.Cap(_concrete_row(_inst_diag(inst, "cap").cod, "cap")[0])
            )
        if name == "swap":
            return ConstRule(
                0,
                lambda args, inst: dg.Swap(*_concrete_row(_inst_diag(inst, "swap").dom, "swap")[:2]),
            )
        if name.startswith("spider_"):
            try:
                _, m, n = name.split("_")
                m, n = int(m), int(n)
            except ValueError:
                return None

            def build_spider(args, inst, m=m, n=n):
                shape = _inst_diag(inst, "spider")
                row = _concrete_row(shape.dom if m else shape.cod, "spider")
                if not row:
                    raise EvalError("spider(0, 0) needs an explicit object")
                return dg.Spider(m, n, row[0])

            return ConstRule(0, build_spider)
        return None


def _concrete_row(row: ObjectList, who: str) -> tuple[str, ...]:
    if any(not isinstance(e, str) for e in row):
        raise EvalError(f"{who} has unresolved wire types {pretty_object_list(row)}")
    return row


def _inst_diag(inst: SemType | None, who: str) -> DiagT:
    if not isinstance(inst, DiagT):
        raise EvalError(f"{who} used without a solved wire type; elaborate the term first")
    return inst


def diagram_constants(sig: MonoidalSignature) -> ConstantTable:
    """Constants for the diagram pipeline: boxes plus structural generators."""
    schemes: dict[str, SemType] = {}
    rules: dict[str, ConstRule] = {}
    for name, decl in sig.boxes.items():
        ty: SemType = DiagT(decl.dom, decl.cod)
        for hole in reversed(decl.holes):
            ty = ArrowT(DiagT(hole.dom, hole.cod), ty)
        schemes[name] = ty
        rules[name] = ConstRule(
            len(decl.holes),
            lambda args, inst, decl=decl: dg.BoxInstance(decl, tuple(args)),
        )
    return ConstantTable("diagram", schemes, rules)


def logic_constants(fsig: lg.FolSignature) -> ConstantTable:
    """Constants for the formula pipeline: a first-order vocabulary."""
    form, term = FormT(), TermT()
    schemes: dict[str, SemType] = {
        "true": form,
        "false": form,
        "~": ArrowT(form, form),
        "&": ArrowT(form, ArrowT(form, form)),
        "|": ArrowT(form, ArrowT(form, form)),
        "->": ArrowT(form, ArrowT(form, form)),
        "=": ArrowT(term, ArrowT(term, form)),
        "forall": ArrowT(ArrowT(term, form), form),
        "exists": ArrowT(ArrowT(term, form), form),
    }
    rules: dict[str, ConstRule] = {
        "true": ConstRule(0, lambda args, inst: lg.Top()),
        "false": ConstRule(0, lambda args, inst: lg.Bottom()),
        "~": ConstRule(1, lambda args, inst: lg.Not(args[0])),
        "&": ConstRule(2, lambda args, inst: lg.And(args[0], args[1])),
        "|": ConstRule(2, lambda args, inst: lg.Or(args[0], args[1])),
        "->": ConstRule(2, lambda args, inst: lg.Implies(args[0], args[1])),
        "=": ConstRule(2, lambda args, inst: lg.Atom("=", (args[0], args[1]))),
        "forall": ConstRule(1, lambda var, body: lg.Forall(var, body), needs_binder=True),
        "exists": ConstRule(1, lambda var, body: lg.Exists(var, body), needs_binder=True),
    }
    for name in fsig.constants:
        schemes[name] = term
        rules[name] = ConstRule(0, lambda args, inst, name=name: lg.TermC(name))
    for name, arity in fsig.predicates:
        ty: SemType = form
        for _ in range(arity):
            ty = ArrowT(term, ty)
        schemes[name] = ty
        rules[name] = ConstRule(
            arity, lambda args, inst, name=name: lg.Atom(name, tuple(args))
        )
    return ConstantTable("logic", schemes, rules)


# --------------------------------------------------------------------------
# Type checking
# --------------------------------------------------------------------------


def _is_listvar(e) -> bool:
    return isinstance(e, TyVar) and e.kind == "list"


class _Solver:
    """Unification state: metavariables, row bindings, deferred constraints."""

    def __init__(self) -> None:
        self.metas: dict[int, SemType] = {}
        self.rows: dict[int, ObjectList] = {}
        self.objs: dict[int, object] = {}
        self.deferred: list[tuple[ObjectList, ObjectList, str]] = []
        self.transposes: list[tuple[SemType, SemType, str]] = []

    # -- dereferencing ----------------------------------------------------

    def prune(self, t: SemType) -> SemType:
        while isinstance(t, MetaT) and t.uid in self.metas:
            t = self.metas[t.uid]
        return t

    def _deref_entry(self, e):
        while isinstance(e, TyVar) and e.kind == "obj" and e.uid in self.objs:
            e = self.objs[e.uid]
        return e

    def resolve_row(self, row: ObjectList) -> ObjectList:
        out: list = []
        for e in row:
            e = self._deref_entry(e)
            if _is_listvar(e) and e.uid in self.rows:
                out.extend(self.resolve_row(self.rows[e.uid]))
            else:
                out.append(e)
        return tuple(out)

    def resolve(self, t: SemType) -> SemType:
        t = self.prune(t)
        match t:
            case DiagT(dom, cod):
                return DiagT(self.resolve_row(dom), self.resolve_row(cod))
            case ArrowT(arg, res):
                return ArrowT(self.resolve(arg), self.resolve(res))
            case PolyT(var, body):
                return PolyT(var, self.resolve(body))
            case _:
                return t

    # -- scheme instantiation ---------------------------------------------

    def _replace_bound(self, t: SemType, mapping: dict[str, int], flavor: str) -> SemType:
        def row(r: ObjectList) -> ObjectList:
            return tuple(
                TyVar(mapping[e.name], e.name, e.kind, flavor)
                if isinstance(e, TyVar) and e.flavor == "bound" and e.name in mapping
                else e
                for e in r
            )

        match t:
            case DiagT(dom, cod):
                return DiagT(row(dom), row(cod))
            case ArrowT(arg, res):
                return ArrowT(
                    self._replace_bound(arg, mapping, flavor),
                    self._replace_bound(res, mapping, flavor),
                )
            case PolyT(var, body):
                inner = {k: v for k, v in mapping.items() if k != var}
                return PolyT(var, self._replace_bound(body, inner, flavor))
            case _:
                return t

    def _open(self, scheme: SemType, flavor: str) -> SemType:
        mapping: dict[str, int] = {}
        body = scheme
        while isinstance(body, PolyT):
            mapping[body.var] = TyVar.fresh(body.var).uid
            body = body.body
        return self._replace_bound(body, mapping, flavor)

    def instantiate(self, scheme: SemType) -> SemType:
        return self._open(scheme, "flex")

    def skolemize(self, scheme: SemType) -> SemType:
        return self._open(scheme, "rigid")

    # -- unification -------------------------------------------------------

    def _occurs_meta(self, uid: int, t: SemType) -> bool:
        t = self.prune(t)
        match t:
            case MetaT(u):
                return u == uid
            case ArrowT(arg, res):
                return self._occurs_meta(uid, arg) or self._occurs_meta(uid, res)
            case PolyT(_, body):
                return self._occurs_meta(uid, body)
            case _:
                return False

    def unify(self, a: SemType, b: SemType, ctx: str) -> None:
        a, b = self.prune(a), self.prune(b)
        if isinstance(a, MetaT) and isinstance(b, MetaT) and a.uid == b.uid:
            return
        if isinstance(a, MetaT):
            if self._occurs_meta(a.uid, b):
                raise TypeCheckError(f"infinite type in {ctx}")
            self.metas[a.uid] = b
            return
        if isinstance(b, MetaT):
            self.unify(b, a, ctx)
            return
        match (a, b):
            case (DiagT(d1, c1), DiagT(d2, c2)):
                self.unify_row(d1, d2, ctx)
                self.unify_row(c1, c2, ctx)
            case (ArrowT(a1, r1), ArrowT(a2, r2)):
                self.unify(a1, a2, ctx)
                self.unify(r1, r2, ctx)
            case (FormT(), FormT()) | (TermT(), TermT()):
                pass
            case (PolyT(_, _), PolyT(_, _)):
                sk = TyVar.fresh("sk").uid
                ba = self._replace_bound(a.body, {a.var: sk}, "rigid")
                bb = self._replace_bound(b.body, {b.var: sk}, "rigid")
                self.unify(ba, bb, ctx)
            case _:
                raise TypeCheckError(
                    f"type mismatch in {ctx}: {pretty_sem_type(self.resolve(a))} "
                    f"vs {pretty_sem_type(self.resolve(b))}"
                )

    def _unify_entry(self, x, y, ctx: str) -> None:
        x, y = self._deref_entry(x), self._deref_entry(y)
        if isinstance(x, str) and isinstance(y, str):
            if x != y:
                raise TypeCheckError(f"object mismatch in {ctx}: {x} vs {y}")
            return
        if isinstance(x, TyVar) and isinstance(y, TyVar) and x.uid == y.uid:
            return
        for var, other in ((x, y), (y, x)):
            if isinstance(var, TyVar) and var.kind == "obj" and var.flavor == "flex":
                self.objs[var.uid] = other
                return
        raise TypeCheckError(f"object mismatch in {ctx}: {x} vs {y}")

    def unify_row(self, r1: ObjectList, r2: ObjectList, ctx: str) -> None:
        r1, r2 = self.resolve_row(r1), self.resolve_row(r2)

        def strippable(x, y) -> bool:
            return x == y or not (_is_listvar(x) or _is_listvar(y))

        while r1 and r2 and strippable(r1[0], r2[0]):
            self._unify_entry(r1[0], r2[0], ctx)
            r1, r2 = r1[1:], r2[1:]
        while r1 and r2 and strippable(r1[-1], r2[-1]):
            self._unify_entry(r1[-1], r2[-1], ctx)
            r1, r2 = r1[:-1], r2[:-1]
        if not r1 and not r2:
            return
        if not r1 or not r2:
            rest = r1 or r2
            if all(_is_listvar(e) and e.flavor == "flex" for e in rest):
                for e in rest:
                    self.rows[e.uid] = ()
                return
            raise TypeCheckError(
                f"wire lists do not match in {ctx}: "
                f"{pretty_object_list(r1)} vs {pretty_object_list(r2)}"
            )
        for mine, other in ((r1, r2), (r2, r1)):
            if len(mine) == 1 and _is_listvar(mine[0]) and mine[0].flavor == "flex":
                var = mine[0]
                if any(_is_listvar(e) and e.uid == var.uid for e in other):
                    raise TypeCheckError(f"infinite wire list in {ctx}")
                self.rows[var.uid] = other
                return
        if not any(
            _is_listvar(e) and e.flavor == "flex" for e in (*r1, *r2)
        ):
            raise TypeCheckError(
                f"wire lists do not match in {ctx}: "
                f"{pretty_object_list(r1)} vs {pretty_object_list(r2)}"
            )
        self.deferred.append((r1, r2, ctx))

    # -- transpose constraints ----------------------------------------------

    def add_transpose(self, arg_ty: SemType, res_ty: SemType, ctx: str) -> None:
        self.transposes.append((arg_ty, res_ty, ctx))

    def _try_transpose(self, arg_ty: SemType, res_ty: SemType, ctx: str) -> bool:
        t = self.resolve(arg_ty)
        if isinstance(t, MetaT):
            return False
        if not isinstance(t, DiagT):
            raise TypeCheckError(f"transpose applied to non-diagram in {ctx}")
        dom, cod = t.dom, t.cod
        if dom == ():
            if any(_is_listvar(e) for e in cod):
                return False
            self.unify(res_ty, DiagT(tuple(reversed(cod)), ()), ctx)
            return True
        if cod == ():
            if any(_is_listvar(e) for e in dom):
                return False
            self.unify(res_ty, DiagT((), tuple(reversed(dom))), ctx)
            return True
        if not any(_is_listvar(e) for e in dom) and not any(_is_listvar(e) for e in cod):
            raise TypeCheckError(
                f"transpose needs a state or an effect, got {pretty_sem_type(t)} in {ctx}"
            )
        return False

    # -- finishing ----------------------------------------------------------

    def _state_size(self) -> int:
        return len(self.metas) + len(self.rows) + len(self.objs)

    def solve(self) -> None:
        while True:
            pending_rows, self.deferred = self.deferred, []
            pending_tr, self.transposes = self.transposes, []
            if not pending_rows and not pending_tr:
                return
            before = self._state_size()
            for r1, r2, ctx in pending_rows:
                self.unify_row(r1, r2, ctx)
            for arg_ty, res_ty, ctx in pending_tr:
                if not self._try_transpose(arg_ty, res_ty, ctx):
                    self.transposes.append((arg_ty, res_ty, ctx))
            progress = (
                self._state_size() != before
                or len(self.deferred) + len(self.transposes)
                < len(pending_rows) + len(pending_tr)
            )
            if not progress:
                if self.deferred:
                    r1, r2, ctx = self.deferred[0]
                    raise TypeCheckError(
                        f"ambiguous instantiation in {ctx}: cannot solve "
                        f"{pretty_object_list(self.resolve_row(r1))} = "
                        f"{pretty_object_list(self.resolve_row(r2))}"
                    )
                arg_ty, _, ctx = self.transposes[0]
                raise TypeCheckError(
                    f"ambiguous instantiation in {ctx}: transpose argument "
                    f"{pretty_sem_type(self.resolve(arg_ty))} is undetermined"
                )


def _contains_flex(t: SemType) -> bool:
    match t:
        case MetaT():
            return True
        case DiagT(dom, cod):
            return any(
                isinstance(e, TyVar) and e.flavor == "flex" for e in (*dom, *cod)
            )
        case ArrowT(arg, res):
            return _contains_flex(arg) or _contains_flex(res)
        case PolyT(_, body):
            return _contains_flex(body)
        case _:
            return False


class _Checker:
    def __init__(self, consts: ConstantTable):
        self.consts = consts
        self.s = _Solver()

    def check(self, t: Term, expected: SemType, env: dict[str, SemType]) -> Term:
        expected = self.s.prune(expected)
        if isinstance(expected, PolyT):
            return self.check(t, self.s.skolemize(expected), env)
        if isinstance(t, Lam):
            match expected:
                case ArrowT(param, res):
                    body = self.check(t.body, res, {**env, t.var: param})
                    return Lam(t.var, body)
                case MetaT():
                    param, res = MetaT.fresh(), MetaT.fresh()
                    self.s.unify(expected, ArrowT(param, res), f"lambda {t.var}")
                    return self.check(t, ArrowT(param, res), env)
                case _:
                    raise TypeCheckError(
                        f"lambda \\{t.var}. .. where {pretty_sem_type(self.s.resolve(expected))} expected"
                    )
        got, out = self.infer(t, env)
        self.s.unify(got, expected, _describe(t))
        return out

    def infer(self, t: Term, env: dict[str, SemType]) -> tuple[SemType, Term]:
        match t:
            case Var(name):
                ty = env.get(name)
                if ty is None:
                    raise TypeCheckError(f"unbound variable {name}")
                if isinstance(ty, PolyT):
                    ty = self.s.instantiate(ty)
                return ty, t
            case Const("transpose", _):
                raise TypeCheckError(
                    "transpose must be applied directly to an argument"
                )
            case Const(name, anchor):
                ty = self.s.instantiate(self.consts.scheme(name))
                if anchor is not None:
                    self.s.unify(ty, anchor, f"constant {name}")
                return ty, Const(name, ty)
            case App(Const("transpose", _) as tr, arg):
                arg_ty, arg_out = self.infer(arg, env)
                res = MetaT.fresh()
                self.s.add_transpose(arg_ty, res, _describe(t))
                return res, App(Const(tr.name, ArrowT(arg_ty, res)), arg_out)
            case App(fn, arg):
                fn_ty, fn_out = self.infer(fn, env)
                fn_ty = self.s.prune(fn_ty)
                if isinstance(fn_ty, MetaT):
                    param, res = MetaT.fresh(), MetaT.fresh()
                    self.s.unify(fn_ty, ArrowT(param, res), _describe(t))
                    fn_ty = ArrowT(param, res)
                if not isinstance(fn_ty, ArrowT):
                    raise TypeCheckError(
                        f"cannot apply {pretty_sem_type(self.s.resolve(fn_ty))} in {_describe(t)}"
                    )
                arg_out = self.check(arg, fn_ty.arg, env)
                return fn_ty.res, App(fn_out, arg_out)
            case Lam(var, body):
                param = MetaT.fresh()
                body_ty, body_out = self.infer(body, {**env, var: param})
                return ArrowT(param, body_ty), Lam(var, body_out)
        raise TypeError(f"not a term: {t!r}")

    def finalize(self, t: Term) -> Term:
        match t:
            case Var():
                return t
            case Const(name, inst):
                if inst is None:
                    return t
                solved = self.s.resolve(inst)
                if _contains_flex(solved):
                    raise TypeCheckError(
                        f"ambiguous instantiation for {name}: {pretty_sem_type(solved)}"
                    )
                return Const(name, solved)
            case Lam(var, body):
                return Lam(var, self.finalize(body))
            case App(fn, arg):
                return App(self.finalize(fn), self.finalize(arg))
        raise TypeError(f"not a term: {t!r}")


def _describe(t: Term) -> str:
    text = pretty_term(t)
    return text if len(text) <= 60 else text[:57] + ".."


def elaborate(
    t: Term,
    expected: SemType | None,
    consts: ConstantTable,
    env: dict[str, SemType] | None = None,
) -> tuple[Term, SemType]:
    """Typecheck ``t`` and return it with solved constant instantiations."""
    checker = _Checker(consts)
    env = env or {}
    if expected is None:
        ty, out = checker.infer(t, env)
    else:
        out = checker.check(t, expected, env)
        ty = expected
    checker.s.solve()
    return checker.finalize(out), checker.s.resolve(ty)


def typecheck(
    t: Term,
    ctx: dict[str, SemType] | None = None,
    consts: ConstantTable | None = None,
    expected: SemType | None = None,
) -> SemType:
    """Principal type of ``t`` under ``ctx`` (see :func:`elaborate`)."""
    if consts is None:
        raise TypeCheckError("typecheck needs a constant table")
    return elaborate(t, expected, consts, ctx)[1]


# --------------------------------------------------------------------------
# Evaluation of closed normal terms
# --------------------------------------------------------------------------


@dataclass
class _Partial:
    rule: ConstRule
    inst: SemType | None
    args: list


def eval_closed(t: Term, consts: ConstantTable):
    """Evaluate a closed beta-normal term to a Diagram or Formula.

    Constants fold through their evaluation rules; quantifier constants
    capture their argument's binder to produce a quantified formula (an
    argument that is not a literal lambda is eta-expanded first).  A residual
    lambda or an unsaturated constant at ground type is a lexicon bug and
    reported as such.
    """

    def apply(value, arg_term: Term, env: dict) -> object:
        if not isinstance(value, _Partial):
            raise EvalError(f"cannot apply evaluated value {value!r}")
        if value.rule.needs_binder and len(value.args) + 1 == value.rule.arity:
            if isinstance(arg_term, Lam):
                var = _fresh_name(arg_term.var, frozenset(env))
                body = go(arg_term.body, {**env, arg_term.var: lg.TermV(var)})
            else:
                var = _fresh_name("x", frozenset(env))
                body = go(App(arg_term, Var(var)), {**env, var: lg.TermV(var)})
            result = value.rule.build(var, body)
            return result
        new = _Partial(value.rule, value.inst, value.args + [go(arg_term, env)])
        if len(new.args) == new.rule.arity:
            return new.rule.build(new.args, new.inst)
        return new

    def go(t: Term, env: dict) -> object:
        match t:
            case Var(name):
                try:
                    return env[name]
                except KeyError:
                    raise EvalError(f"unbound variable {name} during evaluation") from None
            case Const(name, inst):
                rule = consts.rule(name)
                if rule.arity == 0:
                    return rule.build((), inst)
                return _Partial(rule, inst, [])
            case Lam():
                raise EvalError(
                    f"residual lambda at ground type: {_describe(t)} (lexicon bug?)"
                )
            case App(fn, arg):
                return apply(go(fn, env), arg, env)
        raise TypeError(f"not a term: {t!r}")

    result = go(t, {})
    if isinstance(result, _Partial):
        raise EvalError("unsaturated constant at ground type (lexicon bug?)")
    if not isinstance(result, (dg.Diagram, lg.Formula)):
        raise EvalError(f"evaluation produced a non-ground value {result!r}")
    return result
