"""First-order logic: formula AST, finite models, and brute-force equivalence.

Formulas are plain immutable trees.  Models are finite structures with a
universe ``{0, .., n-1}``; evaluation is textbook Tarskian recursion.  The
``equivalent`` oracle decides equality of formulas by enumerating every model
up to a universe bound (falling back to seeded random sampling when the model
space exceeds a budget), which is exact on the bounded fragment we care about
and honest about its limits via the returned :class:`Verdict`.

``=`` is a builtin binary predicate: it is evaluated as identity of elements
and is never enumerated as part of a model's tables.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import EvalError, MissingSymbolError

__all__ = [
    "TermV",
    "TermC",
    "FolTerm",
    "Formula",
    "Atom",
    "Top",
    "Bottom",
    "Not",
    "And",
    "Or",
    "Implies",
    "Forall",
    "Exists",
    "free_vars",
    "substitute",
    "canonical_vars",
    "alpha_eq",
    "formula_to_json",
    "formula_from_json",
    "Model",
    "evaluate",
    "FolSignature",
    "signature_of",
    "enumerate_models",
    "model_space_size",
    "sample_model",
    "Verdict",
    "equivalent",
    "singleton_rewrite",
]


# --------------------------------------------------------------------------
# Terms and formulas
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TermV:
    """A first-order variable occurrence."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class TermC:
    """A first-order constant symbol."""

    name: str

    def __str__(self) -> str:
        return self.name


FolTerm = TermV | TermC


class Formula:
    """Base class for formula nodes; provides printing and sugar."""

    __slots__ = ()

    def __str__(self) -> str:
        return _show(self, 0)

    def __repr__(self) -> str:
        return f"<Formula {self}>"

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def implies(self, other: "Formula") -> "Formula":
        return Implies(self, other)


@dataclass(frozen=True, slots=True, repr=False)
class Atom(Formula):
    pred: str
    args: tuple[FolTerm, ...] = ()


@dataclass(frozen=True, slots=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True, repr=False)
class Bottom(Formula):
    pass


@dataclass(frozen=True, slots=True, repr=False)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, slots=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Exists(Formula):
    var: str
    body: Formula


# Precedence levels for printing: quantifiers bind loosest, `~` tightest.
_PREC_QUANT, _PREC_IMPL, _PREC_OR, _PREC_AND, _PREC_NOT, _PREC_ATOM = range(6)


def _show(f: Formula, ctx: int) -> str:
    match f:
        case Top():
            text, prec = "true", _PREC_ATOM
        case Bottom():
            text, prec = "false", _PREC_ATOM
        case Atom("=", (a, b)):
            # Infix equality binds like a conjunct so `~` and `&` stay unambiguous.
            text, prec = f"{a} = {b}", _PREC_AND
        case Atom(pred, args):
            text = f"{pred}({', '.join(map(str, args))})" if args else pred
            prec = _PREC_ATOM
        case Not(body):
            text, prec = "~" + _show(body, _PREC_NOT), _PREC_NOT
        case And(left, right):
            text = f"{_show(left, _PREC_AND)} & {_show(right, _PREC_AND + 1)}"
            prec = _PREC_AND
        case Or(left, right):
            text = f"{_show(left, _PREC_OR)} | {_show(right, _PREC_OR + 1)}"
            prec = _PREC_OR
        case Implies(left, right):
            text = f"{_show(left, _PREC_IMPL + 1)} -> {_show(right, _PREC_IMPL)}"
            prec = _PREC_IMPL
        case Forall(var, body):
            text, prec = f"forall {var}. {_show(body, _PREC_QUANT)}", _PREC_QUANT
        case Exists(var, body):
            text, prec = f"exists {var}. {_show(body, _PREC_QUANT)}", _PREC_QUANT
        case _:
            raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if prec < ctx else text


def free_vars(f: Formula) -> frozenset[str]:
    match f:
        case Atom(_, args):
            return frozenset(t.name for t in args if isinstance(t, TermV))
        case Top() | Bottom():
            return frozenset()
        case Not(body):
            return free_vars(body)
        case And(l, r) | Or(l, r) | Implies(l, r):
            return free_vars(l) | free_vars(r)
        case Forall(var, body) | Exists(var, body):
            return free_vars(body) - {var}
    raise TypeError(f"not a formula: {f!r}")


def substitute(f: Formula, mapping: dict[str, FolTerm]) -> Formula:
    """Replace free variables per ``mapping``, respecting shadowing."""
    if not mapping:
        return f

    def term(t: FolTerm) -> FolTerm:
        return mapping.get(t.name, t) if isinstance(t, TermV) else t

    match f:
        case Atom(pred, args):
            return Atom(pred, tuple(term(t) for t in args))
        case Top() | Bottom():
            return f
        case Not(body):
            return Not(substitute(body, mapping))
        case And(l, r):
            return And(substitute(l, mapping), substitute(r, mapping))
        case Or(l, r):
            return Or(substitute(l, mapping), substitute(r, mapping))
        case Implies(l, r):
            return Implies(substitute(l, mapping), substitute(r, mapping))
        case Forall(var, body) | Exists(var, body):
            inner = {k: v for k, v in mapping.items() if k != var}
            cls = type(f)
            return cls(var, substitute(body, inner))
    raise TypeError(f"not a formula: {f!r}")


def canonical_vars(f: Formula, prefix: str = "v") -> Formula:
    """Rename bound variables to ``v0, v1, ..`` in traversal order.

    Free variables keep their names; the result is a canonical representative
    of the alpha-equivalence class (bound names are also made unique).
    """
    counter = itertools.count()

    def go(f: Formula, env: dict[str, str]) -> Formula:
        match f:
            case Atom(pred, args):
                renamed = tuple(
                    TermV(env.get(t.name, t.name)) if isinstance(t, TermV) else t
                    for t in args
                )
                return Atom(pred, renamed)
            case Top() | Bottom():
                return f
            case Not(body):
                return Not(go(body, env))
            case And(l, r):
                return And(go(l, env), go(r, env))
            case Or(l, r):
                return Or(go(l, env), go(r, env))
            case Implies(l, r):
                return Implies(go(l, env), go(r, env))
            case Forall(var, body) | Exists(var, body):
                fresh = f"{prefix}{next(counter)}"
                return type(f)(fresh, go(body, {**env, var: fresh}))
        raise TypeError(f"not a formula: {f!r}")

    return go(f, {})


def alpha_eq(f: Formula, g: Formula) -> bool:
    """Equality up to renaming of bound variables."""
    return canonical_vars(f) == canonical_vars(g)


# --------------------------------------------------------------------------
# JSON encoding
# --------------------------------------------------------------------------


def _term_to_json(t: FolTerm) -> dict:
    return {"var": t.name} if isinstance(t, TermV) else {"const": t.name}


def _term_from_json(data: dict) -> FolTerm:
    if "var" in data:
        return TermV(data["var"])
    if "const" in data:
        return TermC(data["const"])
    raise ValueError(f"bad term encoding: {data!r}")


def formula_to_json(f: Formula) -> dict:
    match f:
        case Atom(pred, args):
            return {"op": "atom", "pred": pred, "args": [_term_to_json(t) for t in args]}
        case Top():
            return {"op": "true"}
        case Bottom():
            return {"op": "false"}
        case Not(body):
            return {"op": "not", "body": formula_to_json(body)}
        case And(l, r):
            return {"op": "and", "left": formula_to_json(l), "right": formula_to_json(r)}
        case Or(l, r):
            return {"op": "or", "left": formula_to_json(l), "right": formula_to_json(r)}
        case Implies(l, r):
            return {"op": "implies", "left": formula_to_json(l), "right": formula_to_json(r)}
        case Forall(var, body):
            return {"op": "forall", "var": var, "body": formula_to_json(body)}
        case Exists(var, body):
            return {"op": "exists", "var": var, "body": formula_to_json(body)}
    raise TypeError(f"not a formula: {f!r}")


def formula_from_json(data: dict) -> Formula:
    match data.get("op"):
        case "atom":
            return Atom(data["pred"], tuple(_term_from_json(t) for t in data["args"]))
        case "true":
            return Top()
        case "false":
            return Bottom()
        case "not":
            return Not(formula_from_json(data["body"]))
        case "and":
            return And(formula_from_json(data["left"]), formula_from_json(data["right"]))
        case "or":
            return Or(formula_from_json(data["left"]), formula_from_json(data["right"]))
        case "implies":
            return Implies(formula_from_json(data["left"]), formula_from_json(data["right"]))
        case "forall":
            return Forall(data["var"], formula_from_json(data["body"]))
        case "exists":
            return Exists(data["var"], formula_from_json(data["body"]))
    raise ValueError(f"bad formula encoding: {data!r}")


# --------------------------------------------------------------------------
# Models and evaluation
# --------------------------------------------------------------------------


@dataclass
class Model:
    """A finite first-order structure over universe ``{0, .., n-1}``."""

    universe: tuple[int, ...]
    constants: dict[str, int] = field(default_factory=dict)
    predicates: dict[str, frozenset[tuple[int, ...]]] = field(default_factory=dict)

    @classmethod
    def from_json(cls, data: dict) -> "Model":
        size = data["universe"]
        if not isinstance(size, int) or size < 1:
            raise EvalError(f"universe must be a positive element count, got {size!r}")
        return cls(
            universe=tuple(range(size)),
            constants=dict(data.get("constants", {})),
            predicates={
                name: frozenset(tuple(row) for row in rows)
                for name, rows in data.get("predicates", {}).items()
            },
        )

    def to_json(self) -> dict:
        return {
            "universe": len(self.universe),
            "constants": dict(sorted(self.constants.items())),
            "predicates": {
                name: sorted(list(row) for row in rows)
                for name, rows in sorted(self.predicates.items())
            },
        }

    def validate(self) -> list[str]:
        problems = []
        elements = set(self.universe)
        for name, value in self.constants.items():
            if value not in elements:
                problems.append(f"constant {name} = {value} outside universe")
        for name, rows in self.predicates.items():
            arities = {len(row) for row in rows}
            if len(arities) > 1:
                problems.append(f"predicate {name} has mixed arities {sorted(arities)}")
            for row in rows:
                if not set(row) <= elements:
                    problems.append(f"predicate {name} tuple {row} outside universe")
        return problems

    def __str__(self) -> str:
        parts = [f"universe={len(self.universe)}"]
        for name, value in sorted(self.constants.items()):
            parts.append(f"{name}={value}")
        for name, rows in sorted(self.predicates.items()):
            parts.append(f"{name}={{{', '.join(map(str, sorted(rows)))}}}")
        return "; ".join(parts)


def evaluate(f: Formula, m: Model, env: dict[str, int] | None = None) -> bool:
    """Truth of ``f`` in ``m`` under ``env`` (free variables -> elements)."""
    env = env or {}

    def term(t: FolTerm, env: dict[str, int]) -> int:
        if isinstance(t, TermV):
            try:
                return env[t.name]
            except KeyError:
                raise EvalError(f"unbound variable {t.name}") from None
        try:
            return m.constants[t.name]
        except KeyError:
            raise MissingSymbolError(f"constant {t.name} not in model") from None

    def go(f: Formula, env: dict[str, int]) -> bool:
        match f:
            case Top():
                return True
            case Bottom():
                return False
            case Atom("=", (a, b)):
                return term(a, env) == term(b, env)
            case Atom(pred, args):
                try:
                    table = m.predicates[pred]
                except KeyError:
                    raise MissingSymbolError(f"predicate {pred} not in model") from None
                return tuple(term(t, env) for t in args) in table
            case Not(body):
                return not go(body, env)
            case And(l, r):
                return go(l, env) and go(r, env)
            case Or(l, r):
                return go(l, env) or go(r, env)
            case Implies(l, r):
                return (not go(l, env)) or go(r, env)
            case Forall(var, body):
                return all(go(body, {**env, var: x}) for x in m.universe)
            case Exists(var, body):
                return any(go(body, {**env, var: x}) for x in m.universe)
        raise TypeError(f"not a formula: {f!r}")

    return go(f, env)


# --------------------------------------------------------------------------
# Equivalence by bounded model enumeration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FolSignature:
    """Non-logical symbols: constant names and predicate arities."""

    constants: tuple[str, ...] = ()
    predicates: tuple[tuple[str, int], ...] = ()

    @classmethod
    def make(cls, constants=(), predicates=()) -> "FolSignature":
        preds = dict(predicates).items() if not isinstance(predicates, dict) else predicates.items()
        return cls(tuple(sorted(constants)), tuple(sorted(preds)))


def signature_of(*formulas: Formula) -> FolSignature:
    """Collect the constants and predicates occurring in the formulas."""
    constants: set[str] = set()
    arities: dict[str, int] = {}

    def go(f: Formula) -> None:
        match f:
            case Atom(pred, args):
                for t in args:
                    if isinstance(t, TermC):
                        constants.add(t.name)
                if pred != "=":
                    seen = arities.setdefault(pred, len(args))
                    if seen != len(args):
                        raise EvalError(
                            f"predicate {pred} used with arities {seen} and {len(args)}"
                        )
            case Top() | Bottom():
                pass
            case Not(body):
                go(body)
            case And(l, r) | Or(l, r) | Implies(l, r):
                go(l)
                go(r)
            case Forall(_, body) | Exists(_, body):
                go(body)
            case _:
                raise TypeError(f"not a formula: {f!r}")

    for f in formulas:
        go(f)
    return FolSignature(tuple(sorted(constants)), tuple(sorted(arities.items())))


def model_space_size(sig: FolSignature, size: int) -> int:
    """Number of distinct models of ``sig`` with the given universe size."""
    total = size ** len(sig.constants)
    for _, arity in sig.predicates:
        total *= 2 ** (size**arity)
    return total


def enumerate_models(sig: FolSignature, size: int):
    """Yield every model of ``sig`` over universe {0,..,size-1}, deterministically."""
    universe = tuple(range(size))
    tuple_pools = [
        list(itertools.product(universe, repeat=arity)) for _, arity in sig.predicates
    ]
    for const_values in itertools.product(universe, repeat=len(sig.constants)):
        constants = dict(zip(sig.constants, const_values))
        for masks in itertools.product(
            *(range(2 ** len(pool)) for pool in tuple_pools)
        ):
            predicates = {}
            for (name, _), pool, mask in zip(sig.predicates, tuple_pools, masks):
                predicates[name] = frozenset(
                    row for i, row in enumerate(pool) if mask >> i & 1
                )
            yield Model(universe, constants, predicates)


def sample_model(sig: FolSignature, size: int, rng: random.Random) -> Model:
    """One uniformly random model of ``sig`` over universe {0,..,size-1}."""
    universe = tuple(range(size))
    constants = {name: rng.randrange(size) for name in sig.constants}
    predicates = {}
    for name, arity in sig.predicates:
        pool = list(itertools.product(universe, repeat=arity))
        mask = rng.getrandbits(len(pool)) if pool else 0
        predicates[name] = frozenset(row for i, row in enumerate(pool) if mask >> i & 1)
    return Model(universe, constants, predicates)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a bounded equivalence check."""

    equivalent: bool
    bound: int
    exhaustive: bool
    models_checked: int
    countermodel: Model | None = None

    def __bool__(self) -> bool:
        return self.equivalent

    def __str__(self) -> str:
        if self.equivalent:
            mode = "exhaustive" if self.exhaustive else "sampled"
            return (
                f"Equivalent up to universe {self.bound} "
                f"({self.models_checked} models, {mode})"
            )
        return f"Not equivalent; countermodel: {self.countermodel}"


def equivalent(
    f: Formula,
    g: Formula,
    sig: FolSignature | None = None,
    max_universe: int = 3,
    *,
    budget: int = 200_000,
    samples: int = 1000,
    seed: int = 0,
) -> Verdict:
    """Decide f <-> g over all models up to ``max_universe`` elements.

    Every universe size whose model count fits in ``budget`` is enumerated
    exhaustively; larger spaces are probed with ``samples`` seeded random
    models, and the verdict reports that it was not exhaustive.  Formulas with
    free variables are compared pointwise under every environment.
    """
    if sig is None:
        sig = signature_of(f, g)
    fv = sorted(free_vars(f) | free_vars(g))
    checked = 0
    exhaustive = True
    for size in range(1, max_universe + 1):
        if model_space_size(sig, size) <= budget:
            models = enumerate_models(sig, size)
        else:
            exhaustive = False
            rng = random.Random(seed * 7919 + size)
            models = (sample_model(sig, size, rng) for _ in range(samples))
        for m in models:
            checked += 1
            for values in itertools.product(m.universe, repeat=len(fv)):
                env = dict(zip(fv, values))
                if evaluate(f, m, env) != evaluate(g, m, env):
                    return Verdict(False, size, exhaustive, checked, m)
    return Verdict(True, max_universe, exhaustive, checked)


# --------------------------------------------------------------------------
# Singleton predicates
# --------------------------------------------------------------------------


def _flatten_and(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return _flatten_and(f.left) + _flatten_and(f.right)
    return [f]


def _build_and(conjuncts: list[Formula]) -> Formula:
    if not conjuncts:
        return Top()
    out = conjuncts[0]
    for c in conjuncts[1:]:
        out = And(out, c)
    return out


def singleton_rewrite(f: Formula, singletons) -> Formula:
    """Inline singleton predicates as constants.

    Rewrites ``exists x. P(x) & phi`` into ``phi[x := P]`` whenever ``P`` is a
    declared singleton (a unary predicate denoting exactly one individual).
    The rewrite fires anywhere in the formula on maximal ``exists``/``&``
    spines and preserves evaluation on every model where each singleton's
    table has exactly one member.
    """
    names = frozenset(singletons)

    def rw(f: Formula) -> Formula:
        prefix: list[str] = []
        body = f
        while isinstance(body, Exists):
            prefix.append(body.var)
            body = body.body
        conjuncts = _flatten_and(body)
        changed = False
        while True:
            hit = next(
                (
                    (i, c)
                    for i, c in enumerate(conjuncts)
                    if isinstance(c, Atom)
                    and c.pred in names
                    and len(c.args) == 1
                    and isinstance(c.args[0], TermV)
                    and prefix.count(c.args[0].name) == 1
                ),
                None,
            )
            if hit is None:
                break
            index, atom = hit
            var = atom.args[0].name
            replacement = {var: TermC(atom.pred)}
            conjuncts = [
                substitute(c, replacement)
                for i, c in enumerate(conjuncts)
                if i != index
            ]
            prefix.remove(var)
            changed = True
        if changed:
            rebuilt = _build_and([rw(c) for c in conjuncts])
            for var in reversed(prefix):
                rebuilt = Exists(var, rebuilt)
            return rebuilt
        # Nothing to do on this spine: recurse structurally, sharing untouched nodes.
        match f:
            case Atom() | Top() | Bottom():
                return f
            case Not(b):
                nb = rw(b)
                return f if nb is b else Not(nb)
            case And(l, r):
                nl, nr = rw(l), rw(r)
                return f if nl is l and nr is r else And(nl, nr)
            case Or(l, r):
                nl, nr = rw(l), rw(r)
                return f if nl is l and nr is r else Or(nl, nr)
            case Implies(l, r):
                nl, nr = rw(l), rw(r)
                return f if nl is l and nr is r else Implies(nl, nr)
            case Forall(var, b):
                nb = rw(b)
                return f if nb is b else Forall(var, nb)
            case Exists(var, b):
                nb = rw(b)
                return f if nb is b else Exists(var, nb)
        raise TypeError(f"not a formula: {f!r}")

    return rw(f)
