"""First-order logic: syntax, finite-model evaluation, and equivalence."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import peircelex.logic as lg
from peircelex.errors import EvalError
from peircelex.logic import (
    And,
    Atom,
    Bottom,
    Exists,
    FolSignature,
    Forall,
    Implies,
    Model,
    Not,
    Or,
    TermC,
    TermV,
    Top,
    alpha_eq,
    canonical_vars,
    enumerate_models,
    equivalent,
    evaluate,
    formula_from_json,
    formula_to_json,
    free_vars,
    model_space_size,
    sample_model,
    signature_of,
    singleton_rewrite,
)

MAN_X = Atom("man", (TermV("x"),))
SLEEPS_X = Atom("sleeps", (TermV("x"),))
ALL_SLEEP = Forall("x", Implies(MAN_X, SLEEPS_X))


# --------------------------------------------------------------------------
# Printing and structure
# --------------------------------------------------------------------------


def test_str_forms():
    assert str(ALL_SLEEP) == "forall x. man(x) -> sleeps(x)"
    f = Exists("x", And(MAN_X, Not(Atom("hot", (TermV("x"),)))))
    assert str(f) == "exists x. man(x) & ~hot(x)"
    assert str(Atom("loves", (TermC("Alice"), TermC("Bob")))) == "loves(Alice, Bob)"
    assert str(Atom("=", (TermV("x"), TermC("Alice")))) == "x = Alice"
    assert str(Top()) == "true" and str(Bottom()) == "false"


def test_free_vars():
    assert free_vars(ALL_SLEEP) == set()
    assert free_vars(MAN_X) == {"x"}
    assert free_vars(Exists("x", And(MAN_X, Atom("knows", (TermV("x"), TermV("y")))))) == {"y"}


# --------------------------------------------------------------------------
# Evaluation on finite models
# --------------------------------------------------------------------------


def _model(universe, constants=None, predicates=None):
    return Model(
        universe=tuple(range(universe)),
        constants=constants or {},
        predicates={k: frozenset(v) for k, v in (predicates or {}).items()},
    )


def test_evaluate_quantifiers():
    yes = _model(2, {"Alice": 0}, {"man": {(0,)}, "sleeps": {(0,), (1,)}})
    no = _model(2, {"Alice": 0}, {"man": {(0,), (1,)}, "sleeps": {(0,)}})
    assert evaluate(ALL_SLEEP, yes) is True
    assert evaluate(ALL_SLEEP, no) is False
    some = Exists("x", And(MAN_X, SLEEPS_X))
    assert evaluate(some, yes) is True
    assert evaluate(some, _model(2, {}, {"man": {(1,)}, "sleeps": {(0,)}})) is False


def test_evaluate_connectives_and_equality():
    m = _model(2, {"Alice": 0, "Bob": 1}, {"p": {(0,)}})
    assert evaluate(Or(Atom("p", (TermC("Bob"),)), Atom("p", (TermC("Alice"),))), m)
    assert not evaluate(And(Atom("p", (TermC("Bob"),)), Top()), m)
    assert evaluate(Atom("=", (TermC("Alice"), TermC("Alice"))), m)
    assert not evaluate(Atom("=", (TermC("Alice"), TermC("Bob"))), m)
    assert evaluate(Implies(Bottom(), Atom("p", (TermC("Bob"),))), m)


def test_evaluate_missing_symbol():
    m = _model(2)
    with pytest.raises((EvalError, lg.MissingSymbolError)):
        evaluate(Atom("p", (TermC("Zoe"),)), m)


def test_evaluate_free_variable_needs_env():
    m = _model(2, {}, {"man": {(0,)}})
    assert evaluate(MAN_X, m, env={"x": 0}) is True
    assert evaluate(MAN_X, m, env={"x": 1}) is False
    with pytest.raises(EvalError):
        evaluate(MAN_X, m)


# --------------------------------------------------------------------------
# Alpha equivalence and canonical variables
# --------------------------------------------------------------------------


def test_alpha_eq_and_canonical_vars():
    f = Exists("q", Atom("man", (TermV("q"),)))
    g = Exists("z", Atom("man", (TermV("z"),)))
    assert alpha_eq(f, g)
    assert str(canonical_vars(f)) == "exists v0. man(v0)"
    assert canonical_vars(f) == canonical_vars(g)
    assert not alpha_eq(f, Exists("q", Atom("hot", (TermV("q"),))))


# --------------------------------------------------------------------------
# Model enumeration and equivalence checking
# --------------------------------------------------------------------------


def test_enumerate_models_count_matches_space_size():
    sig = signature_of(ALL_SLEEP)
    assert sig.predicates == (("man", 1), ("sleeps", 1))
    for size in (1, 2):
        n = model_space_size(sig, size)
        assert sum(1 for _ in enumerate_models(sig, size)) == n
    assert model_space_size(sig, 2) == 16  # two unary predicates on two points


def test_equivalent_exhaustive_verdict():
    g = Not(Exists("y", And(Atom("man", (TermV("y"),)), Not(Atom("sleeps", (TermV("y"),))))))
    v = equivalent(ALL_SLEEP, g)
    assert v.equivalent and v.exhaustive and v.bound == 3
    assert v.countermodel is None


def test_equivalent_finds_countermodel():
    v = equivalent(Atom("man", (TermC("Alice"),)), Top())
    assert not v.equivalent
    assert v.countermodel is not None
    cm = v.countermodel
    assert evaluate(Atom("man", (TermC("Alice"),)), cm) != evaluate(Top(), cm)


def test_sample_model_is_valid_and_seeded():
    sig = FolSignature(constants=("Alice",), predicates=(("man", 1), ("loves", 2)))
    m1 = sample_model(sig, 3, random.Random(7))
    m2 = sample_model(sig, 3, random.Random(7))
    assert m1 == m2
    assert m1.validate() == []
    assert set(m1.constants) == {"Alice"}


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def test_formula_json_roundtrip():
    cases = [
        ALL_SLEEP,
        Exists("x", And(MAN_X, Not(SLEEPS_X))),
        Or(Top(), Bottom()),
        Atom("loves", (TermC("Alice"), TermV("y"))),
        Implies(MAN_X, Exists("y", Atom("=", (TermV("x"), TermV("y"))))),
    ]
    for f in cases:
        assert formula_from_json(formula_to_json(f)) == f


def test_model_json_roundtrip():
    m = _model(3, {"Alice": 2}, {"man": {(0,), (2,)}, "loves": {(0, 1)}})
    back = Model.from_json(m.to_json())
    assert back == m


def test_model_from_json_rejects_bad_universe():
    with pytest.raises(EvalError):
        Model.from_json({"universe": 0})


# --------------------------------------------------------------------------
# Singleton rewriting
# --------------------------------------------------------------------------


def test_singleton_rewrite_collapses_existentials():
    raw = Exists("x0", And(Atom("Alice", (TermV("x0"),)), Atom("sleeps", (TermV("x0"),))))
    assert str(singleton_rewrite(raw, {"Alice"})) == "sleeps(Alice)"


def test_singleton_rewrite_two_names():
    raw = Exists(
        "x0",
        Exists(
            "x1",
            And(
                And(Atom("Alice", (TermV("x0"),)), Atom("Bob", (TermV("x1"),))),
                Atom("loves", (TermV("x0"), TermV("x1"))),
            ),
        ),
    )
    assert str(singleton_rewrite(raw, {"Alice", "Bob"})) == "loves(Alice, Bob)"


def test_singleton_rewrite_keeps_plain_predicates():
    raw = Exists("x0", And(Atom("man", (TermV("x0"),)), Atom("sleeps", (TermV("x0"),))))
    out = singleton_rewrite(raw, {"Alice"})
    assert alpha_eq(out, raw)


def test_singleton_rewrite_preserves_meaning():
    raw = Exists("x0", And(Atom("Alice", (TermV("x0"),)), Atom("sleeps", (TermV("x0"),))))
    rewritten = singleton_rewrite(raw, {"Alice"})
    # On models where Alice's predicate is the singleton {alice}, the raw and
    # rewritten formulas agree.
    for sleeps in [set(), {(0,)}, {(1,)}, {(0,), (1,)}]:
        m = _model(2, {"Alice": 0}, {"Alice": {(0,)}, "sleeps": sleeps})
        assert evaluate(raw, m) == evaluate(rewritten, m)


# --------------------------------------------------------------------------
# Property: evaluation respects alpha renaming
# --------------------------------------------------------------------------


def _random_formula(rng: random.Random, depth: int, scope: tuple[str, ...]) -> lg.Formula:
    if depth == 0 or rng.random() < 0.3:
        preds = [("man", 1), ("sleeps", 1), ("loves", 2)]
        name, arity = rng.choice(preds)
        args = tuple(
            TermV(rng.choice(scope)) if scope and rng.random() < 0.7 else TermC("Alice")
            for _ in range(arity)
        )
        return Atom(name, args)
    kind = rng.choice(["and", "or", "not", "implies", "exists", "forall"])
    if kind in ("exists", "forall"):
        v = f"q{len(scope)}"
        body = _random_formula(rng, depth - 1, scope + (v,))
        return Exists(v, body) if kind == "exists" else Forall(v, body)
    if kind == "not":
        return Not(_random_formula(rng, depth - 1, scope))
    a = _random_formula(rng, depth - 1, scope)
    b = _random_formula(rng, depth - 1, scope)
    return {"and": And, "or": Or, "implies": Implies}[kind](a, b)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_canonical_vars_preserves_evaluation(seed):
    rng = random.Random(seed)
    f = _random_formula(rng, 3, ())
    g = canonical_vars(f)
    assert alpha_eq(f, g)
    sig = signature_of(f)
    m = sample_model(sig, rng.randint(1, 3), rng)
    assert evaluate(f, m) == evaluate(g, m)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_json_roundtrip_random(seed):
    rng = random.Random(seed)
    f = _random_formula(rng, 3, ())
    assert formula_from_json(formula_to_json(f)) == f
