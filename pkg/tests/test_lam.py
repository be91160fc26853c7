"""Typed lambda terms over diagram and formula primitives."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import peircelex.diagram as dg
import peircelex.grammar as gr
import peircelex.lam as lam
from peircelex.core import (
    BoxDecl,
    DiagT,
    MonoidalSignature,
    parse_sem_type,
    pretty_sem_type,
)
from peircelex.errors import TermSyntaxError, TypeCheckError
from peircelex.lam import (
    App,
    Const,
    Lam,
    Var,
    alpha_eq,
    beta_normalize,
    diagram_constants,
    elaborate,
    eval_closed,
    free_term_vars,
    parse_term,
    pretty_term,
    typecheck,
)

LEX = gr.load_lexicon(gr.bundled_lexicon_path("peirce"))
CONSTS = diagram_constants(LEX.sig)


# --------------------------------------------------------------------------
# Parsing and printing
# --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "src",
    [
        r"\x. x",
        r"\f x. f(x)",
        r"\d. cut(d)",
        "man @ hot",
        "man >> hot",
        r"(\f x. f(f(x)))(\y. y, man)",
        "man^T",
        "id(N N)",
        "spider(2, 1, N)",
        "swap(N, N)",
        "cup(N)",
        "cap(N)",
    ],
)
def test_parse_pretty_roundtrip(src):
    t = parse_term(src)
    again = parse_term(pretty_term(t))
    assert alpha_eq(t, again)


def test_parse_rejects_garbage():
    for bad in ["(man", r"\. x", "man @", "f(x,,y)"]:
        with pytest.raises(TermSyntaxError):
            parse_term(bad)


def test_unbound_names_are_constants():
    t = parse_term("man")
    assert isinstance(t, Const)
    b = parse_term(r"\man. man")
    assert isinstance(b, Lam) and isinstance(b.body, Var)


# --------------------------------------------------------------------------
# Alpha equivalence
# --------------------------------------------------------------------------


def test_alpha_eq():
    assert alpha_eq(parse_term(r"\x. x"), parse_term(r"\z. z"))
    assert not alpha_eq(parse_term(r"\x y. x"), parse_term(r"\x y. y"))
    assert not alpha_eq(parse_term("man"), parse_term("hot"))


# --------------------------------------------------------------------------
# Beta reduction
# --------------------------------------------------------------------------


def test_beta_normalize_simple():
    t = parse_term(r"(\f x. f(f(x)))(\y. y, man)")
    n = beta_normalize(t)
    assert alpha_eq(n, parse_term("man"))


def test_beta_avoids_capture():
    # (\x y. pair(x, y)) applied to a *free* variable y: the binder must be
    # renamed, not capture the argument.
    t = App(Lam("x", Lam("y", App(App(Const("pair"), Var("x")), Var("y")))), Var("y"))
    n = beta_normalize(t)
    assert isinstance(n, Lam)
    assert free_term_vars(n) == {"y"}
    assert n.var != "y"


def test_strategies_reach_the_same_normal_form():
    samples = [
        r"(\f x. f(f(x)))(\y. y, man)",
        r"(\x. man)((\y. y)(hot))",
        r"(\p. cut(p))(man >> hot)",
    ]
    for src in samples:
        t = parse_term(src)
        n1 = beta_normalize(t, strategy="normal")
        n2 = beta_normalize(t, strategy="applicative")
        assert alpha_eq(n1, n2), src


# --------------------------------------------------------------------------
# Typechecking and elaboration
# --------------------------------------------------------------------------


def test_typecheck_diagram_constants():
    t, ty = elaborate(parse_term("man >> hot"), None, CONSTS)
    assert ty == DiagT((), ())
    t, ty = elaborate(parse_term("man @ man"), None, CONSTS)
    assert ty == DiagT((), ("N", "N"))


def test_typecheck_rejects_bad_composition():
    with pytest.raises(TypeCheckError):
        elaborate(parse_term("man >> man"), None, CONSTS)


def test_typecheck_transpose_needs_state_or_effect():
    _, ty = elaborate(parse_term("man^T"), None, CONSTS)
    assert ty == DiagT(("N",), ())
    endo_sig = MonoidalSignature(
        frozenset({"N"}), {"grow": BoxDecl("grow", ("N",), ("N",))}
    )
    with pytest.raises(TypeCheckError):
        elaborate(parse_term("grow^T"), None, diagram_constants(endo_sig))


def test_elaborate_annotates_against_expected_type():
    want = parse_sem_type("(1, N) -> (1, N)")
    t, ty = elaborate(parse_term(r"\x. x"), want, CONSTS)
    assert pretty_sem_type(ty) == pretty_sem_type(want)


def test_subject_reduction_on_samples():
    for src in [
        r"(\f x. f(f(x)))(\y. y, man)",
        r"(\p. p >> hot)(man)",
        r"(\d. cut(d))(man >> hot)",
    ]:
        t, ty = elaborate(parse_term(src), None, CONSTS)
        n = beta_normalize(t)
        assert typecheck(n, None, CONSTS) == ty, src


def test_eval_closed_produces_diagrams():
    t, _ = elaborate(parse_term("man @ man >> cup(N)"), None, CONSTS)
    v = eval_closed(beta_normalize(t), CONSTS)
    assert isinstance(v, dg.Diagram)
    built = dg.Compose(dg.Tensor(dg.box(LEX.sig, "man"), dg.box(LEX.sig, "man")), dg.Cup("N"))
    assert dg.equal(v, built)


def test_eval_closed_cut():
    t, _ = elaborate(parse_term("cut(man >> hot)"), None, CONSTS)
    v = eval_closed(beta_normalize(t), CONSTS)
    assert isinstance(v, dg.Cut)


# --------------------------------------------------------------------------
# Random typed terms: subject reduction + strategy independence
# --------------------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_terms_subject_reduction(seed):
    import itertools

    from peircelex.selftest import _random_term, _random_type

    rng = random.Random(seed)
    ty = _random_type(rng, 2)
    t = _random_term(rng, ty, {}, 3, itertools.count())
    e, got = elaborate(t, ty, CONSTS)
    n1 = beta_normalize(e, strategy="normal")
    n2 = beta_normalize(e, strategy="applicative")
    assert alpha_eq(n1, n2)
    assert typecheck(n1, None, CONSTS, expected=got) == got
