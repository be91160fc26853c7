"""Object lists, grammar/semantic types, and signatures."""

import pytest

from peircelex.core import (
    ArrowT,
    BoxDecl,
    DiagT,
    GrammarType,
    MonoidalSignature,
    Over,
    Under,
    object_list,
    parse_grammar_type,
    parse_object_list,
    parse_sem_type,
    pretty_grammar_type,
    pretty_sem_type,
    semantic_type_of,
)
from peircelex.errors import MissingSymbolError, TypeSyntaxError


def test_object_list_parsing_roundtrip():
    objs = parse_object_list("N N S")
    assert objs == ("N", "N", "S")
    assert parse_object_list("") == ()
    assert object_list(["N"]) == ("N",)


def test_grammar_type_parse_and_pretty():
    for text in ("s", "n <- n", "(p -> s) <- p", "p -> s"):
        ty = parse_grammar_type(text)
        assert isinstance(ty, GrammarType)
        assert parse_grammar_type(pretty_grammar_type(ty)) == ty


def test_grammar_type_structure():
    ty = parse_grammar_type("(p -> s) <- p")
    assert isinstance(ty, Over)
    assert isinstance(ty.result, Under)


def test_grammar_type_rejects_garbage():
    with pytest.raises(TypeSyntaxError):
        parse_grammar_type("s <-")
    with pytest.raises(TypeSyntaxError):
        parse_grammar_type("(s")


def test_sem_type_parse_and_pretty():
    for text in ("(1, N)", "(N, N)", "(1, N) -> (1, N)", "(N N, 1)"):
        ty = parse_sem_type(text)
        assert parse_sem_type(pretty_sem_type(ty)) == ty
    arrow = parse_sem_type("(1, N) -> (1, 1)")
    assert isinstance(arrow, ArrowT)
    assert isinstance(arrow.arg, DiagT)


def test_semantic_type_of_homomorphism():
    assignment = {
        "n": parse_sem_type("(1, N)"),
        "s": parse_sem_type("(1, 1)"),
    }
    ty = semantic_type_of(parse_grammar_type("n -> s"), assignment)
    assert ty == ArrowT(assignment["n"], assignment["s"])
    ty2 = semantic_type_of(parse_grammar_type("s <- n"), assignment)
    assert ty2 == ArrowT(assignment["n"], assignment["s"])


def test_signature_lookup_and_missing():
    sig = MonoidalSignature(
        frozenset({"N"}),
        {"man": BoxDecl("man", (), ("N",))},
    )
    assert sig.box("man").cod == ("N",)
    with pytest.raises(MissingSymbolError):
        sig.box("unicorn")


def test_singleton_flag_surfaces():
    sig = MonoidalSignature(
        frozenset({"N"}),
        {
            "Alice": BoxDecl("Alice", (), ("N",), singleton=True),
            "man": BoxDecl("man", (), ("N",)),
        },
    )
    assert sig.singletons() == {"Alice"}


def test_box_decl_with_holes():
    decl = BoxDecl("F", (), ("N",), holes=(((), ("N",)),))
    assert len(decl.holes) == 1
