"""Categorial parsing and the sentence-to-diagram pipeline."""

import pytest

import peircelex.diagram as dg
import peircelex.grammar as gr
from peircelex.core import DiagT, Over, Under
from peircelex.errors import MissingSymbolError
from peircelex.grammar import (
    Coerce,
    Leaf,
    bundled_lexicon_path,
    load_lexicon,
    meaning_of,
    parse_sentence,
    pipeline,
    tokenize,
    tree_to_json,
    tree_to_text,
)

LEX = load_lexicon(bundled_lexicon_path("peirce"))

BATTERY = [
    "Alice sleeps",
    "every man sleeps",
    "Alice loves Bob",
    "ideas sleep furiously",
    "Man's Not Hot",
    "no man is an island",
    "Alice kills a mortal",
    "every big man sleeps",
]


# --------------------------------------------------------------------------
# Tokenization
# --------------------------------------------------------------------------


def test_tokenize_lowercases_and_keeps_apostrophes():
    assert tokenize("Man's Not Hot", LEX) == ["man's", "not", "hot"]
    assert tokenize("Alice loves Bob", LEX) == ["alice", "loves", "bob"]


def test_tokenize_collapses_whitespace():
    assert tokenize("  Alice\t sleeps ", LEX) == ["alice", "sleeps"]


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


@pytest.mark.parametrize("sentence", BATTERY)
def test_battery_parses_to_sentence_type(sentence):
    trees = parse_sentence(sentence, LEX)
    assert len(trees) >= 1


def test_parse_is_typed():
    (tree,) = parse_sentence("Alice sleeps", LEX)
    assert str(tree.gtype) == "s"
    text = tree_to_text(tree)
    assert "Alice : p" in text
    assert "sleeps : p -> s" in text


def test_parse_applies_bare_np_coercion():
    (tree,) = parse_sentence("no man is an island", LEX)
    assert "coerce[bare-np]" in tree_to_text(tree)


def test_parse_unknown_word_raises():
    with pytest.raises(MissingSymbolError) as exc:
        parse_sentence("Alice frobnicates", LEX)
    assert "frobnicates" in str(exc.value)


def test_no_parse_returns_empty():
    assert parse_sentence("sleeps sleeps", LEX) == []


def test_parse_with_target_type():
    trees = parse_sentence("big man", LEX, target="n")
    assert len(trees) == 1
    assert str(trees[0].gtype) == "n"
    assert parse_sentence("big man", LEX, target="s") == []


def test_tree_json_shape():
    (tree,) = parse_sentence("Alice sleeps", LEX)
    data = tree_to_json(tree)
    assert data["apply"] == "right"
    assert data["fn"]["word"] == "sleeps"
    assert data["arg"]["word"] == "Alice"


# --------------------------------------------------------------------------
# Lexicon access
# --------------------------------------------------------------------------


def test_lexicon_lookup_and_kinds():
    entries = LEX.lookup("sleeps")
    assert entries and all(e.word == "sleeps" for e in entries)
    gt = entries[0].gtype
    assert isinstance(gt, Under) or isinstance(gt, Over)
    assert LEX.singletons() >= {"Alice", "Bob"}


def test_lexicon_missing_word():
    assert tuple(LEX.lookup("frobnicates")) == ()


# --------------------------------------------------------------------------
# Pipeline: parse, elaborate, normalize, evaluate to a diagram
# --------------------------------------------------------------------------


@pytest.mark.parametrize("sentence", BATTERY)
def test_pipeline_yields_closed_diagrams(sentence):
    results = pipeline(sentence, LEX)
    assert len(results) >= 1
    for res in results:
        assert isinstance(res.value, dg.Diagram)
        assert res.value.dom == () and res.value.cod == ()


def test_pipeline_meaning_matches_tree():
    (res,) = pipeline("Alice sleeps", LEX)
    import peircelex.lam as lam

    raw = meaning_of(res.tree, LEX)
    consts = lam.diagram_constants(LEX.sig)
    elaborated, _ = lam.elaborate(raw, None, consts)
    assert lam.alpha_eq(lam.beta_normalize(elaborated), res.term)


def test_pipeline_target_changes_result_type():
    (res,) = pipeline("big man", LEX, target="n")
    assert res.value.dom == () and res.value.cod == ("N",)


def test_pipeline_no_parse_is_empty():
    assert pipeline("sleeps sleeps", LEX) == []


def test_pipeline_deterministic():
    a = pipeline("every big man sleeps", LEX)
    b = pipeline("every big man sleeps", LEX)
    assert len(a) == len(b) == 1
    assert dg.equal(a[0].value, b[0].value)
    assert dg.diagram_expr(dg.canonical(a[0].value)) == dg.diagram_expr(
        dg.canonical(b[0].value)
    )


def test_semantic_types_follow_grammar_types():
    # Every entry's recorded semantic type must match the homomorphic image
    # of its grammar type.
    for word in ["sleeps", "man", "alice", "every", "loves"]:
        for entry in LEX.lookup(word):
            assert entry.sem_type == LEX.sem_type_of(entry.gtype)
