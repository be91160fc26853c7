"""Classical formula-valued semantics and the cross-pipeline equivalence check.

``montague_formula`` runs the grammar pipeline with a formula-valued lexicon
(word meanings are lambda terms over first-order constants, predicates, and
quantifiers) and returns the resulting closed sentence.  It is the reference
against which the diagram pipeline is validated: ``cross_validate`` computes
both meanings of a sentence — the formula directly, and the diagram read
through ``to_fol`` with singleton predicates inlined as constants — and
decides bounded logical equivalence by finite-model enumeration.

``SHARED_FRAGMENT`` lists the sentences covered by both bundled lexicons.
"""

from __future__ import annotations

from . import logic as lg
from .errors import EvalError, NoParseError
from .grammar import Lexicon, bundled_lexicon_path, load_lexicon, pipeline
from .peirce import fol_of_sentence

__all__ = ["montague_formula", "cross_validate", "SHARED_FRAGMENT"]

SHARED_FRAGMENT = (
    "Alice sleeps",
    "every man sleeps",
    "Alice kills a mortal",
    "no man is an island",
    "Man's Not Hot",
    "every big man sleeps",
)


def montague_formula(
    sentence: str | list[str], lex: Lexicon | None = None, target=None
) -> lg.Formula:
    """The closed first-order formula a formula-valued lexicon assigns.

    Uses the bundled ``montague`` lexicon by default and the first parse.
    """
    if lex is None:
        lex = load_lexicon(bundled_lexicon_path("montague"))
    results = pipeline(sentence, lex, target)
    if not results:
        raise NoParseError(f"no parse of {sentence!r} at the target type")
    value = results[0].value
    if not isinstance(value, lg.Formula):
        raise EvalError(f"meaning of {sentence!r} is a diagram, not a formula")
    stray = lg.free_vars(value)
    if stray:
        raise EvalError(f"formula for {sentence!r} is not closed: free {sorted(stray)}")
    return value


def cross_validate(
    sentence: str | list[str],
    montague_lex: Lexicon | None = None,
    peirce_lex: Lexicon | None = None,
    bound: int = 3,
    *,
    budget: int = 200_000,
    samples: int = 1000,
    seed: int = 0,
) -> lg.Verdict:
    """Bounded equivalence of the two readings of ``sentence``.

    The formula pipeline gives one side; the diagram pipeline gives the other
    via ``to_fol`` followed by ``singleton_rewrite`` (so state-style proper
    nouns line up with constant-style ones).  Both formulas are compared over
    every model of their joint signature up to ``bound`` elements.
    """
    if montague_lex is None:
        montague_lex = load_lexicon(bundled_lexicon_path("montague"))
    if peirce_lex is None:
        peirce_lex = load_lexicon(bundled_lexicon_path("peirce"))
    f = montague_formula(sentence, montague_lex)
    g = fol_of_sentence(sentence, peirce_lex)
    f = lg.singleton_rewrite(f, peirce_lex.singletons())
    sig = lg.signature_of(f, g)
    return lg.equivalent(f, g, sig, bound, budget=budget, samples=samples, seed=seed)
