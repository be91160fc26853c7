"""Lexicons and applicative categorial parsing.

A lexicon assigns each word one or more grammar types and a meaning term; the
parser is a CYK chart over exactly two binary rules — forward application for
``x <- y``, backward application for ``y -> x`` — plus any unary coercions the
lexicon declares (each coercion is a named grammar-type pair with a meaning
term of the corresponding function type).  There is no composition,
type-raising, or hypothetical reasoning: every derivation is a tree of
applications, which is all the shipped lexicons need.

The meaning of a derivation is the fold that applies function meanings to
argument meanings in the direction the tree indicates.  ``pipeline`` chains
tokenization, parsing, meaning extraction, beta-normalization, type
elaboration, and evaluation into a diagram or formula per parse tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import logic as lg
from .core import (
    ArrowT,
    Atom,
    GrammarType,
    MonoidalSignature,
    Over,
    SemType,
    Under,
    parse_grammar_type,
    parse_sem_type,
    pretty_grammar_type,
    semantic_type_of,
)
from .errors import (
    MissingSymbolError,
    NoParseError,
    TermSyntaxError,
    TypeCheckError,
    TypeSyntaxError,
)
from .lam import (
    App,
    ConstantTable,
    Term,
    Var,
    beta_normalize,
    diagram_constants,
    elaborate,
    eval_closed,
    logic_constants,
    parse_term,
    pretty_term,
)

__all__ = [
    "LexiconEntry",
    "Coercion",
    "Lexicon",
    "load_lexicon",
    "bundled_lexicon_path",
    "SyntaxTree",
    "Leaf",
    "ApplyLeft",
    "ApplyRight",
    "Coerce",
    "tokenize",
    "parse_sentence",
    "meaning_of",
    "PipelineResult",
    "pipeline",
    "tree_to_text",
    "tree_to_json",
]


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    gtype: GrammarType
    meaning: Term
    sem_type: SemType


@dataclass(frozen=True)
class Coercion:
    """A declared unary rule ``src => dst`` with a meaning term."""

    name: str
    src: GrammarType
    dst: GrammarType
    meaning: Term


# --------------------------------------------------------------------------
# Syntax trees
# --------------------------------------------------------------------------


class SyntaxTree:
    __slots__ = ()

    @property
    def gtype(self) -> GrammarType:
        raise NotImplementedError


@dataclass(frozen=True)
class Leaf(SyntaxTree):
    entry: LexiconEntry

    @property
    def gtype(self) -> GrammarType:
        return self.entry.gtype


@dataclass(frozen=True)
class ApplyLeft(SyntaxTree):
    """Forward application: function of type ``x <- y`` with its argument on the right."""

    fn: SyntaxTree
    arg: SyntaxTree

    @property
    def gtype(self) -> GrammarType:
        return self.fn.gtype.result


@dataclass(frozen=True)
class ApplyRight(SyntaxTree):
    """Backward application: argument on the left of a function of type ``y -> x``."""

    arg: SyntaxTree
    fn: SyntaxTree

    @property
    def gtype(self) -> GrammarType:
        return self.fn.gtype.result


@dataclass(frozen=True)
class Coerce(SyntaxTree):
    rule: Coercion
    child: SyntaxTree

    @property
    def gtype(self) -> GrammarType:
        return self.rule.dst


def tree_to_text(tree: SyntaxTree, indent: int = 0) -> str:
    pad = "  " * indent
    ty = pretty_grammar_type(tree.gtype)
    match tree:
        case Leaf(entry):
            return f"{pad}{entry.word} : {ty}"
        case ApplyLeft(fn, arg):
            return "\n".join(
                (f"{pad}apply< : {ty}", tree_to_text(fn, indent + 1), tree_to_text(arg, indent + 1))
            )
        case ApplyRight(arg, fn):
            return "\n".join(
                (f"{pad}apply> : {ty}", tree_to_text(arg, indent + 1), tree_to_text(fn, indent + 1))
            )
        case Coerce(rule, child):
            return "\n".join((f"{pad}coerce[{rule.name}] : {ty}", tree_to_text(child, indent + 1)))
    raise TypeError(f"not a syntax tree: {tree!r}")


def tree_to_json(tree: SyntaxTree) -> dict:
    ty = pretty_grammar_type(tree.gtype)
    match tree:
        case Leaf(entry):
            return {"word": entry.word, "type": ty}
        case ApplyLeft(fn, arg):
            return {"apply": "left", "type": ty, "fn": tree_to_json(fn), "arg": tree_to_json(arg)}
        case ApplyRight(arg, fn):
            return {"apply": "right", "type": ty, "fn": tree_to_json(fn), "arg": tree_to_json(arg)}
        case Coerce(rule, child):
            return {"coerce": rule.name, "type": ty, "child": tree_to_json(child)}
    raise TypeError(f"not a syntax tree: {tree!r}")


# --------------------------------------------------------------------------
# Lexicons
# --------------------------------------------------------------------------


class Lexicon:
    """Immutable word → (grammar type, meaning) table plus its semantic backdrop.

    ``kind`` is "diagram" when the signature is monoidal (meanings build
    diagrams) and "logic" when it is a first-order signature (meanings build
    formulas).  All entries and coercions are typechecked at load time against
    the image of their grammar type under the atom assignment.
    """

    def __init__(
        self,
        atoms: frozenset[str],
        assignment: dict[str, SemType],
        consts: ConstantTable,
        entries: dict[str, tuple[LexiconEntry, ...]],
        coercions: tuple[Coercion, ...],
        *,
        sig: MonoidalSignature | None = None,
        fol_sig: lg.FolSignature | None = None,
        target: GrammarType | None = None,
    ):
        self.atoms = atoms
        self.assignment = assignment
        self.consts = consts
        self.entries = entries
        self.coercions = coercions
        self.sig = sig
        self.fol_sig = fol_sig
        self.target = target or (Atom("s") if "s" in atoms else None)
        self._multiword = tuple(
            sorted((k for k in entries if " " in k), key=lambda k: -k.count(" "))
        )

    @property
    def kind(self) -> str:
        return "diagram" if self.sig is not None else "logic"

    def sem_type_of(self, gtype: GrammarType) -> SemType:
        return semantic_type_of(gtype, self.assignment)

    def singletons(self) -> frozenset[str]:
        return self.sig.singletons() if self.sig is not None else frozenset()

    def lookup(self, token: str) -> tuple[LexiconEntry, ...]:
        return self.entries.get(token.lower(), ())

    @staticmethod
    def from_json(data: dict) -> "Lexicon":
        atoms = frozenset(data.get("atoms", []))
        sig_data = data.get("signature", {})
        sig: MonoidalSignature | None = None
        fol_sig: lg.FolSignature | None = None
        if "constants" in sig_data or "predicates" in sig_data:
            fol_sig = lg.FolSignature.make(
                sig_data.get("constants", []),
                sig_data.get("predicates", {}),
            )
            consts = logic_constants(fol_sig)
            objects: set[str] | None = None
        else:
            sig = MonoidalSignature.from_json(sig_data)
            consts = diagram_constants(sig)
            objects = set(sig.objects)

        assignment = {
            atom: parse_sem_type(text, objects)
            for atom, text in data.get("assignment", {}).items()
        }
        for atom in assignment:
            if atom not in atoms:
                raise TypeCheckError(f"assignment for undeclared atom {atom!r}")

        problems: list[str] = []

        def checked(owner: str, text: str, expected: SemType) -> Term:
            # On failure the placeholder is never used: load raises afterwards.
            try:
                term = parse_term(text)
                elaborate(term, expected, consts)
            except (TermSyntaxError, TypeCheckError, MissingSymbolError) as exc:
                problems.append(f"{owner}: {exc}")
                return Var("_invalid")
            return term

        entries: dict[str, list[LexiconEntry]] = {}
        for spec in data.get("entries", []):
            word = spec["word"]
            try:
                gtype = parse_grammar_type(spec["type"], set(atoms))
                sem = semantic_type_of(gtype, assignment)
            except (TypeSyntaxError, TypeCheckError, MissingSymbolError) as exc:
                problems.append(f"entry {word!r}: {exc}")
                continue
            meaning = checked(f"entry {word!r}", spec["meaning"], sem)
            entries.setdefault(word.lower(), []).append(
                LexiconEntry(word, gtype, meaning, sem)
            )

        coercions: list[Coercion] = []
        for spec in data.get("coercions", []):
            name = spec["name"]
            try:
                src = parse_grammar_type(spec["from"], set(atoms))
                dst = parse_grammar_type(spec["to"], set(atoms))
            except (TypeSyntaxError, TypeCheckError, MissingSymbolError) as exc:
                problems.append(f"coercion {name!r}: {exc}")
                continue
            expected = ArrowT(semantic_type_of(src, assignment), semantic_type_of(dst, assignment))
            meaning = checked(f"coercion {name!r}", spec["meaning"], expected)
            coercions.append(Coercion(name, src, dst, meaning))

        if problems:
            raise TypeCheckError("; ".join(problems))

        target = None
        if "target" in data:
            target = parse_grammar_type(data["target"], set(atoms))
        return Lexicon(
            atoms,
            assignment,
            consts,
            {w: tuple(es) for w, es in entries.items()},
            tuple(coercions),
            sig=sig,
            fol_sig=fol_sig,
            target=target,
        )


def load_lexicon(path: str | Path) -> Lexicon:
    """Load and typecheck a lexicon JSON file; an empty file is an empty lexicon."""
    text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text) if text.strip() else {}
    if not isinstance(data, dict):
        raise TypeCheckError(f"lexicon file {path} must hold a JSON object")
    return Lexicon.from_json(data)


def bundled_lexicon_path(name: str) -> Path:
    """Path of a lexicon shipped with the package (name with or without .json)."""
    if not name.endswith(".json"):
        name += ".json"
    path = Path(__file__).parent / "lexicons" / name
    if not path.exists():
        raise MissingSymbolError(f"no bundled lexicon named {name!r}")
    return path


# --------------------------------------------------------------------------
# Tokenization and parsing
# --------------------------------------------------------------------------


def tokenize(sentence: str, lex: Lexicon) -> list[str]:
    """Lowercased whitespace tokens, greedily merging multiword lexicon keys."""
    words = sentence.lower().split()
    if not lex._multiword:
        return words
    out: list[str] = []
    i = 0
    while i < len(words):
        for key in lex._multiword:
            parts = key.split(" ")
            if words[i : i + len(parts)] == parts:
                out.append(key)
                i += len(parts)
                break
        else:
            out.append(words[i])
            i += 1
    return out


def _unary_closure(lex: Lexicon, items: list[SyntaxTree]) -> list[SyntaxTree]:
    """Close a cell under coercions; each rule fires at most once per chain."""
    out: list[tuple[SyntaxTree, frozenset[str]]] = [(t, frozenset()) for t in items]
    i = 0
    while i < len(out):
        tree, used = out[i]
        i += 1
        for rule in lex.coercions:
            if rule.name in used or rule.src != tree.gtype:
                continue
            out.append((Coerce(rule, tree), used | {rule.name}))
    return [t for t, _ in out]


def parse_sentence(
    words: str | list[str], lex: Lexicon, target: GrammarType | str | None = None
) -> list[SyntaxTree]:
    """All derivations of ``target`` over ``words``, in deterministic order.

    Unknown words raise; an empty result means no parse at the target type.
    """
    if isinstance(words, str):
        words = tokenize(words, lex)
    if isinstance(target, str):
        target = parse_grammar_type(target, set(lex.atoms))
    if target is None:
        if lex.target is None:
            raise NoParseError("no target type given and the lexicon declares none")
        target = lex.target
    if not words:
        return []

    unknown = [w for w in words if not lex.lookup(w)]
    if unknown:
        raise MissingSymbolError("unknown words: " + ", ".join(dict.fromkeys(unknown)))

    n = len(words)
    chart: dict[tuple[int, int], list[SyntaxTree]] = {}
    for i, word in enumerate(words):
        chart[(i, i + 1)] = _unary_closure(
            lex, [Leaf(entry) for entry in lex.lookup(word)]
        )
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell: list[SyntaxTree] = []
            for k in range(i + 1, j):
                for left in chart[(i, k)]:
                    for right in chart[(k, j)]:
                        lt, rt = left.gtype, right.gtype
                        if isinstance(lt, Over) and lt.argument == rt:
                            cell.append(ApplyLeft(left, right))
                        if isinstance(rt, Under) and rt.argument == lt:
                            cell.append(ApplyRight(left, right))
            chart[(i, j)] = _unary_closure(lex, cell)
    return [t for t in chart[(0, n)] if t.gtype == target]


def meaning_of(tree: SyntaxTree, lex: Lexicon) -> Term:
    """Fold a syntax tree into its meaning term (not yet normalized)."""
    match tree:
        case Leaf(entry):
            return entry.meaning
        case ApplyLeft(fn, arg):
            return App(meaning_of(fn, lex), meaning_of(arg, lex))
        case ApplyRight(arg, fn):
            return App(meaning_of(fn, lex), meaning_of(arg, lex))
        case Coerce(rule, child):
            return App(rule.meaning, meaning_of(child, lex))
    raise TypeError(f"not a syntax tree: {tree!r}")


# --------------------------------------------------------------------------
# The full pipeline
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    tree: SyntaxTree
    term: Term  # beta-normal, with solved constant instantiations
    value: object  # Diagram or Formula

    def __str__(self) -> str:
        return f"{pretty_term(self.term)} = {self.value}"


def pipeline(
    sentence: str | list[str],
    lex: Lexicon,
    target: GrammarType | str | None = None,
    strategy: str = "normal",
) -> list[PipelineResult]:
    """Parse, compose, normalize, typecheck, and evaluate; one result per tree."""
    if isinstance(target, str):
        target = parse_grammar_type(target, set(lex.atoms))
    trees = parse_sentence(sentence, lex, target)
    results = []
    for tree in trees:
        term = beta_normalize(meaning_of(tree, lex), strategy=strategy)
        expected = lex.sem_type_of(tree.gtype)
        elaborated, _ = elaborate(term, expected, lex.consts)
        results.append(PipelineResult(tree, elaborated, eval_closed(elaborated, lex.consts)))
    return results
