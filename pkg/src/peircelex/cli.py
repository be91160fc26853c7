"""Command-line interface: the full pipeline behind one executable.

Subcommands
-----------
``parse``
    Print the syntax tree(s) of a sentence as indented text or JSON.
``meaning``
    Print the beta-normal meaning term and its value: the string diagram
    (text, JSON, DOT, or SVG) or, with ``--logic``, the first-order formula.
``draw``
    Render the diagram of a sentence (DOT, SVG, JSON, or text).
``eval``
    Evaluate a sentence against a finite model (``rel``/``fol`` backends) or
    an interpretation file (``vect``) and print the result as JSON.
``check-equiv``
    Compare the diagram pipeline against the formula pipeline on one
    sentence; exit 0 when equivalent, 3 when a countermodel exists.
``selftest``
    Run the built-in acceptance battery; exit 0 only if every check passes.

File arguments (``--lexicon``, ``--interp``) are resolved first as literal
paths, then inside ``$PEIRCELEX_LEXICON_DIR``, then among the bundled files.
Failures print a single machine-parsable line ``prefix: message`` on stderr
and exit 1; the prefixes are ``no-parse``, ``type-error``, ``missing-symbol``
and ``shape-mismatch``.  Identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import diagram as dg
from . import logic as lg
from .backends import VectInterp, eval_rel, eval_vect, model_to_relinterp
from .errors import EvalError, MissingSymbolError, NoParseError, PeirceLexError
from .grammar import (
    Lexicon,
    load_lexicon,
    meaning_of,
    parse_sentence,
    pipeline,
    tree_to_json,
    tree_to_text,
)
from .lam import pretty_term
from .peirce import to_fol
from .render import to_dot, to_svg

__all__ = ["main"]


# --------------------------------------------------------------------------
# File resolution
# --------------------------------------------------------------------------


def _resolve(name: str, bundled: str | None, kind: str) -> Path:
    """Resolve ``name`` as a literal path, under the env dir, or bundled."""
    literal = Path(name)
    if literal.exists():
        return literal
    env = os.environ.get("PEIRCELEX_LEXICON_DIR")
    if env:
        cand = Path(env) / name
        if cand.exists():
            return cand
    if bundled is not None:
        base = name if name.endswith(".json") else name + ".json"
        cand = Path(__file__).parent / bundled / base
        if cand.exists():
            return cand
    raise MissingSymbolError(f"no {kind} file named {name!r}")


def _load_lexicon(name: str) -> Lexicon:
    return load_lexicon(_resolve(name, "lexicons", "lexicon"))


def _load_json(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# --------------------------------------------------------------------------
# Shared helpers
# --------------------------------------------------------------------------


def _emit(payload: str, out: str | None) -> None:
    if not payload.endswith("\n"):
        payload += "\n"
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)


def _dumps(data) -> str:
    return json.dumps(data, sort_keys=True)


def _results(args):
    lex = _load_lexicon(args.lexicon)
    results = pipeline(args.sentence, lex, args.target)
    if not results:
        raise NoParseError(f"no parse of {args.sentence!r} at the target type")
    return lex, results


def _formula_of(value, lex: Lexicon) -> lg.Formula:
    if isinstance(value, lg.Formula):
        return value
    f = to_fol(value)
    return lg.singleton_rewrite(f, lex.singletons())


def _render_diagram(d: dg.Diagram, fmt: str) -> str:
    if fmt == "dot":
        return to_dot(d)
    if fmt == "svg":
        return to_svg(d)
    if fmt == "json":
        return _dumps(dg.to_json(d))
    return dg.diagram_expr(dg.canonical(d))


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _cmd_parse(args) -> int:
    lex = _load_lexicon(args.lexicon)
    trees = parse_sentence(args.sentence, lex, args.target)
    if not trees:
        raise NoParseError(f"no parse of {args.sentence!r} at the target type")
    chosen = trees if args.all else trees[:1]
    if args.format == "json":
        data = [tree_to_json(t) for t in chosen]
        _emit(_dumps(data if args.all else data[0]), args.output)
    else:
        _emit("\n".join(tree_to_text(t) for t in chosen), args.output)
    return 0


def _cmd_meaning(args) -> int:
    lex, results = _results(args)
    chosen = results if args.all else results[:1]
    blocks: list[str] = []
    payload: list[dict] = []
    for res in chosen:
        term = meaning_of(res.tree, lex) if args.raw else res.term
        if args.logic:
            formula = _formula_of(res.value, lex)
            if args.format == "json":
                payload.append(lg.formula_to_json(formula))
            else:
                blocks.append(str(formula))
            continue
        if isinstance(res.value, lg.Formula):
            if args.format == "json":
                payload.append(
                    {
                        "term": pretty_term(term),
                        "formula": lg.formula_to_json(res.value),
                    }
                )
            else:
                blocks.append(f"term: {pretty_term(term)}\nformula: {res.value}")
            continue
        if args.format == "json":
            payload.append(
                {"term": pretty_term(term), "diagram": dg.to_json(res.value)}
            )
        elif args.format in ("dot", "svg"):
            blocks.append(_render_diagram(res.value, args.format))
        else:
            blocks.append(
                f"term: {pretty_term(term)}\n"
                f"diagram: {dg.diagram_expr(dg.canonical(res.value))}"
            )
    if args.format == "json":
        _emit(_dumps(payload if args.all else payload[0]), args.output)
    else:
        _emit("\n\n".join(blocks), args.output)
    return 0


def _cmd_draw(args) -> int:
    _, results = _results(args)
    value = results[0].value
    if isinstance(value, lg.Formula):
        raise EvalError("draw needs a diagram-valued lexicon, got a formula")
    _emit(_render_diagram(value, args.format), args.output)
    return 0


def _cmd_eval(args) -> int:
    lex, results = _results(args)
    value = results[0].value
    if args.backend == "vect":
        if not args.interp:
            raise EvalError("--backend vect requires --interp")
        if isinstance(value, lg.Formula):
            raise EvalError("vect backend needs a diagram-valued lexicon")
        interp = VectInterp.from_json(_load_json(_resolve(args.interp, "interps", "interp")))
        result = eval_vect(value, interp)
        _emit(_dumps(result.tolist()), args.output)
        return 0
    if not args.model:
        raise EvalError(f"--backend {args.backend} requires --model")
    model = lg.Model.from_json(_load_json(_resolve(args.model, None, "model")))
    if args.backend == "rel":
        if isinstance(value, lg.Formula):
            raise EvalError("rel backend needs a diagram-valued lexicon")
        result = eval_rel(value, model_to_relinterp(model, lex.sig))
        _emit(_dumps(result.tolist()), args.output)
        return 0
    formula = _formula_of(value, lex)
    _emit(_dumps(lg.evaluate(formula, model)), args.output)
    return 0


def _cmd_check_equiv(args) -> int:
    from .montague import cross_validate

    verdict = cross_validate(args.sentence, bound=args.bound)
    print(verdict)
    return 0 if verdict.equivalent else 3


def _cmd_selftest(args) -> int:
    from .selftest import main as selftest_main

    only = None
    if args.only:
        only = {int(part) for part in args.only.split(",") if part.strip()}
    return selftest_main(only)


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


def _add_sentence_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("sentence", help="sentence to process")
    sub.add_argument(
        "--lexicon",
        default="peirce.json",
        help="lexicon file: literal path, $PEIRCELEX_LEXICON_DIR, or bundled name",
    )
    sub.add_argument("--target", default=None, help="target grammar type (default: s)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peircelex",
        description="sentences to string diagrams, existential graphs, and logic",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("parse", help="print the syntax tree of a sentence")
    _add_sentence_args(p)
    p.add_argument("--all", action="store_true", help="print every parse, not just the first")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output", default=None, help="write output to a file")
    p.set_defaults(fn=_cmd_parse)

    p = subs.add_parser("meaning", help="print the meaning term and its diagram or formula")
    _add_sentence_args(p)
    p.add_argument("--all", action="store_true", help="print every parse, not just the first")
    p.add_argument("--logic", action="store_true", help="print the first-order formula only")
    p.add_argument("--raw", action="store_true", help="print the term before normalization")
    p.add_argument("--format", choices=("text", "json", "dot", "svg"), default="text")
    p.add_argument("-o", "--output", default=None, help="write output to a file")
    p.set_defaults(fn=_cmd_meaning)

    p = subs.add_parser("draw", help="render the diagram of a sentence")
    _add_sentence_args(p)
    p.add_argument("--format", choices=("dot", "svg", "json", "text"), default="dot")
    p.add_argument("-o", "--output", default=None, help="write output to a file")
    p.set_defaults(fn=_cmd_draw)

    p = subs.add_parser("eval", help="evaluate a sentence on a model or interpretation")
    _add_sentence_args(p)
    p.add_argument("--backend", choices=("rel", "vect", "fol"), required=True)
    p.add_argument("--model", default=None, help="finite model JSON (rel and fol backends)")
    p.add_argument("--interp", default=None, help="tensor interpretation JSON (vect backend)")
    p.add_argument("-o", "--output", default=None, help="write output to a file")
    p.set_defaults(fn=_cmd_eval)

    p = subs.add_parser("check-equiv", help="cross-validate the two pipelines on a sentence")
    p.add_argument("sentence", help="sentence to check")
    p.add_argument("--bound", type=int, default=3, help="maximum universe size (default 3)")
    p.set_defaults(fn=_cmd_check_equiv)

    p = subs.add_parser("selftest", help="run the acceptance battery")
    p.add_argument("--only", default=None, help="comma-separated check numbers to run")
    p.set_defaults(fn=_cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PeirceLexError as exc:
        print(f"{exc.prefix}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
