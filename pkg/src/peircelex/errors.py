"""Exception hierarchy. Each class maps to one machine-parsable CLI prefix."""

from __future__ import annotations


class PeirceLexError(Exception):
    """Base class; ``prefix`` is the stable error tag printed by the CLI."""

    prefix = "error"


class TypeSyntaxError(PeirceLexError):
    prefix = "type-error"


class TypeCheckError(PeirceLexError):
    prefix = "type-error"


class TermSyntaxError(PeirceLexError):
    prefix = "type-error"


class MissingSymbolError(PeirceLexError):
    prefix = "missing-symbol"


class ShapeMismatchError(PeirceLexError):
    prefix = "shape-mismatch"


class NoParseError(PeirceLexError):
    prefix = "no-parse"


class EvalError(PeirceLexError):
    prefix = "type-error"
