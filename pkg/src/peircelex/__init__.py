"""Compositional semantics toolkit: categorial grammar, diagram meanings, logic.

The pipeline: ``parse_sentence`` builds syntax trees over a residuated type
grammar; ``meaning_of`` assigns each tree a typed lambda term over diagram
primitives; beta-normalization and elaboration produce a string diagram (or,
for formula-valued lexicons, a first-order formula); ``to_fol`` reads an
existential-graph diagram as first-order logic; and the ``backends`` module
evaluates diagrams on finite models (``rel``) or linear maps (``vect``).
``cross_validate`` compares the diagram route against the formula route.
"""

from .backends import (
    RelInterp,
    VectInterp,
    eval_rel,
    eval_vect,
    model_to_relinterp,
)
from .diagram import (
    BoxInstance,
    Cap,
    Compose,
    Cup,
    Cut,
    Diagram,
    Id,
    Spider,
    Swap,
    Tensor,
    boxes_of,
    box,
    canonical,
    cut,
    diagram_expr,
    equal,
    from_json,
    iter_generators,
    normalize,
    spider,
    to_json,
    transpose,
)
from .errors import (
    EvalError,
    MissingSymbolError,
    NoParseError,
    PeirceLexError,
    ShapeMismatchError,
    TermSyntaxError,
    TypeCheckError,
    TypeSyntaxError,
)
from .grammar import (
    Lexicon,
    PipelineResult,
    SyntaxTree,
    bundled_lexicon_path,
    load_lexicon,
    meaning_of,
    parse_sentence,
    pipeline,
    tokenize,
    tree_to_json,
    tree_to_text,
)
from .lam import (
    App,
    Const,
    Lam,
    Term,
    Var,
    beta_normalize,
    elaborate,
    eval_closed,
    parse_term,
    pretty_term,
    typecheck,
)
from .logic import (
    Atom,
    Formula,
    Model,
    Verdict,
    alpha_eq,
    enumerate_models,
    equivalent,
    evaluate,
    formula_from_json,
    formula_to_json,
    signature_of,
    singleton_rewrite,
)
from .montague import SHARED_FRAGMENT, cross_validate, montague_formula
from .peirce import double_cut_elim, fol_of_sentence, spider_fuse, to_fol
from .render import to_dot, to_svg

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # diagrams
    "Diagram", "Id", "BoxInstance", "Compose", "Tensor", "Spider", "Cup",
    "Cap", "Swap", "Cut", "box", "cut", "spider", "transpose", "normalize",
    "canonical", "equal", "boxes_of", "iter_generators", "diagram_expr",
    "to_json", "from_json",
    # grammar
    "Lexicon", "SyntaxTree", "PipelineResult", "load_lexicon",
    "bundled_lexicon_path", "tokenize", "parse_sentence", "meaning_of",
    "pipeline", "tree_to_text", "tree_to_json",
    # lambda terms
    "Term", "Var", "Lam", "App", "Const", "parse_term", "pretty_term",
    "beta_normalize", "typecheck", "elaborate", "eval_closed",
    # logic
    "Formula", "Atom", "Model", "Verdict", "alpha_eq", "evaluate",
    "equivalent", "enumerate_models", "signature_of", "singleton_rewrite",
    "formula_to_json", "formula_from_json",
    # existential graphs
    "to_fol", "fol_of_sentence", "spider_fuse", "double_cut_elim",
    # backends
    "RelInterp", "VectInterp", "eval_rel", "eval_vect", "model_to_relinterp",
    # cross-validation
    "montague_formula", "cross_validate", "SHARED_FRAGMENT",
    # rendering
    "to_dot", "to_svg",
    # errors
    "PeirceLexError", "TypeSyntaxError", "TypeCheckError", "TermSyntaxError",
    "MissingSymbolError", "ShapeMismatchError", "NoParseError", "EvalError",
]
