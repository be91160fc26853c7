"""Built-in acceptance battery: ten end-to-end checks with frozen expectations.

Each check drives the public pipeline the way a user would — bundled
lexicons, the documented API, the command line — and compares the results
against hand-computed oracles or independently derived values.  ``run_all``
executes every check and reports one line per item; the ``peircelex
selftest`` subcommand prints exactly that.

The battery is deterministic: all randomness is seeded, and the command-line
checks run in subprocesses with distinct ``PYTHONHASHSEED`` values so that
any hidden dependence on hash ordering would show up as a byte difference.
"""

from __future__ import annotations

import itertools
import os
import random
import subprocess
import sys
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import diagram as dg
from . import logic as lg
from .backends import VectInterp, eval_rel, eval_vect, model_to_relinterp
from .core import ArrowT, DiagT, SemType
from .grammar import Lexicon, bundled_lexicon_path, load_lexicon, pipeline
from .lam import App, Const, Lam, Term, Var, alpha_eq, beta_normalize, elaborate, parse_term
from .montague import SHARED_FRAGMENT, cross_validate, montague_formula
from .peirce import double_cut_elim, fol_of_sentence, spider_fuse, to_fol

__all__ = ["CheckResult", "BATTERY", "run_all", "main"]


#: The sentence battery exercised by the backend-agreement and rewrite checks.
BATTERY: tuple[str, ...] = (
    "Alice sleeps",
    "every man sleeps",
    "Alice loves Bob",
    "ideas sleep furiously",
    "Man's Not Hot",
    "no man is an island",
    "Alice kills a mortal",
    "every big man sleeps",
)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one acceptance check."""

    number: int
    label: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{status} {self.number:>2} {self.label}: {self.detail}"


@lru_cache(maxsize=None)
def _lex(name: str) -> Lexicon:
    return load_lexicon(bundled_lexicon_path(name))


def _value(sentence: str, lex: Lexicon, target: str | None = None):
    """The unique pipeline value of ``sentence``; ambiguity is an error here."""
    results = pipeline(sentence, lex, target)
    if len(results) != 1:
        raise RuntimeError(f"{sentence!r}: expected 1 parse, got {len(results)}")
    return results[0].value


# --------------------------------------------------------------------------
# 1. Higher-order adjectives: "very" duplicates its argument
# --------------------------------------------------------------------------


def _check_adjectives() -> tuple[bool, str]:
    lex = _lex("toy")
    d1 = _value("very big car", lex)
    d2 = _value("big big car", lex)
    if not dg.equal(d1, d2):
        return False, "diagrams for 'very big car' and 'big big car' differ"
    mismatches = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        big = rng.standard_normal((4, 4))
        car = rng.standard_normal(4)
        interp = VectInterp(dims={"N": 4}, boxes={"car": car, "big": big})
        expected = np.dot(np.dot(car, big), big)
        for d in (d1, d2):
            got = eval_vect(d, interp)
            if got.shape != expected.shape or not np.array_equal(got, expected):
                mismatches += 1
    if mismatches:
        return False, f"{mismatches} vector evaluations differ from big·big·car"
    return True, "equal diagrams; both contract to big·big·car exactly (100 seeds)"


# --------------------------------------------------------------------------
# 2. Logic-valued lexicon produces the expected closed formulas
# --------------------------------------------------------------------------


def _check_formulas() -> tuple[bool, str]:
    x = lg.TermV("x")
    cases = (
        ("Alice sleeps", lg.Atom("sleeps", (lg.TermC("Alice"),))),
        (
            "every man sleeps",
            lg.Forall("x", lg.Implies(lg.Atom("man", (x,)), lg.Atom("sleeps", (x,)))),
        ),
    )
    bad = [s for s, want in cases if not lg.alpha_eq(montague_formula(s), want)]
    if bad:
        return False, "wrong formula for: " + ", ".join(repr(s) for s in bad)
    return True, "sleeps(Alice) and forall x. man(x) -> sleeps(x), up to renaming"


# --------------------------------------------------------------------------
# 3. Function types compile to cup wiring
# --------------------------------------------------------------------------


def _check_cups() -> tuple[bool, str]:
    d = _value("Alice loves Bob", _lex("ccg"))
    names = set(dg.boxes_of(d))
    cups = sum(1 for g in dg.iter_generators(d) if isinstance(g, dg.Cup))
    if names != {"Alice", "loves", "Bob"}:
        return False, f"boxes are {sorted(names)}"
    if cups != 2:
        return False, f"expected exactly 2 cups, found {cups}"
    return True, "boxes {Alice, loves, Bob} wired by exactly 2 cups"


# --------------------------------------------------------------------------
# 4. Boxes with holes: adverbs and prepositions wrap diagrams
# --------------------------------------------------------------------------


def _check_holes() -> tuple[bool, str]:
    lex = _lex("holes")
    sig = lex.sig
    d1 = _value("ideas sleep furiously", lex)
    want1 = dg.box(sig, "F", (dg.box(sig, "I") >> dg.box(sig, "S"),))
    if not dg.equal(d1, want1):
        return False, f"'ideas sleep furiously' compiled to {d1}"
    d2 = _value("concepts with attitude", lex, target="n")
    want2 = dg.box(sig, "W", (dg.box(sig, "attitude"), dg.box(sig, "concepts")))
    if not dg.equal(d2, want2):
        return False, f"'concepts with attitude' compiled to {d2}"
    return True, "F filled with I >> S; W filled with (attitude, concepts)"


# --------------------------------------------------------------------------
# 5. Wire-and-cut sentences read as the expected first-order formulas
# --------------------------------------------------------------------------


def _check_readings() -> tuple[bool, str]:
    x = lg.TermV("x")

    def atom(name: str, *args) -> lg.Atom:
        return lg.Atom(name, args)

    targets = (
        ("Man's Not Hot", lg.Exists("x", lg.And(atom("man", x), lg.Not(atom("hot", x))))),
        (
            "no man is an island",
            lg.Not(lg.Exists("x", lg.And(atom("man", x), atom("island", x)))),
        ),
        (
            "Alice kills a mortal",
            lg.Exists("x", lg.And(atom("mortal", x), atom("kills", lg.TermC("Alice"), x))),
        ),
        (
            "every big man sleeps",
            lg.Forall(
                "x",
                lg.Implies(lg.And(atom("big", x), atom("man", x)), atom("sleeps", x)),
            ),
        ),
    )
    lex = _lex("peirce")
    problems = []
    for sentence, want in targets:
        got = fol_of_sentence(sentence, lex)
        verdict = lg.equivalent(got, want, max_universe=3)
        if not (verdict.equivalent and verdict.exhaustive):
            problems.append(f"{sentence!r} -> {got}")
    if problems:
        return False, "; ".join(problems)
    return True, "4 sentences match their formulas (exhaustive models, universe <= 3)"


# --------------------------------------------------------------------------
# 6. Relational evaluation agrees with evaluating the extracted formula
# --------------------------------------------------------------------------


def _model_battery(sig: lg.FolSignature, seed: int) -> Iterator[lg.Model]:
    """Exhaustive models of sizes 1-3 plus 120 seeded random size-4 models."""
    for size in (1, 2, 3):
        yield from lg.enumerate_models(sig, size)
    rng = random.Random(seed)
    for _ in range(120):
        yield lg.sample_model(sig, 4, rng)


def _check_backend_agreement() -> tuple[bool, str]:
    lex = _lex("peirce")
    total = disagreements = 0
    for index, sentence in enumerate(BATTERY):
        d = _value(sentence, lex)
        f = to_fol(d)
        sig = lg.signature_of(f)
        count = 0
        for m in _model_battery(sig, seed=1000 + index):
            count += 1
            if bool(eval_rel(d, model_to_relinterp(m, lex.sig))) != lg.evaluate(f, m):
                disagreements += 1
        if count < 200:
            return False, f"{sentence!r}: only {count} models in battery"
        total += count
    if disagreements:
        return False, f"{disagreements} disagreements over {total} models"
    return True, f"8 sentences, {total} models, 0 disagreements"


# --------------------------------------------------------------------------
# 7. Rewrites preserve relational meaning
# --------------------------------------------------------------------------


def _check_rewrites() -> tuple[bool, str]:
    lex = _lex("peirce")
    rewrites: tuple[tuple[str, Callable[[dg.Diagram], dg.Diagram]], ...] = (
        ("spider_fuse", spider_fuse),
        ("double_cut_elim", double_cut_elim),
    )
    unchanged = compared = disagreements = 0
    for index, sentence in enumerate(BATTERY):
        d = _value(sentence, lex)
        sig = lg.signature_of(to_fol(d))
        for name, rewrite in rewrites:
            r = rewrite(d)
            if r.shape != d.shape:
                return False, f"{name} changed the shape of {sentence!r}"
            if dg.equal(r, d):
                # eval_rel is a function of the normal form, so agreement on
                # every interpretation is immediate; nothing to sample.
                unchanged += 1
                continue
            for m in _model_battery(sig, seed=2000 + index):
                compared += 1
                if bool(eval_rel(r, model_to_relinterp(m, lex.sig))) != bool(
                    eval_rel(d, model_to_relinterp(m, lex.sig))
                ):
                    disagreements += 1
    if disagreements:
        return False, f"{disagreements} disagreements over {compared} models"
    return (
        True,
        f"{unchanged} rewrites left normal forms unchanged; "
        f"{compared} model checks on the rest, 0 disagreements",
    )


# --------------------------------------------------------------------------
# 8. Algebraic laws for random diagrams; reduction laws for random terms
# --------------------------------------------------------------------------


def _random_generator(rng: random.Random, wires: int, sig, depth: int) -> dg.Diagram:
    """One random generator applicable to ``wires`` open wires of object N."""
    kinds = ["state", "cap", "spider"]
    if wires >= 1:
        kinds += ["effect", "endo"]
    if wires >= 2:
        kinds += ["cup", "swap"]
    if depth > 0:
        kinds.append("cut")
    kind = rng.choice(kinds)
    if kind == "state":
        return dg.box(sig, rng.choice(("Alice", "man", "mortal")))
    if kind == "effect":
        return dg.box(sig, rng.choice(("hot", "sleeps")))
    if kind == "endo":
        return dg.box(sig, rng.choice(("kills", "loves")))
    if kind == "cap":
        return dg.Cap("N")
    if kind == "cup":
        return dg.Cup("N")
    if kind == "swap":
        return dg.Swap("N", "N")
    if kind == "spider":
        legs_in = rng.randrange(min(wires, 2) + 1)
        legs_out = rng.randrange(3)
        if legs_in == 0 and legs_out == 0:
            legs_out = 1
        return dg.spider(legs_in, legs_out, "N")
    body_width = rng.randrange(min(wires, 2) + 1)
    return dg.cut(_random_diagram(rng, body_width, sig, depth - 1))


def _random_diagram(rng: random.Random, width: int, sig, depth: int) -> dg.Diagram:
    """Random diagram with domain N^width, built from at most ``depth`` layers."""
    wires = width
    d: dg.Diagram = dg.identity(("N",) * width)
    for _ in range(rng.randrange(depth + 1)):
        gen = _random_generator(rng, wires, sig, depth)
        arity = len(gen.dom)
        pos = rng.randrange(wires - arity + 1)
        layer: dg.Diagram = gen
        if pos:
            layer = dg.identity(("N",) * pos) @ layer
        if wires - pos - arity:
            layer = layer @ dg.identity(("N",) * (wires - pos - arity))
        d = d >> layer
        wires += len(gen.cod) - arity
    return d


def _check_diagram_laws(rng: random.Random, sig) -> tuple[int, list[str]]:
    produced = 0
    failures: list[str] = []
    while produced < 1000:
        a = _random_diagram(rng, rng.randrange(4), sig, 3)
        b = _random_diagram(rng, len(a.cod), sig, 3)
        c = _random_diagram(rng, len(b.cod), sig, 3)
        d = _random_diagram(rng, len(c.cod), sig, 3)
        produced += 4
        if not dg.equal((a >> b) >> c, a >> (b >> c)):
            failures.append(f"associativity: {a}; {b}; {c}")
        if not (
            dg.equal(dg.identity(a.dom) >> a, a) and dg.equal(a >> dg.identity(a.cod), a)
        ):
            failures.append(f"unit: {a}")
        if not dg.equal((a @ c) >> (b @ d), (a >> b) @ (c >> d)):
            failures.append(f"interchange: {a}; {b}; {c}; {d}")
        if len(failures) >= 5:
            break
    return produced, failures


def _dt(dom: int, cod: int) -> DiagT:
    return DiagT(("N",) * dom, ("N",) * cod)


@lru_cache(maxsize=1)
def _leaf_terms() -> dict[tuple[int, int], tuple[Term, ...]]:
    sources = {
        (0, 0): ("man >> hot",),
        (0, 1): ("man", "Alice", "mortal"),
        (1, 0): ("hot", "sleeps"),
        (1, 1): ("kills", "loves", "id(N)", "spider(1, 1, N)"),
        (0, 2): ("cap(N)", "man @ Alice"),
        (2, 0): ("cup(N)", "hot @ sleeps"),
        (1, 2): ("spider(1, 2, N)",),
        (2, 1): ("spider(2, 1, N)",),
        (2, 2): ("swap(N, N)", "kills @ loves"),
    }
    return {k: tuple(parse_term(s) for s in v) for k, v in sources.items()}


def _random_type(rng: random.Random, order: int) -> SemType:
    if order == 0 or rng.random() < 0.5:
        return _dt(rng.randrange(3), rng.randrange(3))
    return ArrowT(_random_type(rng, order - 1), _random_type(rng, order - 1))


def _leaf(rng, ty: SemType, env: dict[str, SemType], names) -> Term:
    usable = [v for v, t in env.items() if t == ty]
    if usable:
        return Var(rng.choice(usable))
    if isinstance(ty, ArrowT):
        v = f"v{next(names)}"
        return Lam(v, _leaf(rng, ty.res, {**env, v: ty.arg}, names))
    assert isinstance(ty, DiagT)
    return rng.choice(_leaf_terms()[(len(ty.dom), len(ty.cod))])


def _random_term(rng, ty: SemType, env: dict[str, SemType], depth: int, names) -> Term:
    usable = [v for v, t in env.items() if t == ty]
    if usable and rng.random() < 0.25:
        return Var(rng.choice(usable))
    if depth == 0:
        return _leaf(rng, ty, env, names)
    if isinstance(ty, ArrowT):
        if rng.random() < 0.6:
            v = f"v{next(names)}"
            return Lam(v, _random_term(rng, ty.res, {**env, v: ty.arg}, depth - 1, names))
        return _redex(rng, ty, env, depth, names)
    assert isinstance(ty, DiagT)
    dom, cod = len(ty.dom), len(ty.cod)
    kinds = ["compose", "tensor", "cut", "redex", "leaf"]
    if dom == 0 or cod == 0:
        kinds.append("transpose")
    kind = rng.choice(tuple(kinds))
    if kind == "compose":
        mid = rng.randrange(3)
        first = _random_term(rng, _dt(dom, mid), env, depth - 1, names)
        second = _random_term(rng, _dt(mid, cod), env, depth - 1, names)
        return App(App(Const("compose"), first), second)
    if kind == "tensor":
        i, j = rng.randrange(dom + 1), rng.randrange(cod + 1)
        top = _random_term(rng, _dt(i, j), env, depth - 1, names)
        bottom = _random_term(rng, _dt(dom - i, cod - j), env, depth - 1, names)
        return App(App(Const("tensor"), top), bottom)
    if kind == "cut":
        return App(Const("cut"), _random_term(rng, ty, env, depth - 1, names))
    if kind == "transpose":
        return App(Const("transpose"), _random_term(rng, _dt(cod, dom), env, depth - 1, names))
    if kind == "redex":
        return _redex(rng, ty, env, depth, names)
    return _leaf(rng, ty, env, names)


def _redex(rng, ty: SemType, env: dict[str, SemType], depth: int, names) -> Term:
    # Redex arguments sit in inference position, so they must have a
    # concrete diagram type: the surface syntax has no binder annotations.
    arg_ty = _dt(rng.randrange(3), rng.randrange(3))
    v = f"v{next(names)}"
    body = _random_term(rng, ty, {**env, v: arg_ty}, depth - 1, names)
    arg = _random_term(rng, arg_ty, env, depth - 1, names)
    return App(Lam(v, body), arg)


def _check_term_laws(rng: random.Random, consts) -> tuple[int, list[str]]:
    produced = 0
    failures: list[str] = []
    while produced < 1000:
        names = itertools.count()
        ty = _random_type(rng, 2)
        t = _random_term(rng, ty, {}, 3, names)
        produced += 1
        try:
            elaborate(t, ty, consts)
            normal = beta_normalize(t, "normal")
            applicative = beta_normalize(t, "applicative")
            if not alpha_eq(normal, applicative):
                failures.append(f"strategies disagree on {t}")
                continue
            elaborate(normal, ty, consts)
        except Exception as exc:  # noqa: BLE001 - any failure is a law violation
            failures.append(f"{type(exc).__name__} on {t}: {exc}")
        if len(failures) >= 5:
            break
    return produced, failures


def _check_laws() -> tuple[bool, str]:
    lex = _lex("peirce")
    rng = random.Random(20260819)
    n_diagrams, diagram_failures = _check_diagram_laws(rng, lex.sig)
    n_terms, term_failures = _check_term_laws(rng, lex.consts)
    failures = diagram_failures + term_failures
    if failures:
        return False, "; ".join(failures[:3])
    return (
        True,
        f"{n_diagrams} random diagrams satisfy associativity/unit/interchange; "
        f"{n_terms} random terms have strategy-independent, type-preserving normal forms",
    )


# --------------------------------------------------------------------------
# 9. The two pipelines agree on the shared fragment
# --------------------------------------------------------------------------


def _check_cross_validation() -> tuple[bool, str]:
    problems = []
    for sentence in SHARED_FRAGMENT:
        verdict = cross_validate(sentence)
        if not (verdict.equivalent and verdict.exhaustive):
            problems.append(f"{sentence!r}: {verdict}")
    if problems:
        return False, "; ".join(problems)
    return True, f"{len(SHARED_FRAGMENT)} sentences equivalent (exhaustive, universe <= 3)"


# --------------------------------------------------------------------------
# 10. The command line is deterministic
# --------------------------------------------------------------------------

_CLI_CASES: tuple[tuple[str, ...], ...] = (
    ("meaning", "Man's Not Hot", "--logic"),
    ("meaning", "every big man sleeps"),
    ("draw", "ideas sleep furiously", "--format", "svg"),
    (
        "eval",
        "very big car",
        "--lexicon",
        "toy.json",
        "--backend",
        "vect",
        "--interp",
        "toy.json",
    ),
)


def _run_cli(args: tuple[str, ...], hash_seed: str) -> bytes:
    proc = subprocess.run(
        [sys.executable, "-m", "peircelex.cli", *args],
        capture_output=True,
        env={**os.environ, "PYTHONHASHSEED": hash_seed},
        timeout=120,
        check=False,
    )
    if proc.returncode != 0:
        raise RuntimeError(
            f"`{' '.join(args)}` exited {proc.returncode}: "
            f"{proc.stderr.decode(errors='replace').strip()}"
        )
    return proc.stdout


def _check_determinism() -> tuple[bool, str]:
    for args in _CLI_CASES:
        first = _run_cli(args, hash_seed="1")
        second = _run_cli(args, hash_seed="2")
        if first != second:
            return False, f"`{' '.join(args)}` output differs between runs"
    return True, f"{len(_CLI_CASES)} commands byte-identical across repeated runs"


# --------------------------------------------------------------------------
# Registry and runner
# --------------------------------------------------------------------------

_CHECKS: tuple[tuple[int, str, Callable[[], tuple[bool, str]]], ...] = (
    (1, "higher-order adjectives", _check_adjectives),
    (2, "logic-lexicon formulas", _check_formulas),
    (3, "cup wiring for verbs", _check_cups),
    (4, "boxes with holes", _check_holes),
    (5, "quantifier readings", _check_readings),
    (6, "backend agreement", _check_backend_agreement),
    (7, "rewrite soundness", _check_rewrites),
    (8, "algebraic and reduction laws", _check_laws),
    (9, "cross-pipeline equivalence", _check_cross_validation),
    (10, "command-line determinism", _check_determinism),
)


def run_all(only: set[int] | None = None) -> list[CheckResult]:
    """Run every check (or the given numbers) and collect the results."""
    results = []
    for number, label, fn in _CHECKS:
        if only is not None and number not in only:
            continue
        try:
            passed, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crashed check is a failed check
            passed, detail = False, f"error: {type(exc).__name__}: {exc}"
        results.append(CheckResult(number, label, passed, detail))
    return results


def main(only: set[int] | None = None) -> int:
    """Print one line per check; exit status 0 iff everything passed."""
    results = run_all(only)
    for result in results:
        print(result.line())
    failed = sum(1 for r in results if not r.passed)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
