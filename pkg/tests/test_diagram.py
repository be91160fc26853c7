"""String diagrams: constructors, normalization, and interchange equality."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import peircelex.diagram as dg
from peircelex.core import BoxDecl, MonoidalSignature
from peircelex.diagram import (
    BoxInstance,
    Cap,
    Compose,
    Cup,
    Cut,
    Id,
    Spider,
    Swap,
    Tensor,
    boxes_of,
    canonical,
    diagram_expr,
    equal,
    from_json,
    normalize,
    to_json,
    transpose,
)
from peircelex.errors import ShapeMismatchError

N = ("N",)
idN = Id(N)

SIG = MonoidalSignature(
    frozenset({"N"}),
    {
        "man": BoxDecl("man", (), N),
        "hot": BoxDecl("hot", N, ()),
        "sleeps": BoxDecl("sleeps", N, ()),
        "big": BoxDecl("big", N, N),
        "loves": BoxDecl("loves", N + N, ()),
    },
)

man = dg.box(SIG, "man")
hot = dg.box(SIG, "hot")
sleeps = dg.box(SIG, "sleeps")
big = dg.box(SIG, "big")
bub = Compose(Spider(0, 1, "N"), hot)  # closed scalar bubble
scal = Compose(man, hot)  # another closed scalar


def C(*parts):
    out = parts[0]
    for p in parts[1:]:
        out = Compose(out, p)
    return out


def T(*parts):
    out = parts[0]
    for p in parts[1:]:
        out = Tensor(out, p)
    return out


# --------------------------------------------------------------------------
# Shapes and construction
# --------------------------------------------------------------------------


def test_shapes_of_generators():
    assert (Id(N).dom, Id(N).cod) == (N, N)
    assert (Cup("N").dom, Cup("N").cod) == (N + N, ())
    assert (Cap("N").dom, Cap("N").cod) == ((), N + N)
    assert (Swap("N", "N").dom, Swap("N", "N").cod) == (N + N, N + N)
    assert (Spider(2, 1, "N").dom, Spider(2, 1, "N").cod) == (N + N, N)
    assert (man.dom, man.cod) == ((), N)


def test_compose_requires_matching_boundary():
    with pytest.raises(ShapeMismatchError):
        Compose(man, man)


def test_cut_preserves_boundary():
    c = dg.cut(C(man, hot))
    assert c.dom == () and c.cod == ()
    c2 = dg.cut(big)
    assert (c2.dom, c2.cod) == (big.dom, big.cod)


def test_transpose_bends_states_and_effects():
    st_t = transpose(man)
    assert (st_t.dom, st_t.cod) == (N, ())
    ef_t = transpose(hot)
    assert (ef_t.dom, ef_t.cod) == ((), N)
    with pytest.raises(ShapeMismatchError):
        transpose(big)


# --------------------------------------------------------------------------
# Normalization
# --------------------------------------------------------------------------


def test_normalize_one_generator_per_layer():
    d = C(T(man, man), Cup("N"))
    lf = normalize(d)
    assert all(
        len(layer.gen.dom) + len(layer.gen.cod) > 0 or isinstance(layer.gen, Cut)
        for layer in lf.layers
    )
    assert len(lf.layers) == 3


def test_canonical_is_idempotent_and_representative():
    d = C(T(man, man), Cup("N"))
    c1 = canonical(d)
    assert canonical(c1) == c1
    assert equal(c1, d)


def test_two_builds_of_one_diagram_normalize_alike():
    w1 = C(T(man, man), Cup("N"))
    w2 = C(man, T(man, idN), Cup("N"))
    assert canonical(w1) == canonical(w2)


# --------------------------------------------------------------------------
# Interchange equality: the monoidal category laws
# --------------------------------------------------------------------------


def test_interchange_law():
    lhs = C(T(man, man), T(hot, sleeps))
    rhs = T(C(man, hot), C(man, sleeps))
    assert equal(lhs, rhs)


def test_unit_laws():
    d = big
    assert equal(Tensor(d, Id(())), d)
    assert equal(Tensor(Id(()), d), d)
    assert equal(Compose(Id(N), d), d)
    assert equal(Compose(d, Id(N)), d)


def test_associativity():
    a, b, c = man, big, hot
    assert equal(C(C(a, b), c), C(a, C(b, c)))
    assert equal(T(T(a, b), c), T(a, T(b, c)))


def test_scalar_on_either_side_of_a_wire_differs():
    # A wire separates the two faces, so the drawings are distinct.
    assert not equal(T(bub, idN), T(idN, bub))


def test_slide_around_a_dying_wire():
    lhs = C(T(idN, man), T(sleeps, idN))
    rhs = C(T(man, idN), T(idN, sleeps))
    assert equal(lhs, rhs)


def test_float_slides_around_cap_wires():
    wide = Id(N + N)
    assert equal(C(Cap("N"), T(bub, wide)), C(Cap("N"), T(wide, bub)))


def test_diamond_faces():
    split, merge = Spider(1, 2, "N"), Spider(2, 1, "N")
    inside = C(split, T(idN, bub, idN), merge)
    left = C(T(bub, split), merge)
    right = C(T(split, bub), merge)
    before = C(T(bub, idN), split, merge)
    after_left = C(split, merge, T(bub, idN))
    after_right = C(split, merge, T(idN, bub))
    assert not equal(inside, left)
    assert not equal(inside, right)
    assert not equal(left, right)
    assert equal(left, before)
    assert equal(left, after_left)
    assert equal(right, after_right)


def test_float_trapped_inside_closed_bubble():
    trapped = C(Cap("N"), T(idN, scal, idN), Cup("N"))
    outside = C(Cap("N"), Cup("N"), scal)
    beside = C(Cap("N"), T(scal, Id(N + N)), Cup("N"))
    assert not equal(trapped, outside)
    assert equal(beside, outside)


def test_float_trapped_between_cod_legs():
    trapped = C(Cap("N"), T(idN, scal, idN))
    outside = C(scal, Cap("N"))
    beside = C(Cap("N"), T(scal, Id(N + N)))
    assert not equal(trapped, outside)
    assert equal(beside, outside)


def test_float_trapped_under_cup_dome():
    trapped = C(T(idN, scal, idN), Cup("N"))
    outside = C(Cup("N"), scal)
    assert not equal(trapped, outside)


def test_floats_in_one_face_commute():
    assert equal(C(T(bub, idN), T(scal, idN)), C(T(scal, idN), T(bub, idN)))


def test_bubbles_with_different_contents_commute():
    full = C(Cap("N"), T(idN, scal, idN), Cup("N"))
    empty = C(Cap("N"), Cup("N"))
    assert equal(C(full, empty), C(empty, full))
    assert not equal(full, empty)


def test_transient_nesting_between_components():
    # A closed piece born beside a cap's legs equals the same piece fired
    # before the cap exists: it slides around the legs through time.
    piece = C(Spider(0, 1, "N"), hot)
    nested = C(Cap("N"), T(Id(N + N), piece))
    flat = C(piece, Cap("N"))
    assert equal(nested, flat)


def test_intra_component_rearrangement():
    # One connected, tree-shaped component written in two layer orders: a
    # second cap born inside the first cap's arch versus born beside it
    # after one leg has already died.
    w_a = C(
        Cap("N"),
        T(idN, Cap("N"), idN),
        T(Spider(2, 0, "N"), Id(N + N)),
        T(idN, Spider(1, 0, "N")),
    )
    w_b = C(
        Cap("N"),
        T(idN, Spider(1, 0, "N")),
        T(idN, Cap("N")),
        T(Spider(2, 0, "N"), idN),
    )
    assert (w_a.dom, w_a.cod) == (w_b.dom, w_b.cod) == ((), N)
    assert equal(w_a, w_b)


def test_long_scramble_reaches_same_class():
    rng = random.Random(6_020_000)
    d = _random_diagram(rng, 3, 10)
    word = tuple(dg._decompose(d))
    wa = _scramble(word, random.Random(1), 300)
    wb = _scramble(word, random.Random(2), 300)
    da = dg.reconstruct(dg.LayeredForm(d.dom, wa))
    db = dg.reconstruct(dg.LayeredForm(d.dom, wb))
    assert equal(da, db)


def test_swap_is_not_identity():
    assert not equal(Swap("N", "N"), Id(N + N))


def test_cut_contents_matter():
    assert not equal(dg.cut(C(man, hot)), dg.cut(C(man, sleeps)))
    assert equal(dg.cut(C(man, hot)), dg.cut(C(man, hot)))


def test_cut_bodies_compared_up_to_interchange():
    body1 = C(T(man, man), T(hot, sleeps))
    body2 = T(C(man, hot), C(man, sleeps))
    assert equal(dg.cut(body1), dg.cut(body2))


# --------------------------------------------------------------------------
# Randomized interchange stress: independent scrambles of one word agree
# --------------------------------------------------------------------------


def _random_diagram(rng: random.Random, width: int, depth: int) -> dg.Diagram:
    d = Id(("N",) * width)
    for _ in range(rng.randint(0, depth)):
        cod = d.cod
        wires = len(cod)
        kinds = ["state", "cap", "spider"]
        if wires >= 1:
            kinds += ["effect", "endo"]
        if wires >= 2:
            kinds += ["cup", "swap"]
        k = rng.choice(kinds)
        if k == "state":
            g: dg.Diagram = man
        elif k == "effect":
            g = rng.choice([hot, sleeps])
        elif k == "endo":
            g = big
        elif k == "cap":
            g = Cap("N")
        elif k == "cup":
            g = Cup("N")
        elif k == "swap":
            g = Swap("N", "N")
        else:
            m, n = rng.randint(0, min(wires, 2)), rng.randint(0, 2)
            if m == 0 and n == 0:
                n = 1
            g = Spider(m, n, "N")
        a = len(g.dom)
        pos = rng.randint(0, wires - a)
        layer = g
        if pos:
            layer = Tensor(Id(cod[:pos]), layer)
        if pos + a < wires:
            layer = Tensor(layer, Id(cod[pos + a :]))
        d = Compose(d, layer)
    return d


def _scramble(word, rng: random.Random, steps: int):
    word = list(word)
    for _ in range(steps):
        if len(word) < 2:
            break
        i = rng.randrange(len(word) - 1)
        pairs = dg._cross(word[i], word[i + 1])
        if pairs:
            word[i], word[i + 1] = rng.choice(pairs)
    return tuple(word)


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_scrambled_words_stay_equal(seed):
    rng = random.Random(seed)
    d = _random_diagram(rng, rng.randint(0, 4), 8)
    word = tuple(dg._decompose(d))
    wa = _scramble(word, random.Random(seed + 1), 80)
    wb = _scramble(word, random.Random(seed + 2), 80)
    da = dg.reconstruct(dg.LayeredForm(d.dom, wa))
    db = dg.reconstruct(dg.LayeredForm(d.dom, wb))
    assert equal(da, db)
    assert equal(da, d)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_monoidal_laws_on_random_diagrams(seed):
    rng = random.Random(seed)
    a = _random_diagram(rng, rng.randrange(4), 3)
    b = _random_diagram(rng, len(a.cod), 3)
    c = _random_diagram(rng, len(b.cod), 3)
    assert equal(C(C(a, b), c), C(a, C(b, c)))
    assert equal(C(Id(a.dom), a), a)
    assert equal(C(a, Id(a.cod)), a)
    x = _random_diagram(rng, rng.randrange(3), 3)
    assert equal(T(a, x), T(a, x))
    # interchange: (a ; b) (x) (x ; y) == (a (x) x) ; (b (x) y)
    y = _random_diagram(rng, len(x.cod), 3)
    assert equal(T(C(a, b), C(x, y)), C(T(a, x), T(b, y)))


# --------------------------------------------------------------------------
# Serialization and reporting
# --------------------------------------------------------------------------


def test_json_roundtrip():
    d = C(Cap("N"), T(big, idN), Cup("N"))
    data = to_json(d)
    back = from_json(data, SIG)
    assert equal(back, d)


def test_json_roundtrip_with_cut_and_spider():
    d = T(dg.cut(C(man, hot)), Spider(0, 1, "N"))
    back = from_json(to_json(d), SIG)
    assert equal(back, d)


def test_boxes_of_counts_nested():
    d = C(T(man, man), T(hot, sleeps))
    counts = boxes_of(d)
    assert counts["man"] == 2
    assert counts["hot"] == 1
    nested = dg.cut(C(man, hot))
    assert boxes_of(nested) == boxes_of(C(man, hot))


def test_diagram_expr_is_stable():
    d = C(T(man, man), Cup("N"))
    assert diagram_expr(canonical(d)) == diagram_expr(canonical(d))


def test_equal_rejects_shape_mismatch():
    assert not equal(man, hot)
