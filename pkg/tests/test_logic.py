import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posynt.logic import (MOORE, Context, Limits, ParseError, PartitionError,
                          UndeclaredAtomError, assignments, atoms, canonical, fuse, letter_bits,
                          maximal_temporal, models, models_table, parse, prop_key,
                          subformulas, words)

from corpus import random_formula

PSI = "(G F u -> F(i <-> o)) & (G F !u -> F(i | o))"


@pytest.fixture
def ctx():
    return Context(["i"], ["o"], ["u"])


def letter(**kw):
    return dict(kw)


# -- parsing ---------------------------------------------------------------------


def test_parse_psi1(ctx):
    f = parse("G(F(u)) -> F(i <-> o)", ctx)
    assert f.op == "implies"
    assert str(f) == "G F u -> F(i <-> o)"
    assert f.args[0] is ctx.make("G", ctx.make("F", ctx.atom("u")))


def test_parse_constants(ctx):
    assert ctx.parse("tt") is ctx.tt
    assert ctx.parse("true") is ctx.tt
    assert ctx.parse("0") is ctx.ff


def test_unbalanced_parenthesis_offset():
    c = Context(["q"], [])
    with pytest.raises(ParseError) as e:
        c.parse("F(q")
    assert e.value.offset == 3
    assert "offset 3" in str(e.value)


def test_undeclared_atom_is_named(ctx):
    with pytest.raises(UndeclaredAtomError) as e:
        ctx.parse("F(i & zz)")
    assert e.value.atom == "zz"


@pytest.mark.parametrize("text,expected", [
    ("!i & o | u", "(!i & o) | u"),
    ("i | o -> u", "(i | o) -> u"),
    ("i -> o -> u", "i -> (o -> u)"),
    ("i U o U u", "i U (o U u)"),
    ("i -> o U u", "(i -> o) U u"),
    ("X i & o", "X i & o"),
    ("i xor o <-> u", "i xor (o <-> u)"),
])
def test_precedence(ctx, text, expected):
    assert str(ctx.parse(text)) == expected


def test_next_spellings(ctx):
    assert ctx.parse("X[!] i") is ctx.parse("N i")
    assert ctx.parse("WX i") is ctx.parse("X i")
    assert ctx.parse("X i") is not ctx.parse("N i")


@given(st.integers(0, 10**6))
@settings(max_examples=150, deadline=None)
def test_print_parse_roundtrip(seed):
    c = Context(["a", "b"], ["c"])
    text = random_formula(random.Random(seed), ["a", "b", "c"], 4)
    f = c.parse(text)
    assert c.parse(str(f)) is f


# -- hash consing and canonical forms --------------------------------------------


def test_hash_consing_random_pairs():
    rng = random.Random(3)
    c = Context(["a", "b"], [])
    seen = {}
    for _ in range(10_000):
        text = random_formula(rng, ["a", "b"], 3)
        f = c.parse(text)
        g = c.parse(text)
        assert f is g
        key = str(f)
        if key in seen:
            assert seen[key] is f
        seen[key] = f
    # different structure never shares an id
    assert len({f.id for f in seen.values()}) == len(seen)


def test_canonical_examples(ctx):
    x = ctx.parse("X(i U o)")
    assert ctx.canonical(ctx.parse("X(i U o) & tt")) is ctx.canonical(x)
    assert ctx.canonical(ctx.parse("X(i U o) | X(i U o)")) is ctx.canonical(x)
    assert ctx.canonical(ctx.parse("F i")) is not ctx.canonical(ctx.parse("!G !i"))


def test_prop_key_examples(ctx):
    assert prop_key(ctx.parse("i | !i")) == prop_key(ctx.tt)
    psi = ctx.parse(PSI)
    psi1 = ctx.parse("G F u -> F(i <-> o)")
    psi2 = ctx.parse("G F !u -> F(i | o)")
    assert prop_key(psi) == prop_key(ctx.make("and", psi2, psi1))
    assert prop_key(ctx.parse("X i & N i")) != prop_key(ctx.parse("X i"))
    assert prop_key(ctx.parse("X i")) != prop_key(ctx.parse("N i"))


def test_canonical_is_idempotent_and_respects_equivalence():
    rng = random.Random(11)
    c = Context(["a", "b"], [])
    for _ in range(300):
        f = c.parse(random_formula(rng, ["a", "b"], 4))
        g = c.parse(random_formula(rng, ["a", "b"], 3))
        r = canonical(f)
        assert canonical(r) is r
        assert prop_key(r) == prop_key(f)
        rewrites = [
            c.make("and", f, c.tt), c.make("or", f, c.ff), c.make("not", c.make("not", f)),
            c.make("or", f, f),
        ]
        for h in rewrites:
            assert canonical(h) is r
        assert canonical(c.make("and", f, g)) is canonical(c.make("and", g, f))
        assert canonical(c.make("or", f, g)) is canonical(c.make("or", g, f))


def test_propositional_equivalence_implies_same_language():
    rng = random.Random(5)
    c = Context(["a", "b"], [])
    traces = [w for n in (1, 2, 3) for w in words(["a", "b"], n)]
    for _ in range(150):
        f = c.parse(random_formula(rng, ["a", "b"], 3))
        r = canonical(f)
        for w in traces:
            assert models(w, 0, f) == models(w, 0, r)


def test_subformulas(ctx):
    i = ctx.atom("i")
    assert subformulas(i) == {i}
    fi = ctx.parse("F i")
    assert subformulas(fi) == {fi, i}
    names = {str(g) for g in subformulas(ctx.parse(PSI))}
    for want in ("G F u", "F(i <-> o)", "i <-> o", "u", "i", "o"):
        assert want in names


def test_atoms_and_maximal_temporal(ctx):
    f = ctx.parse("i & F(o U u) | X i")
    assert atoms(f) == {"i", "o", "u"}
    assert [str(g) for g in maximal_temporal(f)] == ["F(o U u)", "X i"]


# -- partitions ---------------------------------------------------------------------


def test_partition_must_be_disjoint():
    with pytest.raises(PartitionError):
        Context(["a"], ["a"])
    with pytest.raises(PartitionError):
        Context(["a"], ["b"], ["b"])


def test_variable_order_blocks():
    mealy = Context(["a", "b"], ["c"], ["u"])
    moore = Context(["a", "b"], ["c"], ["u"], semantics=MOORE)
    assert [v.name for v in mealy.variables] == ["a", "b", "c", "u"]
    assert [v.name for v in moore.variables] == ["c", "a", "b", "u"]
    assert [v.name for v in moore.observable_variables] == ["c", "a", "b"]
    assert Limits().max_states == 10**6


# -- semantics -----------------------------------------------------------------------


def test_weak_and_strong_next_at_the_end(ctx):
    w = [letter(i=True, o=False, u=False)]
    assert models(w, 0, ctx.parse("X ff"))
    assert not models(w, 0, ctx.parse("N tt"))


def test_eventually_on_two_letters():
    c = Context(["p"], [])
    assert models([{"p": False}, {"p": True}], 0, c.parse("F p"))
    assert not models([{"p": False}, {"p": False}], 0, c.parse("F p"))


def test_models_rejects_bad_positions(ctx):
    with pytest.raises(ValueError):
        models([], 0, ctx.tt)
    with pytest.raises(IndexError):
        models([letter(i=True, o=True, u=True)], 1, ctx.tt)


def test_until_release_expansions_exhaustive():
    """U and R against their one-step unfoldings, every operand pair of
    depth <= 1 over two atoms and the constants, every trace up to length 3."""
    c = Context(["a", "b"], [])
    base = [c.atom("a"), c.atom("b"), c.tt, c.ff]
    level = base + [c.make(op, x) for op in ("not", "X", "N", "F", "G") for x in base] + [
        c.make(op, x, y) for op in ("and", "or", "implies", "iff", "xor", "U", "R")
        for x in base for y in base]
    bits = {n: letter_bits(["a", "b"], n) for n in (1, 2, 3)}
    memo = {n: {} for n in (1, 2, 3)}

    def table(f, n):
        return models_table(f, ["a", "b"], n, bits[n], memo[n])

    for f, g in itertools.product(level, repeat=2):
        u = c.make("U", f, g)
        r = c.make("R", f, g)
        u_unf = c.make("or", g, c.make("and", f, c.make("N", u)))
        r_unf = c.make("and", g, c.make("or", f, c.make("X", r)))
        for n in (1, 2, 3):
            assert (table(u, n) == table(u_unf, n)).all()
            assert (table(r, n) == table(r_unf, n)).all()


def test_models_table_spot_checks_literal_models():
    c = Context(["a", "b"], [])
    f = c.parse("(a U X[!] b) R (F a -> G !b)")
    for n in (1, 2, 3):
        assert models_table(f, ["a", "b"], n).tolist() == [
            models(w, 0, f) for w in words(["a", "b"], n)]


@given(st.integers(0, 10**6), st.integers(1, 3))
@settings(max_examples=120, deadline=None)
def test_models_table_matches_models(seed, length):
    c = Context(["a", "b"], [])
    f = c.parse(random_formula(random.Random(seed), ["a", "b"], 4))
    table = models_table(f, ["a", "b"], length)
    expected = [models(w, 0, f) for w in words(["a", "b"], length)]
    assert table.tolist() == expected


def test_assignments_order_and_fuse():
    got = list(assignments(["x", "y"]))
    assert got == [{"x": False, "y": False}, {"x": False, "y": True},
                   {"x": True, "y": False}, {"x": True, "y": True}]
    assert fuse({"x": True}, {"y": False}) == {"x": True, "y": False}
    with pytest.raises(ValueError):
        fuse({"x": True}, {"x": False})
    assert isinstance(models_table(Context(["x"], []).tt, ["x"], 1), np.ndarray)
