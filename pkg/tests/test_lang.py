import random

import pytest
from hypothesis import given, settings, strategies as st

from qctlmc import formula as F
from qctlmc.formula import (
    AtLeastX, Atom, EU, EX, AX, Exists, metrics, subformulas, temporal_depth, to_text,
)
from qctlmc.oracle import eval_formula, model_check
from qctlmc.parser import FormulaSyntaxError, parse_formula as P
from qctlmc.randgen import random_formula, random_structure
from qctlmc.rewrite import expand_derived, is_nnf, rename_apart, to_nnf

a, b = Atom("a"), Atom("b")


# -- parsing -----------------------------------------------------------------------


def test_parse_until():
    assert P("E[a U b]") == EU(a, b)


def test_parse_quantifier():
    p = Atom("p")
    assert P("exists p. (EX p & AX !p)") == Exists("p", F.And(EX(p), AX(F.Not(p))))


def test_parse_counting():
    assert P("E>=2 X a") == AtLeastX(2, a)
    assert P("E=1X a") == F.UniqueX(a)
    assert P("E=1F a") == F.UniqueF(a)
    assert P("E=3X b") == F.ExactlyX(3, b)


@pytest.mark.parametrize("text, expected", [
    ("a & b | a", F.Or(F.And(a, b), a)),
    ("a -> b -> a", F.Implies(a, F.Implies(b, a))),
    ("a <-> b -> a", F.Iff(a, F.Implies(b, a))),
    ("!a & b", F.And(F.Not(a), b)),
    ("EX a & b", F.And(EX(a), b)),
    ("A[a W b]", F.AW(a, b)),
    ("forall1 q. q", F.Forall1("q", Atom("q"))),
])
def test_precedence(text, expected):
    assert P(text) == expected


@pytest.mark.parametrize("bad", ["", "a &", "E[a U b", "E[a b]", "(a", "a b", "exists . a", "E>=x X a", "AG"])
def test_syntax_errors(bad):
    with pytest.raises(FormulaSyntaxError):
        P(bad)


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as info:
        P("a & & b")
    assert info.value.pos == 4


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_print_parse_roundtrip(seed):
    f = random_formula(random.Random(seed), height=3, quantifiers=2)
    assert P(to_text(f)) == f


# -- metrics ---------------------------------------------------------------------------


@pytest.mark.parametrize("text, size, ht", [
    ("q", 1, 0),
    ("EX q", 2, 1),
    ("E[EX a U b]", 4, 2),
])
def test_metrics(text, size, ht):
    m = metrics(P(text))
    assert (m.size, m.temporal_height) == (size, ht)


def test_metrics_quantifiers():
    m = metrics(P("exists p. forall1 q. EX (p & q)"))
    assert m.quantifier_count == 2 and m.quantified_props == {"p", "q"}


@pytest.mark.parametrize("text, path, depth", [
    ("EX a", (0,), 1),
    ("a & b", (0,), 0),
    ("AG EX a", (0, 0), 2),
])
def test_temporal_depth(text, path, depth):
    assert temporal_depth(P(text), path) == depth


def test_temporal_depth_bad_path():
    with pytest.raises(IndexError):
        temporal_depth(P("EX a"), (0, 0))


def test_subformulas():
    occ = subformulas(P("EX a"))
    assert [o.formula for o in occ] == [a, EX(a)]
    occ = subformulas(P("a & a"))
    assert [o.path for o in occ if o.formula == a] == [(0,), (1,)]
    occ = subformulas(P("E[a U EX a]"))
    assert {to_text(o.formula) for o in occ if o.temporal} == {"EX a", "E[a U EX a]"}


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_metrics_invariants(seed):
    f = random_formula(random.Random(seed), height=3, quantifiers=2)
    m = metrics(f)
    assert m.size >= 1 and m.temporal_height <= m.size


# -- derived operators ----------------------------------------------------------------


def test_expand_unique_x():
    assert to_text(expand_derived(P("E=1X a"))) == "EX a & forall p_1. (AX (a -> p_1) | AX (a -> !p_1))"


def test_expand_at_least_one():
    assert expand_derived(P("E>=1X a")) == P("exists p_1. (EX p_1 & AX (p_1 -> a))")


def test_expand_exactly_is_at_least_minus_next():
    g = expand_derived(P("E=2X a"))
    assert isinstance(g, F.And) and isinstance(g.right, F.Not)
    assert g.left == expand_derived(P("E>=2X a"))


def test_unique_f_on_k1(K1):
    g = expand_derived(P("E=1F a"), K1.propositions())
    assert eval_formula(K1, "v1", {}, g)
    assert not eval_formula(K1, "v1", {}, expand_derived(P("E=1F (a | b)"), K1.propositions()))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_at_least_expansion_size(k):
    # k markers, each EX carries one positive and k-1 negated markers
    g = expand_derived(AtLeastX(k, a))
    literals = sum(1 for h in F.walk(g) if isinstance(h, Atom) and h.name.startswith("p_"))
    assert literals == k * k + k
    assert metrics(g).quantifier_count == k


def test_expand_exists1_flag():
    f = P("exists1 p. EX p")
    assert expand_derived(f) == f
    g = expand_derived(f, expand_exists1=True)
    assert isinstance(g, Exists) and not any(isinstance(h, F.Exists1) for h in F.walk(g))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_counting_expansion_matches_counting(seed):
    rng = random.Random(seed)
    K = random_structure(rng, 2, 3)
    x = rng.choice(K.vertices)
    inner = random_formula(rng, height=1, quantifiers=0)
    k = rng.randint(1, 2)
    for f in (F.UniqueF(inner), F.UniqueX(inner), AtLeastX(k, inner), F.ExactlyX(k, inner)):
        assert model_check(K, x, f) == model_check(K, x, f, expand_counting=True)


def test_exists1_matches_unique_f_definition():
    rng = random.Random(7)
    for _ in range(60):
        K = random_structure(rng, 2, 4)
        x = rng.choice(K.vertices)
        body = random_formula(rng, height=2, quantifiers=0, props=("a", "p"))
        for cls in (F.Exists1, F.Forall1):
            f = cls("p", body)
            assert model_check(K, x, f) == model_check(K, x, expand_derived(f, expand_exists1=True))


# -- renaming and NNF ---------------------------------------------------------------------


def test_rename_apart_examples():
    assert to_text(rename_apart(P("(exists p. p) & exists p. !p"))) == "exists p. p & exists p_1. !p_1"
    assert rename_apart(P("exists a. a"), {"a"}) == P("exists a_1. a_1")


def test_rename_apart_distinct(K1):
    rng = random.Random(3)
    for _ in range(100):
        f = random_formula(rng, height=2, quantifiers=2, props=("a", "b", "p"))
        g = rename_apart(f, K1.propositions())
        binders = [h.prop for h in F.walk(g) if isinstance(h, F.QUANTIFIERS)]
        assert len(binders) == len(set(binders))
        assert not set(binders) & K1.propositions()
        for x in K1.vertices:
            assert model_check(K1, x, f) == model_check(K1, x, g)


@pytest.mark.parametrize("text, expected", [
    ("!EX a", "AX !a"),
    ("!E[a U b]", "A[!b W !b & !a]"),
    ("!(a & b)", "!a | !b"),
    ("!exists p. p", "forall p. !p"),
    ("!forall1 p. p", "exists1 p. !p"),
    ("a -> b", "!a | b"),
])
def test_to_nnf_examples(text, expected):
    assert to_text(to_nnf(P(text))) == expected


def test_to_nnf_preserves_oracle(K1):
    rng = random.Random(11)
    for _ in range(100):
        f = random_formula(rng, height=3, quantifiers=1)
        g = to_nnf(f)
        assert is_nnf(g)
        for x in K1.vertices:
            assert model_check(K1, x, f) == model_check(K1, x, g)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_to_nnf_random_structures(seed):
    rng = random.Random(seed)
    K = random_structure(rng)
    f = random_formula(rng, height=3, quantifiers=1)
    for keep_ag in (False, True):
        g = to_nnf(f, keep_ag=keep_ag)
        assert is_nnf(g)
        assert model_check(K, K.init, f) == model_check(K, K.init, g)
