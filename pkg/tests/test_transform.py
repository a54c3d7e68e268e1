import random

import pytest
from hypothesis import given, settings, strategies as st

from qctlmc import formula as F
from qctlmc.formula import size, temporal_height, to_text
from qctlmc.oracle import model_check
from qctlmc.parser import parse_formula as P
from qctlmc.randgen import random_formula, random_structure
from qctlmc.rewrite import NotPrenexError, is_nnf
from qctlmc.transform import BOOLEAN, LFP, flatten_equiv, flatten_nnf, fpc, is_basic, kappa_negations_ok

# |fpc(F)| <= FPC_FACTOR * |F| on every formula we generate
FPC_FACTOR = 12


def test_fpc_eu():
    assert to_text(fpc(P("E[a U b]"))) == "forall z_1. (AG (z_1 <-> b | a & EX z_1) -> z_1)"


def test_fpc_au_uses_ax():
    assert fpc(P("A[a U b]")) == P("forall z_1. (AG (z_1 <-> b | a & AX z_1) -> z_1)")


def test_fpc_weak_until_is_greatest_fixpoint():
    assert fpc(P("E[a W b]")) == P("exists z_1. (AG (z_1 <-> b | a & EX z_1) & z_1)")


def test_fpc_height_example():
    f = P("E[a U b]")
    assert temporal_height(fpc(f)) == temporal_height(f) + 1 == 2


def test_fpc_output_operators():
    g = fpc(P("A[EF a U E[b W AG a]] & EG b"))
    assert all(not F.is_temporal(h) or isinstance(h, (F.EX, F.AX, F.AG)) for h in F.walk(g))


def test_fpc_fresh_names_avoid_reserved():
    g = fpc(P("E[z_1 U b]"), reserved={"z_2"})
    assert isinstance(g, F.Forall) and g.prop not in {"z_1", "z_2"}


def test_fpc_preserves_oracle_k1(K1):
    rng = random.Random(5)
    for _ in range(100):
        f = random_formula(rng, height=3, quantifiers=1)
        g = fpc(f, K1.propositions())
        for x in K1.vertices:
            assert model_check(K1, x, f) == model_check(K1, x, g), to_text(f)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_fpc_preserves_oracle_random(seed):
    rng = random.Random(seed)
    K = random_structure(rng, 2, 3)
    f = random_formula(rng, height=2, quantifiers=1)
    assert model_check(K, K.init, f) == model_check(K, K.init, fpc(f, K.propositions()))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_fpc_height_and_size(seed):
    rng = random.Random(seed)
    f = random_formula(rng, height=3, quantifiers=2)
    g = fpc(f)
    assert temporal_height(g) <= temporal_height(f) + 1
    assert size(g) <= FPC_FACTOR * size(f)
    # serialized length grows linearly as well
    assert len(to_text(g)) <= FPC_FACTOR * len(to_text(f)) + 40


def test_fpc_nested_weak_until_stays_linear():
    f = P("a")
    for _ in range(6):
        f = F.EW(f, F.Or(f, P("b")))
    assert size(fpc(f)) <= FPC_FACTOR * size(f)


# -- flat forms ---------------------------------------------------------------------------


def test_flatten_equiv_ag_ef():
    flat = flatten_equiv(P("AG EF a"))
    assert flat.prefix == ()
    assert flat.kappa_props == (("k_1", BOOLEAN),)
    assert flat.phi0 == P("AG k_1")
    assert len(flat.clauses) == 1 and flat.clauses[0].theta == P("EF a")
    assert flat.clauses[0].to_formula() == P("AG (k_1 <-> EF a)")


def test_flatten_equiv_no_nesting():
    flat = flatten_equiv(P("EX a"))
    assert flat.kappa_props == () and flat.phi0 == P("EX a") and flat.clauses == ()


def test_flatten_nnf_negated_until():
    flat = flatten_nnf(P("!E[a U b]"))
    assert flat.kappa_props == (("k_1", BOOLEAN),)
    assert flat.phi0 == P("k_1")
    assert flat.clauses[0].theta == P("A[!b W !b & !a]")
    assert flat.clauses[0].connective == "implies"


def test_flatten_nnf_quantified_until():
    flat = flatten_nnf(P("exists p. E[p U b]"))
    assert flat.prefix == ((F.Exists, "p"),)
    assert flat.kappa_props == (("k_1", LFP),)
    assert flat.phi0 == P("k_1") and flat.clauses[0].theta == P("E[p U b]")


def test_flatten_nnf_nested_ag_becomes_weak_until():
    flat = flatten_nnf(P("AG AG a"))
    assert flat.phi0 == P("AG k_1")
    assert flat.clauses[0].theta == P("A[a W false]")


def test_flatten_dedupes_identical_theta():
    flat = flatten_equiv(P("EX EF a & AX EF a"))
    assert len(flat.clauses) == 1


@pytest.mark.parametrize("fn", [flatten_equiv, flatten_nnf])
def test_flatten_requires_prenex(fn):
    with pytest.raises(NotPrenexError):
        fn(P("EX exists p. p"))


def _check_flat_shape(f):
    fe = flatten_equiv(f)
    fn = flatten_nnf(f)
    for flat in (fe, fn):
        assert temporal_height(flat.body()) <= 2
        assert all(is_basic(c.theta) for c in flat.clauses)
    # phi0 of the equivalence form: Boolean over basic formulas
    assert all(not F.is_temporal(h) or is_basic(h) for h in F.walk(fe.phi0) if F.is_temporal(h))
    assert is_nnf(fn.phi0) and all(is_nnf(c.theta) for c in fn.clauses)
    assert kappa_negations_ok(fn)
    assert temporal_height(fn.phi0) <= 1
    assert all(isinstance(h, (F.EX, F.AX, F.AG)) for h in F.walk(fn.phi0) if F.is_temporal(h))
    for k, mode in fn.kappa_props:
        theta = next(c.theta for c in fn.clauses if c.kappa == k)
        assert (mode == LFP) == isinstance(theta, (F.EU, F.AU))
    return fe, fn


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_flatten_shapes(seed):
    _check_flat_shape(random_formula(random.Random(seed), height=3, quantifiers=2, prenex=True))


def test_flatten_preserves_oracle(K1):
    rng = random.Random(17)
    structures = [K1] + [random_structure(rng, 2, 3) for _ in range(30)]
    checked = 0
    while checked < 120:
        K = structures[checked % len(structures)]
        f = random_formula(rng, height=3, quantifiers=1, prenex=True)
        fe, fn = _check_flat_shape(f)
        # every kappa is one more set quantifier for the oracle
        if max(len(fe.kappa_props), len(fn.kappa_props)) + len(fe.prefix) > 4:
            continue
        checked += 1
        want = model_check(K, K.init, f)
        assert model_check(K, K.init, fe.to_formula()) == want, to_text(f)
        assert model_check(K, K.init, fn.to_formula()) == want, to_text(f)


def test_flatten_deterministic():
    f = P("forall p. (A[EX p U AG (a | EF p)] & E[b W EX a])")
    assert flatten_nnf(f) == flatten_nnf(f)
    # post-order: EX p, EF p, AG (a | k_2), EX a
    flat = flatten_equiv(f)
    assert [to_text(c.theta) for c in flat.clauses] == ["EX p", "EF p", "AG (a | k_2)", "EX a"]
    assert [c.kappa for c in flat.clauses] == ["k_1", "k_2", "k_3", "k_4"]


# -- the prenex worked example -------------------------------------------------------------

NESTED = "EX forall p. (AX p | AX !p)"
PRENEX = "exists z. forall p. forall w. ((EX (z & w) -> AX (z -> w)) & EX (z & (AX p | AX !p)))"


def test_prenex_fixture_pair_agree():
    f, g = P(NESTED), P(PRENEX)
    rng = random.Random(2)
    seen = set()
    for _ in range(60):
        K = random_structure(rng, 2, 4, props=())
        for x in K.vertices:
            v = model_check(K, x, f)
            seen.add(v)
            assert v == model_check(K, x, g)
    assert seen == {True, False}
