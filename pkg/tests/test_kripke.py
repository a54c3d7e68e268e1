import random

import pytest
from hypothesis import given, settings, strategies as st

from qctlmc.bench import gen_kconn, gen_nim, gen_resources
from qctlmc.kripke import (
    KripkeError, KripkeStructure, UnknownVertexError, p_equivalent, parse_kripke, reachable,
    serialize_kripke, successors,
)
from qctlmc.randgen import random_structure

from conftest import K1_TEXT


def test_parse_k1(K1):
    assert K1.vertices == ("v1", "v2")
    assert len(K1) == 2
    assert K1.size == 4
    assert len(K1.edges) == 2
    assert K1.label("v1") == {"a"} and K1.label("v2") == {"b"}
    assert K1.init == "v1"


def test_totality_error_names_state():
    with pytest.raises(KripkeError, match="v2"):
        parse_kripke("states: v1 v2\nedges: v1->v2\nlabel v1: a\nlabel v2: b")


@pytest.mark.parametrize("text, fragment", [
    ("states: a a\nedges: a->a", "duplicate"),
    ("states: a\nedges: a->b", "undeclared"),
    ("edges: a->a", "states"),
    ("states: a\nedges: a-a", "malformed"),
    ("states: a\nedges: a->a\nfoo bar", "unknown directive"),
    ("states: a\nedges: a->a\ninit: b", "not declared"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(KripkeError, match=fragment):
        parse_kripke(text)


def test_parse_error_has_line_number():
    with pytest.raises(KripkeError) as info:
        parse_kripke("states: a\n\nedges: a->b")
    assert info.value.line == 3


def test_comments_and_init():
    K = parse_kripke("# demo\nstates: s t  # two states\ninit: t\nedges: s->t t->s\n")
    assert K.init == "t" and K.successors("s") == ("t",)


def test_successors(K1):
    assert successors(K1, "v1") == {"v2"}
    assert successors(K1, "v2") == {"v2"}
    with pytest.raises(UnknownVertexError):
        successors(K1, "v9")


def test_successors_kconn_fan():
    K, init, _ = gen_kconn(3, 2)
    fan = {"q_1_2", "q_1_3", "q_2_1", "q_3_1"}
    assert fan <= successors(K, init)


def test_reachable(K1):
    assert reachable(K1, "v2") == {"v2"}
    assert reachable(K1, "v1") == {"v1", "v2"}


def test_reachable_torus():
    K, _ = gen_resources(10, 5)
    for v in ("s_0_0", "s_7_3"):
        assert reachable(K, v) == set(K.vertices)


def test_p_equivalent(K1):
    assert p_equivalent(K1, K1, {"a", "b"})
    K2 = K1.with_labels({"v1": {"a", "c"}, "v2": {"b"}})
    assert p_equivalent(K1, K2, {"a", "b"})
    K3 = K1.with_labels({"v1": set(), "v2": {"b"}})
    assert not p_equivalent(K1, K3, {"a"})


def test_p_equivalent_needs_same_graph(K1):
    other = KripkeStructure(["v1", "v2"], [("v1", "v1"), ("v2", "v2")], {"v1": ["a"], "v2": ["b"]})
    assert not p_equivalent(K1, other, {"a", "b"})


@pytest.mark.parametrize("K", [gen_kconn(3, 2)[0], gen_nim([2, 2])[0], gen_resources(3, 2)[0]])
def test_serialize_roundtrip_generated(K):
    assert parse_kripke(serialize_kripke(K)) == K


def test_serialize_k1(K1):
    assert parse_kripke(serialize_kripke(K1)) == parse_kripke(K1_TEXT)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_structures_well_formed(seed):
    K = random_structure(random.Random(seed))
    for v in K.vertices:
        succ = successors(K, v)
        assert succ and succ <= set(K.vertices)
        r = reachable(K, v)
        assert v in r
        # closure: reachable from the reachable set adds nothing
        assert set().union(*(reachable(K, w) for w in r)) == r
    assert parse_kripke(serialize_kripke(K)) == K
