import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.core import (
    AlternatingBuchiAutomaton,
    ParseError,
    StateRelation,
    TreeAutomaton,
    all_words,
    generate_random_aba,
    generate_random_fa,
    generate_random_ta,
    normalize_aba,
    parse_aba,
    parse_fa,
    parse_timbuk,
    relation_ae,
    serialize_aba,
    serialize_fa,
    serialize_timbuk,
    transition_density,
    union_nfa,
    union_ta,
)
from artifact.fa_engine import fa_forward_simulation
from artifact.oracles import (
    aba_lasso_language_equal,
    tree_language_bounded,
    word_language_bounded,
)

from conftest import random_preorder

TIMBUK = "Ops a:0 f:2\nAutomaton A\nStates q0 q1\nFinal States q1\nTransitions\na() -> q0\nf(q0,q0) -> q1"


# --- Timbuk -----------------------------------------------------------------

def test_parse_timbuk_basic():
    ta = parse_timbuk(TIMBUK)
    assert len(ta.states) == 2 and len(ta.rules) == 2
    assert {ta.states[q] for q in ta.final} == {"q1"}
    assert ta.arity == {"a": 0, "f": 2}


def test_parse_timbuk_arity_mismatch_reports_line():
    with pytest.raises(ParseError) as err:
        parse_timbuk(TIMBUK.replace("f(q0,q0)", "f(q0)"))
    assert err.value.line == 7


def test_parse_timbuk_undeclared_state_and_symbol():
    with pytest.raises(ParseError):
        parse_timbuk(TIMBUK.replace("-> q1", "-> q9"))
    with pytest.raises(ParseError):
        parse_timbuk(TIMBUK + "\ng(q0) -> q1")


def test_parse_timbuk_leaf_without_parens_and_comments():
    text = "# header\nOps a:0 g:1\nAutomaton B # name\nStates p:0\nFinal States p\nTransitions\na -> p\ng(p) -> p\n"
    ta = parse_timbuk(text)
    assert ta.named_rules() == [((), "a", "p"), (("p",), "g", "p")]


def test_parse_timbuk_syntax_error():
    with pytest.raises(ParseError):
        parse_timbuk("Ops a:0\nAutomaton A\nStates q\nFinal States q\nTransitions\na( -> q")


@pytest.mark.parametrize("seed", range(100))
def test_timbuk_round_trip(seed):
    rng = random.Random(seed)
    syms = (("a", 0), ("b", 0), ("g", 1), ("f", 2))[: rng.randint(1, 4)]
    ta = generate_random_ta(rng.randint(1, 5), syms, rng.choice([0.2, 0.6, 1.0]), 0.5, seed)
    again = parse_timbuk(serialize_timbuk(ta))
    assert again == ta
    assert parse_timbuk(serialize_timbuk(again)) == again


# --- FA / ABA text ------------------------------------------------------------

def test_parse_fa_universal4(universal4):
    a = universal4
    assert a.states == ("s1", "s2", "s3", "s4")
    assert {a.states[q] for q in a.initial} == {"s1", "s2"}
    assert {a.states[q] for q in a.final} == {"s1", "s2", "s3"}
    assert len(a.transitions) == 9


def test_parse_fa_empty_transitions():
    a = parse_fa("alphabet: a\nstates: p\ninitial: p\nfinal: p\ntrans:\n")
    assert a.transitions == frozenset()


def test_parse_fa_errors():
    with pytest.raises(ParseError):
        parse_fa("alphabet: a\nstates: p\ninitial: p\nfinal: p\ntrans:\np a q\n")
    with pytest.raises(ParseError):
        parse_fa("alphabet: a\nstates: p\ninitial: p\nfinal: p\ntrans:\np z p\n")


@pytest.mark.parametrize("seed", range(100))
def test_fa_round_trip(seed):
    a = generate_random_fa(5, 2, 1.5, 0.4, seed)
    assert parse_fa(serialize_fa(a)) == a


@pytest.mark.parametrize("seed", range(100))
def test_aba_round_trip(seed):
    a = generate_random_aba(4, 2, 1.0, 0.5, seed, max_conj=3)
    b = parse_aba(serialize_aba(a))
    assert b.named_transitions() == a.named_transitions()
    assert b.accepting == a.accepting and b.initial == a.initial


def test_aba_example_round_trip(aba7):
    b = parse_aba(serialize_aba(aba7))
    assert b.named_transitions() == aba7.named_transitions()


def test_aba_empty_conjunct_line():
    a = parse_aba("alphabet: a\nstates: p\ninitial: p\naccepting:\ntrans:\np a ->\n")
    assert a.delta[(0, "a")] == frozenset({frozenset()})


# --- normalization --------------------------------------------------------------

def test_normalize_identity_when_clean(aba7):
    assert normalize_aba(aba7) is aba7


def test_normalize_replaces_empty_conjunct():
    a = AlternatingBuchiAutomaton.build(("a", "b"), ("p", "q"), "p",
                                        [("p", "a", ()), ("p", "b", ("q",)), ("q", "a", ("p",))],
                                        [])
    b = normalize_aba(a)
    sink = b.index["qsink"]
    assert b.delta[(0, "a")] == frozenset({frozenset({sink})})
    assert sink in b.accepting
    assert all(b.delta[(sink, x)] == frozenset({frozenset({sink})}) for x in b.alphabet)
    assert not any(frozenset() in v for v in b.delta.values())
    assert set(b.delta) == {(q, x) for q in range(3) for x in b.alphabet}


@pytest.mark.parametrize("seed", range(50))
def test_normalize_preserves_lasso_language(seed):
    rng = random.Random(seed)
    base = generate_random_aba(3, 2, 1.0, 0.5, seed)
    delta = dict(base.delta)
    # sprinkle `true` conjuncts
    for _ in range(2):
        key = (rng.randrange(3), rng.choice(base.alphabet))
        delta[key] = delta[key] | {frozenset()}
    partial = AlternatingBuchiAutomaton(base.alphabet, base.states, base.initial, delta,
                                        base.accepting)
    assert aba_lasso_language_equal(partial, normalize_aba(partial), 3, 3)


# --- unions -------------------------------------------------------------------------

def test_union_nfa_self(universal4):
    u = union_nfa(universal4, universal4)
    assert len(u.states) == 8
    assert u.states[0] == "A.s1" and u.states[4] == "B.s1"


def test_union_nfa_pair(incl_pair):
    a, b = incl_pair
    u = union_nfa(a, b)
    assert len(u.states) == 4
    assert {u.states[q] for q in u.initial} == {"p1", "q1"}


@pytest.mark.parametrize("seed", range(20))
def test_union_nfa_language(seed):
    a = generate_random_fa(3, 2, 1.0, 0.5, seed)
    b = generate_random_fa(4, 2, 1.0, 0.3, seed + 100)
    u = union_nfa(a, b)
    assert word_language_bounded(u, 4) == word_language_bounded(a, 4) | word_language_bounded(b, 4)


def test_union_ta_self_and_conflict():
    ta = parse_timbuk(TIMBUK)
    assert len(union_ta(ta, ta).states) == 4
    other = TreeAutomaton.build({"a": 0, "f": 1}, ["r"], [((), "a", "r")], ["r"])
    with pytest.raises(ValueError):
        union_ta(ta, other)


@pytest.mark.parametrize("seed", range(20))
def test_union_ta_language(seed):
    syms = (("a", 0), ("f", 2))
    a = generate_random_ta(3, syms, 0.7, 0.5, seed)
    b = generate_random_ta(3, syms, 0.7, 0.5, seed + 50)
    u = union_ta(a, b)
    assert tree_language_bounded(u, 4) == tree_language_bounded(a, 4) | tree_language_bounded(b, 4)


# --- generators ---------------------------------------------------------------------

def test_generate_fa_no_transitions():
    a = generate_random_fa(4, 2, 0.0, 1.0, 0)
    assert not a.transitions and len(a.final) == 4 and a.initial == frozenset({0})


def test_generate_fa_counts():
    a = generate_random_fa(10, 2, 1.5, 0.5, 7)
    for x in a.alphabet:
        assert sum(1 for _, y, _ in a.transitions if y == x) == 15
    assert len(a.final) == 5


def test_generate_fa_deterministic_and_errors():
    assert generate_random_fa(6, 3, 2.0, 0.3, 11) == generate_random_fa(6, 3, 2.0, 0.3, 11)
    with pytest.raises(ValueError):
        generate_random_fa(2, 1, 2.5, 0.5, 0)


def test_generate_ta_empty_and_density():
    assert generate_random_ta(5, "a:0,f:2", 0.0, 0.5, 1).rules == frozenset()
    ta = generate_random_ta(5, "a:0,f:2", 2.0, 0.5, 3, leaf_td=1.0)
    lhs = {(x, l) for l, x, _ in ta.rules}
    assert transition_density(ta) == pytest.approx(len(ta.rules) / len(lhs))
    assert sum(1 for _, x, _ in ta.rules if x == "f") == 10
    assert ta == generate_random_ta(5, "a:0,f:2", 2.0, 0.5, 3, leaf_td=1.0)


def test_generate_ta_errors():
    with pytest.raises(ValueError):
        generate_random_ta(3, "f:2", 1.0, 0.5, 0)
    with pytest.raises(ValueError):
        generate_random_ta(3, "a:0,f:2", 2.0, 0.5, 0)   # leaf pool is only n


# --- relation_ae ----------------------------------------------------------------------

def test_relation_ae_basics(universal4):
    ident = StateRelation.identity("pqr")
    assert relation_ae(ident, [], ["p"])
    assert relation_ae(ident, [], [])
    assert relation_ae(ident, ["p"], ["p", "q"]) and not relation_ae(ident, ["p", "r"], ["p", "q"])
    sim = fa_forward_simulation(universal4)
    assert relation_ae(sim, ["s1", "s2"], ["s2", "s3"])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_relation_ae_reflexive_transitive(seed, data):
    carrier = tuple(f"x{i}" for i in range(5))
    rel = random_preorder(carrier, seed)
    subsets = st.sets(st.sampled_from(carrier), max_size=4)
    P, Q, R = data.draw(subsets), data.draw(subsets), data.draw(subsets)
    assert relation_ae(rel, P, P)
    if relation_ae(rel, P, Q) and relation_ae(rel, Q, R):
        assert relation_ae(rel, P, R)


def test_state_relation_ops():
    r = StateRelation.from_pairs("ab", [("a", "b")])
    assert ("a", "b") in r and ("b", "a") not in r
    assert r.inverse().pairs() == [("b", "a")]
    assert not r.is_reflexive()
    i = StateRelation.identity("ab")
    assert (r | i).is_preorder() and not (r | i).is_symmetric()
    assert (r | i).classes() == [[0], [1]]
    assert StateRelation.full("ab").classes() == [[0, 1]]
    with pytest.raises(ValueError):
        StateRelation("ab", np.zeros((3, 3)))


def test_all_words():
    assert list(all_words(("a", "b"), 2)) == [(), ("a",), ("b",), ("a", "a"), ("a", "b"),
                                               ("b", "a"), ("b", "b")]
