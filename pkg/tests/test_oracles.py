import random

import pytest

from artifact.core import (
    AlternatingBuchiAutomaton,
    Lts,
    Nfa,
    StateRelation,
    TreeAutomaton,
    generate_random_aba,
    generate_random_fa,
    generate_random_ta,
    normalize_aba,
)
from artifact.oracles import (
    HOLE,
    BreakpointNba,
    LassoWord,
    OracleCapExceeded,
    aba_lasso_member,
    aba_to_nba,
    enumerate_contexts,
    fa_inclusion_product,
    fa_universal_subset,
    lasso_language,
    lassos,
    naive_backward_simulation_aba,
    naive_env_preorder,
    naive_forward_simulation_aba,
    naive_lts_simulation,
    naive_upward_simulation,
    nba_lasso_member,
    ta_determinize,
    ta_inclusion_classical,
    ta_universal_classical,
    tree_language_bounded,
    tree_states,
    word_language_bounded,
)


def _aba(states, trans, accepting, alphabet=("a", "b")):
    return normalize_aba(AlternatingBuchiAutomaton.build(alphabet, states, states[0], trans,
                                                         accepting))


# --- simulations ------------------------------------------------------------------------

def test_lts_edgeless_returns_init():
    lts = Lts(("p", "q"), ("a",), frozenset())
    full = StateRelation.full(lts.states)
    assert naive_lts_simulation(lts, full) == full


def test_lts_singleton():
    lts = Lts(("p",), ("a",), frozenset({(0, "a", 0)}))
    assert naive_lts_simulation(lts, StateRelation.full(lts.states)).pairs() == [("p", "p")]


def test_lts_two_states_by_hand():
    # p -a-> q; q is stuck, so q <= p and not p <= q
    lts = Lts(("p", "q"), ("a",), frozenset({(0, "a", 1)}))
    rel = naive_lts_simulation(lts, StateRelation.full(lts.states))
    assert set(rel.pairs()) == {("p", "p"), ("q", "q"), ("q", "p")}


def test_upward_empty_and_by_hand():
    empty = TreeAutomaton.build({"a": 0}, [], [], [])
    assert naive_upward_simulation(empty).pairs() == []
    # q, r both leaves; f(q) -> q only, and both final: r cannot match f(r)
    ta = TreeAutomaton.build({"a": 0, "f": 1}, ["q", "r"],
                             [((), "a", "q"), ((), "a", "r"), (("q",), "f", "q")], ["q", "r"])
    assert set(naive_upward_simulation(ta).pairs()) == {("q", "q"), ("r", "r"), ("r", "q")}


def test_aba_forward_by_hand():
    a = _aba(["p", "q"], [("p", "a", ("p",)), ("q", "a", ("p", "q"))], ["p"], ("a",))
    # q is not accepting, and {p, q} is lifted-below {p}
    assert set(naive_forward_simulation_aba(a).pairs()) == {("p", "p"), ("q", "q"), ("q", "p")}


def test_aba_backward_and_env_by_hand():
    a = _aba(["p", "q"], [("p", "a", ("q",)), ("q", "a", ("q",))], ["q"], ("a",))
    fwd = naive_forward_simulation_aba(a)
    bwd = naive_backward_simulation_aba(a, fwd)
    assert set(bwd.pairs()) == {("p", "p"), ("q", "q")}
    envs = naive_env_preorder(a, fwd)
    assert (("p", "a", ()), ("q", "a", ())) in envs


# --- word automata --------------------------------------------------------------------------

def test_fa_oracles_examples(universal4, incl_pair):
    assert fa_universal_subset(universal4)
    assert fa_inclusion_product(*incl_pair)
    total = Nfa.build("ab", ["p"], [("p", "a", "p"), ("p", "b", "p")], ["p"], ["p"])
    assert fa_universal_subset(total)
    assert len(word_language_bounded(total, 3)) == 15


def test_fa_oracle_caps():
    a = generate_random_fa(12, 2, 2.0, 0.5, 1)
    with pytest.raises(OracleCapExceeded):
        fa_universal_subset(a, cap=1)
    with pytest.raises(OracleCapExceeded):
        word_language_bounded(a, 13)
    with pytest.raises(ValueError):
        fa_inclusion_product(a, Nfa.build("xy", ["p"], [], ["p"], []))


@pytest.mark.parametrize("seed", range(50))
def test_fa_oracles_against_word_enumeration(seed):
    a = generate_random_fa(3, 2, 1.0, 0.5, seed)
    b = generate_random_fa(3, 2, 1.5, 0.5, seed + 1)
    if fa_universal_subset(a):
        assert len(word_language_bounded(a, 5)) == 63
    if fa_inclusion_product(a, b):
        assert word_language_bounded(a, 5) <= word_language_bounded(b, 5)


# --- tree automata ---------------------------------------------------------------------------

def test_ta_oracles_trivial():
    total = TreeAutomaton.build({"a": 0, "f": 2}, ["q"], [((), "a", "q"), (("q", "q"), "f", "q")],
                                ["q"])
    assert ta_universal_classical(total)
    no_final = TreeAutomaton.build({"a": 0, "f": 2}, ["q"], [((), "a", "q")], [])
    assert not ta_universal_classical(no_final)
    assert ta_inclusion_classical(no_final, total)
    assert len(ta_determinize(total).macrostates) == 1
    with pytest.raises(ValueError):
        ta_determinize(TreeAutomaton.build({"g": 1}, ["q"], [], []))
    with pytest.raises(OracleCapExceeded):
        tree_language_bounded(total, 7)


@pytest.mark.parametrize("seed", range(50))
def test_ta_oracles_against_tree_enumeration(seed):
    a = generate_random_ta(3, "a:0,f:2", 1.0, 0.5, seed, leaf_td=0.7)
    if ta_universal_classical(a):
        assert tree_language_bounded(a, 5) == tree_language_bounded(
            TreeAutomaton.build({"a": 0, "f": 2}, ["q"], [((), "a", "q"), (("q", "q"), "f", "q")],
                                ["q"]), 5)


def test_contexts():
    ta = TreeAutomaton.build({"a": 0, "g": 1, "f": 2}, ["q", "r", "z"],
                             [((), "a", "q"), (("q",), "g", "r"), (("q", "r"), "f", "r")], ["r"])
    assert HOLE in enumerate_contexts(ta, ["r"], 2)
    assert HOLE not in enumerate_contexts(ta, ["q"], 2)
    assert ("g", HOLE) in enumerate_contexts(ta, ["q"], 1)
    assert enumerate_contexts(ta, ["z", "q"], 3) == set()
    assert tree_states(ta, ("g", ("a",))) == {1}


# --- lasso words ---------------------------------------------------------------------------

def test_lassos_enumeration():
    ws = list(lassos(("a", "b"), 1, 2))
    assert len(ws) == 3 * 6
    with pytest.raises(ValueError):
        LassoWord(("a",), ())


def test_all_accepting_self_loops_accept_everything():
    a = _aba(["p"], [("p", "a", ("p",)), ("p", "b", ("p",))], ["p"])
    assert lasso_language(a, 2, 2) == set(lassos(("a", "b"), 2, 2))


def test_nondeterministic_by_hand():
    a = _aba(["s", "t"], [("s", "a", ("s",)), ("s", "b", ("t",)), ("t", "a", ("t",)),
                          ("t", "b", ("t",))], ["s"])
    assert aba_lasso_member(a, LassoWord((), ("a",)))
    assert aba_lasso_member(a, LassoWord(("a", "a"), ("a", "a")))
    assert not aba_lasso_member(a, LassoWord(("a",), ("b",)))
    assert not aba_lasso_member(a, LassoWord((), ("a", "b")))


def test_universal_branching_by_hand():
    # the q-branch never leaves q and q is not accepting
    a = _aba(["p", "q"], [("p", "a", ("p", "q")), ("q", "a", ("q",))], ["p"], ("a",))
    assert not aba_lasso_member(a, LassoWord((), ("a",)))
    b = _aba(["p", "q"], [("p", "a", ("p", "q")), ("q", "a", ("q",))], ["p", "q"], ("a",))
    assert aba_lasso_member(b, LassoWord((), ("a",)))


def test_breakpoint_cap():
    a = normalize_aba(generate_random_aba(5, 2, 1.5, 0.5, 3, max_conj=3))
    with pytest.raises(OracleCapExceeded):
        BreakpointNba(a, cap=1).to_nfa()
    with pytest.raises(OracleCapExceeded):
        lasso_language(a, 5, 1)


@pytest.mark.parametrize("seed", range(40))
def test_explicit_nba_agrees_with_lazy(seed):
    a = normalize_aba(generate_random_aba(3, 2, 1.0, 0.5, seed, max_conj=2))
    nba = aba_to_nba(a)
    lazy = BreakpointNba(a)
    for w in lassos(a.alphabet, 2, 2):
        assert nba_lasso_member(nba, w) == nba_lasso_member(lazy, w)


@pytest.mark.parametrize("seed", range(40))
def test_nondeterministic_aba_matches_run_search(seed):
    # with singleton conjuncts an ABA is a Büchi automaton; check against a direct lasso run search
    rng = random.Random(seed)
    n = 3
    trans = [(f"q{i}", x, (f"q{rng.randrange(n)}",)) for i in range(n) for x in "ab"
             for _ in range(rng.randint(0, 2))]
    acc = [f"q{i}" for i in range(n) if rng.random() < 0.5]
    a = _aba([f"q{i}" for i in range(n)], trans, acc)
    nfa = Nfa(a.alphabet, a.states,
              frozenset((q, x, next(iter(P))) for q, x, P in a.transitions()),
              frozenset({a.initial}), a.accepting)
    for w in lassos(a.alphabet, 2, 2):
        assert aba_lasso_member(a, w) == nba_lasso_member(nfa, w)
