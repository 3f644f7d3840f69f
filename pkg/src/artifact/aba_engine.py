"""Alternating Büchi automata: forward and backward simulation, ambiguity
removal, mediated preorder, extension and quotient.

For sets of states the lifted order used here reads
``X ⪯∀∃ Y  iff  every y in Y has some x in X with x ⪯ y``: a conjunction
with fewer, larger obligations is the easier one to satisfy.
"""

from __future__ import annotations

import numpy as np

from .core import AlternatingBuchiAutomaton, Lts, StateRelation, normalize_aba
from .lts_sim import coarsest_pr, compute_simulation


class MediatedPreorderError(RuntimeError):
    """The computed mediated relation violates one of its required properties."""


def _lift(rel: np.ndarray, X, Y) -> bool:
    """``X ⪯∀∃ Y`` in the direction described in the module docstring."""
    return all(any(rel[x, y] for x in X) for y in Y)


def accepting_preorder(a: AlternatingBuchiAutomaton) -> np.ndarray:
    acc = np.array([q in a.accepting for q in range(len(a.states))], dtype=bool)
    return ~acc[:, None] | acc[None, :]


def initial_preorder(a: AlternatingBuchiAutomaton) -> np.ndarray:
    n = len(a.states)
    ini = np.zeros(n, dtype=bool)
    ini[a.initial] = True
    return ~ini[:, None] | ini[None, :]


def _check_normalized(a: AlternatingBuchiAutomaton):
    if any(frozenset() in alts for alts in a.delta.values()):
        raise ValueError("automaton has an empty conjunct; run normalize_aba first")


def aba_forward_simulation(a: AlternatingBuchiAutomaton) -> StateRelation:
    """Maximal forward simulation by greatest-fixpoint refinement."""
    _check_normalized(a)
    n = len(a.states)
    rel = accepting_preorder(a)
    alts = {k: [tuple(sorted(P)) for P in v] for k, v in a.delta.items()}
    changed = True
    while changed:
        changed = False
        for p in range(n):
            for r in range(n):
                if p == r or not rel[p, r]:
                    continue
                for x in a.alphabet:
                    mine = alts[(r, x)]
                    if not all(any(_lift(rel, P, R) for R in mine) for P in alts[(p, x)]):
                        rel[p, r] = False
                        changed = True
                        break
    return StateRelation(a.states, rel)


def is_ambiguous(a: AlternatingBuchiAutomaton, fwd: StateRelation) -> bool:
    """Some transition has two distinct forward-equivalent successors."""
    eq = fwd.matrix & fwd.matrix.T
    for alts in a.delta.values():
        for P in alts:
            ps = sorted(P)
            if any(eq[x, y] for i, x in enumerate(ps) for y in ps[i + 1:]):
                return True
    return False


def remove_ambiguity(a: AlternatingBuchiAutomaton, fwd: StateRelation,
                     method: str = "scan") -> AlternatingBuchiAutomaton:
    """Make ``a`` forward-unambiguous without changing its language.

    ``scan`` drops p_i from each successor set (sorted by index) whenever a
    later p_j satisfies p_j ⪯F p_i.  ``quotient`` instead merges
    forward-equivalent states.
    """
    if method == "quotient":
        return quotient_aba(a, fwd.symmetric_core())
    if method != "scan":
        raise ValueError(f"unknown method {method!r}")
    f = fwd.matrix
    delta = {}
    for key, alts in a.delta.items():
        out = set()
        for P in alts:
            ps = sorted(P)
            keep = [p for i, p in enumerate(ps) if not any(f[q, p] for q in ps[i + 1:])]
            out.add(frozenset(keep))
        delta[key] = frozenset(out)
    return AlternatingBuchiAutomaton(a.alphabet, a.states, a.initial, delta, a.accepting)


def environments(a: AlternatingBuchiAutomaton) -> list:
    """All ``(p, a, residual)`` in a fixed order, residual a frozenset."""
    seen = {}
    for p, x, P in a.transitions():
        for q in P:
            env = (p, x, frozenset(P) - {q})
            seen.setdefault(env, None)
    return list(seen)


def build_env_lts(a: AlternatingBuchiAutomaton) -> Lts:
    """The environment LTS: states first, then environments in ``environments`` order."""
    _check_normalized(a)
    n = len(a.states)
    envs = environments(a)
    pos = {e: n + k for k, e in enumerate(envs)}
    edges = set()
    for p, x, P in a.transitions():
        for q in P:
            e = pos[(p, x, frozenset(P) - {q})]
            edges.add((q, x, e))
            edges.add((e, x, p))
    names = tuple(a.states) + tuple(_env_name(a, e) for e in envs)
    return Lts(names, a.alphabet, frozenset(edges))


def _env_name(a, env):
    p, x, R = env
    return f"({a.states[p]},{x},{{{','.join(a.states[q] for q in sorted(R))}}})"


def _pairs_for(fwd: np.ndarray, P, R):
    """Index pairs (i, j) with P minus P[i] lifted-below R minus R[j]."""
    F_, T_ = -1, -2
    beta = []
    for r in R:
        b = F_
        for k, p in enumerate(P):
            if fwd[p, r]:
                b = k if b == F_ else T_
        beta.append(b)
    key = None
    for j, b in enumerate(beta):
        if b == F_:
            if key is not None:
                return []
            key = j
    gamma = [F_] * len(P)
    for j, b in enumerate(beta):
        if b >= 0:
            gamma[b] = j if gamma[b] == F_ else T_
    out = []
    for i in range(len(P)):
        for j in range(len(R)):
            if key is not None and j != key:
                continue
            if gamma[i] in (F_, j):
                out.append((i, j))
    return out


def backward_init_preorder(a: AlternatingBuchiAutomaton, fwd: StateRelation) -> StateRelation:
    """Initial preorder on the environment LTS."""
    lts = build_env_lts(a)
    n = len(a.states)
    envs = environments(a)
    pos = {e: n + k for k, e in enumerate(envs)}
    size = len(lts.states)
    m = np.zeros((size, size), dtype=bool)
    m[:n, :n] = accepting_preorder(a) & initial_preorder(a)
    f = fwd.matrix
    trans = [(p, x, P) for p, x, P in a.transitions()]
    for p, x, P in trans:
        for r, y, R in trans:
            if x != y:
                continue
            for i, j in _pairs_for(f, P, R):
                e1 = pos[(p, x, frozenset(P) - {P[i]})]
                e2 = pos[(r, y, frozenset(R) - {R[j]})]
                m[e1, e2] = True
    return StateRelation(lts.states, m)


def aba_backward_simulation(a: AlternatingBuchiAutomaton, fwd: StateRelation) -> StateRelation:
    """Maximal backward simulation parametrised by ``fwd``."""
    if not fwd.is_preorder():
        raise ValueError("forward relation must be a preorder")
    lts = build_env_lts(a)
    init = backward_init_preorder(a, fwd)
    pr = compute_simulation(lts, coarsest_pr(lts.states, init))
    n = len(a.states)
    return StateRelation(a.states, pr.induced_matrix(len(lts.states))[:n, :n])


def mediated_preorder(fwd: StateRelation, bwd: StateRelation) -> StateRelation:
    """Greatest M inside fwd;bwd⁻¹ closed under M;fwd ⊆ M, then post-checked."""
    if fwd.carrier != bwd.carrier:
        raise ValueError("relations over different carriers")
    F = fwd.matrix.astype(np.int64)
    B = bwd.matrix.astype(np.int64)
    top = (F @ B.T) > 0
    m = top.copy()
    while True:
        bad = ((~m).astype(np.int64) @ F.T) > 0
        nxt = m & ~bad
        if np.array_equal(nxt, m):
            break
        m = nxt
    rel = StateRelation(fwd.carrier, m)
    problems = []
    if not rel.is_reflexive():
        problems.append("not reflexive")
    if not rel.is_transitive():
        problems.append("not transitive")
    if not fwd <= rel:
        problems.append("does not contain the forward simulation")
    if not rel <= StateRelation(fwd.carrier, top):
        problems.append("not inside fwd;bwd^-1")
    if not rel.then(fwd) <= rel:
        problems.append("not forward extensible")
    if problems:
        raise MediatedPreorderError(", ".join(problems))
    return rel


def extend_aba(a: AlternatingBuchiAutomaton, med: StateRelation) -> AlternatingBuchiAutomaton:
    """Give every state the transitions of all states below it; spread acceptance over ≡."""
    m = med.matrix
    n = len(a.states)
    delta = {}
    for r in range(n):
        for x in a.alphabet:
            out = set()
            for q in range(n):
                if m[q, r]:
                    out |= a.delta[(q, x)]
            delta[(r, x)] = frozenset(out)
    eq = m & m.T
    acc = frozenset(p for p in range(n) if any(eq[q, p] for q in a.accepting))
    return AlternatingBuchiAutomaton(a.alphabet, a.states, a.initial, delta, acc)


def quotient_aba(a: AlternatingBuchiAutomaton, equiv: StateRelation) -> AlternatingBuchiAutomaton:
    """Merge the classes of ``equiv``; a class is named after its least-index member."""
    if tuple(equiv.carrier) != tuple(a.states):
        equiv = equiv.restrict(a.states)
    if not equiv.is_equivalence():
        raise ValueError("relation is not an equivalence")
    classes = equiv.classes()
    cls_of = {}
    for k, members in enumerate(classes):
        for q in members:
            cls_of[q] = k
    delta: dict = {}
    for (q, x), alts in a.delta.items():
        tgt = delta.setdefault((cls_of[q], x), set())
        for P in alts:
            tgt.add(frozenset(cls_of[p] for p in P))
    return AlternatingBuchiAutomaton(
        a.alphabet, tuple(a.states[c[0]] for c in classes), cls_of[a.initial],
        {k: frozenset(v) for k, v in delta.items()},
        frozenset(cls_of[q] for q in a.accepting))


def mediated_reduce(a: AlternatingBuchiAutomaton, *, disambiguate: bool = True):
    """normalize, forward simulation, ambiguity removal, backward simulation, ⪯M, quotient.

    Returns ``(reduced, mediated relation)``.
    """
    a = normalize_aba(a)
    fwd = aba_forward_simulation(a)
    if disambiguate:
        a = remove_ambiguity(a, fwd)
    bwd = aba_backward_simulation(a, fwd)
    med = mediated_preorder(fwd, bwd)
    return quotient_aba(a, med.symmetric_core()), med
