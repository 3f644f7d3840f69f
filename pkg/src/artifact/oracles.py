"""Brute-force reference implementations.

Everything here unfolds a definition directly and shares nothing with the
engine modules beyond the data model in ``core``.  Exhaustive searches take
an explicit cap and raise ``OracleCapExceeded`` instead of truncating.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import (
    AlternatingBuchiAutomaton,
    Lts,
    Nfa,
    StateRelation,
    TreeAutomaton,
    all_words,
)


class OracleCapExceeded(RuntimeError):
    pass


DEFAULT_CAP = 1 << 20


# ---------------------------------------------------------------------------
# simulations


def naive_lts_simulation(lts: Lts, init: StateRelation) -> StateRelation:
    """Greatest fixpoint of the simulation condition inside ``init``."""
    n = len(lts.states)
    succ = {a: [set() for _ in range(n)] for a in lts.alphabet}
    for s, a, t in lts.transitions:
        succ[a][s].add(t)
    rel = init.matrix.copy()
    changed = True
    while changed:
        changed = False
        for p in range(n):
            for r in range(n):
                if not rel[p, r]:
                    continue
                for a in lts.alphabet:
                    if any(not any(rel[p2, r2] for r2 in succ[a][r]) for p2 in succ[a][p]):
                        rel[p, r] = False
                        changed = True
                        break
    return StateRelation(lts.states, rel)


def naive_upward_simulation(ta: TreeAutomaton) -> StateRelation:
    """Greatest upward simulation induced by identity, by definition unfolding."""
    n = len(ta.states)
    rules = list(ta.rules)
    rel = np.array([[(q not in ta.final) or (r in ta.final) for r in range(n)] for q in range(n)],
                   dtype=bool).reshape(n, n)
    lookup: dict = {}
    for lhs, a, q in rules:
        lookup.setdefault((lhs, a), set()).add(q)
    changed = True
    while changed:
        changed = False
        for q in range(n):
            for r in range(n):
                if not rel[q, r] or q == r:
                    continue
                ok = True
                for lhs, a, res in rules:
                    for i, x in enumerate(lhs):
                        if x != q:
                            continue
                        alt = lhs[:i] + (r,) + lhs[i + 1:]
                        if not any(rel[res, r2] for r2 in lookup.get((alt, a), ())):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    rel[q, r] = False
                    changed = True
    return StateRelation(ta.states, rel)


def _ae_backward(fwd: np.ndarray, P, R) -> bool:
    # every r in R has some p in P with p fwd r
    return all(any(fwd[p, r] for p in P) for r in R)


def naive_forward_simulation_aba(a: AlternatingBuchiAutomaton) -> StateRelation:
    n = len(a.states)
    rel = np.array([[(p not in a.accepting) or (r in a.accepting) for r in range(n)]
                    for p in range(n)], dtype=bool)
    changed = True
    while changed:
        changed = False
        for p in range(n):
            for r in range(n):
                if not rel[p, r]:
                    continue
                for x in a.alphabet:
                    if any(not any(_ae_backward(rel, P, R) for R in a.delta[(r, x)])
                           for P in a.delta[(p, x)]):
                        rel[p, r] = False
                        changed = True
                        break
    return StateRelation(a.states, rel)


def naive_backward_simulation_aba(a: AlternatingBuchiAutomaton, fwd: StateRelation) -> StateRelation:
    """Maximal backward simulation parametrised by ``fwd``, unfolded directly."""
    n = len(a.states)
    f = fwd.matrix
    trans = [(q, x, frozenset(P)) for (q, x), alts in a.delta.items() for P in alts]
    rel = np.array([[((p != a.initial) or (r == a.initial))
                     and ((p not in a.accepting) or (r in a.accepting))
                     for r in range(n)] for p in range(n)], dtype=bool)
    changed = True
    while changed:
        changed = False
        for p in range(n):
            for r in range(n):
                if not rel[p, r]:
                    continue
                ok = True
                for q, x, P in trans:
                    if p not in P:
                        continue
                    rest = P - {p}
                    if not any(r in R and rel[q, s] and _ae_backward(f, rest, R - {r})
                               for s, y, R in trans if y == x):
                        ok = False
                        break
                if not ok:
                    rel[p, r] = False
                    changed = True
    return StateRelation(a.states, rel)


def naive_env_preorder(a: AlternatingBuchiAutomaton, fwd: StateRelation) -> set:
    """Environment pairs of the initial preorder by pairwise comparison.

    Environments are ``(source name, symbol, sorted residual names)``.
    """
    f = fwd.matrix
    envs = set()
    for (q, x), alts in a.delta.items():
        for P in alts:
            for p in P:
                envs.add((q, x, frozenset(P - {p})))
    out = set()
    for (p, x, P) in envs:
        for (r, y, R) in envs:
            if x == y and _ae_backward(f, P, R):
                out.add(((a.states[p], x, tuple(sorted(a.states[s] for s in P))),
                         (a.states[r], y, tuple(sorted(a.states[s] for s in R)))))
    return out


# ---------------------------------------------------------------------------
# word automata


def word_language_bounded(nfa: Nfa, max_len: int) -> set:
    """Accepted words of length <= max_len, by explicit run search."""
    if max_len > 12:
        raise OracleCapExceeded("word bound above 12")
    succ: dict = {}
    for s, a, t in nfa.transitions:
        succ.setdefault((s, a), set()).add(t)
    out = set()
    for w in all_words(nfa.alphabet, max_len):
        cur = set(nfa.initial)
        for a in w:
            cur = {t for s in cur for t in succ.get((s, a), ())}
        if cur & nfa.final:
            out.add(w)
    return out


def _subset_post(nfa: Nfa, S: frozenset, a) -> frozenset:
    return frozenset(t for s, x, t in nfa.transitions if x == a and s in S)


def fa_universal_subset(nfa: Nfa, cap: int = DEFAULT_CAP) -> bool:
    """Full subset construction; universal iff every reachable subset is accepting."""
    start = frozenset(nfa.initial)
    seen = {start}
    todo = deque([start])
    by_sym: dict = {a: {} for a in nfa.alphabet}
    for s, a, t in nfa.transitions:
        by_sym[a].setdefault(s, set()).add(t)
    while todo:
        S = todo.popleft()
        if not S & nfa.final:
            return False
        for a in nfa.alphabet:
            T = frozenset(t for s in S for t in by_sym[a].get(s, ()))
            if T not in seen:
                seen.add(T)
                if len(seen) > cap:
                    raise OracleCapExceeded(f"more than {cap} subsets")
                todo.append(T)
    return True


def fa_inclusion_product(a: Nfa, b: Nfa, cap: int = DEFAULT_CAP) -> bool:
    """On-the-fly product of A with the subset construction of B."""
    if set(a.alphabet) != set(b.alphabet):
        raise ValueError("alphabet mismatch")
    sa: dict = {}
    for s, x, t in a.transitions:
        sa.setdefault((s, x), set()).add(t)
    sb: dict = {}
    for s, x, t in b.transitions:
        sb.setdefault((s, x), set()).add(t)
    start = [(i, frozenset(b.initial)) for i in sorted(a.initial)]
    seen = set(start)
    todo = deque(start)
    while todo:
        p, P = todo.popleft()
        if p in a.final and not P & b.final:
            return False
        for x in a.alphabet:
            T = frozenset(t for s in P for t in sb.get((s, x), ()))
            for q in sa.get((p, x), ()):
                if (q, T) not in seen:
                    seen.add((q, T))
                    if len(seen) > cap:
                        raise OracleCapExceeded(f"more than {cap} product states")
                    todo.append((q, T))
    return True


# ---------------------------------------------------------------------------
# tree automata


@dataclass(frozen=True)
class DeterministicTA:
    symbols: tuple
    macrostates: tuple          # frozensets of original state indices
    rules: dict                 # (tuple of macrostate positions, symbol) -> position
    final: frozenset            # positions


def _rule_table(ta: TreeAutomaton) -> dict:
    table: dict = {s: [] for s, _ in ta.symbols}
    for lhs, a, q in ta.rules:
        table[a].append((lhs, q))
    return table


def _post_bits(entries, masks) -> int:
    out = 0
    for lhs, q in entries:
        if all(masks[i] >> x & 1 for i, x in enumerate(lhs)):
            out |= 1 << q
    return out


def ta_determinize(ta: TreeAutomaton, cap: int = DEFAULT_CAP) -> DeterministicTA:
    """Bottom-up subset construction over reachable macro-states (complete on them)."""
    if not any(k == 0 for _, k in ta.symbols):
        raise ValueError("no leaf symbol")
    table = _rule_table(ta)
    pos: dict[int, int] = {}
    order: list[int] = []
    rules: dict = {}

    def add(m):
        if m not in pos:
            pos[m] = len(order)
            order.append(m)
            if len(order) > cap:
                raise OracleCapExceeded(f"more than {cap} macro-states")
        return pos[m]

    for s, k in ta.symbols:
        if k == 0:
            rules[((), s)] = add(_post_bits(table[s], ()))
    done = 0
    while done < len(order):
        new = done
        done = len(order)
        for s, k in ta.symbols:
            if k == 0:
                continue
            for tup in product(range(done), repeat=k):
                if max(tup) < new:
                    continue
                rules[(tup, s)] = add(_post_bits(table[s], [order[i] for i in tup]))
    fmask = ta.final_mask
    macro = tuple(frozenset(i for i in range(len(ta.states)) if m >> i & 1) for m in order)
    return DeterministicTA(ta.symbols, macro, rules,
                           frozenset(i for i, m in enumerate(order) if m & fmask))


def ta_universal_classical(ta: TreeAutomaton, cap: int = DEFAULT_CAP) -> bool:
    """Determinize, complement (flip finals), test emptiness of the complement."""
    det = ta_determinize(ta, cap)
    complement_final = set(range(len(det.macrostates))) - det.final
    return not complement_final


def ta_inclusion_classical(a: TreeAutomaton, b: TreeAutomaton, cap: int = DEFAULT_CAP) -> bool:
    """Emptiness of L(A) intersected with the complement of the determinized B."""
    ar_a, ar_b = dict(a.symbols), dict(b.symbols)
    for s in ar_a.keys() & ar_b.keys():
        if ar_a[s] != ar_b[s]:
            raise ValueError(f"arity conflict on {s!r}")
    symbols = list(a.symbols) + [(s, k) for s, k in b.symbols if s not in ar_a]
    if not any(k == 0 for _, k in symbols):
        raise ValueError("no leaf symbol")
    ta_, tb = _rule_table(a), _rule_table(b)
    for s, _ in symbols:
        ta_.setdefault(s, [])
        tb.setdefault(s, [])
    seen: set = set()
    order: list = []

    def add(pair):
        if pair not in seen:
            seen.add(pair)
            order.append(pair)
            if len(order) > cap:
                raise OracleCapExceeded(f"more than {cap} product states")

    for s, k in symbols:
        if k == 0:
            P = _post_bits(tb[s], ())
            for _, q in ta_[s]:
                add((q, P))
    done = 0
    while done < len(order):
        new = done
        done = len(order)
        for s, k in symbols:
            if k == 0:
                continue
            for tup in product(range(done), repeat=k):
                if max(tup) < new:
                    continue
                qs = tuple(order[i][0] for i in tup)
                P = _post_bits(tb[s], [order[i][1] for i in tup])
                for lhs, q in ta_[s]:
                    if lhs == qs:
                        add((q, P))
    fb = b.final_mask
    return not any(q in a.final and not P & fb for q, P in order)


HOLE = "□"


def _trees(symbols, nodes: int, holes: int | None, leaf_symbols: bool):
    """Trees with exactly ``nodes`` symbol nodes and ``holes`` hole leaves.

    ``holes=None`` with ``leaf_symbols=True`` enumerates ordinary trees.
    """
    memo: dict = {}

    def gen(k, h):
        key = (k, h)
        if key in memo:
            return memo[key]
        out = []
        if k == 0 and h == 1 and not leaf_symbols:
            out.append(HOLE)
        for s, ar in symbols:
            if ar == 0:
                if leaf_symbols and k == 1 and h == 0:
                    out.append((s,))
                continue
            if k < 1:
                continue
            for split in _compositions(k - 1, ar):
                for hsplit in _compositions(h, ar):
                    parts = [gen(ks, hs) for ks, hs in zip(split, hsplit)]
                    if all(parts):
                        for kids in product(*parts):
                            out.append((s,) + kids)
        memo[key] = out
        return out

    return gen(nodes, 0 if holes is None else holes)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _run_states(ta_table, fills, t, cursor):
    if t == HOLE:
        q = fills[cursor[0]]
        cursor[0] += 1
        return {q}
    s, kids = t[0], t[1:]
    child = [_run_states(ta_table, fills, k, cursor) for k in kids]
    return {q for lhs, q in ta_table[s]
            if all(lhs[i] in child[i] for i in range(len(kids)))}


def tree_language_bounded(ta: TreeAutomaton, max_nodes: int) -> set:
    """Accepted trees with at most ``max_nodes`` nodes (nested tuples)."""
    if max_nodes > 6:
        raise OracleCapExceeded("tree bound above 6")
    table = _rule_table(ta)
    out = set()
    for k in range(1, max_nodes + 1):
        for t in _trees(ta.symbols, k, None, True):
            if _run_states(table, (), t, [0]) & ta.final:
                out.add(t)
    return out


def tree_states(ta: TreeAutomaton, t) -> set:
    """States reachable at the root of tree ``t``."""
    return _run_states(_rule_table(ta), (), t, [0])


def enumerate_contexts(ta: TreeAutomaton, states, max_nodes: int) -> set:
    """Contexts (holes at every leaf) with <= max_nodes symbol nodes accepted from ``states``."""
    if max_nodes > 6:
        raise OracleCapExceeded("context bound above 6")
    states = tuple(ta.index[s] if isinstance(s, str) else s for s in states)
    inner = tuple((s, k) for s, k in ta.symbols if k > 0)
    table = _rule_table(ta)
    out = set()
    for k in range(0, max_nodes + 1):
        for t in _trees(inner, k, len(states), False):
            if _run_states(table, states, t, [0]) & ta.final:
                out.add(t)
    return out


def hole_context(t):
    """Replace every leaf symbol of tree ``t`` by a hole; also return the leaf symbols."""
    leaves = []

    def go(x):
        if len(x) == 1:
            leaves.append(x[0])
            return HOLE
        return (x[0],) + tuple(go(k) for k in x[1:])

    return go(t), leaves


def context_accepted_from_macro(ta: TreeAutomaton, ctx, macros) -> bool:
    """Whether ``ctx`` is accepted from some tuple in the product of ``macros``."""
    table = _rule_table(ta)
    for fills in product(*[sorted(m) for m in macros]):
        if _run_states(table, fills, ctx, [0]) & ta.final:
            return True
    return False


# ---------------------------------------------------------------------------
# alternating Büchi automata and lasso words


@dataclass(frozen=True)
class LassoWord:
    prefix: tuple
    loop: tuple

    def __post_init__(self):
        if not self.loop:
            raise ValueError("loop must be nonempty")

    def __str__(self):
        return "".join(self.prefix) + "(" + "".join(self.loop) + ")^w"


def lassos(alphabet, max_u: int, max_v: int):
    for u in all_words(alphabet, max_u):
        for n in range(1, max_v + 1):
            for v in product(alphabet, repeat=n):
                yield LassoWord(tuple(u), tuple(v))


class BreakpointNba:
    """Miyano-Hayashi breakpoint automaton of an ABA, explored lazily.

    States are pairs ``(S, O)`` of frozensets; accepting iff ``O`` is empty.
    """

    def __init__(self, a: AlternatingBuchiAutomaton, cap: int = DEFAULT_CAP):
        self.aba = a
        self.cap = cap
        self.initial = (frozenset({a.initial}), frozenset())
        self._succ: dict = {}

    @staticmethod
    def accepting(state) -> bool:
        return not state[1]

    def successors(self, state, x):
        key = (state, x)
        hit = self._succ.get(key)
        if hit is not None:
            return hit
        S, O = state
        a = self.aba
        members = sorted(S)
        options = [sorted(a.delta[(q, x)], key=sorted) for q in members]
        out = set()
        for choice in product(*options):
            pick = dict(zip(members, choice))
            S2 = frozenset().union(*choice) if choice else frozenset()
            if O:
                O2 = frozenset().union(*(pick[q] for q in O)) - a.accepting
            else:
                O2 = S2 - a.accepting
            out.add((S2, O2))
        out = sorted(out, key=lambda st: (sorted(st[0]), sorted(st[1])))
        self._succ[key] = out
        if len(self._succ) > self.cap:
            raise OracleCapExceeded("breakpoint construction too large")
        return out

    def to_nfa(self) -> Nfa:
        """Reachable part as an ``Nfa`` whose final set is the Büchi condition."""
        names = {}
        order = [self.initial]
        names[self.initial] = 0
        trans = set()
        k = 0
        while k < len(order):
            st = order[k]
            for x in self.aba.alphabet:
                for t in self.successors(st, x):
                    if t not in names:
                        names[t] = len(order)
                        order.append(t)
                    trans.add((names[st], x, names[t]))
            k += 1

        def label(st):
            S, O = st
            return "{" + ",".join(self.aba.states[q] for q in sorted(S)) + "}|{" + \
                ",".join(self.aba.states[q] for q in sorted(O)) + "}"

        return Nfa(self.aba.alphabet, tuple(label(s) for s in order), frozenset(trans),
                   frozenset({0}), frozenset(i for i, s in enumerate(order) if self.accepting(s)))


def aba_to_nba(a: AlternatingBuchiAutomaton) -> Nfa:
    return BreakpointNba(a).to_nfa()


def nba_lasso_member(nba, w: LassoWord) -> bool:
    """Whether ``uv^omega`` is accepted: an accepting product node on a reachable cycle.

    ``nba`` is either a ``BreakpointNba`` or an ``Nfa`` read with Büchi acceptance.
    """
    word = w.prefix + w.loop
    m = len(word)
    lp = len(w.prefix)

    def nxt(i):
        return i + 1 if i + 1 < m else lp

    if isinstance(nba, BreakpointNba):
        starts = [nba.initial]
        succ = nba.successors
        acc = nba.accepting
    else:
        table: dict = {}
        for s, x, t in nba.transitions:
            table.setdefault((s, x), []).append(t)
        starts = sorted(nba.initial)

        def succ(s, x):
            return table.get((s, x), ())

        def acc(s):
            return s in nba.final

    graph: dict = {}
    todo = deque((s, 0) for s in starts)
    for node in todo:
        graph[node] = None
    while todo:
        node = todo.popleft()
        s, i = node
        outs = [(t, nxt(i)) for t in succ(s, word[i])]
        graph[node] = outs
        for t in outs:
            if t not in graph:
                graph[t] = None
                todo.append(t)
    for node in graph:
        if node[1] >= lp and acc(node[0]) and _on_cycle(graph, node):
            return True
    return False


def _on_cycle(graph, start) -> bool:
    seen = set()
    stack = list(graph[start])
    while stack:
        x = stack.pop()
        if x == start:
            return True
        if x in seen:
            continue
        seen.add(x)
        stack.extend(graph[x])
    return False


def aba_lasso_member(a: AlternatingBuchiAutomaton, w: LassoWord) -> bool:
    return nba_lasso_member(BreakpointNba(a), w)


def lasso_language(a: AlternatingBuchiAutomaton, max_u: int = 3, max_v: int = 3) -> set:
    """Accepted lassos within the bounds."""
    if max_u > 4 or max_v > 4:
        raise OracleCapExceeded("lasso bounds above 4")
    nba = BreakpointNba(a)
    return {w for w in lassos(a.alphabet, max_u, max_v) if nba_lasso_member(nba, w)}


def aba_lasso_language_equal(a: AlternatingBuchiAutomaton, b: AlternatingBuchiAutomaton,
                             max_u: int = 3, max_v: int = 3) -> bool:
    if tuple(a.alphabet) != tuple(b.alphabet):
        return False
    return lasso_language(a, max_u, max_v) == lasso_language(b, max_u, max_v)
