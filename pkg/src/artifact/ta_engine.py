"""Bottom-up tree automata: maximal upward simulation and antichain
universality / inclusion checks.

The upward simulation is computed on an auxiliary LTS whose extra states are
environments ``(symbol, hole position, context, result)``: one per rule and
child position.  A state ``q`` steps to every environment it fills, and the
environment steps to the rule's result.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .core import Lts, StateRelation, TreeAutomaton, iter_bits, mask_of, union_ta
from .fa_engine import (
    ENGINES,
    SearchStats,
    _offer_macro,
    _Order,
    _Store,
    final_respecting_preorder,
)
from .lts_sim import coarsest_pr, compute_simulation


def _env_lts(ta: TreeAutomaton):
    n = len(ta.states)
    envs: list = []
    edges = set()
    labels = []
    for lhs, a, q in sorted(ta.rules, key=lambda r: (r[1], r[0], r[2])):
        for i, x in enumerate(lhs):
            lab = f"{a}/{i + 1}"
            if lab not in labels:
                labels.append(lab)
            e = n + len(envs)
            envs.append((a, i + 1, lhs[:i] + lhs[i + 1:], q))
            edges.add((x, lab, e))
            edges.add((e, lab, q))
    names = tuple(f"#{k}" for k in range(n)) + tuple(f"env{k}" for k in range(len(envs)))
    return Lts(names, tuple(labels), frozenset(edges)), envs


def ta_upward_simulation(ta: TreeAutomaton) -> StateRelation:
    """Maximal upward simulation induced by the identity."""
    n = len(ta.states)
    lts, envs = _env_lts(ta)
    size = len(lts.states)
    init = np.zeros((size, size), dtype=bool)
    init[:n, :n] = final_respecting_preorder(ta.states, ta.final).matrix
    groups: dict = {}
    for k, (a, i, ctx, _) in enumerate(envs):
        groups.setdefault((a, i, ctx), []).append(n + k)
    for members in groups.values():
        init[np.ix_(members, members)] = True
    pr = compute_simulation(lts, coarsest_pr(lts.states, StateRelation(lts.states, init)))
    return StateRelation(ta.states, pr.induced_matrix(size)[:n, :n])


def _require_leaf(symbols):
    if not any(k == 0 for _, k in symbols):
        raise ValueError("no leaf symbol")


class _RuleTrie:
    """Rules of one symbol indexed child by child.

    Each inner node is ``(keys mask, {state: child node})``; a leaf is the
    mask of right-hand sides.
    """

    def __init__(self, entries, arity: int):
        self.arity = arity
        root: dict = {}
        leaf_only = 0
        for lhs, q in entries:
            if not lhs:
                leaf_only |= 1 << q
                continue
            node = root
            for x in lhs[:-1]:
                node = node.setdefault(x, {})
            node[lhs[-1]] = node.get(lhs[-1], 0) | (1 << q)
        self.leaf_only = leaf_only
        self.root = self._freeze(root, arity) if arity else None

    def _freeze(self, node, depth):
        if depth == 1:
            return (mask_of(node), node)
        return (mask_of(node), {x: self._freeze(c, depth - 1) for x, c in node.items()})

    def post(self, masks) -> int:
        if not self.arity:
            return self.leaf_only
        return self._walk(self.root, masks, 0)

    def _walk(self, node, masks, i) -> int:
        keys, children = node
        hit = masks[i] & keys
        out = 0
        if i == self.arity - 1:
            for x in iter_bits(hit):
                out |= children[x]
            return out
        for x in iter_bits(hit):
            out |= self._walk(children[x], masks, i + 1)
        return out


def _tries(ta: TreeAutomaton) -> dict:
    return {a: _RuleTrie(ta.rules_by_symbol[a], k) for a, k in ta.symbols}


def initial_macrostates(ta: TreeAutomaton) -> dict:
    """``{a: I_a}`` for each leaf symbol ``a``; I_a holds state names."""
    _require_leaf(ta.symbols)
    table = _tries(ta)
    return {a: frozenset(ta.states[q] for q in iter_bits(table[a].post(())))
            for a in ta.leaf_symbols}


def post_tuple(ta: TreeAutomaton, macros, a: str) -> frozenset:
    """States reachable by one ``a``-rule from some tuple in the product of ``macros``."""
    macros = tuple(macros)
    if a not in ta.arity:
        raise ValueError(f"unknown symbol {a!r}")
    if len(macros) != ta.arity[a]:
        raise ValueError(f"{a!r} has arity {ta.arity[a]}, got {len(macros)} macro-states")
    idx = ta.index
    masks = [mask_of(idx[x] for x in m) for m in macros]
    trie = _RuleTrie(ta.rules_by_symbol[a], ta.arity[a])
    return frozenset(ta.states[q] for q in iter_bits(trie.post(masks)))


def _pivot_tuples(k: int, pivot: int, arity: int):
    """Tuples over positions 0..k-1 that contain ``pivot``, in lexicographic order."""
    others = [i for i in range(k) if i != pivot]
    out = []
    for first in range(arity):
        for head in product(others, repeat=first):
            for tail in product(range(k), repeat=arity - first - 1):
                out.append(head + (pivot,) + tail)
    out.sort()
    return out


def _relation(rel, states, default):
    if rel is None:
        return default().matrix
    if tuple(rel.carrier) != tuple(states):
        rel = rel.restrict(states)
    if not rel.is_preorder():
        raise ValueError("relation must be a preorder")
    return rel.matrix


def ta_universality(ta: TreeAutomaton, engine: str = "antichain-sim",
                    rel: StateRelation | None = None, *, minimize: bool = True,
                    debug: bool = False):
    """Universality check over all trees of the ranked alphabet.  Returns ``(universal, stats)``."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    _require_leaf(ta.symbols)
    n = len(ta.states)
    if engine == "antichain-sim":
        order = _Order(_relation(rel, ta.states, lambda: ta_upward_simulation(ta)))
    else:
        order = _Order(np.eye(n, dtype=bool))
    shrink = order.minimize if (engine == "antichain-sim" and minimize) else (lambda m: m)
    table = _tries(ta)
    fin = ta.final_mask
    stats = SearchStats()
    leaves = [table[a].post(()) for a in ta.leaf_symbols]
    stats.generated = len(leaves)
    if any(not m & fin for m in leaves):
        stats.result = False
        return False, stats

    store = _Store(debug)
    seen: set[int] = set()
    processed: list[int] = []   # node ids in insertion order

    def offer(P):
        if engine == "classical":
            if P not in seen:
                seen.add(P)
                store.add(P, None, None)
            return
        _offer_macro(store, order, P, None, None)

    for m in leaves:
        offer(shrink(m))

    inner = [(a, k) for a, k in ta.symbols if k > 0]
    while True:
        nid = store.pop()
        if nid is None:
            break
        stats.processed += 1
        processed.append(nid)
        snap = [i for i in processed if i in store.alive]
        macros = [store.nodes[i][0] for i in snap]
        pivot = snap.index(nid)
        for a, k in inner:
            post = table[a].post
            for tup in _pivot_tuples(len(snap), pivot, k):
                P = shrink(post([macros[i] for i in tup]))
                stats.generated += 1
                if not P & fin:
                    stats.result = False
                    stats.stored_peak = store.peak
                    return False, stats
                offer(P)
    stats.result = True
    stats.stored_peak = store.peak
    return True, stats


def ta_inclusion(a: TreeAutomaton, b: TreeAutomaton, engine: str = "antichain-sim",
                 rel: StateRelation | None = None, *, opt1a: bool = True, opt1b: bool = True,
                 minimize: bool = True, debug: bool = False):
    """Check L(a) ⊆ L(b).  Returns ``(included, stats)``.

    ``rel`` is a preorder over ``union_ta(a, b)`` (default: its upward simulation).
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    u = union_ta(a, b)          # raises on arity conflicts
    _require_leaf(u.symbols)
    na, nb = len(a.states), len(b.states)
    cross = None
    shrink = lambda x: x  # noqa: E731
    if engine == "antichain-sim":
        m = _relation(rel, u.states, lambda: ta_upward_simulation(u))
        order_a = _Order(m[:na, :na] if opt1a else np.eye(na, dtype=bool))
        order_b = _Order(m[na:, na:] if opt1a else np.eye(nb, dtype=bool))
        if minimize:
            shrink = _Order(m[na:, na:]).minimize
        if opt1b:
            cross = [mask_of(np.flatnonzero(m[i, na:]).tolist()) for i in range(na)]
    else:
        order_a = _Order(np.eye(na, dtype=bool))
        order_b = _Order(np.eye(nb, dtype=bool))

    ta_ = {x: _RuleTrie(a.rules_by_symbol.get(x, ()), k) for x, k in u.symbols}
    tb = {x: _RuleTrie(b.rules_by_symbol.get(x, ()), k) for x, k in u.symbols}
    fa_, fb = a.final_mask, b.final_mask
    symbols = u.symbols
    stats = SearchStats()
    store = _Store(debug)
    seen: set = set()

    def offer(p, P):
        if engine == "classical":
            if (p, P) not in seen:
                seen.add((p, P))
                store.add((p, P), None, None)
            return
        if cross is not None and cross[p] & P:
            return
        if any(order_a.up[p] >> s & 1 and order_b.below(S, P)
               for s, S in store.alive.values()):
            return
        dead = [sid for sid, (s, S) in store.alive.items()
                if order_a.up[s] >> p & 1 and order_b.below(P, S)]
        for sid in dead:
            store.discard(sid)
        store.add((p, P), None, None)

    initial = []
    for x, k in symbols:
        if k:
            continue
        P = shrink(tb[x].post(()))
        for q in iter_bits(ta_[x].post(())):
            initial.append((q, P))
    stats.generated = len(initial)
    for q, P in initial:
        if fa_ >> q & 1 and not P & fb:
            stats.result = False
            return False, stats
    for q, P in initial:
        offer(q, P)

    inner = [(x, k) for x, k in symbols if k > 0]
    processed: list[int] = []
    while True:
        nid = store.pop()
        if nid is None:
            break
        stats.processed += 1
        processed.append(nid)
        snap = [i for i in processed if i in store.alive]
        pairs = [store.nodes[i][0] for i in snap]
        pivot = snap.index(nid)
        for x, k in inner:
            ra, rb = ta_[x], tb[x]
            if ra.root is None or not ra.root[0]:
                continue
            for tup in _pivot_tuples(len(snap), pivot, k):
                qs = [1 << pairs[i][0] for i in tup]
                targets = ra.post(qs)
                if not targets:
                    continue
                P = shrink(rb.post([pairs[i][1] for i in tup]))
                for q in iter_bits(targets):
                    stats.generated += 1
                    if fa_ >> q & 1 and not P & fb:
                        stats.result = False
                        stats.stored_peak = store.peak
                        return False, stats
                    offer(q, P)
    stats.result = True
    stats.stored_peak = store.peak
    return True, stats
