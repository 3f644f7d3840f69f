"""Word automata: forward simulation, simulation quotients, and antichain
universality / inclusion checks.

Macro-states are int bitmasks over state indices.  Subsumption ``S ⪯∀∃ P``
(every member of S is simulated by some member of P) is tested as
``S ⊆ down(P)`` where ``down(P)`` is the union of the down-closures of
P's members.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

import numpy as np

from .core import Nfa, StateRelation, iter_bits, mask_of, union_nfa
from .lts_sim import coarsest_pr, compute_simulation

ENGINES = ("classical", "antichain", "antichain-sim")


@dataclass
class SearchStats:
    result: bool | None = None
    generated: int = 0
    stored_peak: int = 0
    processed: int = 0


def final_respecting_preorder(carrier, final) -> StateRelation:
    """{(p, r) : p final implies r final}."""
    fin = np.array([i in final for i in range(len(carrier))], dtype=bool)
    return StateRelation(carrier, ~fin[:, None] | fin[None, :])


def fa_forward_simulation(a: Nfa) -> StateRelation:
    """Maximal forward simulation; ``p ⪯ r`` implies L(p) ⊆ L(r)."""
    init = final_respecting_preorder(a.states, a.final)
    pr = compute_simulation(a.to_lts(), coarsest_pr(a.states, init))
    return pr.induced(a.states)


class _Order:
    """Precomputed masks for one preorder (rows index the smaller state)."""

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=bool)
        n = m.shape[0]
        self.identity = bool(np.array_equal(m, np.eye(n, dtype=bool)))
        self.up = [mask_of(np.flatnonzero(m[i]).tolist()) for i in range(n)]
        self.down = [mask_of(np.flatnonzero(m[:, j]).tolist()) for j in range(n)]
        strict = m & ~m.T
        equiv = m & m.T
        self.kill = []
        for r in range(n):
            k = mask_of(np.flatnonzero(strict[r]).tolist())
            k |= mask_of(j for j in np.flatnonzero(equiv[r]).tolist() if j < r)
            self.kill.append(k)

    def downclose(self, mask: int) -> int:
        if self.identity:
            return mask
        out = 0
        for p in iter_bits(mask):
            out |= self.down[p]
        return out

    def below(self, s: int, p: int) -> bool:
        """``s ⪯∀∃ p`` for macro-states."""
        if self.identity:
            return s & ~p == 0
        return s & ~self.downclose(p) == 0

    def minimize(self, mask: int) -> int:
        if self.identity:
            return mask
        out = mask
        for r in iter_bits(mask):
            if mask & self.kill[r]:
                out &= ~(1 << r)
        return out


def minimize_macrostate(members, rel: StateRelation) -> frozenset:
    """Drop every state strictly simulated by another member.

    Among mutually simulating members the one with the smallest index stays.
    ``members`` are state labels of ``rel.carrier``.
    """
    idx = rel.index
    order = _Order(rel.matrix)
    kept = order.minimize(mask_of(idx[m] for m in members))
    return frozenset(rel.carrier[i] for i in iter_bits(kept))


def _relation_matrix(rel: StateRelation | None, states, default) -> np.ndarray:
    if rel is None:
        return default().matrix
    if tuple(rel.carrier) != tuple(states):
        rel = rel.restrict(states)
    if not rel.is_preorder():
        raise ValueError("relation must be a preorder")
    return rel.matrix


class _Store:
    """Processed ∪ Next with FIFO order on Next and parent pointers for witnesses."""

    def __init__(self, debug: bool):
        self.nodes: list = []          # (payload, parent id, symbol)
        self.alive: dict = {}          # node id -> payload
        self.queue: deque = deque()
        self.peak = 0
        self.admitted = Counter() if debug else None

    def add(self, payload, parent, sym) -> int:
        if self.admitted is not None:
            self.admitted[payload] += 1
            if self.admitted[payload] > 1:
                raise AssertionError(f"element re-admitted: {payload!r}")
        nid = len(self.nodes)
        self.nodes.append((payload, parent, sym))
        self.alive[nid] = payload
        self.queue.append(nid)
        self.peak = max(self.peak, len(self.alive))
        return nid

    def discard(self, nid):
        del self.alive[nid]

    def pop(self):
        while self.queue:
            nid = self.queue.popleft()
            if nid in self.alive:
                return nid
        return None

    def word(self, nid) -> tuple:
        out = []
        while nid is not None:
            _, parent, sym = self.nodes[nid]
            if sym is not None:
                out.append(sym)
            nid = parent
        return tuple(reversed(out))


def _offer_macro(store: _Store, order: _Order, P: int, parent, sym):
    """Antichain insertion of macro-state P (kept iff no stored S has S ⪯∀∃ P)."""
    alive = store.alive
    if order.identity:
        if any(S & ~P == 0 for S in alive.values()):
            return
        dead = [sid for sid, S in alive.items() if P & ~S == 0]
    else:
        down_p = order.downclose(P)
        if any(S & ~down_p == 0 for S in alive.values()):
            return
        dead = [sid for sid, S in alive.items() if P & ~order.downclose(S) == 0]
    for sid in dead:
        del alive[sid]
    store.add(P, parent, sym)


def _post(succ_a, mask: int) -> int:
    out = 0
    for q in iter_bits(mask):
        out |= succ_a[q]
    return out


def fa_universality(a: Nfa, engine: str = "antichain-sim", rel: StateRelation | None = None,
                    *, minimize: bool = True, debug: bool = False):
    """Universality check.  Returns ``(universal, stats, witness)``.

    The witness is a word rejected by ``a`` (a tuple of symbols) or None.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if not a.alphabet:
        raise ValueError("empty alphabet")
    stats = SearchStats()
    fin = a.final_mask
    init = a.initial_mask
    stats.generated = 1
    if not init & fin:
        stats.result = False
        stats.stored_peak = 0
        return False, stats, ()

    if engine == "antichain-sim":
        order = _Order(_relation_matrix(rel, a.states, lambda: fa_forward_simulation(a)))
    else:
        order = _Order(np.eye(len(a.states), dtype=bool))
    shrink = order.minimize if (engine == "antichain-sim" and minimize) else (lambda m: m)
    succ = a.succ_masks
    store = _Store(debug)
    seen: set[int] = set()
    root = shrink(init)
    store.add(root, None, None)
    seen.add(root)
    while True:
        nid = store.pop()
        if nid is None:
            break
        R = store.nodes[nid][0]
        stats.processed += 1
        for x in a.alphabet:
            P = shrink(_post(succ[x], R))
            stats.generated += 1
            if not P & fin:
                stats.result = False
                stats.stored_peak = store.peak
                return False, stats, store.word(nid) + (x,)
            if engine == "classical":
                if P in seen:
                    continue
                seen.add(P)
                store.add(P, nid, x)
                continue
            _offer_macro(store, order, P, nid, x)
    stats.result = True
    stats.stored_peak = store.peak
    return True, stats, None


def fa_inclusion(a: Nfa, b: Nfa, engine: str = "antichain-sim", rel: StateRelation | None = None,
                 *, opt1a: bool = True, opt1b: bool = True, minimize: bool = True,
                 debug: bool = False):
    """Check L(a) ⊆ L(b).  Returns ``(included, stats, witness)``.

    ``rel`` (for antichain-sim) is a preorder over ``union_nfa(a, b)``; by
    default its maximal forward simulation.  The witness lies in L(a) minus L(b).
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if set(a.alphabet) != set(b.alphabet):
        raise ValueError("alphabet mismatch")
    na, nb = len(a.states), len(b.states)
    if engine == "antichain-sim":
        u = union_nfa(a, b)
        m = _relation_matrix(rel, u.states, lambda: fa_forward_simulation(u))
        order_a = _Order(m[:na, :na]) if opt1a else _Order(np.eye(na, dtype=bool))
        order_b = _Order(m[na:, na:])
        cross = [mask_of(np.flatnonzero(m[i, na:]).tolist()) for i in range(na)] if opt1b else None
        shrink = order_b.minimize if minimize else (lambda x: x)
        if not opt1a:
            order_b = _Order(np.eye(nb, dtype=bool))
    else:
        order_a = _Order(np.eye(na, dtype=bool))
        order_b = _Order(np.eye(nb, dtype=bool))
        cross = None
        shrink = lambda x: x  # noqa: E731

    stats = SearchStats()
    fa_, fb = a.final_mask, b.final_mask
    ib = b.initial_mask
    initial = sorted(a.initial)
    stats.generated = len(initial)
    for i in initial:
        if i in a.final and not ib & fb:
            stats.result = False
            return False, stats, ()

    def accepting(p, P):
        return (fa_ >> p & 1) and not P & fb

    store = _Store(debug)
    seen: set = set()

    def subsumed(p, P):
        # (p, P) is covered by a stored (s, S) with p ⪯ s and S ⪯∀∃ P
        return any(order_a.up[p] >> s & 1 and order_b.below(S, P)
                   for s, S in store.alive.values())

    def offer(p, P, parent, sym):
        if engine == "classical":
            if (p, P) not in seen:
                seen.add((p, P))
                store.add((p, P), parent, sym)
            return
        if cross is not None and cross[p] & P:
            return
        if subsumed(p, P):
            return
        dead = [sid for sid, (s, S) in store.alive.items()
                if order_a.up[s] >> p & 1 and order_b.below(P, S)]
        for sid in dead:
            store.discard(sid)
        store.add((p, P), parent, sym)

    start = shrink(ib)
    for i in initial:
        offer(i, start, None, None)

    sa, sb = a.succ_masks, b.succ_masks
    while True:
        nid = store.pop()
        if nid is None:
            break
        r, R = store.nodes[nid][0]
        stats.processed += 1
        for x in a.alphabet:
            targets = sa[x][r]
            if not targets:
                continue
            P = shrink(_post(sb[x], R))
            for q in iter_bits(targets):
                stats.generated += 1
                if accepting(q, P):
                    stats.result = False
                    stats.stored_peak = store.peak
                    return False, stats, store.word(nid) + (x,)
                offer(q, P, nid, x)
    stats.result = True
    stats.stored_peak = store.peak
    return True, stats, None


def quotient_nfa(a: Nfa, equiv: StateRelation) -> Nfa:
    """Merge the classes of ``equiv``; each class is named after its least-index member."""
    if tuple(equiv.carrier) != tuple(a.states):
        equiv = equiv.restrict(a.states)
    if not equiv.is_equivalence():
        raise ValueError("relation is not an equivalence")
    classes = equiv.classes()
    cls_of = {}
    for k, members in enumerate(classes):
        for q in members:
            cls_of[q] = k
    names = tuple(a.states[c[0]] for c in classes)
    return Nfa(a.alphabet, names,
               frozenset((cls_of[s], x, cls_of[t]) for s, x, t in a.transitions),
               frozenset(cls_of[q] for q in a.initial), frozenset(cls_of[q] for q in a.final))


def simulation_quotient(a: Nfa, rel: StateRelation | None = None) -> Nfa:
    """Quotient by the symmetric core of ``rel`` (default: maximal forward simulation)."""
    rel = fa_forward_simulation(a) if rel is None else rel
    return quotient_nfa(a, rel.symmetric_core())
