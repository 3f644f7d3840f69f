"""Maximal simulation on a labelled transition system by partition-relation refinement.

``compute_simulation`` refines a partition-relation pair with per-block
``Remove`` sets and ``Count`` counters.  Blocks are split only when a
``Remove`` set cuts them, and children copy the row and column of their
parent in the block relation, its ``Remove`` sets and its counters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Lts, StateRelation


@dataclass(frozen=True)
class PartitionRelationPair:
    """Blocks of state indices plus a relation on block positions.

    ``rel`` holds pairs ``(i, j)`` of positions in ``blocks``; the induced
    state relation is the union of ``blocks[i] x blocks[j]``.
    """

    blocks: tuple
    rel: frozenset

    def validate(self, n: int):
        seen = set()
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            if seen & b:
                raise ValueError("blocks overlap")
            seen |= b
        if seen != set(range(n)):
            raise ValueError("blocks do not cover the carrier")
        k = len(self.blocks)
        for i, j in self.rel:
            if not (0 <= i < k and 0 <= j < k):
                raise ValueError("relation refers to a missing block")

    def induced_matrix(self, n: int) -> np.ndarray:
        m = np.zeros((n, n), dtype=bool)
        for i, j in self.rel:
            rows = sorted(self.blocks[i])
            cols = sorted(self.blocks[j])
            m[np.ix_(rows, cols)] = True
        return m

    def induced(self, carrier) -> StateRelation:
        return StateRelation(carrier, self.induced_matrix(len(carrier)))

    def canonical(self) -> "PartitionRelationPair":
        """Blocks sorted by least member, rel renumbered to match."""
        order = sorted(range(len(self.blocks)), key=lambda i: min(self.blocks[i]))
        pos = {old: new for new, old in enumerate(order)}
        return PartitionRelationPair(tuple(frozenset(self.blocks[i]) for i in order),
                                     frozenset((pos[i], pos[j]) for i, j in self.rel))


def coarsest_pr(carrier, preorder: StateRelation) -> PartitionRelationPair:
    """The coarsest partition-relation pair inducing ``preorder``."""
    carrier = tuple(carrier)
    if preorder.carrier != carrier:
        preorder = preorder.restrict(carrier)
    if not preorder.is_preorder():
        raise ValueError("initial relation is not a preorder")
    classes = preorder.classes()
    blocks = tuple(frozenset(c) for c in classes)
    reps = [c[0] for c in classes]
    m = preorder.matrix
    rel = frozenset((i, j) for i, ri in enumerate(reps) for j, rj in enumerate(reps) if m[ri, rj])
    return PartitionRelationPair(blocks, rel)


@dataclass
class SimTrace:
    """Debug record of one ``compute_simulation`` run."""

    snapshots: list = field(default_factory=list)  # induced matrix at each pivot pop
    consumed: list = field(default_factory=list)   # (step, block id, symbol, frozenset)
    created: dict = field(default_factory=dict)    # child id -> (parent id, step)

    def ancestry(self, block: int, step: int | None = None):
        """(block id, last step) pairs whose consumed sets belong to ``block``'s lineage."""
        out = []
        limit = step
        while True:
            out.append((block, limit))
            if block not in self.created:
                return out
            parent, born = self.created[block]
            block, limit = parent, born if limit is None else min(limit, born)

    def text(self, carrier) -> str:
        lines = []
        for k, m in enumerate(self.snapshots):
            pairs = [f"{carrier[i]}<={carrier[j]}" for i, j in zip(*np.nonzero(m))]
            lines.append(f"step {k}: " + " ".join(pairs))
        return "\n".join(lines)


def compute_simulation(lts: Lts, init: PartitionRelationPair,
                       trace: SimTrace | None = None) -> PartitionRelationPair:
    """Coarsest partition-relation pair inducing the maximal simulation inside ``init``."""
    n = len(lts.states)
    init.validate(n)
    syms = lts.alphabet
    pre = [lts.pre[a] for a in syms]
    nsym = len(syms)

    members: list[set] = [set(b) for b in init.blocks]
    block_of = [0] * n
    for bid, b in enumerate(members):
        for q in b:
            block_of[q] = bid
    rel: list[int] = [0] * len(members)
    for i, j in init.rel:
        rel[i] |= 1 << j
    for i in range(len(members)):
        if not rel[i] >> i & 1:
            raise ValueError("initial block relation is not reflexive")

    count: list[list[list[int]]] = []
    remove: list[list[set]] = []
    for bid in range(len(members)):
        up = [q for c in _bits(rel[bid]) for q in members[c]]
        cnts = []
        rems = []
        for ai in range(nsym):
            cnt = [0] * n
            for q in up:
                for r in pre[ai][q]:
                    cnt[r] += 1
            cnts.append(cnt)
            rems.append({r for r in range(n) if cnt[r] == 0})
        count.append(cnts)
        remove.append(rems)

    # move-to-front list; the head is the most recently inserted key
    agenda: dict[int, None] = {}
    for bid in reversed(range(len(members))):
        if any(remove[bid]):
            agenda[bid] = None

    def to_front(bid):
        agenda.pop(bid, None)
        agenda[bid] = None

    step = 0
    while agenda:
        B = next(reversed(agenda))
        ai = next(i for i in range(nsym) if remove[B][i])
        rem = remove[B][ai]
        remove[B][ai] = set()
        if not any(remove[B]):
            del agenda[B]
        if trace is not None:
            trace.snapshots.append(_induced(members, rel, n))
            trace.consumed.append((step, B, syms[ai], frozenset(rem)))
        b_prev = list(members[B])

        # split every block cut by rem; children get fresh ids
        touched: dict[int, list[int]] = {}
        for q in sorted(rem):
            touched.setdefault(block_of[q], []).append(q)
        inside = []
        for X, qs in touched.items():
            if len(qs) == len(members[X]):
                inside.append(X)
                continue
            c = len(members)
            members.append(set(qs))
            members[X].difference_update(qs)
            for q in qs:
                block_of[q] = c
            rel.append(rel[X])
            bit_x, bit_c = 1 << X, 1 << c
            for Y in range(len(rel)):
                if rel[Y] & bit_x:
                    rel[Y] |= bit_c
            remove.append([set(s) for s in remove[X]])
            count.append([list(cnt) for cnt in count[X]])
            if any(remove[c]):
                to_front(c)
            if trace is not None:
                trace.created[c] = (X, step)
            inside.append(c)
        inside.sort()

        sources = sorted({block_of[r] for q in b_prev for r in pre[ai][q]})
        for C in sources:
            for D in inside:
                if not rel[C] >> D & 1:
                    continue
                rel[C] &= ~(1 << D)
                grew = False
                for bi in range(nsym):
                    cnt = count[C][bi]
                    rm = remove[C][bi]
                    pb = pre[bi]
                    for q in members[D]:
                        for r in pb[q]:
                            cnt[r] -= 1
                            if cnt[r] == 0:
                                rm.add(r)
                                grew = True
                if grew:
                    to_front(C)
        step += 1

    live = [bid for bid in range(len(members)) if members[bid]]
    pos = {bid: k for k, bid in enumerate(live)}
    out = PartitionRelationPair(
        tuple(frozenset(members[b]) for b in live),
        frozenset((pos[b], pos[c]) for b in live for c in _bits(rel[b]) if c in pos))
    return out.canonical()


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _induced(members, rel, n):
    m = np.zeros((n, n), dtype=bool)
    for b, row in enumerate(rel):
        if not members[b]:
            continue
        rows = sorted(members[b])
        for c in _bits(row):
            if members[c]:
                m[np.ix_(rows, sorted(members[c]))] = True
    return m


def maximal_simulation(lts: Lts, init: StateRelation | None = None) -> StateRelation:
    """Convenience wrapper: maximal simulation inside ``init`` (default: full)."""
    if init is None:
        init = StateRelation.full(lts.states)
    return compute_simulation(lts, coarsest_pr(lts.states, init)).induced(lts.states)


def compute_bisimulation(lts: Lts, init_partition) -> tuple:
    """Coarsest stable refinement of ``init_partition`` (blocks of state indices)."""
    n = len(lts.states)
    blocks = [frozenset(b) for b in init_partition]
    PartitionRelationPair(tuple(blocks), frozenset()).validate(n)
    block_of = [0] * n
    for i, b in enumerate(blocks):
        for q in b:
            block_of[q] = i
    post = lts.post
    while True:
        sig = {}
        new_of = [0] * n
        for q in range(n):
            key = (block_of[q],) + tuple(
                frozenset(block_of[t] for t in post[a][q]) for a in lts.alphabet)
            new_of[q] = sig.setdefault(key, len(sig))
        if len(sig) == len(set(block_of)):
            break
        block_of = new_of
    groups: dict[int, set] = {}
    for q in range(n):
        groups.setdefault(block_of[q], set()).add(q)
    return tuple(sorted((frozenset(g) for g in groups.values()), key=min))
