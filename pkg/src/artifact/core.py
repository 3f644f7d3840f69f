"""Data model, text formats and random generators for the automata toolkit.

States are opaque strings at the boundary and dense integer indices inside
every container: ``Nfa.transitions`` holds ``(src_index, symbol, dst_index)``
triples, ``TreeAutomaton.rules`` holds ``(lhs_indices, symbol, rhs_index)``,
and so on.  ``states[i]`` gives the external name of index ``i``.
"""

from __future__ import annotations

import math
import random
import re
import string
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np


class ParseError(ValueError):
    """Malformed automaton text.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _index_of(states: Sequence[Hashable]) -> dict:
    index = {s: i for i, s in enumerate(states)}
    if len(index) != len(states):
        raise ValueError("duplicate state names")
    return index


def iter_bits(mask: int):
    """Yield indices of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


# ---------------------------------------------------------------------------
# relations


class StateRelation:
    """A binary relation over a finite carrier, stored as a boolean matrix.

    ``matrix[i, j]`` is true when ``carrier[i]`` is related to ``carrier[j]``.
    For simulations this reads "carrier[j] simulates carrier[i]".
    """

    __slots__ = ("carrier", "matrix", "_index")

    def __init__(self, carrier: Sequence[Hashable], matrix):
        self.carrier = tuple(carrier)
        m = np.array(matrix, dtype=bool, copy=True)
        n = len(self.carrier)
        if m.shape != (n, n):
            raise ValueError(f"relation matrix must be {n}x{n}, got {m.shape}")
        m.setflags(write=False)
        self.matrix = m
        self._index = None

    @classmethod
    def identity(cls, carrier):
        return cls(carrier, np.eye(len(tuple(carrier)), dtype=bool))

    @classmethod
    def full(cls, carrier):
        n = len(tuple(carrier))
        return cls(carrier, np.ones((n, n), dtype=bool))

    @classmethod
    def from_pairs(cls, carrier, pairs):
        carrier = tuple(carrier)
        idx = _index_of(carrier)
        m = np.zeros((len(carrier), len(carrier)), dtype=bool)
        for p, q in pairs:
            m[idx[p], idx[q]] = True
        return cls(carrier, m)

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = _index_of(self.carrier)
        return self._index

    def __len__(self):
        return int(self.matrix.sum())

    def __contains__(self, pair):
        p, q = pair
        return bool(self.matrix[self.index[p], self.index[q]])

    def __eq__(self, other):
        if not isinstance(other, StateRelation):
            return NotImplemented
        return self.carrier == other.carrier and np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    def __le__(self, other: "StateRelation") -> bool:
        self._same_carrier(other)
        return bool(np.all(~self.matrix | other.matrix))

    def __and__(self, other):
        self._same_carrier(other)
        return StateRelation(self.carrier, self.matrix & other.matrix)

    def __or__(self, other):
        self._same_carrier(other)
        return StateRelation(self.carrier, self.matrix | other.matrix)

    def __repr__(self):
        return f"StateRelation({len(self.carrier)} states, {len(self)} pairs)"

    def _same_carrier(self, other):
        if self.carrier != other.carrier:
            raise ValueError("relations over different carriers")

    def holds(self, i: int, j: int) -> bool:
        return bool(self.matrix[i, j])

    def pairs(self) -> list[tuple]:
        """Related pairs of carrier members, in index order."""
        ii, jj = np.nonzero(self.matrix)
        return [(self.carrier[i], self.carrier[j]) for i, j in zip(ii.tolist(), jj.tolist())]

    def index_pairs(self) -> set[tuple[int, int]]:
        ii, jj = np.nonzero(self.matrix)
        return set(zip(ii.tolist(), jj.tolist()))

    def inverse(self):
        return StateRelation(self.carrier, self.matrix.T)

    def then(self, other: "StateRelation") -> "StateRelation":
        """Composition in diagrammatic order: x (self;other) z iff x self y other z."""
        self._same_carrier(other)
        m = (self.matrix.astype(np.int64) @ other.matrix.astype(np.int64)) > 0
        return StateRelation(self.carrier, m)

    def restrict(self, members: Sequence[Hashable]) -> "StateRelation":
        idx = [self.index[m] for m in members]
        return StateRelation(members, self.matrix[np.ix_(idx, idx)])

    def is_reflexive(self) -> bool:
        return bool(np.all(np.diag(self.matrix)))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.T))

    def is_transitive(self) -> bool:
        return self.then(self) <= self

    def is_preorder(self) -> bool:
        return self.is_reflexive() and self.is_transitive()

    def is_equivalence(self) -> bool:
        return self.is_preorder() and self.is_symmetric()

    def symmetric_core(self) -> "StateRelation":
        return StateRelation(self.carrier, self.matrix & self.matrix.T)

    def up_masks(self) -> list[int]:
        """``up[i]`` has bit j set iff i is related to j."""
        return [mask_of(np.flatnonzero(row).tolist()) for row in self.matrix]

    def down_masks(self) -> list[int]:
        """``down[j]`` has bit i set iff i is related to j."""
        return [mask_of(np.flatnonzero(col).tolist()) for col in self.matrix.T]

    def classes(self) -> list[list[int]]:
        """Classes of the symmetric core, each sorted, ordered by least member."""
        core = self.matrix & self.matrix.T
        seen = [False] * len(self.carrier)
        out = []
        for i in range(len(self.carrier)):
            if seen[i]:
                continue
            cls_ = [j for j in np.flatnonzero(core[i]).tolist() if not seen[j]]
            if i not in cls_:
                cls_ = [i] + cls_
            for j in cls_:
                seen[j] = True
            out.append(sorted(cls_))
        return out


def relation_ae(rel: StateRelation, p: Iterable[Hashable], r: Iterable[Hashable]) -> bool:
    """True iff every member of ``p`` is related to some member of ``r``."""
    idx = rel.index
    targets = [idx[x] for x in r]
    if not targets:
        return not any(True for _ in p)
    cols = rel.matrix[:, targets]
    return all(bool(cols[idx[x]].any()) for x in p)


# ---------------------------------------------------------------------------
# labelled transition systems and word automata


@dataclass(frozen=True)
class Lts:
    states: tuple
    alphabet: tuple
    transitions: frozenset  # (src_index, symbol, dst_index)

    def __post_init__(self):
        n = len(self.states)
        _index_of(self.states)
        alph = set(self.alphabet)
        for s, a, t in self.transitions:
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"transition endpoint out of range: {(s, a, t)}")
            if a not in alph:
                raise ValueError(f"label {a!r} not in alphabet")

    @classmethod
    def from_triples(cls, triples, states=None, alphabet=None):
        """Build from named ``(src, label, dst)`` triples."""
        triples = list(triples)
        if states is None:
            states = sorted({s for s, _, _ in triples} | {t for _, _, t in triples}, key=repr)
        if alphabet is None:
            alphabet = sorted({a for _, a, _ in triples}, key=repr)
        idx = _index_of(states)
        return cls(tuple(states), tuple(alphabet),
                   frozenset((idx[s], a, idx[t]) for s, a, t in triples))

    @cached_property
    def pre(self) -> dict:
        """``pre[a][q]`` lists the a-predecessors of ``q`` (sorted)."""
        out = {a: [[] for _ in self.states] for a in self.alphabet}
        for s, a, t in sorted(self.transitions, key=_tkey):
            out[a][t].append(s)
        return out

    @cached_property
    def post(self) -> dict:
        out = {a: [[] for _ in self.states] for a in self.alphabet}
        for s, a, t in sorted(self.transitions, key=_tkey):
            out[a][s].append(t)
        return out


def _tkey(t):
    return (t[0], str(t[1]), t[2])


@dataclass(frozen=True)
class Nfa:
    alphabet: tuple
    states: tuple
    transitions: frozenset  # (src_index, symbol, dst_index)
    initial: frozenset
    final: frozenset

    def __post_init__(self):
        n = len(self.states)
        _index_of(self.states)
        alph = set(self.alphabet)
        if len(alph) != len(self.alphabet):
            raise ValueError("duplicate alphabet symbols")
        for s, a, t in self.transitions:
            if not (0 <= s < n and 0 <= t < n) or a not in alph:
                raise ValueError(f"malformed transition {(s, a, t)}")
        for q in self.initial | self.final:
            if not 0 <= q < n:
                raise ValueError(f"state index {q} out of range")

    @classmethod
    def build(cls, alphabet, states, transitions, initial, final):
        """Construct from state names."""
        idx = _index_of(tuple(states))
        try:
            return cls(tuple(alphabet), tuple(states),
                       frozenset((idx[s], a, idx[t]) for s, a, t in transitions),
                       frozenset(idx[q] for q in initial), frozenset(idx[q] for q in final))
        except KeyError as exc:
            raise ValueError(f"undeclared state {exc.args[0]!r}") from None

    @cached_property
    def index(self) -> dict:
        return _index_of(self.states)

    @cached_property
    def succ_masks(self) -> dict:
        """``succ_masks[a][q]`` is the bitmask of a-successors of q."""
        out = {a: [0] * len(self.states) for a in self.alphabet}
        for s, a, t in self.transitions:
            out[a][s] |= 1 << t
        return out

    @property
    def initial_mask(self) -> int:
        return mask_of(self.initial)

    @property
    def final_mask(self) -> int:
        return mask_of(self.final)

    def to_lts(self) -> Lts:
        return Lts(self.states, self.alphabet, self.transitions)

    def accepts(self, word: Sequence[str]) -> bool:
        cur = self.initial_mask
        succ = self.succ_masks
        for a in word:
            nxt = 0
            for q in iter_bits(cur):
                nxt |= succ[a][q]
            cur = nxt
        return bool(cur & self.final_mask)

    def named_transitions(self):
        return sorted((self.states[s], a, self.states[t]) for s, a, t in self.transitions)


# ---------------------------------------------------------------------------
# tree automata


@dataclass(frozen=True)
class TreeAutomaton:
    symbols: tuple  # ((name, arity), ...) in declaration order
    states: tuple
    rules: frozenset  # (lhs index tuple, symbol, rhs index)
    final: frozenset
    name: str = field(default="A", compare=False)

    def __post_init__(self):
        n = len(self.states)
        _index_of(self.states)
        ar = {}
        for s, k in self.symbols:
            if s in ar:
                raise ValueError(f"symbol {s!r} declared twice")
            if k < 0:
                raise ValueError(f"negative arity for {s!r}")
            ar[s] = k
        for lhs, a, q in self.rules:
            if a not in ar:
                raise ValueError(f"undeclared symbol {a!r}")
            if len(lhs) != ar[a]:
                raise ValueError(f"rule for {a!r} has {len(lhs)} children, arity is {ar[a]}")
            if not 0 <= q < n or any(not 0 <= x < n for x in lhs):
                raise ValueError("rule state out of range")
        for q in self.final:
            if not 0 <= q < n:
                raise ValueError(f"state index {q} out of range")

    @classmethod
    def build(cls, symbols, states, rules, final, name="A"):
        """Construct from names; ``symbols`` is a mapping or pair sequence."""
        if isinstance(symbols, Mapping):
            symbols = tuple(symbols.items())
        idx = _index_of(tuple(states))
        try:
            return cls(tuple((s, int(k)) for s, k in symbols), tuple(states),
                       frozenset((tuple(idx[x] for x in lhs), a, idx[q]) for lhs, a, q in rules),
                       frozenset(idx[q] for q in final), name)
        except KeyError as exc:
            raise ValueError(f"undeclared state {exc.args[0]!r}") from None

    @cached_property
    def arity(self) -> dict:
        return dict(self.symbols)

    @cached_property
    def index(self) -> dict:
        return _index_of(self.states)

    @property
    def leaf_symbols(self) -> list:
        return [s for s, k in self.symbols if k == 0]

    @cached_property
    def rules_by_symbol(self) -> dict:
        out = {s: [] for s, _ in self.symbols}
        for lhs, a, q in sorted(self.rules, key=lambda r: (r[1], r[0], r[2])):
            out[a].append((lhs, q))
        return out

    @property
    def final_mask(self) -> int:
        return mask_of(self.final)

    def named_rules(self):
        return sorted((tuple(self.states[x] for x in lhs), a, self.states[q])
                      for lhs, a, q in self.rules)


def transition_density(ta: TreeAutomaton) -> float:
    """Average number of right-hand sides per used left-hand side."""
    lhs = {(a, l) for l, a, _ in ta.rules}
    return len(ta.rules) / len(lhs) if lhs else 0.0


# ---------------------------------------------------------------------------
# alternating Büchi automata


@dataclass(frozen=True)
class AlternatingBuchiAutomaton:
    """``delta[(q, a)]`` is a frozenset of conjunct sets (frozensets of indices).

    Every (state, symbol) key is present; an empty frozenset means the state
    has no a-transition at all.  A conjunct set equal to the empty frozenset
    is the accepting ``true`` transition that normalization removes.
    """

    alphabet: tuple
    states: tuple
    initial: int
    delta: Mapping
    accepting: frozenset

    def __post_init__(self):
        n = len(self.states)
        _index_of(self.states)
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        full = {}
        for (q, a), alts in self.delta.items():
            if not 0 <= q < n or a not in self.alphabet:
                raise ValueError(f"bad delta key {(q, a)}")
            alts = frozenset(frozenset(p) for p in alts)
            for p in alts:
                if any(not 0 <= x < n for x in p):
                    raise ValueError("successor out of range")
            full[(q, a)] = alts
        for q in range(n):
            for a in self.alphabet:
                full.setdefault((q, a), frozenset())
        object.__setattr__(self, "delta", full)
        object.__setattr__(self, "accepting", frozenset(self.accepting))

    __hash__ = None

    @classmethod
    def build(cls, alphabet, states, initial, transitions, accepting):
        """``transitions``: iterable of ``(src, symbol, successor names)``."""
        idx = _index_of(tuple(states))
        delta: dict = {}
        try:
            for p, a, succ in transitions:
                delta.setdefault((idx[p], a), set()).add(frozenset(idx[x] for x in succ))
            return cls(tuple(alphabet), tuple(states), idx[initial],
                       {k: frozenset(v) for k, v in delta.items()},
                       frozenset(idx[q] for q in accepting))
        except KeyError as exc:
            raise ValueError(f"undeclared state {exc.args[0]!r}") from None

    @cached_property
    def index(self) -> dict:
        return _index_of(self.states)

    def transitions(self):
        """All ``(p, a, P)`` with P a sorted tuple, in a fixed order."""
        out = []
        for q in range(len(self.states)):
            for a in self.alphabet:
                for p in sorted(tuple(sorted(s)) for s in self.delta[(q, a)]):
                    out.append((q, a, p))
        return out

    def transition_count(self) -> int:
        return sum(len(v) for v in self.delta.values())

    def named_transitions(self):
        return [(self.states[q], a, tuple(self.states[x] for x in p))
                for q, a, p in self.transitions()]


SINK_NAME = "qsink"


def normalize_aba(aba: AlternatingBuchiAutomaton) -> AlternatingBuchiAutomaton:
    """Redirect every ``p -a-> {}`` to a fresh accepting sink looping on all symbols."""
    if not any(frozenset() in alts for alts in aba.delta.values()):
        return aba
    name = SINK_NAME
    while name in aba.index:
        name += "_"
    sink = len(aba.states)
    delta = {}
    for key, alts in aba.delta.items():
        delta[key] = frozenset(p if p else frozenset({sink}) for p in alts)
    for a in aba.alphabet:
        delta[(sink, a)] = frozenset({frozenset({sink})})
    return AlternatingBuchiAutomaton(aba.alphabet, aba.states + (name,), aba.initial,
                                     delta, aba.accepting | {sink})


# ---------------------------------------------------------------------------
# unions


def _tagged_names(a_states, b_states):
    if set(a_states).isdisjoint(b_states):
        return tuple(a_states) + tuple(b_states)
    return tuple(f"A.{s}" for s in a_states) + tuple(f"B.{s}" for s in b_states)


def union_nfa(a: Nfa, b: Nfa) -> Nfa:
    """Disjoint union.  A's state i keeps index i, B's state j becomes len(A)+j.

    Names are kept when the two name sets are disjoint, else prefixed ``A.``/``B.``.
    """
    k = len(a.states)
    alphabet = tuple(a.alphabet) + tuple(s for s in b.alphabet if s not in a.alphabet)
    trans = set(a.transitions) | {(s + k, x, t + k) for s, x, t in b.transitions}
    return Nfa(alphabet, _tagged_names(a.states, b.states), frozenset(trans),
               a.initial | frozenset(q + k for q in b.initial),
               a.final | frozenset(q + k for q in b.final))


def union_ta(a: TreeAutomaton, b: TreeAutomaton) -> TreeAutomaton:
    """Disjoint union with merged symbol table (shared symbols must agree on arity)."""
    ar = dict(a.symbols)
    symbols = list(a.symbols)
    for s, k in b.symbols:
        if s in ar:
            if ar[s] != k:
                raise ValueError(f"arity conflict on symbol {s!r}: {ar[s]} vs {k}")
        else:
            ar[s] = k
            symbols.append((s, k))
    off = len(a.states)
    rules = set(a.rules) | {(tuple(x + off for x in lhs), s, q + off) for lhs, s, q in b.rules}
    return TreeAutomaton(tuple(symbols), _tagged_names(a.states, b.states), frozenset(rules),
                         a.final | frozenset(q + off for q in b.final), f"{a.name}+{b.name}")


# ---------------------------------------------------------------------------
# generators


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _ceil(x: float) -> int:
    # guard against 0.3*20 == 6.000000000000001
    return int(math.ceil(x - 1e-9))


def symbol_names(k: int) -> tuple:
    if k <= 26:
        return tuple(string.ascii_lowercase[:k])
    return tuple(f"a{i}" for i in range(k))


def _check_densities(n, td, fd):
    if n < 1:
        raise ValueError("need at least one state")
    if td < 0:
        raise ValueError("transition density must be non-negative")
    if not 0 <= fd <= 1:
        raise ValueError("final-state density must lie in [0, 1]")


def generate_random_fa(n: int, k: int, td: float, fd: float, seed: int) -> Nfa:
    """Tabakov-Vardi style random FA with one initial state ``q0``."""
    _check_densities(n, td, fd)
    if k < 1:
        raise ValueError("need at least one symbol")
    rng = random.Random(seed)
    count = _round_half_up(td * n)
    if count > n * n:
        raise ValueError(f"td*n = {count} transitions per symbol exceeds n^2 = {n * n}")
    alphabet = symbol_names(k)
    trans = set()
    for a in alphabet:
        for code in rng.sample(range(n * n), count):
            trans.add((code // n, a, code % n))
    finals = rng.sample(range(n), min(n, _ceil(fd * n)))
    return Nfa(alphabet, tuple(f"q{i}" for i in range(n)), frozenset(trans),
               frozenset({0}), frozenset(finals))


def parse_ranked(spec: str | Mapping) -> tuple:
    """``"a:0,f:2"`` or a mapping to a ``((name, arity), ...)`` tuple."""
    if isinstance(spec, Mapping):
        return tuple((s, int(k)) for s, k in spec.items())
    out = []
    for tok in re.split(r"[,\s]+", spec.strip()):
        if not tok:
            continue
        name, _, k = tok.partition(":")
        if not name or not k.isdigit():
            raise ValueError(f"bad ranked symbol {tok!r}")
        out.append((name, int(k)))
    return tuple(out)


def generate_random_ta(n: int, symbols, td: float, fd: float, seed: int,
                       leaf_td: float | None = None) -> TreeAutomaton:
    """Random TA: per symbol of arity r, round(td*n) rules drawn from Q^r x Q.

    Leaf symbols only have n candidate rules, so ``leaf_td`` (default ``td``)
    sets their density separately.
    """
    _check_densities(n, td, fd)
    if leaf_td is not None and leaf_td < 0:
        raise ValueError("leaf_td must be non-negative")
    symbols = parse_ranked(symbols) if not isinstance(symbols, tuple) else symbols
    if not any(k == 0 for _, k in symbols):
        raise ValueError("at least one leaf (arity-0) symbol is required")
    rng = random.Random(seed)
    rules = set()
    for sym, r in symbols:
        dens = leaf_td if (r == 0 and leaf_td is not None) else td
        count = _round_half_up(dens * n)
        pool = n ** (r + 1)
        if count > pool:
            raise ValueError(f"td*n = {count} rules for {sym!r} exceeds |Q^{r} x Q| = {pool}")
        for code in rng.sample(range(pool), count):
            rhs = code % n
            code //= n
            lhs = []
            for _ in range(r):
                lhs.append(code % n)
                code //= n
            rules.add((tuple(lhs), sym, rhs))
    finals = rng.sample(range(n), min(n, _ceil(fd * n)))
    return TreeAutomaton(tuple(symbols), tuple(f"q{i}" for i in range(n)), frozenset(rules),
                         frozenset(finals))


def generate_random_aba(n: int, k: int, td: float, fd: float, seed: int,
                        max_conj: int = 2) -> AlternatingBuchiAutomaton:
    """Random ABA: per symbol, round(td*n) transitions ``p -a-> P`` with 1 <= |P| <= max_conj."""
    _check_densities(n, td, fd)
    rng = random.Random(seed)
    alphabet = symbol_names(k)
    delta: dict = {}
    for a in alphabet:
        for _ in range(_round_half_up(td * n)):
            p = rng.randrange(n)
            succ = frozenset(rng.sample(range(n), rng.randint(1, min(max_conj, n))))
            delta.setdefault((p, a), set()).add(succ)
    acc = rng.sample(range(n), min(n, _ceil(fd * n)))
    return AlternatingBuchiAutomaton(alphabet, tuple(f"s{i}" for i in range(n)), 0,
                                     {key: frozenset(v) for key, v in delta.items()}, frozenset(acc))


# ---------------------------------------------------------------------------
# text formats

_COMMENT = re.compile(r"#.*")


def _strip(line: str) -> str:
    return _COMMENT.sub("", line).strip()


def _sections(text: str, names: Sequence[str]) -> dict:
    """Split ``name:`` sectioned text.  Values are lists of (line_no, content)."""
    out: dict = {}
    current = None
    header = re.compile(r"^(%s)\s*:(.*)$" % "|".join(map(re.escape, names)))
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        m = header.match(line)
        if m:
            current = m.group(1)
            if current in out:
                raise ParseError(f"section {current!r} repeated", no)
            out[current] = []
            rest = m.group(2).strip()
            if rest:
                out[current].append((no, rest))
            continue
        if current is None:
            raise ParseError(f"text outside of a section: {line!r}", no)
        out[current].append((no, line))
    return out


def _words(entries) -> list:
    return [w for _, content in entries for w in content.split()]


def _first_line(entries, default=None):
    return entries[0][0] if entries else default


def parse_fa(text: str) -> Nfa:
    """Parse the sectioned FA format (``alphabet: states: initial: final: trans:``)."""
    sec = _sections(text, ["alphabet", "states", "initial", "final", "trans"])
    for req in ("alphabet", "states", "initial", "final"):
        if req not in sec:
            raise ParseError(f"missing section {req!r}")
    alphabet = _words(sec["alphabet"])
    states = _words(sec["states"])
    if len(set(states)) != len(states):
        raise ParseError("duplicate state", _first_line(sec["states"]))
    idx = {s: i for i, s in enumerate(states)}
    alph = set(alphabet)

    def lookup(name, no):
        if name not in idx:
            raise ParseError(f"undeclared state {name!r}", no)
        return idx[name]

    initial = {lookup(w, no) for no, c in sec["initial"] for w in c.split()}
    final = {lookup(w, no) for no, c in sec["final"] for w in c.split()}
    trans = set()
    for no, content in sec.get("trans", []):
        parts = content.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'src sym dst', got {content!r}", no)
        s, a, t = parts
        if a not in alph:
            raise ParseError(f"undeclared symbol {a!r}", no)
        trans.add((lookup(s, no), a, lookup(t, no)))
    return Nfa(tuple(alphabet), tuple(states), frozenset(trans), frozenset(initial), frozenset(final))


def serialize_fa(a: Nfa) -> str:
    lines = [
        "alphabet: " + " ".join(a.alphabet),
        "states: " + " ".join(a.states),
        "initial: " + " ".join(a.states[q] for q in sorted(a.initial)),
        "final: " + " ".join(a.states[q] for q in sorted(a.final)),
        "trans:",
    ]
    for s, x, t in sorted(a.transitions, key=lambda tr: (tr[0], a.alphabet.index(tr[1]), tr[2])):
        lines.append(f"{a.states[s]} {x} {a.states[t]}")
    return "\n".join(lines) + "\n"


def parse_aba(text: str) -> AlternatingBuchiAutomaton:
    """Parse the ABA format: one ``src sym -> q1 q2 ...`` conjunct set per line."""
    sec = _sections(text, ["alphabet", "states", "initial", "accepting", "trans"])
    for req in ("alphabet", "states", "initial", "accepting"):
        if req not in sec:
            raise ParseError(f"missing section {req!r}")
    alphabet = _words(sec["alphabet"])
    states = _words(sec["states"])
    if len(set(states)) != len(states):
        raise ParseError("duplicate state", _first_line(sec["states"]))
    idx = {s: i for i, s in enumerate(states)}

    def lookup(name, no):
        if name not in idx:
            raise ParseError(f"undeclared state {name!r}", no)
        return idx[name]

    init = _words(sec["initial"])
    if len(init) != 1:
        raise ParseError("exactly one initial state expected", _first_line(sec["initial"]))
    initial = lookup(init[0], _first_line(sec["initial"]))
    accepting = {lookup(w, no) for no, c in sec["accepting"] for w in c.split()}
    delta: dict = {}
    for no, content in sec.get("trans", []):
        left, arrow, right = content.partition("->")
        head = left.split()
        if not arrow or len(head) != 2:
            raise ParseError(f"expected 'src sym -> q1 q2 ...', got {content!r}", no)
        src, sym = head
        if sym not in alphabet:
            raise ParseError(f"undeclared symbol {sym!r}", no)
        succ = frozenset(lookup(w, no) for w in right.split())
        delta.setdefault((lookup(src, no), sym), set()).add(succ)
    return AlternatingBuchiAutomaton(tuple(alphabet), tuple(states), initial,
                                     {k: frozenset(v) for k, v in delta.items()},
                                     frozenset(accepting))


def serialize_aba(a: AlternatingBuchiAutomaton) -> str:
    lines = [
        "alphabet: " + " ".join(a.alphabet),
        "states: " + " ".join(a.states),
        "initial: " + a.states[a.initial],
        "accepting: " + " ".join(a.states[q] for q in sorted(a.accepting)),
        "trans:",
    ]
    for q, x, p in a.transitions():
        rhs = " ".join(a.states[s] for s in p)
        lines.append(f"{a.states[q]} {x} -> {rhs}".rstrip())
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"->|[(),]|(?:(?!->)[^\s(),])+")


def _timbuk_tokens(text: str):
    toks = []
    for no, raw in enumerate(text.splitlines(), 1):
        for m in _TOKEN.finditer(_strip(raw)):
            toks.append((m.group(0), no))
    return toks


def parse_timbuk(text: str) -> TreeAutomaton:
    """Parse a bottom-up tree automaton in Timbuk syntax."""
    toks = _timbuk_tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, toks[-1][1] if toks else 1)

    def take(expected=None):
        nonlocal pos
        tok, no = peek()
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {expected or 'a token'}", no)
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r}", no)
        pos += 1
        return tok, no

    take("Ops")
    symbols = []
    while peek()[0] not in (None, "Automaton"):
        tok, no = take()
        name, colon, k = tok.rpartition(":")
        if not colon or not name or not k.isdigit():
            raise ParseError(f"bad symbol declaration {tok!r}", no)
        if any(name == s for s, _ in symbols):
            raise ParseError(f"symbol {name!r} declared twice", no)
        symbols.append((name, int(k)))
    take("Automaton")
    name, _ = take()
    take("States")
    states = []
    while peek()[0] not in (None, "Final"):
        tok, no = take()
        st = tok.split(":")[0]
        if st in states:
            raise ParseError(f"state {st!r} declared twice", no)
        states.append(st)
    take("Final")
    take("States")
    idx = {s: i for i, s in enumerate(states)}
    arity = dict(symbols)

    def lookup(tok, no):
        st = tok.split(":")[0]
        if st not in idx:
            raise ParseError(f"undeclared state {st!r}", no)
        return idx[st]

    final = set()
    while peek()[0] not in (None, "Transitions"):
        tok, no = take()
        final.add(lookup(tok, no))
    take("Transitions")
    rules = set()
    while peek()[0] is not None:
        sym, no = take()
        if sym not in arity:
            raise ParseError(f"undeclared symbol {sym!r}", no)
        lhs = []
        if peek()[0] == "(":
            take("(")
            if peek()[0] != ")":
                while True:
                    tok, tno = take()
                    lhs.append(lookup(tok, tno))
                    if peek()[0] == ",":
                        take(",")
                        continue
                    break
            take(")")
        take("->")
        tok, tno = take()
        rhs = lookup(tok, tno)
        if len(lhs) != arity[sym]:
            raise ParseError(f"symbol {sym!r} has arity {arity[sym]} but rule has {len(lhs)} children", no)
        rules.add((tuple(lhs), sym, rhs))
    return TreeAutomaton(tuple(symbols), tuple(states), frozenset(rules), frozenset(final), name)


def serialize_timbuk(ta: TreeAutomaton) -> str:
    order = {s: i for i, (s, _) in enumerate(ta.symbols)}
    lines = [
        "Ops " + " ".join(f"{s}:{k}" for s, k in ta.symbols),
        "",
        f"Automaton {ta.name}",
        "States " + " ".join(ta.states),
        "Final States " + " ".join(ta.states[q] for q in sorted(ta.final)),
        "Transitions",
    ]
    for lhs, a, q in sorted(ta.rules, key=lambda r: (order[r[1]], r[0], r[2])):
        args = ",".join(ta.states[x] for x in lhs)
        lines.append(f"{a}({args}) -> {ta.states[q]}")
    return "\n".join(lines) + "\n"


def all_words(alphabet: Sequence[str], max_len: int):
    """All words up to ``max_len`` in length-lexicographic order."""
    for n in range(max_len + 1):
        yield from product(alphabet, repeat=n)
