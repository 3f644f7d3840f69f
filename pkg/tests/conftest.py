import random
from pathlib import Path

import numpy as np
import pytest

from artifact.core import StateRelation, parse_aba, parse_fa

DATA = Path(__file__).resolve().parent.parent / "data"


def load_fa(name):
    return parse_fa((DATA / name).read_text())


def load_aba(name):
    return parse_aba((DATA / name).read_text())


@pytest.fixture
def universal4():
    return load_fa("universal4.fa")


@pytest.fixture
def incl_pair():
    return load_fa("incl_a.fa"), load_fa("incl_b.fa")


@pytest.fixture
def aba7():
    return load_aba("aba7.aba")


@pytest.fixture
def aba_ambiguous():
    return load_aba("aba_ambiguous.aba")


def random_preorder(carrier, seed, density=0.35):
    """Reflexive-transitive closure of a random relation."""
    n = len(carrier)
    rng = np.random.default_rng(seed)
    m = np.eye(n, dtype=bool) | (rng.random((n, n)) < density)
    while True:
        nxt = m | ((m.astype(np.int64) @ m.astype(np.int64)) > 0)
        if np.array_equal(nxt, m):
            return StateRelation(carrier, m)
        m = nxt


def random_lts(seed, max_states=8, max_symbols=2):
    from artifact.core import Lts

    rng = random.Random(seed)
    n = rng.randint(1, max_states)
    alphabet = tuple("abc"[: rng.randint(1, max_symbols)])
    trans = {(rng.randrange(n), rng.choice(alphabet), rng.randrange(n))
             for _ in range(rng.randint(0, 3 * n))}
    return Lts(tuple(f"x{i}" for i in range(n)), alphabet, frozenset(trans))
