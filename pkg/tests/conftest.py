import random

import pytest

from synchro.families import random_automaton


def seeded_corpus(count=100, seed=2024, max_n=10):
    """Seeded random strongly connected synchronizing automata, sigma = 2."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(2, max_n)
        out.append(random_automaton(n, 2, rng.getrandbits(32),
                                    ("synchronizing", "strongly_connected")))
    return out


@pytest.fixture(scope="session")
def corpus():
    return seeded_corpus()
