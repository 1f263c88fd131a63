import random
from fractions import Fraction
from itertools import combinations

import pytest

from synchro.core import Automaton, Budget, StateSet, parse_word
from synchro.errors import BudgetExceeded, InputError
from synchro.families import carpi_family, cerny, random_automaton
from synchro.reset import greedy_compress, shortest_reset_word
from synchro.transitivity import (
    WordCollection, balanced_witness_from_independent, covers_all_pairs, decide_balanced,
    independent_from_synch, is_balanced, is_independent, min_independent_collection,
    min_independent_length, preimage_vector, search_balanced_collection,
    synch_via_independent,
)

import oracles

CIRCULAR = [parse_word(w) for w in ("λ", "a", "aa", "aaa")]


def pair_check(a, words):
    return all(any(a.apply(s, w) == t for w in words) for s in range(a.n) for t in range(a.n))


def vector_oracle(a, s, words):
    return [sum(1 for w in words if q in oracles.preimage(a, s, w)) for q in range(a.n)]


def random_proper_subsets(rng, n, count):
    return [rng.randrange(1, (1 << n) - 1) for _ in range(count)]


def test_circular_collection_is_independent():
    assert is_independent(cerny(4), CIRCULAR)
    assert not is_independent(cerny(4), [()] * 4)


def test_independence_needs_n_words():
    with pytest.raises(InputError):
        is_independent(cerny(4), CIRCULAR[:3])
    assert covers_all_pairs(cerny(4), CIRCULAR + [parse_word("b")])
    assert not covers_all_pairs(cerny(4), CIRCULAR[:3])


def test_empty_collection_rejected():
    with pytest.raises(InputError):
        WordCollection(())


def test_independence_matches_pair_check():
    rng = random.Random(8)
    for i in range(300):
        a = random_automaton(rng.randint(1, 6), 2, seed=i)
        words = [tuple(rng.randrange(2) for _ in range(rng.randrange(5))) for _ in range(a.n)]
        assert is_independent(a, words) == pair_check(a, words)


def test_independent_from_synch_examples():
    a = cerny(4)
    u = shortest_reset_word(a)
    w = independent_from_synch(a, u)
    assert is_independent(a, w) and w.length <= 9 + 3
    one = Automaton(1, 2, [(0, 0)])
    assert independent_from_synch(one, ()).words == ((),)
    b = carpi_family(3, 1)
    w = independent_from_synch(b, shortest_reset_word(b))
    assert is_independent(b, w) and pair_check(b, w) and w.length <= 11 + 4


def test_independent_from_synch_rejects_bad_input():
    with pytest.raises(InputError):
        independent_from_synch(cerny(4), parse_word("a"))
    not_sc = Automaton(3, 1, [(1,), (1,), (1,)])
    with pytest.raises(InputError):
        independent_from_synch(not_sc, (0,))


def test_preimage_sum_identity_on_corpus(corpus):
    rng = random.Random(31)
    for a in corpus:
        for u in (shortest_reset_word(a), greedy_compress(a).word):
            w = independent_from_synch(a, u)
            assert is_independent(a, w) and pair_check(a, w)
            assert w.length <= len(u) + a.n - 1
            if a.n < 2:
                continue
            for mask in random_proper_subsets(rng, a.n, 20):
                s = StateSet(a.n, mask)
                vec = balanced_witness_from_independent(a, s, w)
                assert vec.is_constant(len(s))
                assert list(vec) == vector_oracle(a, s, w)
                assert is_balanced(a, s, w)


def test_witness_requires_independence():
    with pytest.raises(InputError):
        balanced_witness_from_independent(cerny(4), cerny(4).states([0]), [()] * 4)


def test_witness_for_full_set():
    a = cerny(4)
    assert balanced_witness_from_independent(a, a.all_states, CIRCULAR) == (4, 4, 4, 4)


def test_balanced_examples():
    a = cerny(4)
    assert is_balanced(a, a.states([0]), CIRCULAR)
    assert is_balanced(a, a.states([0, 1]), CIRCULAR)
    assert preimage_vector(a, a.states([0, 2]), CIRCULAR) == (2, 2, 2, 2)
    assert not is_balanced(a, a.states([0]), [()])
    assert not is_balanced(a, a.states([0, 1, 2]), [(), (0,)])  # 2*3 not divisible by 4


def test_balanced_rejects_trivial_sets():
    a = cerny(4)
    for s in (a.all_states, a.states([])):
        with pytest.raises(InputError):
            is_balanced(a, s, CIRCULAR)
        with pytest.raises(InputError):
            search_balanced_collection(a, s, 3, 4)


def test_balanced_matches_vector_oracle():
    rng = random.Random(9)
    for i in range(300):
        a = random_automaton(rng.randint(2, 6), 2, seed=i)
        s = StateSet(a.n, rng.randrange(1, (1 << a.n) - 1))
        words = [tuple(rng.randrange(2) for _ in range(rng.randrange(4)))
                 for _ in range(rng.randint(1, 6))]
        vec = vector_oracle(a, s, words)
        expected = all(c * a.n == len(words) * len(s) for c in vec)
        assert is_balanced(a, s, words) == expected


def test_search_finds_circular_style_collection():
    a = cerny(4)
    found = search_balanced_collection(a, a.states([0]), 3, 4)
    assert found is not None and found.size <= 4 and found.length <= 3
    assert is_balanced(a, a.states([0]), found)


def test_search_local_reading_on_a21():
    a = carpi_family(2, 1)
    ce = a.states([0, 1, 2])
    for mask in range(1, 7):
        s = a.states(q for q in range(3) if mask >> q & 1)
        found = search_balanced_collection(a, s, 3, 6, within=ce)
        assert found is not None and found.length <= 3
        assert is_balanced(a, s, found, within=ce)


def test_global_balance_fails_for_q2_on_a21():
    a = carpi_family(2, 1)
    s = a.states([2])
    assert search_balanced_collection(a, s, 3, 8) is None
    d = decide_balanced(a, s, 3)
    assert d.exists is False


def test_search_soundness_on_random_instances():
    rng = random.Random(4)
    for i in range(60):
        a = random_automaton(rng.randint(2, 5), 2, i, ("synchronizing", "strongly_connected"))
        s = StateSet(a.n, rng.randrange(1, (1 << a.n) - 1))
        found = search_balanced_collection(a, s, 2 * a.n, 6)
        if found is not None:
            assert is_balanced(a, s, found)
            assert found.length <= 2 * a.n and found.size <= 6


def test_search_budget():
    a = carpi_family(4, 2)
    with pytest.raises(BudgetExceeded):
        search_balanced_collection(a, a.states([0]), 10, 10, Budget(nodes=20))


def brute_min_independent(a, max_len):
    maps = {}
    for w in oracles.words_up_to(a.sigma, max_len):
        maps.setdefault(tuple(a.apply(q, w) for q in range(a.n)), w)
    for combo in combinations(maps, a.n):
        if all(len({f[s] for f in combo}) == a.n for s in range(a.n)):
            return [maps[f] for f in combo]
    return None


def test_min_independent_cerny4():
    length, coll = min_independent_collection(cerny(4), 6)
    assert length <= 3
    assert is_independent(cerny(4), coll) and coll.length == length
    assert brute_min_independent(cerny(4), length - 1) is None


def test_min_independent_single_state():
    assert min_independent_length(Automaton(1, 2, [(0, 0)]), 3) == 0


def test_min_independent_a21():
    a = carpi_family(2, 1)
    length, coll = min_independent_collection(a, 10)
    assert length == 5
    assert is_independent(a, coll) and pair_check(a, coll) and coll.length == 5
    assert brute_min_independent(a, 4) is None
    assert brute_min_independent(a, 5) is not None
    assert min_independent_length(a, 4) is None


def test_min_independent_agrees_with_brute_force():
    rng = random.Random(21)
    for i in range(25):
        a = random_automaton(rng.randint(2, 4), 2, i, ("synchronizing", "strongly_connected"))
        length = min_independent_length(a, 6)
        brute = [L for L in range(7) if brute_min_independent(a, L) is not None]
        assert length == (brute[0] if brute else None)


def test_synch_via_independent_cerny4():
    a = cerny(4)
    w = synch_via_independent(a, CIRCULAR)
    assert len(oracles.image(a, range(4), w)) == 1
    assert len(w) <= 13


def test_synch_via_independent_two_states():
    a = Automaton(2, 2, [(1, 0), (0, 0)])
    w = synch_via_independent(a, [(), (0,)])
    assert len(w) == 1 and len(a.image(a.all_states, w)) == 1


def test_synch_via_independent_a31():
    a = carpi_family(3, 1)
    coll = independent_from_synch(a, shortest_reset_word(a))
    w = synch_via_independent(a, coll)
    assert len(oracles.image(a, range(a.n), w)) == 1
    assert 11 <= len(w) <= (a.n - 2) * (a.n + coll.length - 1) + 1


def test_synch_via_independent_on_corpus(corpus):
    for a in corpus:
        coll = independent_from_synch(a, shortest_reset_word(a))
        w = synch_via_independent(a, coll)
        assert len(a.image(a.all_states, w)) == 1
        assert len(w) <= (a.n - 2) * (a.n + coll.length - 1) + 1


def check_farkas(a, s, max_len, y):
    """Independent certificate check: y·[v;1] >= 0 for all reachable preimages."""
    n = a.n
    for w in oracles.words_up_to(a.sigma, max_len):
        pre = oracles.preimage(a, s, w)
        col = [1 if q in pre else 0 for q in range(n)] + [1]
        assert sum(c * yi for c, yi in zip(col, y)) >= 0
    rhs = [Fraction(len(s), n)] * n + [1]
    assert sum(r * yi for r, yi in zip(rhs, y)) < 0


@pytest.mark.parametrize("m, failing", [(2, 4), (3, 6)])
def test_decide_balanced_k1(m, failing):
    a = carpi_family(m, 1)
    bad = 0
    for mask in range(1, (1 << a.n) - 1):
        s = StateSet(a.n, mask)
        d = decide_balanced(a, s, a.n - 1)
        assert d.exists is not None
        if d.exists:
            coll = d.collection()
            assert is_balanced(a, s, coll) and coll.length <= a.n - 1
            vec = vector_oracle(a, s, coll)
            assert all(c * a.n == coll.size * len(s) for c in vec)
        else:
            bad += 1
            check_farkas(a, s, a.n - 1, d.certificate)
    assert bad == failing


def test_decide_balanced_on_circular():
    a = cerny(4)
    d = decide_balanced(a, a.states([0]), 3)
    assert d.exists and is_balanced(a, a.states([0]), d.collection())
