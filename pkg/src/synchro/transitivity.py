"""Independent and balanced word collections.

A collection ``W = (w_1..w_n)`` is independent when every ordered pair of
states ``(s, t)`` has some ``w_i`` with ``s.w_i = t``.  For such a collection
and any set ``S`` the preimage characteristic vectors sum to ``|S|`` in every
coordinate; :func:`balanced_witness_from_independent` computes that sum so the
identity can be checked rather than assumed.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .core import LAMBDA, Automaton, Budget, StateSet, default_budget, iter_bits, popcount
from .errors import BoundAnomaly, InputError
from .extension import EAInput, run_ea
from .reset import is_reset_word, reset_state


@dataclass(frozen=True)
class WordCollection:
    words: tuple

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(tuple(w) for w in self.words))
        if not self.words:
            raise InputError("a word collection needs at least one word")

    def __iter__(self):
        return iter(self.words)

    def __len__(self):
        return len(self.words)

    def __getitem__(self, i):
        return self.words[i]

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def length(self) -> int:
        return max(len(w) for w in self.words)


class MultiplicityVector(tuple):
    """Per-state non-negative counts."""

    def is_constant(self, value=None) -> bool:
        if not self:
            return True
        first = self[0] if value is None else value
        return all(c == first for c in self)


def _collection(a: Automaton, w) -> WordCollection:
    w = w if isinstance(w, WordCollection) else WordCollection(w)
    for word in w:
        a._check_word(word)
    return w


def is_independent(a: Automaton, w) -> bool:
    w = _collection(a, w)
    if w.size != a.n:
        raise InputError(f"an independent collection has exactly n = {a.n} words")
    full = a.all_states.mask
    maps = [a.transformation(word) for word in w]
    for s in range(a.n):
        hit = 0
        for t in maps:
            hit |= 1 << t[s]
        if hit != full:
            return False
    return True


def covers_all_pairs(a: Automaton, w) -> bool:
    """Independence without the size-n requirement; not used in verdicts."""
    w = _collection(a, w)
    full = a.all_states.mask
    maps = [a.transformation(word) for word in w]
    return all(
        _or_bits(1 << t[s] for t in maps) == full for s in range(a.n)
    )


def _or_bits(masks) -> int:
    out = 0
    for m in masks:
        out |= m
    return out


def _state_paths(a: Automaton, p: int) -> list:
    """Shortest words leading from ``p`` to each state (ascending letters)."""
    paths = [None] * a.n
    paths[p] = LAMBDA
    queue = deque([p])
    while queue:
        q = queue.popleft()
        for x in range(a.sigma):
            t = a.delta[q][x]
            if paths[t] is None:
                paths[t] = paths[q] + (x,)
                queue.append(t)
    return paths


def independent_from_synch(a: Automaton, u) -> WordCollection:
    """``w_i = u z_i`` where ``z_i`` is a shortest path from the reset state to ``i``."""
    u = tuple(u)
    a._check_word(u)
    if not is_reset_word(a, u):
        raise InputError("u is not a synchronizing word")
    if not a.is_strongly_connected():
        raise InputError("automaton is not strongly connected")
    paths = _state_paths(a, reset_state(a, u))
    return WordCollection(tuple(u + z for z in paths))


def preimage_vector(a: Automaton, s: StateSet, words) -> MultiplicityVector:
    """Sum over ``words`` of the characteristic vectors of ``s.w⁻¹``."""
    mask = a._check_set(s)
    counts = [0] * a.n
    for w in words:
        a._check_word(w)
        for q in iter_bits(a.preimage_mask(mask, w)):
            counts[q] += 1
    return MultiplicityVector(counts)


def _balance_frame(a: Automaton, s: StateSet, within):
    mask = a._check_set(s)
    frame = a.all_states.mask if within is None else a._check_set(within)
    if mask & ~frame:
        raise InputError("s must lie inside the balancing frame")
    if mask == 0 or mask == frame:
        raise InputError("balance is defined for nonempty proper subsets")
    return mask, frame


def is_balanced(a: Automaton, s: StateSet, v, within: StateSet | None = None) -> bool:
    """Whether every coordinate ``c`` of the preimage sum satisfies ``c*n == m*|s|``.

    With ``within`` set, only the coordinates in that set are counted and
    ``n`` becomes its size (the local form of balance).
    """
    mask, frame = _balance_frame(a, s, within)
    v = _collection(a, v)
    width = popcount(frame)
    target = v.size * popcount(mask)
    if target % width:
        return False
    vec = preimage_vector(a, s, v)
    return all(vec[q] == target // width for q in iter_bits(frame))


def balanced_witness_from_independent(a: Automaton, s: StateSet, w) -> MultiplicityVector:
    if not is_independent(a, w):
        raise InputError("collection is not independent")
    return preimage_vector(a, s, w)


def search_balanced_collection(a: Automaton, s: StateSet, max_len: int, max_size: int,
                               budget: Budget | None = None,
                               within: StateSet | None = None):
    """A balanced collection for ``s`` with words of length <= ``max_len``.

    Words are deduplicated by the preimage they induce on ``s`` (restricted
    to ``within`` when given), keeping the first shortest one found;
    collections may repeat words.  Returns None when nothing is found within
    the bounds, which says nothing about larger bounds.
    """
    mask, frame = _balance_frame(a, s, within)
    budget = default_budget(budget)
    seen = {mask}
    reps: dict = {mask & frame: LAMBDA}
    frontier = [(mask, LAMBDA)]
    for _ in range(max_len):
        nxt = []
        for cur, word in frontier:
            for x in range(a.sigma):
                pre = a.preimage_letter(cur, x)
                budget.charge()
                if pre not in seen:
                    seen.add(pre)
                    reps.setdefault(pre & frame, (x,) + word)
                    nxt.append((pre, (x,) + word))
        frontier = nxt
    vectors = list(reps)
    width = popcount(frame)
    size_s = popcount(mask)
    for m in range(1, max_size + 1):
        if (m * size_s) % width:
            continue
        picked = _pick_balanced(vectors, list(iter_bits(frame)), m,
                                m * size_s // width, budget)
        if picked is not None:
            return WordCollection(tuple(reps[p] for p in picked))
    return None


def _pick_balanced(vectors, coords, m, target, budget):
    counts = dict.fromkeys(coords, 0)
    chosen: list = []

    def rec(start, left):
        budget.charge()
        if left == 0:
            return all(c == target for c in counts.values())
        for c in counts.values():
            if target - c > left:
                return False
        for i in range(start, len(vectors)):
            vec = vectors[i]
            if any(counts[q] >= target for q in iter_bits(vec)):
                continue
            for q in iter_bits(vec):
                counts[q] += 1
            chosen.append(vec)
            if rec(i, left - 1):
                return True
            chosen.pop()
            for q in iter_bits(vec):
                counts[q] -= 1
        return False

    return list(chosen) if rec(0, m) else None


# -- minimum independent length ----------------------------------------------


def transformation_levels(a: Automaton, max_len: int, budget: Budget | None = None):
    """Shortest representative of each transformation, grouped by word length."""
    budget = default_budget(budget)
    identity = tuple(range(a.n))
    seen = {identity: LAMBDA}
    levels = [[identity]]
    frontier = [identity]
    for _ in range(max_len):
        nxt = []
        for t in frontier:
            word = seen[t]
            for x in range(a.sigma):
                col = a.letter_maps[x]
                t2 = tuple(col[q] for q in t)
                if t2 not in seen:
                    budget.charge()
                    seen[t2] = word + (x,)
                    nxt.append(t2)
        levels.append(nxt)
        frontier = nxt
        if not nxt:
            break
    return seen, levels


def _exact_cover(n: int, transformations: list, budget: Budget):
    """Choose n transformations whose values at every state are pairwise distinct.

    Exact cover over the ordered pairs ``(s, t)``: transformation ``f``
    covers ``{(s, f(s))}``.  Algorithm X on dict-of-sets columns, least
    populated column first.
    """
    rows = {i: [(s, f[s]) for s in range(n)] for i, f in enumerate(transformations)}
    cols: dict = {(s, t): set() for s in range(n) for t in range(n)}
    for i, items in rows.items():
        for item in items:
            cols[item].add(i)
    if any(not c for c in cols.values()):
        return None
    solution: list = []

    def select(i):
        removed = []
        for item in rows[i]:
            for j in cols[item]:
                for other in rows[j]:
                    if other != item:
                        cols[other].discard(j)
            removed.append(cols.pop(item))
        return removed

    def deselect(i, removed):
        for item in reversed(rows[i]):
            cols[item] = removed.pop()
            for j in cols[item]:
                for other in rows[j]:
                    if other != item:
                        cols[other].add(j)

    def search():
        if not cols:
            return True
        budget.charge()
        item = min(cols, key=lambda c: len(cols[c]))
        for i in sorted(cols[item]):
            solution.append(i)
            removed = select(i)
            if search():
                return True
            deselect(i, removed)
            solution.pop()
        return False

    return [transformations[i] for i in solution] if search() else None


def min_independent_collection(a: Automaton, max_len: int, budget: Budget | None = None):
    """``(L, W)`` for the least ``L <= max_len`` admitting an independent ``W``."""
    budget = default_budget(budget)
    seen, levels = transformation_levels(a, max_len, budget)
    pool: list = []
    for length, level in enumerate(levels):
        pool.extend(level)
        if length > 0 and not level:
            break
        picked = _exact_cover(a.n, pool, budget)
        if picked is not None:
            words = sorted((seen[f] for f in picked), key=lambda w: (len(w), w))
            return length, WordCollection(tuple(words))
    return None


def min_independent_length(a: Automaton, max_len: int, budget: Budget | None = None):
    found = min_independent_collection(a, max_len, budget)
    return None if found is None else found[0]


# -- synchronization through an independent collection -----------------------


def _starting_pair(a: Automaton):
    """The letter and the largest set it collapses to a single state."""
    best = None
    for x in range(a.sigma):
        for t in range(a.n):
            fiber = a.fibers[x][t]
            if popcount(fiber) >= 2 and (best is None or popcount(fiber) > popcount(best[0])):
                best = (fiber, x)
    return best


def synch_via_independent(a: Automaton, w, budget: Budget | None = None):
    """A reset word of length at most ``(n-2)(n+L_W-1)+1``.

    Runs the Expansion Algorithm from ``C_e = Q`` with every step capped at
    ``n + L_W - 1`` letters.  A step exceeding the cap raises
    :class:`BoundAnomaly`.
    """
    w = _collection(a, w)
    if not is_independent(a, w):
        raise InputError("collection is not independent")
    if a.n == 1:
        return LAMBDA
    start = _starting_pair(a)
    if start is None:
        raise InputError("no letter merges two states; automaton is not synchronizing")
    fiber, x = start
    cap = a.n + w.length - 1
    inp = EAInput(StateSet(a.n, fiber), a.all_states, (x,), LAMBDA)
    trace = run_ea(a, inp, budget, max_step_length=cap,
                   on_missing=lambda stuck: BoundAnomaly(stuck, cap))
    bound = (a.n - 2) * (a.n + w.length - 1) + 1
    if len(trace.word) > bound:  # pragma: no cover - implied by the step cap
        raise BoundAnomaly(a.all_states, bound)
    return trace.word


# -- exact decision of balanced existence --------------------------------------


@dataclass(frozen=True)
class BalancedDecision:
    """Whether some balanced collection with words of length <= ``max_len`` exists.

    ``exists`` is None when neither answer could be certified exactly.  A
    positive answer carries ``multiplicities`` (word -> count); a negative
    one carries a Farkas certificate ``y`` with ``y·[v; 1] >= 0`` for every
    available preimage vector ``v`` and ``y·[c·1; 1] < 0``.
    """

    exists: bool | None
    max_len: int
    multiplicities: dict | None = None
    certificate: tuple | None = None

    def collection(self) -> WordCollection:
        words = []
        for w, c in sorted(self.multiplicities.items(), key=lambda kv: (len(kv[0]), kv[0])):
            words.extend([w] * c)
        return WordCollection(tuple(words))


def _preimage_reps(a: Automaton, mask: int, max_len: int, budget: Budget) -> dict:
    reps = {mask: LAMBDA}
    frontier = [mask]
    for _ in range(max_len):
        nxt = []
        for cur in frontier:
            for x in range(a.sigma):
                pre = a.preimage_letter(cur, x)
                if pre not in reps:
                    budget.charge()
                    reps[pre] = (x,) + reps[cur]
                    nxt.append(pre)
        frontier = nxt
        if not nxt:
            break
    return reps


def _solve_exact(rows: list, rhs: list):
    """A solution of ``rows · x = rhs`` over the rationals (free variables 0)."""
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] != 0 for row in m[r:]):
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][-1]
    return x


def decide_balanced(a: Automaton, s: StateSet, max_len: int,
                    budget: Budget | None = None) -> BalancedDecision:
    """Decide whether ``s`` admits a balanced collection of any size.

    A collection is a non-negative integer combination of the distinct
    preimages ``s.v⁻¹`` with ``|v| <= max_len``; scaling makes this a
    rational feasibility problem.  An LP solver proposes the answer and the
    proposal is then certified in exact arithmetic, so floating point never
    decides the result.
    """
    import numpy as np
    from scipy.optimize import linprog

    mask, frame = _balance_frame(a, s, None)
    budget = default_budget(budget)
    reps = _preimage_reps(a, mask, max_len, budget)
    masks = list(reps)
    n = a.n
    cols = [[(m >> q) & 1 for q in range(n)] + [1] for m in masks]
    level = Fraction(popcount(mask), n)
    rhs = [level] * n + [Fraction(1)]
    A = np.array(cols, dtype=float).T
    b = np.array([float(v) for v in rhs])

    res = linprog(np.zeros(len(masks)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status == 0:
        support = [j for j, v in enumerate(res.x) if v > 1e-9]
        rows = [[Fraction(cols[j][i]) for j in support] for i in range(n + 1)]
        x = _solve_exact(rows, rhs)
        if x is not None and all(v >= 0 for v in x):
            scale = math.lcm(*(v.denominator for v in x))
            counts = {reps[masks[j]]: int(v * scale) for j, v in zip(support, x) if v}
            vec = [0] * n
            for w, c in counts.items():
                for q in iter_bits(a.preimage_mask(mask, w)):
                    vec[q] += c
            total = sum(counts.values())
            if all(c * n == total * popcount(mask) for c in vec):
                return BalancedDecision(True, max_len, multiplicities=counts)
        return BalancedDecision(None, max_len)

    # Farkas: find y with A^T y >= 0 and b^T y < 0.
    far = linprog(b, A_ub=-A.T, b_ub=np.zeros(len(masks)),
                  bounds=[(-1, 1)] * (n + 1), method="highs")
    if far.status == 0 and far.fun < -1e-9:
        for denom in (10, 100, 1000, 10**6):
            y = [Fraction(v).limit_denominator(denom) for v in far.x]
            if (all(sum(ci * yi for ci, yi in zip(col, y)) >= 0 for col in cols)
                    and sum(ri * yi for ri, yi in zip(rhs, y)) < 0):
                return BalancedDecision(False, max_len, certificate=tuple(y))
    return BalancedDecision(None, max_len)


__all__ = [
    "MultiplicityVector", "WordCollection", "balanced_witness_from_independent",
    "covers_all_pairs", "independent_from_synch", "is_balanced", "is_independent",
    "min_independent_collection", "min_independent_length", "preimage_vector",
    "search_balanced_collection", "synch_via_independent", "transformation_levels",
    "BalancedDecision", "decide_balanced",
]
