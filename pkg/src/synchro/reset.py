"""Reset words: exact subset BFS, pair merging and greedy compression."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import LAMBDA, Automaton, Budget, default_budget, popcount
from .errors import InputError, NotSynchronizingError


def _trace_back(parent: dict, node, start) -> tuple:
    letters = []
    while node != start:
        node, x = parent[node]
        letters.append(x)
    letters.reverse()
    return tuple(letters)


def _forward_bfs(a: Automaton, start: int, done, budget: Budget):
    """Shortest word ``w`` with ``done(image(start, w))``; None if unreachable.

    Letters are expanded in ascending order and the first hit wins, so the
    result is the shortlex-least among shortest words.
    """
    if done(start):
        return LAMBDA
    parent = {start: None}
    queue = deque([start])
    budget.charge()
    while queue:
        cur = queue.popleft()
        for x in range(a.sigma):
            nxt = a.image_letter(cur, x)
            if nxt in parent:
                continue
            parent[nxt] = (cur, x)
            budget.charge()
            if done(nxt):
                return _trace_back(parent, nxt, start)
            queue.append(nxt)
    return None


def shortest_reset_word(a: Automaton, budget: Budget | None = None):
    """A shortest synchronizing word of ``a``, or None if there is none.

    Exact power-set BFS from ``Q``; raises :class:`BudgetExceeded` once more
    than ``budget.nodes`` distinct sets have been visited.
    """
    if not a.is_synchronizing():
        return None
    return _forward_bfs(a, a.all_states.mask, lambda m: popcount(m) == 1,
                        default_budget(budget))


def pair_merge_word(a: Automaton, p: int, q: int):
    """Shortest ``w`` with δ(p, w) = δ(q, w), by BFS over state pairs."""
    a._check_state(p)
    a._check_state(q)
    if p == q:
        return LAMBDA
    start = (min(p, q), max(p, q))
    parent = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        r, s = cur
        for x in range(a.sigma):
            r2, s2 = a.delta[r][x], a.delta[s][x]
            if r2 == s2:
                parent[(r2, r2)] = (cur, x)
                return _trace_back(parent, (r2, r2), start)
            nxt = (min(r2, s2), max(r2, s2))
            if nxt not in parent:
                parent[nxt] = (cur, x)
                queue.append(nxt)
    return None


@dataclass(frozen=True)
class CompressTrace:
    """Words ``v1..vm`` with ``|Q| > |Q.v1| > |Q.v1v2| > ... = 1``."""

    words: tuple
    cardinalities: tuple

    @property
    def word(self) -> tuple:
        return tuple(x for w in self.words for x in w)

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def length(self) -> int:
        return max((len(w) for w in self.words), default=0)


def greedy_compress(a: Automaton, budget: Budget | None = None) -> CompressTrace:
    """Repeatedly append a shortest word that shrinks the current image."""
    if not a.is_synchronizing():
        raise NotSynchronizingError("automaton is not synchronizing")
    budget = default_budget(budget)
    current = a.all_states.mask
    words = []
    cards = [a.n]
    while popcount(current) > 1:
        size = popcount(current)
        step = _forward_bfs(a, current, lambda m, size=size: popcount(m) < size, budget)
        if step is None:  # pragma: no cover - excluded by is_synchronizing
            raise NotSynchronizingError("no compressing word for current image")
        current = a.image_mask(current, step)
        words.append(step)
        cards.append(popcount(current))
    trace = CompressTrace(tuple(words), tuple(cards))
    bound = a.n * a.n * (a.n - 1) // 2
    assert len(trace.word) <= bound, (len(trace.word), bound)
    return trace


def is_reset_word(a: Automaton, w) -> bool:
    a._check_word(w)
    return popcount(a.image_mask(a.all_states.mask, w)) == 1


def reset_state(a: Automaton, w) -> int:
    """The state every state reaches under the synchronizing word ``w``."""
    if not is_reset_word(a, w):
        raise InputError("word does not synchronize the automaton")
    return a.image_mask(a.all_states.mask, w).bit_length() - 1
