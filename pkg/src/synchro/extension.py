"""Extension words, the Expansion Algorithm and extension radius.

An extension word for ``S`` inside ``C_e`` is a word ``u`` whose preimage
``S.u⁻¹`` meets ``C_e`` in strictly more states than ``S`` does.  Searches
run backwards: from a set ``T = S.u⁻¹`` the letter ``x`` yields
``T.x⁻¹ = S.(xu)⁻¹``, so words grow by prepending.
"""

from __future__ import annotations

import math
import os
import random
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .core import LAMBDA, Automaton, Budget, StateSet, default_budget, popcount
from .errors import BudgetExceeded, ExtensionFailure, InputError

DEFAULT_MAX_STATES = int(os.environ.get("SYNCHRO_MAX_STATES", 18))


def _extension_bfs(a: Automaton, s: int, ce: int, budget: Budget, max_length=None,
                   at_least=None):
    """Shortest ``u`` with ``|s.u⁻¹ ∩ ce| > |s ∩ ce|`` as ``(word, set)``, or None.

    ``at_least`` replaces the target with ``|s.u⁻¹ ∩ ce| >= at_least``.
    """
    need = popcount(s & ce) if at_least is None else at_least - 1
    if at_least is not None and popcount(s & ce) > need:
        return LAMBDA, s
    parent = {s: None}
    frontier = [s]
    depth = 0
    budget.charge()
    while frontier and (max_length is None or depth < max_length):
        depth += 1
        nxt_frontier = []
        for cur in frontier:
            for x in range(a.sigma):
                nxt = a.preimage_letter(cur, x)
                if nxt in parent:
                    continue
                parent[nxt] = (cur, x)
                budget.charge()
                if popcount(nxt & ce) > need:
                    letters = []
                    node = nxt
                    while node != s:
                        node, y = parent[node]
                        letters.append(y)
                    return tuple(letters), nxt
                nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return None


def _masks(a: Automaton, *sets: StateSet):
    return [a._check_set(s) for s in sets]


def shortest_extension_word(a: Automaton, s: StateSet, c_e: StateSet,
                            budget: Budget | None = None, max_length=None):
    """A shortest word extending ``s`` inside ``c_e``, or None.

    Ties are broken by ascending letter order during the backward BFS, so the
    answer is deterministic.  ``max_length`` restricts the search depth.
    """
    sm, cm = _masks(a, s, c_e)
    if sm & cm == cm:
        raise InputError("s already contains c_e; nothing to extend")
    found = _extension_bfs(a, sm, cm, default_budget(budget), max_length)
    return None if found is None else found[0]


def shortest_growth_word(a: Automaton, s: StateSet, target: StateSet, at_least: int,
                         budget: Budget | None = None, max_length=None):
    """A shortest ``v`` with ``|s.v⁻¹ ∩ target| >= at_least``, or None."""
    sm, tm = _masks(a, s, target)
    found = _extension_bfs(a, sm, tm, default_budget(budget), max_length, at_least)
    return None if found is None else found[0]


def is_extendable(a: Automaton, s: StateSet, c_e: StateSet, m: int,
                  budget: Budget | None = None) -> bool:
    """True iff some word of length at most ``m`` extends ``s`` in ``c_e``."""
    sm, cm = _masks(a, s, c_e)
    if sm & cm == cm:
        return False
    return _extension_bfs(a, sm, cm, default_budget(budget), m) is not None


# -- Expansion Algorithm ---------------------------------------------------


@dataclass(frozen=True)
class EAInput:
    c_s: StateSet
    c_e: StateSet
    v_s: tuple
    v_e: tuple


@dataclass(frozen=True)
class EAStep:
    before: StateSet
    word: tuple
    after: StateSet


@dataclass(frozen=True)
class EATrace:
    input: EAInput
    steps: tuple
    word: tuple

    @property
    def max_step_length(self) -> int:
        return max((len(st.word) for st in self.steps), default=0)


def check_ea_input(a: Automaton, inp: EAInput) -> None:
    cs, ce = _masks(a, inp.c_s, inp.c_e)
    a._check_word(inp.v_s)
    a._check_word(inp.v_e)
    if a.image_mask(a.all_states.mask, inp.v_e) != ce:
        raise InputError("Q.v_e must equal C_e")
    if cs & ~ce:
        raise InputError("C_s must be a subset of C_e")
    if popcount(a.image_mask(cs, inp.v_s)) != 1:
        raise InputError("|C_s.v_s| must be 1")


def run_ea(a: Automaton, inp: EAInput, budget: Budget | None = None,
           max_step_length=None, on_missing=None) -> EATrace:
    """Grow ``S = C_s`` through shortest extension words until it covers ``C_e``.

    The returned word is ``v_e · u_k ··· u_1 · v_s``.  ``max_step_length``
    caps each step's search; ``on_missing(stuck_set)`` builds the exception
    raised when a step finds nothing (defaults to :class:`ExtensionFailure`).
    """
    check_ea_input(a, inp)
    budget = default_budget(budget)
    ce = inp.c_e.mask
    s = inp.c_s.mask
    v = tuple(inp.v_s)
    steps = []
    while popcount(s & ce) < popcount(ce):
        found = _extension_bfs(a, s, ce, budget, max_step_length)
        if found is None:
            stuck = StateSet(a.n, s)
            if on_missing is not None:
                raise on_missing(stuck)
            raise ExtensionFailure(stuck, a.is_synchronizing(), a.is_strongly_connected())
        u, after = found
        steps.append(EAStep(StateSet(a.n, s), u, StateSet(a.n, after)))
        v = u + v
        s = after
    return EATrace(inp, tuple(steps), tuple(inp.v_e) + v)


# -- extension radius --------------------------------------------------------


@dataclass(frozen=True)
class RadiusResult:
    """Largest shortest-extension-word length over the candidate subsets.

    ``exhaustive`` is False for sampling runs, whose radius is only a lower
    bound.
    """

    radius: int
    witness: StateSet
    witness_word: tuple
    exhaustive: bool
    subsets_checked: int
    distribution: dict = field(default_factory=dict)


def _gray_subsets(n: int):
    for i in range(1, 1 << n):
        yield i ^ (i >> 1)


def _lex_key(mask: int):
    return [q for q in range(mask.bit_length()) if mask >> q & 1]


def _scan(a: Automaton, ce: int, masks, node_budget):
    best = None
    dist: dict = {}
    checked = 0
    budget = Budget(node_budget)
    for s in masks:
        inter = popcount(s & ce)
        if inter == 0 or s & ce == ce:
            continue
        checked += 1
        found = _extension_bfs(a, s, ce, budget)
        if found is None:
            raise ExtensionFailure(StateSet(a.n, s), a.is_synchronizing(),
                                   a.is_strongly_connected())
        length = len(found[0])
        dist[length] = dist.get(length, 0) + 1
        if (best is None or length > best[0]
                or (length == best[0] and _lex_key(s) < _lex_key(best[1]))):
            best = (length, s, found[0])
    return best, dist, checked


def _scan_chunk(args):
    a, ce, lo, hi, node_budget = args
    return _scan(a, ce, (i ^ (i >> 1) for i in range(lo, hi)), node_budget)


def _merge(results):
    best, dist, checked = None, {}, 0
    for b, d, c in results:
        checked += c
        for k, v in d.items():
            dist[k] = dist.get(k, 0) + v
        if b is not None and (best is None or b[0] > best[0]
                              or (b[0] == best[0] and _lex_key(b[1]) < _lex_key(best[1]))):
            best = b
    return best, dist, checked


def extension_radius(a: Automaton, c_e: StateSet | None = None, *,
                     max_states: int = DEFAULT_MAX_STATES,
                     node_budget: int | None = None,
                     sample: int | None = None, seed: int = 0,
                     workers: int = 1) -> RadiusResult:
    """Max over ``S`` with ``∅ ≠ S ∩ c_e ⊊ c_e`` of the shortest extension length.

    Exhaustive mode walks all subsets in Gray-code order and needs
    ``n <= max_states``.  With ``sample`` set, that many random subsets are
    drawn instead and the result is only a lower bound.  Ties for the
    witness go to the lexicographically least sorted state list.
    """
    if c_e is None:
        c_e = a.all_states
    ce = a._check_set(c_e)
    if popcount(ce) < 2:
        raise InputError("c_e needs at least two states to have proper subsets")
    if sample is not None:
        rng = random.Random(seed)
        masks = []
        while len(masks) < sample:
            s = rng.getrandbits(a.n)
            if s & ce and s & ce != ce:
                masks.append(s)
        results = [_scan(a, ce, masks, node_budget)]
        exhaustive = False
    else:
        if a.n > max_states:
            raise BudgetExceeded(
                f"exhaustive radius needs n <= {max_states} (n = {a.n}); "
                "use sampling mode for a lower bound")
        total = 1 << a.n
        if workers > 1 and total >= 1 << 10:
            step = math.ceil(total / workers)
            chunks = [(a, ce, lo, min(lo + step, total), node_budget)
                      for lo in range(1, total, step)]
            with ProcessPoolExecutor(workers) as pool:
                results = list(pool.map(_scan_chunk, chunks))
        else:
            results = [_scan(a, ce, _gray_subsets(a.n), node_budget)]
        exhaustive = True
    best, dist, checked = _merge(results)
    return RadiusResult(best[0], StateSet(a.n, best[1]), best[2], exhaustive,
                        checked, dict(sorted(dist.items())))


# -- local extension ---------------------------------------------------------


@dataclass(frozen=True)
class LocalExtensionReport:
    k: Fraction
    side_conditions: dict
    subsets_checked: int
    failing_subsets: tuple
    sync_bound: Fraction

    @property
    def subsets_extendable(self) -> bool:
        return not self.failing_subsets

    @property
    def passed(self) -> bool:
        return all(self.side_conditions.values()) and self.subsets_extendable


def check_local_extension(a: Automaton, inp: EAInput, k,
                          budget: Budget | None = None,
                          max_states: int = DEFAULT_MAX_STATES) -> LocalExtensionReport:
    """Check every condition of the kn-local-extension property for ``inp``.

    Side conditions are reported individually and never abort the run.
    Extendability is checked over every nonempty proper subset of ``C_e``
    with words of length at most ``floor(k*n)``.
    """
    k = Fraction(k)
    n = a.n
    cs, ce = _masks(a, inp.c_s, inp.c_e)
    a._check_word(inp.v_s)
    a._check_word(inp.v_e)
    size_s, size_e = popcount(cs), popcount(ce)
    side = {
        "C_s.v_s singleton": popcount(a.image_mask(cs, inp.v_s)) == 1,
        "C_s subset of C_e": cs & ~ce == 0,
        "|v_s| <= k + kn(|C_s|-2)": len(inp.v_s) <= k + k * n * (size_s - 2),
        "C_e.v_e^-1 = Q": a.preimage_mask(ce, inp.v_e) == a.all_states.mask,
        "|v_e| <= kn(n-|C_e|)": len(inp.v_e) <= k * n * (n - size_e),
    }
    if size_e > max_states:
        raise BudgetExceeded(f"exhaustive subset check needs |C_e| <= {max_states}")
    budget = default_budget(budget)
    limit = math.floor(k * n)
    members = list(inp.c_e)
    failing = []
    checked = 0
    for bits in range(1, (1 << size_e) - 1):
        s = 0
        for i, q in enumerate(members):
            if bits >> i & 1:
                s |= 1 << q
        checked += 1
        if _extension_bfs(a, s, ce, budget, limit) is None:
            failing.append(StateSet(n, s))
    return LocalExtensionReport(k, side, checked, tuple(failing), k * (n - 1) ** 2)


def ea_input(a: Automaton, c_s, c_e, v_s, v_e) -> EAInput:
    """Convenience constructor from state iterables and letter sequences."""
    return EAInput(a.states(c_s), a.states(c_e), tuple(v_s), tuple(v_e))


__all__ = [
    "EAInput", "EAStep", "EATrace", "LocalExtensionReport", "RadiusResult",
    "check_ea_input", "check_local_extension", "ea_input", "extension_radius",
    "is_extendable", "run_ea", "shortest_extension_word", "shortest_growth_word",
]
