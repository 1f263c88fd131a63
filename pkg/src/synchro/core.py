"""Complete deterministic automata, state sets and words.

State sets are stored as integer bitmasks (bit ``q`` set iff state ``q`` is a
member).  Python integers have no fixed width, so the same code path serves
small and large automata.  Set images and preimages are computed a byte at a
time through per-letter lookup tables, which keeps subset searches cheap.
"""

from __future__ import annotations

import os
import re
import string
import time
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import BudgetExceeded, InputError

Word = tuple  # tuple[int, ...]; the empty tuple is the empty word

LAMBDA: Word = ()

_CHUNK = 8
_LETTERS = string.ascii_lowercase


def popcount(mask: int) -> int:
    return mask.bit_count()


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def letter_name(x: int) -> str:
    return _LETTERS[x] if x < len(_LETTERS) else "{%d}" % x


def format_word(word: Sequence[int]) -> str:
    """Render a word as a letter string; the empty word prints as ``λ``."""
    if not word:
        return "λ"
    return "".join(letter_name(x) for x in word)


_WORD_TOKEN = re.compile(r"([a-z]|\{\d+\})(?:\^(\d+))?")


def parse_word(text: str, sigma: int | None = None) -> Word:
    """Parse ``"baab"``, ``"a^3ba"`` or ``"{27}a"``; ``""``/``λ``/``-`` is empty."""
    text = text.strip()
    if text in ("", "λ", "-", "lambda"):
        return LAMBDA
    out: list[int] = []
    pos = 0
    while pos < len(text):
        m = _WORD_TOKEN.match(text, pos)
        if m is None:
            raise InputError(f"bad word {text!r} at position {pos}")
        tok = m.group(1)
        x = int(tok[1:-1]) if tok.startswith("{") else _LETTERS.index(tok)
        if sigma is not None and x >= sigma:
            raise InputError(f"letter {tok!r} outside alphabet of size {sigma}")
        out.extend([x] * int(m.group(2) or 1))
        pos = m.end()
    return tuple(out)


class Budget:
    """Cooperative node/time budget shared by the bounded searches.

    ``nodes`` caps the number of search nodes charged via :meth:`charge`;
    ``seconds`` is a wall-clock limit.  :meth:`cancel` may be called from
    another thread to stop a running search.
    """

    def __init__(self, nodes: int | None = None, seconds: float | None = None):
        self.nodes = nodes
        self.used = 0
        self.deadline = None if seconds is None else time.monotonic() + seconds
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True

    def charge(self, count: int = 1) -> None:
        self.used += count
        if self.nodes is not None and self.used > self.nodes:
            raise BudgetExceeded(f"node budget of {self.nodes} exceeded", self.used)
        if self.cancelled:
            raise BudgetExceeded("search cancelled", self.used)
        if self.deadline is not None and (self.used & 0x3FF) == 0:
            if time.monotonic() > self.deadline:
                raise BudgetExceeded("time budget exceeded", self.used)


DEFAULT_NODE_BUDGET = int(os.environ.get("SYNCHRO_NODE_BUDGET", 1 << 24))


def default_budget(budget: Budget | None) -> Budget:
    return Budget(DEFAULT_NODE_BUDGET) if budget is None else budget


@dataclass(frozen=True)
class StateSet:
    """An immutable subset of ``range(n)``."""

    n: int
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n:
            raise InputError(f"state set {self.mask:#x} not within {self.n} states")

    @classmethod
    def of(cls, n: int, states: Iterable[int]) -> "StateSet":
        mask = 0
        for q in states:
            if not 0 <= q < n:
                raise InputError(f"state {q} out of range [0, {n})")
            mask |= 1 << q
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> "StateSet":
        return cls(n, (1 << n) - 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __len__(self) -> int:
        return popcount(self.mask)

    def __contains__(self, q: object) -> bool:
        return isinstance(q, int) and 0 <= q < self.n and bool(self.mask >> q & 1)

    def _other(self, other: "StateSet") -> int:
        if other.n != self.n:
            raise InputError("state sets bound to different automata")
        return other.mask

    def __and__(self, other):
        return StateSet(self.n, self.mask & self._other(other))

    def __or__(self, other):
        return StateSet(self.n, self.mask | self._other(other))

    def __sub__(self, other):
        return StateSet(self.n, self.mask & ~self._other(other))

    def __xor__(self, other):
        return StateSet(self.n, self.mask ^ self._other(other))

    def __le__(self, other):
        return self.mask & ~self._other(other) == 0

    def __lt__(self, other):
        return self <= other and self.mask != other.mask

    def __ge__(self, other):
        return other <= self

    def __gt__(self, other):
        return other < self

    def complement(self) -> "StateSet":
        return StateSet(self.n, ((1 << self.n) - 1) & ~self.mask)

    def sorted(self) -> list[int]:
        return list(self)

    def __repr__(self):
        return "{" + ",".join(map(str, self)) + "}"


@dataclass(frozen=True)
class Automaton:
    """A complete DFA ``<Q, Σ, δ>`` with states ``0..n-1``, letters ``0..sigma-1``.

    ``delta[q][x]`` is the successor of state ``q`` under letter ``x``.
    ``names`` optionally labels the states; ``family`` records the generator
    parameters for automata built by :mod:`synchro.families`.
    """

    n: int
    sigma: int
    delta: tuple
    names: tuple | None = None
    family: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.sigma < 1:
            raise InputError("automaton needs at least one state and one letter")
        delta = tuple(tuple(row) for row in self.delta)
        if len(delta) != self.n:
            raise InputError(f"expected {self.n} rows, got {len(delta)}")
        for q, row in enumerate(delta):
            if len(row) != self.sigma:
                raise InputError(f"row {q} has {len(row)} entries, expected {self.sigma}")
            for t in row:
                if not isinstance(t, int) or not 0 <= t < self.n:
                    raise InputError(f"row {q}: target {t!r} out of range [0, {self.n})")
        object.__setattr__(self, "delta", delta)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != self.n or len(set(names)) != self.n:
                raise InputError("state names must be distinct, one per state")
            object.__setattr__(self, "names", names)

    # -- naming -----------------------------------------------------------

    def state_name(self, q: int) -> str:
        return self.names[q] if self.names else str(q)

    def state_index(self, label: str) -> int:
        if self.names and label in self.names:
            return self.names.index(label)
        try:
            q = int(label)
        except ValueError:
            raise InputError(f"unknown state {label!r}") from None
        self._check_state(q)
        return q

    def set_names(self, s: StateSet) -> list[str]:
        return [self.state_name(q) for q in s]

    # -- construction helpers ------------------------------------------------

    @property
    def all_states(self) -> StateSet:
        return StateSet.full(self.n)

    def states(self, members: Iterable[int]) -> StateSet:
        return StateSet.of(self.n, members)

    def _check_state(self, q: int) -> None:
        if not isinstance(q, int) or not 0 <= q < self.n:
            raise InputError(f"state {q!r} out of range [0, {self.n})")

    def _check_word(self, w: Sequence[int]) -> None:
        for x in w:
            if not isinstance(x, int) or not 0 <= x < self.sigma:
                raise InputError(f"letter {x!r} out of range [0, {self.sigma})")

    def _check_set(self, s: StateSet) -> int:
        if not isinstance(s, StateSet) or s.n != self.n:
            raise InputError("state set is not bound to this automaton")
        return s.mask

    # -- lookup tables -------------------------------------------------------

    @cached_property
    def letter_maps(self) -> tuple:
        """``letter_maps[x][q] = delta[q][x]``."""
        return tuple(tuple(row[x] for row in self.delta) for x in range(self.sigma))

    @cached_property
    def _image_tables(self) -> tuple:
        return self._chunk_tables(lambda x, q: 1 << self.delta[q][x])

    @cached_property
    def _preimage_tables(self) -> tuple:
        fibers = self.fibers
        return self._chunk_tables(lambda x, t: fibers[x][t])

    def _chunk_tables(self, contribution) -> tuple:
        tables = []
        for x in range(self.sigma):
            per_letter = []
            for base in range(0, self.n, _CHUNK):
                width = min(_CHUNK, self.n - base)
                table = [0] * (1 << width)
                for bits in range(1, 1 << width):
                    low = bits & -bits
                    table[bits] = table[bits ^ low] | contribution(x, base + low.bit_length() - 1)
                per_letter.append(table)
            tables.append(tuple(per_letter))
        return tuple(tables)

    @cached_property
    def fibers(self) -> tuple:
        """``fibers[x][t]`` is the bitmask of states sent to ``t`` by letter ``x``."""
        out = [[0] * self.n for _ in range(self.sigma)]
        for q, row in enumerate(self.delta):
            for x, t in enumerate(row):
                out[x][t] |= 1 << q
        return tuple(tuple(r) for r in out)

    # -- raw mask operations (no validation; used by the searches) ----------

    def image_letter(self, mask: int, x: int) -> int:
        out = 0
        for table in self._image_tables[x]:
            if mask & 0xFF:
                out |= table[mask & 0xFF]
            mask >>= _CHUNK
            if not mask:
                break
        return out

    def preimage_letter(self, mask: int, x: int) -> int:
        out = 0
        for table in self._preimage_tables[x]:
            if mask & 0xFF:
                out |= table[mask & 0xFF]
            mask >>= _CHUNK
            if not mask:
                break
        return out

    def image_mask(self, mask: int, w: Sequence[int]) -> int:
        for x in w:
            mask = self.image_letter(mask, x)
        return mask

    def preimage_mask(self, mask: int, w: Sequence[int]) -> int:
        for x in reversed(w):
            mask = self.preimage_letter(mask, x)
        return mask

    # -- public word action ----------------------------------------------------

    def apply(self, q: int, w: Sequence[int]) -> int:
        """δ(q, w): read ``w`` left to right starting in ``q``."""
        self._check_state(q)
        self._check_word(w)
        for x in w:
            q = self.delta[q][x]
        return q

    def image(self, s: StateSet, w: Sequence[int]) -> StateSet:
        mask = self._check_set(s)
        self._check_word(w)
        return StateSet(self.n, self.image_mask(mask, w))

    def preimage(self, s: StateSet, w: Sequence[int]) -> StateSet:
        """``s.w⁻¹``: the states that ``w`` sends into ``s``."""
        mask = self._check_set(s)
        self._check_word(w)
        return StateSet(self.n, self.preimage_mask(mask, w))

    def transformation(self, w: Sequence[int]) -> tuple:
        """The map ``q ↦ δ(q, w)`` as a tuple."""
        self._check_word(w)
        t = tuple(range(self.n))
        for x in w:
            col = self.letter_maps[x]
            t = tuple(col[q] for q in t)
        return t

    # -- structure ---------------------------------------------------------

    def is_synchronizing(self) -> bool:
        """True iff every pair of states can be merged by some word."""
        return len(mergeable_pairs(self)) == self.n * (self.n - 1) // 2

    def is_strongly_connected(self) -> bool:
        succ = [set(row) for row in self.delta]
        pred: list[set] = [set() for _ in range(self.n)]
        for q, row in enumerate(self.delta):
            for t in row:
                pred[t].add(q)
        return _reaches_all(succ, self.n) and _reaches_all(pred, self.n)


def _reaches_all(adj, n) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        for t in adj[stack.pop()]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return len(seen) == n


def mergeable_pairs(a: Automaton) -> set:
    """All pairs ``(p, q)``, ``p < q``, for which some word gives δ(p,w) = δ(q,w).

    Backward BFS on the pair graph from the pairs a single letter merges.
    """
    preds = [[[] for _ in range(a.n)] for _ in range(a.sigma)]
    for q, row in enumerate(a.delta):
        for x, t in enumerate(row):
            preds[x][t].append(q)
    found: set = set()
    queue: deque = deque()

    def push(p, q):
        pair = (p, q) if p < q else (q, p)
        if pair not in found:
            found.add(pair)
            queue.append(pair)

    for x in range(a.sigma):
        for t in range(a.n):
            src = preds[x][t]
            for i, p in enumerate(src):
                for q in src[i + 1:]:
                    push(p, q)
    while queue:
        r, s = queue.popleft()
        for x in range(a.sigma):
            for p in preds[x][r]:
                for q in preds[x][s]:
                    if p != q:
                        push(p, q)
    return found
