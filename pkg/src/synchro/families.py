"""Generators for the Černý series, the two-letter family A(m, k) and random DFAs.

A(m, k) has states ``q0..qm`` (indices ``0..m``) and ``s1..sk`` (indices
``m+1..m+k``).  Letter ``a`` cycles ``q0 -> q1 -> ... -> qm -> q0`` and sends
every ``sj`` to ``q2``; letter ``b`` cycles ``q0 -> s1 -> ... -> sk -> q0``
and fixes ``q1..qm``.  ``C_b = {q0, s1..sk}`` is the set of states moved by b.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import Automaton, Budget, StateSet, format_word
from .errors import BudgetExceeded, InputError
from .extension import (
    DEFAULT_MAX_STATES, extension_radius, shortest_extension_word, shortest_growth_word,
)
from .formats import fingerprint
from .transitivity import decide_balanced, min_independent_collection
from .verdicts import FAILS, HOLDS, INCONCLUSIVE, VerdictReport

A, B = 0, 1


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    params: tuple

    def __str__(self):
        return f"{self.kind}:" + ",".join(map(str, self.params))


def cerny(n: int) -> Automaton:
    """The n-state circular automaton: a is the n-cycle, b merges 0 into 1."""
    if n < 2:
        raise InputError("cerny automaton needs n >= 2")
    delta = [((q + 1) % n, 1 if q == 0 else q) for q in range(n)]
    return Automaton(n, 2, delta, family=FamilySpec("cerny", (n,)))


def carpi_family(m: int, k: int) -> Automaton:
    if k < 1:
        raise InputError("A(m,k) needs k >= 1")
    if m < 2:
        raise InputError("A(m,k) needs m >= 2: letter a sends s_j to q2")
    n = m + k + 1
    delta = []
    for i in range(m + 1):
        to_a = (i + 1) % (m + 1)
        to_b = m + 1 if i == 0 else i
        delta.append((to_a, to_b))
    for j in range(1, k + 1):
        to_b = m + 1 + j if j < k else 0
        delta.append((2, to_b))
    names = [f"q{i}" for i in range(m + 1)] + [f"s{j}" for j in range(1, k + 1)]
    return Automaton(n, 2, delta, names=names, family=FamilySpec("carpi", (m, k)))


def b_series(n: int) -> Automaton:
    """B_n = A(n-2, 1), an n-state automaton."""
    return carpi_family(n - 2, 1)


def _carpi_params(a: Automaton) -> tuple:
    spec = a.family
    if not isinstance(spec, FamilySpec) or spec.kind != "carpi":
        raise InputError("automaton was not generated by carpi_family")
    return spec.params


def c_b(a: Automaton) -> StateSet:
    """``{q0, s1, ..., sk}``, the states moved by letter b."""
    m, k = _carpi_params(a)
    return a.states([0, *range(m + 1, m + k + 1)])


def q_chain(a: Automaton) -> StateSet:
    """``{q0, ..., qm}``."""
    m, _ = _carpi_params(a)
    return a.states(range(m + 1))


def unstable_by_b(a: Automaton, s: StateSet) -> bool:
    _carpi_params(a)
    return a.preimage(s, (B,)) != s


def random_automaton(n: int, sigma: int, seed: int, constraints=(),
                     max_attempts: int = 10_000) -> Automaton:
    """Uniform random complete DFA, rejection-sampled against ``constraints``.

    ``constraints`` is a subset of ``{"synchronizing", "strongly_connected"}``.
    """
    unknown = set(constraints) - {"synchronizing", "strongly_connected"}
    if unknown:
        raise InputError(f"unknown constraints {sorted(unknown)}")
    if n < 1 or sigma < 1:
        raise InputError("need n >= 1 and sigma >= 1")
    rng = random.Random(seed)
    for _ in range(max_attempts):
        delta = [tuple(rng.randrange(n) for _ in range(sigma)) for _ in range(n)]
        a = Automaton(n, sigma, delta, family=FamilySpec("random", (n, sigma, seed)))
        if "strongly_connected" in constraints and not a.is_strongly_connected():
            continue
        if "synchronizing" in constraints and not a.is_synchronizing():
            continue
        return a
    raise InputError(f"no automaton satisfying {sorted(constraints)} "
                     f"after {max_attempts} attempts")


def from_family_spec(text: str) -> Automaton:
    """Build from ``cerny:N``, ``carpi:M,K`` or ``random:N,SIGMA,SEED``."""
    kind, _, rest = text.partition(":")
    try:
        params = [int(p) for p in rest.split(",")] if rest else []
    except ValueError:
        raise InputError(f"bad family parameters in {text!r}") from None
    if kind == "cerny" and len(params) == 1:
        return cerny(*params)
    if kind == "carpi" and len(params) == 2:
        return carpi_family(*params)
    if kind == "random" and len(params) == 3:
        return random_automaton(*params, constraints=("synchronizing", "strongly_connected"))
    raise InputError(f"unknown family spec {text!r}")


# -- counterexample verifiers ---------------------------------------------------

SUBSET_SCAN_MAX_STATES = 12


def subject(a: Automaton) -> dict:
    return {
        "fingerprint": fingerprint(a),
        "family": str(a.family) if a.family is not None else None,
        "states": a.n,
        "letters": a.sigma,
    }


def _budgets(exhaustive, max_states, node_budget):
    return {"exhaustive": exhaustive, "max_states": max_states, "node_budget": node_budget}


def _extension_report(a, conjecture, bound, parameters, max_states, node_budget):
    """Shared body of items 1 and 2: measure C_b, then fall back to the radius."""
    n = a.n
    m = n - 2
    cb = c_b(a)
    budget = Budget(node_budget)
    u = shortest_extension_word(a, cb, a.all_states, budget)
    reference_word = (A,) * m + (B,) + (A,) * m
    measured = {
        "shortest_extension_length": len(u),
        "shortest_extension_word": format_word(u),
        "formula_2n_minus_3": 2 * n - 3,
        "matches_formula": len(u) == 2 * n - 3,
        "reference_word": format_word(reference_word),
        "reference_word_extends": len(a.preimage(cb, reference_word)) > len(cb),
        "bfs_word_is_reference_word": u == reference_word,
        "bound": str(bound),
    }
    if len(u) > bound:
        witness = {"set": a.set_names(cb), "word": format_word(u), "within": "Q"}
        return VerdictReport(subject(a), conjecture, parameters, measured, FAILS,
                             _budgets(False, max_states, node_budget), witness)
    try:
        r = extension_radius(a, max_states=max_states, node_budget=node_budget)
    except BudgetExceeded:
        return VerdictReport(subject(a), conjecture, parameters, measured, INCONCLUSIVE,
                             _budgets(False, max_states, node_budget))
    measured["radius"] = r.radius
    measured["radius_witness"] = a.set_names(r.witness)
    if r.radius > bound:
        witness = {"set": a.set_names(r.witness), "word": format_word(r.witness_word),
                   "within": "Q"}
        return VerdictReport(subject(a), conjecture, parameters, measured, FAILS,
                             _budgets(True, max_states, node_budget), witness)
    return VerdictReport(subject(a), conjecture, parameters, measured, HOLDS,
                         _budgets(True, max_states, node_budget))


def _balanced_report(a, k, m, parameters, max_states, node_budget):
    N = a.n
    kn = k * N
    max_len = math.ceil(kn) - 1  # conjectured lengths are strictly below kn
    cb, chain = c_b(a), q_chain(a)
    budget = Budget(node_budget)
    v = shortest_growth_word(a, cb, chain, k + 1, budget)
    reference_word = ((A,) * m + (B,)) * k + (A,) * m
    reference_bound = k * (m + 1) + m
    reached = len(a.preimage(cb, reference_word) & chain)
    measured = {
        "L_star": None if v is None else len(v),
        "L_star_word": None if v is None else format_word(v),
        "reference_bound": reference_bound,
        "L_star_at_least_reference_bound": v is not None and len(v) >= reference_bound,
        "reference_word": format_word(reference_word),
        "reference_word_growth": reached,
        "kn": str(kn),
        "argument_refutes": v is None or len(v) > kn,
        "max_word_length": max_len,
    }
    budgets = _budgets(False, max_states, node_budget)
    if N > SUBSET_SCAN_MAX_STATES:
        return VerdictReport(subject(a), "kn-balanced", parameters, measured,
                             INCONCLUSIVE, budgets)
    order = [cb.mask] + [s for s in range(1, (1 << N) - 1) if s != cb.mask]
    uncertified = 0
    for mask in order:
        d = decide_balanced(a, a.states(q for q in range(N) if mask >> q & 1), max_len,
                            Budget(node_budget))
        if mask == cb.mask:
            measured["C_b_balanced_collection_exists"] = d.exists
            if d.exists:
                measured["C_b_collection_size"] = sum(d.multiplicities.values())
                measured["C_b_collection_length"] = max(len(w) for w in d.multiplicities)
        if d.exists is False:
            s = a.states(q for q in range(N) if mask >> q & 1)
            witness = {"set": a.set_names(s),
                       "farkas_certificate": [str(y) for y in d.certificate],
                       "max_word_length": max_len}
            budgets["exhaustive"] = True
            return VerdictReport(subject(a), "kn-balanced", parameters, measured, FAILS,
                                 budgets, witness, implies=["kn-independent"])
        if d.exists is None:
            uncertified += 1
    measured["subsets_decided"] = len(order) - uncertified
    if uncertified:
        return VerdictReport(subject(a), "kn-balanced", parameters, measured,
                             INCONCLUSIVE, budgets)
    budgets["exhaustive"] = True
    return VerdictReport(subject(a), "kn-balanced", parameters, measured, HOLDS, budgets)


def verify_proposition(item: int, *, n: int | None = None, c=None, m: int | None = None,
                       k: int | None = None, max_states: int = DEFAULT_MAX_STATES,
                       node_budget: int | None = None) -> VerdictReport:
    """Re-derive one item of the A(m,k) counterexample proposition.

    1. ``n``: the extension conjecture on ``B_n``.
    2. ``n``, ``c``: the cn-extension conjecture on ``B_n``.
    3. ``m``, ``k``: the kn-balanced conjecture on ``A(m,k)``.  Besides the
       shortest-growth measurement, existence of balanced collections is
       decided exactly for every subset when the automaton is small enough.
    """
    if item in (1, 2):
        if n is None or n < 4:
            raise InputError("items 1 and 2 need n >= 4")
        a = b_series(n)
        if item == 1:
            return _extension_report(a, "extension", n, {"n": n}, max_states, node_budget)
        if c is None:
            raise InputError("item 2 needs c")
        c = Fraction(c)
        if c >= 2:
            raise InputError("item 2 needs c < 2")
        params = {"n": n, "c": str(c), "threshold": str(3 / (2 - c))}
        return _extension_report(a, "cn-extension", c * n, params, max_states, node_budget)
    if item == 3:
        if m is None or k is None:
            raise InputError("item 3 needs m and k")
        a = carpi_family(m, k)
        params = {"m": m, "k": k, "n": a.n}
        return _balanced_report(a, k, m, params, max_states, node_budget)
    raise InputError(f"unknown proposition item {item!r}")


def verify_independent_set(a: Automaton, k, node_budget: int | None = None) -> VerdictReport:
    """Decide whether ``a`` has an independent collection of length < k·n."""
    k = Fraction(k)
    max_len = math.ceil(k * a.n) - 1
    params = {"k": str(k), "n": a.n}
    budgets = _budgets(False, 0, node_budget)
    try:
        found = min_independent_collection(a, max_len, Budget(node_budget))
    except BudgetExceeded:
        return VerdictReport(subject(a), "kn-independent", params, {"max_word_length": max_len},
                             INCONCLUSIVE, budgets)
    budgets["exhaustive"] = True
    if found is None:
        measured = {"max_word_length": max_len, "min_independent_length": f"> {max_len}"}
        witness = {"max_word_length": max_len,
                   "search": "exact cover over all transformations of length <= max_word_length"}
        return VerdictReport(subject(a), "kn-independent", params, measured, FAILS,
                             budgets, witness)
    length, coll = found
    measured = {"max_word_length": max_len, "min_independent_length": length,
                "collection": [format_word(w) for w in coll]}
    return VerdictReport(subject(a), "kn-independent", params, measured, HOLDS, budgets)


# -- fuzzing -------------------------------------------------------------------


@dataclass
class FuzzResult:
    n: int
    sigma: int
    seed: int
    count: int
    distribution: dict
    counterexamples: list


def _brute_force_unextendable(a: Automaton, s: StateSet, bound: int) -> bool:
    """True iff no word of length <= ``bound`` grows ``s`` (plain enumeration)."""
    size = len(s)
    for length in range(bound + 1):
        for w in product(range(a.sigma), repeat=length):
            grown = sum(1 for q in range(a.n) if a.apply(q, w) in s)
            if grown > size:
                return False
    return True


def fuzz_extension_radius(count: int, n: int, sigma: int = 2, seed: int = 0,
                          max_states: int = DEFAULT_MAX_STATES) -> FuzzResult:
    """Radius distribution over random synchronizing strongly connected DFAs.

    Instances with radius > n contradict the extension conjecture; each is
    re-checked by brute-force word enumeration before being reported.
    """
    rng = random.Random(seed)
    dist: dict = {}
    found = []
    for _ in range(count):
        sub_seed = rng.getrandbits(32)
        a = random_automaton(n, sigma, sub_seed, ("synchronizing", "strongly_connected"))
        r = extension_radius(a, max_states=max_states)
        dist[r.radius] = dist.get(r.radius, 0) + 1
        if r.radius > n and _brute_force_unextendable(a, r.witness, n):
            found.append({"seed": sub_seed, "radius": r.radius,
                          "witness": r.witness.sorted(),
                          "word": format_word(r.witness_word),
                          "delta": [list(row) for row in a.delta]})
    return FuzzResult(n, sigma, seed, count, dict(sorted(dist.items())), found)
