"""DFA text format, DOT export and state-set syntax.

Text format::

    dfa 1
    <n> <sigma>
    <row for state 0: sigma target indices>
    ...
    names:            # optional
    <index> <label>
    ...

``#`` starts a comment anywhere on a line.  :func:`serialize_automaton`
writes the canonical form, which :func:`parse_automaton` reads back to an
equal automaton.
"""

from __future__ import annotations

import hashlib
import re

from .core import Automaton, StateSet, letter_name
from .errors import InputError, ParseError

MAGIC = "dfa"
VERSION = "1"


def _tokens(line: str):
    for m in re.finditer(r"\S+", line):
        yield m.group(0), m.start() + 1


def parse_automaton(text: str) -> Automaton:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if body.strip():
            lines.append((lineno, body))
    if not lines:
        raise ParseError("empty input", 1, 1)

    lineno, body = lines[0]
    toks = list(_tokens(body))
    if [t for t, _ in toks] != [MAGIC, VERSION]:
        raise ParseError(f"expected header '{MAGIC} {VERSION}'", lineno, 1)

    if len(lines) < 2:
        raise ParseError("missing 'n sigma' line", lineno + 1, 1)
    lineno, body = lines[1]
    n, sigma = _ints(list(_tokens(body)), lineno, 2)
    if n < 1 or sigma < 1:
        raise ParseError("n and sigma must be positive", lineno, 1)

    if len(lines) < 2 + n:
        raise ParseError(f"expected {n} transition rows, got {len(lines) - 2}",
                         lines[-1][0] + 1, 1)
    delta = []
    for lineno, body in lines[2:2 + n]:
        toks = list(_tokens(body))
        if len(toks) != sigma:
            col = toks[-1][1] if toks else 1
            raise ParseError(f"incomplete row: expected {sigma} entries, got {len(toks)}",
                             lineno, col)
        row = _ints(toks, lineno, sigma)
        for (tok, col), t in zip(toks, row):
            if not 0 <= t < n:
                raise ParseError(f"target {t} out of range [0, {n})", lineno, col)
        delta.append(tuple(row))

    names = None
    rest = lines[2 + n:]
    if rest:
        lineno, body = rest[0]
        if body.strip() != "names:":
            raise ParseError("unexpected content after transition rows", lineno, 1)
        names = [None] * n
        for lineno, body in rest[1:]:
            toks = list(_tokens(body))
            if len(toks) != 2:
                raise ParseError("expected '<index> <label>'", lineno, 1)
            (idx,) = _ints(toks[:1], lineno, 1)
            if not 0 <= idx < n:
                raise ParseError(f"name index {idx} out of range", lineno, toks[0][1])
            if names[idx] is not None:
                raise ParseError(f"state {idx} named twice", lineno, toks[0][1])
            names[idx] = toks[1][0]
        if None in names:
            raise ParseError("names section must label every state", rest[-1][0], 1)
    try:
        return Automaton(n, sigma, tuple(delta), names=tuple(names) if names else None)
    except InputError as exc:
        raise ParseError(str(exc), rest[0][0] if rest else lines[-1][0], 1) from None


def _ints(toks, lineno, expected):
    if len(toks) != expected:
        raise ParseError(f"expected {expected} integers, got {len(toks)}", lineno,
                         toks[0][1] if toks else 1)
    out = []
    for tok, col in toks:
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(f"not an integer: {tok!r}", lineno, col) from None
    return out


def serialize_automaton(a: Automaton) -> str:
    out = [f"{MAGIC} {VERSION}", f"{a.n} {a.sigma}"]
    out.extend(" ".join(map(str, row)) for row in a.delta)
    if a.names:
        out.append("names:")
        out.extend(f"{q} {name}" for q, name in enumerate(a.names))
    return "\n".join(out) + "\n"


def fingerprint(a: Automaton) -> str:
    return hashlib.sha256(serialize_automaton(a).encode()).hexdigest()[:16]


def export_dot(a: Automaton, highlights: StateSet | None = None) -> str:
    """Graphviz source; parallel edges share one comma-joined label."""
    lines = ["digraph automaton {", "  rankdir=LR;", "  node [shape=circle];"]
    for q in range(a.n):
        attrs = [f'label="{a.state_name(q)}"']
        if highlights is not None and q in highlights:
            attrs += ["style=filled", 'fillcolor="lightblue"', "penwidth=2"]
        lines.append(f"  {q} [{', '.join(attrs)}];")
    for q, row in enumerate(a.delta):
        grouped: dict = {}
        for x, t in enumerate(row):
            grouped.setdefault(t, []).append(letter_name(x))
        for t in sorted(grouped):
            lines.append(f'  {q} -> {t} [label="{",".join(grouped[t])}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_state_set(a: Automaton, text: str) -> StateSet:
    """``q0,q2``, ``q0..q3``, ``0,1,4`` or ``Q`` (all states).

    A range covers every index between its endpoints' indices.
    """
    text = text.strip()
    if text in ("Q", "all"):
        return a.all_states
    if text in ("", "{}", "empty"):
        return a.states(())
    members = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (a.state_index(p.strip()) for p in part.split("..", 1))
            if lo > hi:
                raise InputError(f"empty range {part!r}")
            members.extend(range(lo, hi + 1))
        else:
            members.append(a.state_index(part))
    return a.states(members)


def format_state_set(a: Automaton, s: StateSet) -> list:
    return a.set_names(s)
