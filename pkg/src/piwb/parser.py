"""Concrete syntax for processes and actions.

Grammar (whitespace insensitive, `#` starts a line comment)::

    proc   ::= par
    par    ::= sum ("|" sum)*
    sum    ::= seq ("+" seq)*
    seq    ::= "0" | prefix "." seq | "new" name "." seq | "!" seq | "(" proc ")"
    prefix ::= ("[" name "=" name "]")* basic
    basic  ::= name "!" name | name "?" "(" name ")" | "tau"
    name   ::= [a-z][a-zA-Z0-9_]*

Prefixing binds tighter than "+", which binds tighter than "|"; "new z."
and "!" extend maximally to the right.  `new` and `tau` are reserved words.
The parser accepts "new"/"!" inside sum positions; validate() rejects the
ones that break the summation discipline.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .syntax import (
    NIL,
    TAU,
    TAU_ACT,
    Action,
    BoundOut,
    FreeOut,
    In,
    Input,
    Match,
    Nil,
    Output,
    Par,
    Prefixed,
    Process,
    Repl,
    Restrict,
    Sum,
    alpha_canonical,
    validate,
)

_KEYWORDS = ("new", "tau")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<name>[a-z][a-zA-Z0-9_]*)
  | (?P<punct>[!?().\[\]=+|]|0)
    """,
    re.VERBOSE,
)


class SourceSpan:
    """Byte offsets [start, end) into the parsed input."""

    __slots__ = ("start", "end")

    def __init__(self, start: int, end: int):
        self.start = start
        self.end = end

    def __eq__(self, other):
        return (
            isinstance(other, SourceSpan)
            and self.start == other.start
            and self.end == other.end
        )

    def __repr__(self):
        return f"SourceSpan({self.start}, {self.end})"


def tokenize(text: str) -> list[tuple[str, str, SourceSpan]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r} at offset {pos}",
                SourceSpan(pos, pos + 1),
                expected=("name", "token"),
            )
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        value = m.group()
        if m.lastgroup == "name":
            kind = value if value in _KEYWORDS else "name"
        else:
            kind = value
        tokens.append((kind, value, SourceSpan(m.start(), m.end())))
    tokens.append(("eof", "", SourceSpan(len(text), len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.peek()
        if tok[0] != kind:
            self.fail((kind,))
        return self.advance()

    def fail(self, expected):
        kind, value, span = self.peek()
        shown = value if value else "end of input"
        raise ParseError(
            f"unexpected {shown!r} at offset {span.start}; expected one of {sorted(expected)}",
            span,
            expected=expected,
        )

    # par ::= sum ("|" sum)*
    def parse_par(self) -> Process:
        term = self.parse_sum()
        while self.peek()[0] == "|":
            self.advance()
            term = Par(term, self.parse_sum())
        return term

    # sum ::= seq ("+" seq)*
    def parse_sum(self) -> Process:
        term = self.parse_seq()
        while self.peek()[0] == "+":
            self.advance()
            term = Sum(term, self.parse_seq())
        return term

    # seq ::= "0" | prefix "." seq | "new" name "." seq | "!" seq | "(" proc ")"
    def parse_seq(self) -> Process:
        kind, value, span = self.peek()
        if kind == "0":
            self.advance()
            return NIL
        if kind == "new":
            self.advance()
            name = self.expect("name")[1]
            self.expect(".")
            return Restrict(name, self.parse_seq())
        if kind == "!":
            self.advance()
            return Repl(self.parse_seq())
        if kind == "(":
            self.advance()
            term = self.parse_par()
            self.expect(")")
            return term
        if kind in ("name", "tau", "["):
            prefix = self.parse_prefix()
            self.expect(".")
            return Prefixed(prefix, self.parse_seq())
        self.fail(("0", "new", "!", "(", "name", "tau", "["))

    # prefix ::= ("[" name "=" name "]")* basic
    def parse_prefix(self):
        guards = []
        while self.peek()[0] == "[":
            self.advance()
            lhs = self.expect("name")[1]
            self.expect("=")
            rhs = self.expect("name")[1]
            self.expect("]")
            guards.append((lhs, rhs))
        core = self.parse_basic()
        for lhs, rhs in reversed(guards):
            core = Match(lhs, rhs, core)
        return core

    # basic ::= name "!" name | name "?" "(" name ")" | "tau"
    def parse_basic(self):
        kind, value, span = self.peek()
        if kind == "tau":
            self.advance()
            return TAU
        if kind == "name":
            chan = self.advance()[1]
            kind2 = self.peek()[0]
            if kind2 == "!":
                self.advance()
                datum = self.expect("name")[1]
                return Output(chan, datum)
            if kind2 == "?":
                self.advance()
                self.expect("(")
                binder = self.expect("name")[1]
                self.expect(")")
                return Input(chan, binder)
            self.fail(("!", "?"))
        self.fail(("name", "tau"))


def parse(text: str) -> Process:
    """Parse a process; the result always satisfies validate()."""
    parser = _Parser(text)
    term = parser.parse_par()
    if parser.peek()[0] != "eof":
        parser.fail(("eof", "|", "+"))
    validate(term)
    return term


# --------------------------------------------------------------------------
# Pretty printer


def _prefix_text(pi) -> str:
    parts = []
    while isinstance(pi, Match):
        parts.append(f"[{pi.lhs}={pi.rhs}]")
        pi = pi.inner
    if isinstance(pi, Output):
        parts.append(f"{pi.chan}!{pi.datum}")
    elif isinstance(pi, Input):
        parts.append(f"{pi.chan}?({pi.binder})")
    else:
        parts.append("tau")
    return "".join(parts)


# Precedence levels: 0 = parallel context, 1 = sum context, 2 = seq context.
# Parsing is left-associative, so right-nested sums/parallels take parens.
def _render(p: Process, level: int) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Prefixed):
        return f"{_prefix_text(p.prefix)}.{_render(p.cont, 2)}"
    if isinstance(p, Sum):
        text = f"{_render(p.left, 1)} + {_render(p.right, 2)}"
        return f"({text})" if level > 1 else text
    if isinstance(p, Par):
        text = f"{_render(p.left, 0)} | {_render(p.right, 1)}"
        return f"({text})" if level > 0 else text
    if isinstance(p, Restrict):
        return f"new {p.binder}.{_render(p.body, 2)}"
    if isinstance(p, Repl):
        return f"!{_render(p.body, 2)}"
    raise TypeError(f"not a process: {p!r}")


def pretty(p: Process) -> str:
    """Deterministic text with minimal parentheses and canonical binders."""
    return _render(alpha_canonical(p), 0)


def action_text(a: Action) -> str:
    if isinstance(a, FreeOut):
        return f"{a.chan}!{a.datum}"
    if isinstance(a, BoundOut):
        return f"{a.chan}!({a.binder})"
    if isinstance(a, In):
        return f"{a.chan}?{a.datum}"
    if a == TAU_ACT:
        return "tau"
    raise TypeError(f"not an action: {a!r}")
