"""Concrete syntax for object-language terms, types, contexts and PTS specs.

Terms::

    \\x:A. e    \\x. e    e1 e2    Pi x:A. B    A -> B (PTS mode)
    random[0.3](e1, e2)    sample(e)    thunk(e)

Types (simple/PDTS mode)::

    A    A -> B    D(A)    A | B    A & B    Pi x:A. B    Type
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..sexpr import ParseError, Span
from ..types import TOP_TYPE, TYPE, Arrow, Base, Dist, InterT, Pi, UnionT
from .terms import App, Const, Lam, PiT, Random, Sample, Thunk, Var

_TOKEN = re.compile(r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+)
  | (?P<arrow>->|→)
  | (?P<lam>\\|λ)
  | (?P<pi>Π|∏)
  | (?P<ident>[A-Za-z_*□⊤][A-Za-z0-9_'*□⊤]*)
  | (?P<punct>[()\[\],.:|&])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span


def tokenize(text: str) -> list:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", Span(line, col, pos, pos + 1))
        kind = m.lastgroup
        s = m.group()
        span = Span(line, col, pos, m.end())
        if kind != "ws":
            if kind == "punct":
                kind = s
            elif kind == "ident" and s == "Pi":
                kind = "pi"
            out.append(Token(kind, s, span))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", Span(line, col, pos, pos)))
    return out


class _Parser:
    def __init__(self, text, mode="simple", sorts=()):
        if mode not in ("simple", "pts", "untyped"):
            raise ValueError(f"unknown mode {mode!r}")
        self.toks = tokenize(text)
        self.i = 0
        self.mode = mode
        self.sorts = frozenset(sorts)

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, kind, expected=None):
        t = self.tok
        if t.kind != kind:
            what = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"unexpected {what}", t.span, expected or (kind,))
        self.i += 1
        return t

    def at(self, *kinds):
        return self.tok.kind in kinds

    def done(self):
        if not self.at("eof"):
            raise ParseError(f"unexpected {self.tok.text!r} after expression", self.tok.span, ("end of input",))

    # terms
    def expr(self):
        if self.at("lam"):
            return self.lam()
        if self.at("pi") and self.mode == "pts":
            return self.pi_term()
        e = self.app()
        if self.mode == "pts" and self.at("arrow"):
            self.i += 1
            return PiT("_", e, self.expr())
        return e

    def lam(self):
        self.take("lam")
        v = self.take("ident", ("identifier",)).text
        ty = None
        if self.at(":"):
            self.i += 1
            ty = self.expr() if self.mode == "pts" else self.type_()
            if self.mode == "untyped":
                ty = None
        self.take(".", (".", ":"))
        return Lam(v, ty, self.expr())

    def pi_term(self):
        self.take("pi")
        v = self.take("ident", ("identifier",)).text
        self.take(":")
        dom = self.expr()
        self.take(".")
        return PiT(v, dom, self.expr())

    def app(self):
        e = self.atom()
        while self.at("ident", "(", "lam") or (self.at("pi") and self.mode == "pts"):
            if self.at("lam", "pi"):
                e = App(e, self.expr())
                break
            e = App(e, self.atom())
        return e

    def atom(self):
        t = self.tok
        if t.kind == "(":
            self.i += 1
            e = self.expr()
            self.take(")")
            return e
        if t.kind == "ident":
            nxt = self.peek()
            if t.text == "random" and nxt.kind == "[":
                return self.random()
            if t.text in ("sample", "thunk") and nxt.kind == "(":
                self.i += 2
                e = self.expr()
                self.take(")")
                return Sample(e) if t.text == "sample" else Thunk(e)
            self.i += 1
            if self.mode == "pts" and t.text in self.sorts:
                return Const(t.text)
            return Var(t.text)
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.span, ("identifier", "(", "\\"))

    def random(self):
        self.take("ident")
        self.take("[")
        num = self.take("num", ("number",))
        rho = float(num.text)
        if not 0.0 <= rho <= 1.0:
            raise ParseError(f"random weight {rho} outside [0, 1]", num.span, ())
        self.take("]")
        self.take("(")
        a = self.expr()
        self.take(",", (",",))
        b = self.expr()
        self.take(")")
        return Random(rho, a, b)

    # types
    def type_(self):
        if self.at("pi"):
            self.i += 1
            v = self.take("ident", ("identifier",)).text
            self.take(":")
            dom = self.type_()
            self.take(".")
            return Pi(v, dom, self.type_())
        left = self.union()
        if self.at("arrow"):
            self.i += 1
            return Arrow(left, self.type_())
        return left

    def union(self):
        t = self.inter()
        while self.at("|"):
            self.i += 1
            t = UnionT(t, self.inter())
        return t

    def inter(self):
        t = self.tatom()
        while self.at("&"):
            self.i += 1
            t = InterT(t, self.tatom())
        return t

    def tatom(self):
        t = self.tok
        if t.kind == "(":
            self.i += 1
            ty = self.type_()
            self.take(")")
            return ty
        if t.kind == "ident":
            self.i += 1
            if t.text in ("D", "Distribution") and self.at("("):
                self.i += 1
                ty = self.type_()
                self.take(")")
                return Dist(ty)
            if t.text == "Type":
                return TYPE
            if t.text in ("TopType", "⊤"):
                return TOP_TYPE
            return Base(t.text)
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.span, ("type", "("))


def parse_term(text: str, mode: str = "simple", sorts=()):
    """Parse one term.  ``mode`` is ``simple`` (typed annotations), ``untyped`` or ``pts``."""
    p = _Parser(text, mode, sorts)
    e = p.expr()
    p.done()
    return e


def parse_obj_type(text: str):
    p = _Parser(text)
    t = p.type_()
    p.done()
    return t


def parse_context(text: str, mode: str = "simple", sorts=()) -> list:
    """``x:A, f:A -> B`` into an ordered list of (name, type) pairs."""
    if not text.strip():
        return []
    p = _Parser(text, mode, sorts)
    out, seen = [], set()
    while True:
        tok = p.take("ident", ("identifier",))
        if tok.text in seen:
            raise ParseError(f"variable {tok.text!r} bound twice in context", tok.span, ())
        seen.add(tok.text)
        p.take(":")
        ty = p.expr() if mode == "pts" else p.type_()
        out.append((tok.text, ty))
        if p.at("eof"):
            return out
        p.take(",", (",", "end of input"))


# -- PTS spec files ---------------------------------------------------------

_SPEC_LINE = [
    (re.compile(r"^sorts?\s+(.+)$"), "sort"),
    (re.compile(r"^\(\s*(\S+)\s*:\s*(\S+)\s*\)$"), "axiom"),
    (re.compile(r"^\(\s*([^,\s]+)\s*,\s*([^,\s]+)\s*,\s*([^,\s)]+)\s*\)$"), "rule"),
]


def parse_pts_spec(text: str):
    """Read a spec file: ``sort NAME`` lines, axioms ``(s1 : s2)``, rules ``(s1, s2, s3)``."""
    from .pts import PtsSpec
    sorts, axioms, rules = [], [], []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        for rx, kind in _SPEC_LINE:
            m = rx.match(line)
            if m:
                break
        else:
            raise ParseError(f"unrecognised spec line {line!r}", Span(ln, 1, 0, len(raw)),
                             ("sort NAME", "(s1 : s2)", "(s1, s2, s3)"))
        if kind == "sort":
            sorts.extend(m.group(1).replace(",", " ").split())
        elif kind == "axiom":
            axioms.append(m.groups())
        else:
            rules.append(m.groups())
    return PtsSpec(tuple(sorts), frozenset(axioms), frozenset(rules))


__all__ = ["tokenize", "Token", "parse_term", "parse_obj_type", "parse_context",
           "parse_pts_spec", "ParseError", "Span"]
