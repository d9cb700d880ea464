"""S-expression reader with source spans and positioned errors."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    start: int
    end: int

    def __str__(self):
        return f"{self.line}:{self.col}"


class ParseError(Exception):
    def __init__(self, message, span: Span, expected=()):
        self.message = message
        self.span = span
        self.expected = tuple(sorted(set(expected)))
        where = f"{span.line}:{span.col}"
        if self.expected:
            message = f"{message} (expected {', '.join(repr(e) for e in self.expected)})"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class SAtom:
    text: str
    span: Span | None = field(default=None, compare=False)

    @property
    def is_var(self):
        return self.text.startswith("$") and len(self.text) > 1

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    span: Span | None = field(default=None, compare=False)

    @property
    def head(self):
        if self.items and isinstance(self.items[0], SAtom):
            return self.items[0].text
        return None

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __str__(self):
        return "(" + " ".join(str(x) for x in self.items) + ")"


_DELIMS = set("();")


class _Reader:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def span_here(self, length=0):
        return Span(self.line, self.col, self.pos, self.pos + length)

    def advance(self, n=1):
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def skip_ws(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c.isspace():
                self.advance()
            elif c == ";":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self.advance()
            else:
                break

    def read(self):
        self.skip_ws()
        if self.pos >= len(self.text):
            raise ParseError("unexpected end of input", self.span_here(), ["(", "atom"])
        c = self.text[self.pos]
        if c == "(":
            return self.read_list()
        if c == ")":
            raise ParseError("unbalanced ')'", self.span_here(1), ["(", "atom"])
        return self.read_atom()

    def read_list(self):
        start = self.span_here()
        self.advance()
        items = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.text):
                raise ParseError("unexpected end of input inside list", self.span_here(), [")"])
            if self.text[self.pos] == ")":
                self.advance()
                break
            items.append(self.read())
        span = Span(start.line, start.col, start.start, self.pos)
        return SList(tuple(items), span)

    def read_atom(self):
        start = self.span_here()
        text = self.text
        begin = self.pos
        while self.pos < len(text) and not text[self.pos].isspace() and text[self.pos] not in _DELIMS:
            self.advance()
        tok = text[begin:self.pos]
        if tok == "$":
            raise ParseError("variable needs a name", start, ["identifier"])
        return SAtom(tok, Span(start.line, start.col, begin, self.pos))


def parse(text: str) -> list:
    """Read every top-level expression in ``text``."""
    r = _Reader(text)
    out = []
    while True:
        r.skip_ws()
        if r.pos >= len(text):
            return out
        out.append(r.read())


def parse_one(text: str):
    exprs = parse(text)
    if len(exprs) != 1:
        span = exprs[1].span if len(exprs) > 1 else Span(1, 1, 0, 0)
        raise ParseError(f"expected exactly one expression, got {len(exprs)}", span)
    return exprs[0]


def to_text(x) -> str:
    return str(x)


def atom(text):
    return SAtom(text)


def slist(*items):
    return SList(tuple(SAtom(i) if isinstance(i, str) else i for i in items))
