"""Type expressions and the growable subtype relation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

from .sexpr import SAtom, SList, parse_one


class TypeSyntaxError(ValueError):
    pass


class SubtypeBudgetError(RuntimeError):
    pass


class TypeExpr:
    __slots__ = ()

    def __str__(self):
        return type_to_text(self)


@dataclass(frozen=True, repr=False)
class Special(TypeExpr):
    name: str

    def __repr__(self):
        return self.name


TYPE = Special("Type")
TOP_TYPE = Special("TopType")
TOP = Special("Top")
JUDG = Special("Judg")
EXEC = Special("Exec")
NUL_T = Special("Nul")

_SPECIALS = {s.name: s for s in (TYPE, TOP_TYPE, TOP, JUDG, EXEC, NUL_T)}


@dataclass(frozen=True, repr=False)
class Base(TypeExpr):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class TVar(TypeExpr):
    name: str

    def __repr__(self):
        return "$" + self.name


@dataclass(frozen=True, repr=False)
class Arrow(TypeExpr):
    dom: TypeExpr
    cod: TypeExpr

    def __repr__(self):
        return type_to_text(self)


@dataclass(frozen=True, repr=False)
class Pi(TypeExpr):
    var: str
    dom: TypeExpr
    body: TypeExpr

    def __repr__(self):
        return type_to_text(self)


@dataclass(frozen=True, repr=False)
class EqT(TypeExpr):
    ty: TypeExpr
    lhs: Any
    rhs: Any

    def __repr__(self):
        return type_to_text(self)


@dataclass(frozen=True, repr=False)
class UnionT(TypeExpr):
    left: TypeExpr
    right: TypeExpr

    def __repr__(self):
        return type_to_text(self)


@dataclass(frozen=True, repr=False)
class InterT(TypeExpr):
    left: TypeExpr
    right: TypeExpr

    def __repr__(self):
        return type_to_text(self)


@dataclass(frozen=True, repr=False)
class Dist(TypeExpr):
    arg: TypeExpr

    def __repr__(self):
        return type_to_text(self)


@dataclass(frozen=True, repr=False)
class TApp(TypeExpr):
    """Application inside a type, e.g. ``(B a)`` in a dependent-tuple signature."""
    fn: TypeExpr
    arg: TypeExpr

    def __repr__(self):
        return type_to_text(self)


def arrows(*ts):
    """Right-nested arrow: arrows(A, B, C) = A -> (B -> C)."""
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = Arrow(t, out)
    return out


def type_to_text(t) -> str:
    if isinstance(t, (Special, Base)):
        return t.name
    if isinstance(t, TVar):
        return "$" + t.name
    if isinstance(t, Arrow):
        return f"(-> {type_to_text(t.dom)} {type_to_text(t.cod)})"
    if isinstance(t, Pi):
        return f"(Pi ${t.var} {type_to_text(t.dom)} {type_to_text(t.body)})"
    if isinstance(t, EqT):
        return f"(Eq {type_to_text(t.ty)} {t.lhs} {t.rhs})"
    if isinstance(t, UnionT):
        return f"(U {type_to_text(t.left)} {type_to_text(t.right)})"
    if isinstance(t, InterT):
        return f"(I {type_to_text(t.left)} {type_to_text(t.right)})"
    if isinstance(t, Dist):
        return f"(Distribution {type_to_text(t.arg)})"
    if isinstance(t, TApp):
        return f"({type_to_text(t.fn)} {type_to_text(t.arg)})"
    raise TypeError(f"not a type expression: {t!r}")


def parse_type(src) -> TypeExpr:
    x = parse_one(src) if isinstance(src, str) else src
    if isinstance(x, SAtom):
        if x.is_var:
            return TVar(x.text[1:])
        return _SPECIALS.get(x.text) or Base(x.text)
    items = x.items
    head = x.head
    if head == "->":
        if len(items) < 3:
            raise TypeSyntaxError(f"-> needs at least two arguments: {x}")
        return arrows(*[parse_type(i) for i in items[1:]])
    if head in ("U", "I") and len(items) == 3:
        ctor = UnionT if head == "U" else InterT
        return ctor(parse_type(items[1]), parse_type(items[2]))
    if head == "Distribution" and len(items) == 2:
        return Dist(parse_type(items[1]))
    if head == "Pi" and len(items) == 4 and isinstance(items[1], SAtom):
        v = items[1].text.lstrip("$")
        return Pi(v, parse_type(items[2]), parse_type(items[3]))
    if head == "Eq" and len(items) == 4:
        return EqT(parse_type(items[1]), str(items[2]), str(items[3]))
    if len(items) >= 2 and head not in _RESERVED:
        out = parse_type(items[0])
        for a in items[1:]:
            out = TApp(out, parse_type(a))
        return out
    raise TypeSyntaxError(f"unrecognised type expression {x}")


_RESERVED = {"->", "U", "I", "Distribution", "Pi", "Eq", ":", "<=", "=", "trans", "@", "!", "funapp"}


def free_tvars(t) -> frozenset:
    if isinstance(t, TVar):
        return frozenset([t.name])
    if isinstance(t, (Arrow,)):
        return free_tvars(t.dom) | free_tvars(t.cod)
    if isinstance(t, Pi):
        return free_tvars(t.dom) | (free_tvars(t.body) - {t.var})
    if isinstance(t, (UnionT, InterT)):
        return free_tvars(t.left) | free_tvars(t.right)
    if isinstance(t, Dist):
        return free_tvars(t.arg)
    if isinstance(t, EqT):
        return free_tvars(t.ty)
    if isinstance(t, TApp):
        return free_tvars(t.fn) | free_tvars(t.arg)
    return frozenset()


def has_tvars(t) -> bool:
    return bool(free_tvars(t))


def subst_type(t, name: str, repl):
    if isinstance(t, TVar):
        return repl if t.name == name else t
    if isinstance(t, Arrow):
        return Arrow(subst_type(t.dom, name, repl), subst_type(t.cod, name, repl))
    if isinstance(t, Pi):
        dom = subst_type(t.dom, name, repl)
        if t.var == name:
            return Pi(t.var, dom, t.body)
        return Pi(t.var, dom, subst_type(t.body, name, repl))
    if isinstance(t, UnionT):
        return UnionT(subst_type(t.left, name, repl), subst_type(t.right, name, repl))
    if isinstance(t, InterT):
        return InterT(subst_type(t.left, name, repl), subst_type(t.right, name, repl))
    if isinstance(t, Dist):
        return Dist(subst_type(t.arg, name, repl))
    if isinstance(t, EqT):
        return EqT(subst_type(t.ty, name, repl), t.lhs, t.rhs)
    if isinstance(t, TApp):
        return TApp(subst_type(t.fn, name, repl), subst_type(t.arg, name, repl))
    return t


def is_small(t) -> bool:
    """Everything except the top, judgement and execution universes."""
    return t not in (TOP, JUDG, EXEC)


class SubtypeRelation:
    """Declared subtype pairs closed under transitivity, plus structural rules.

    The declared part is kept as an up-set map ``t -> {s | t <= s}`` which is
    re-closed incrementally on every insertion.
    """

    __slots__ = ("pairs", "_up", "budget")

    def __init__(self, pairs: Iterable = (), budget: int = 64):
        self.pairs = frozenset()
        self._up: dict = {}
        self.budget = budget
        for a, b in pairs:
            self._insert(a, b)

    def _insert(self, a, b):
        if (a, b) in self.pairs:
            return
        self.pairs = self.pairs | {(a, b)}
        up = self._up
        # everything below-or-equal a gains b and b's up-set
        gained = {b} | up.get(b, frozenset())
        below = [x for x, s in up.items() if a in s] + [a]
        for x in below:
            new = (up.get(x, frozenset()) | gained) - {x}
            up[x] = frozenset(new)

    def add(self, a, b) -> "SubtypeRelation":
        r = SubtypeRelation.__new__(SubtypeRelation)
        r.pairs = self.pairs
        r._up = dict(self._up)
        r.budget = self.budget
        r._insert(a, b)
        return r

    def closure(self) -> frozenset:
        return frozenset((a, b) for a, s in self._up.items() for b in s)

    def up(self, t) -> frozenset:
        return self._up.get(t, frozenset())

    def __eq__(self, other):
        return isinstance(other, SubtypeRelation) and self.closure() == other.closure()

    def __hash__(self):
        return hash(self.closure())

    def __repr__(self):
        return f"SubtypeRelation({sorted(map(str, self.pairs))})"

    def leq(self, a, b) -> bool:
        return self._leq(a, b, 0, frozenset())

    def _leq(self, a, b, depth, stack) -> bool:
        if depth > self.budget:
            raise SubtypeBudgetError(f"subtype check exceeded depth {self.budget}")
        if a == b or b == TOP:
            return True
        if (a, b) in stack:
            return False
        stack = stack | {(a, b)}
        if b == TOP_TYPE and is_small(a) and a != TOP_TYPE:
            return True
        d = depth + 1
        if isinstance(a, UnionT):
            return self._leq(a.left, b, d, stack) and self._leq(a.right, b, d, stack)
        if isinstance(b, InterT):
            return self._leq(a, b.left, d, stack) and self._leq(a, b.right, d, stack)
        if isinstance(b, UnionT) and (self._leq(a, b.left, d, stack) or self._leq(a, b.right, d, stack)):
            return True
        if isinstance(a, InterT) and (self._leq(a.left, b, d, stack) or self._leq(a.right, b, d, stack)):
            return True
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            return self._leq(b.dom, a.dom, d, stack) and self._leq(a.cod, b.cod, d, stack)
        if isinstance(a, Pi) and isinstance(b, Pi):
            body_b = subst_type(b.body, b.var, TVar(a.var)) if a.var != b.var else b.body
            return self._leq(b.dom, a.dom, d, stack) and self._leq(a.body, body_b, d, stack)
        if isinstance(a, Dist) and isinstance(b, Dist):
            return self._leq(a.arg, b.arg, d, stack)
        for c in self._up.get(a, ()):
            if c == b or (c != a and self._leq(c, b, d, stack)):
                return True
        return False


__all__ = [
    "TypeExpr", "Special", "Base", "TApp", "TVar", "Arrow", "Pi", "EqT", "UnionT", "InterT", "Dist",
    "TYPE", "TOP_TYPE", "TOP", "JUDG", "EXEC", "NUL_T", "arrows", "type_to_text", "parse_type",
    "free_tvars", "has_tvars", "subst_type", "SubtypeRelation", "SubtypeBudgetError",
    "TypeSyntaxError",
]
