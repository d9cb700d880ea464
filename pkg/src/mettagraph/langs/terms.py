"""Shared lambda-calculus syntax trees for the object languages.

One AST serves STLC, the untyped calculus, PTS and PDTS.  ``Lam.ty`` is a
``TypeExpr`` in STLC/PDTS, a term in PTS and ``None`` when untyped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..types import TypeExpr, type_to_text


class Term:
    __slots__ = ()

    def __str__(self):
        return show(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class Const(Term):
    """A sort constant (PTS)."""
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class App(Term):
    fn: Term
    arg: Term

    def __repr__(self):
        return show(self)


@dataclass(frozen=True, repr=False)
class Lam(Term):
    var: str
    ty: Any
    body: Term

    def __repr__(self):
        return show(self)


@dataclass(frozen=True, repr=False)
class PiT(Term):
    """Dependent product as a term (PTS)."""
    var: str
    dom: Term
    body: Term

    def __repr__(self):
        return show(self)


@dataclass(frozen=True, repr=False)
class Random(Term):
    rho: float
    left: Term
    right: Term

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"random weight {self.rho} outside [0, 1]")

    def __repr__(self):
        return show(self)


@dataclass(frozen=True, repr=False)
class Sample(Term):
    arg: Term

    def __repr__(self):
        return show(self)


@dataclass(frozen=True, repr=False)
class Thunk(Term):
    arg: Term

    def __repr__(self):
        return show(self)


def apps(f, *args):
    for a in args:
        f = App(f, a)
    return f


def spine(t):
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    return t, args[::-1]


# -- printing ---------------------------------------------------------------

def _fmt_rho(r):
    return repr(float(r)).rstrip("0").rstrip(".") if r not in (0, 1) else str(int(r))


def show_type(t) -> str:
    """Object-syntax rendering of a simple/PDTS type."""
    from ..types import Arrow, Base, Dist, InterT, Pi, Special, UnionT
    if isinstance(t, (Base, Special)):
        return t.name
    if isinstance(t, Arrow):
        d = show_type(t.dom)
        if isinstance(t.dom, (Arrow, Pi, UnionT, InterT)):
            d = f"({d})"
        return f"{d} -> {show_type(t.cod)}"
    if isinstance(t, Dist):
        return f"D({show_type(t.arg)})"
    if isinstance(t, UnionT):
        return f"{_tparen(t.left, 1)} | {_tparen(t.right, 1)}"
    if isinstance(t, InterT):
        return f"{_tparen(t.left, 2)} & {_tparen(t.right, 2)}"
    if isinstance(t, Pi):
        return f"Pi {t.var}:{show_type(t.dom)}. {show_type(t.body)}"
    if isinstance(t, TypeExpr):
        return type_to_text(t)
    return show(t)


def _tparen(t, level):
    from ..types import Arrow, InterT, Pi, UnionT
    s = show_type(t)
    if isinstance(t, (Arrow, Pi)) or (level == 2 and isinstance(t, UnionT)):
        return f"({s})"
    if level == 1 and isinstance(t, UnionT):
        return f"({s})"
    if level == 2 and isinstance(t, InterT):
        return f"({s})"
    return s


def show(t) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    if isinstance(t, Lam):
        if t.ty is None:
            return f"\\{t.var}. {show(t.body)}"
        ty = show(t.ty) if isinstance(t.ty, Term) else show_type(t.ty)
        return f"\\{t.var}:{ty}. {show(t.body)}"
    if isinstance(t, PiT):
        return f"Pi {t.var}:{show(t.dom)}. {show(t.body)}"
    if isinstance(t, App):
        f = show(t.fn)
        if isinstance(t.fn, (Lam, PiT)):
            f = f"({f})"
        a = show(t.arg)
        if isinstance(t.arg, (App, Lam, PiT)):
            a = f"({a})"
        return f"{f} {a}"
    if isinstance(t, Random):
        return f"random[{_fmt_rho(t.rho)}]({show(t.left)}, {show(t.right)})"
    if isinstance(t, Sample):
        return f"sample({show(t.arg)})"
    if isinstance(t, Thunk):
        return f"thunk({show(t.arg)})"
    raise TypeError(f"not a term: {t!r}")


# -- variables and substitution ---------------------------------------------

def free_vars(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    if isinstance(t, Lam):
        fv = free_vars(t.body) - {t.var}
        return fv | free_vars(t.ty) if isinstance(t.ty, Term) else fv
    if isinstance(t, PiT):
        return free_vars(t.dom) | (free_vars(t.body) - {t.var})
    if isinstance(t, Random):
        return free_vars(t.left) | free_vars(t.right)
    if isinstance(t, (Sample, Thunk)):
        return free_vars(t.arg)
    return frozenset()


def _all_names(t) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return set()
    if isinstance(t, App):
        return _all_names(t.fn) | _all_names(t.arg)
    if isinstance(t, Lam):
        out = {t.var} | _all_names(t.body)
        return out | _all_names(t.ty) if isinstance(t.ty, Term) else out
    if isinstance(t, PiT):
        return {t.var} | _all_names(t.dom) | _all_names(t.body)
    if isinstance(t, Random):
        return _all_names(t.left) | _all_names(t.right)
    if isinstance(t, (Sample, Thunk)):
        return _all_names(t.arg)
    return set()


def prime(name: str, avoid) -> str:
    while name in avoid:
        name = name + "'"
    return name


def subst(t, x: str, s) -> Term:
    """Capture-avoiding t[x := s]; clashing binders get primes appended."""
    fv_s = free_vars(s)

    def go(t):
        if isinstance(t, Var):
            return s if t.name == x else t
        if isinstance(t, Const):
            return t
        if isinstance(t, App):
            return App(go(t.fn), go(t.arg))
        if isinstance(t, Random):
            return Random(t.rho, go(t.left), go(t.right))
        if isinstance(t, Sample):
            return Sample(go(t.arg))
        if isinstance(t, Thunk):
            return Thunk(go(t.arg))
        if isinstance(t, (Lam, PiT)):
            is_lam = isinstance(t, Lam)
            ann = t.ty if is_lam else t.dom
            ann2 = go(ann) if isinstance(ann, Term) else ann
            if t.var == x:
                return Lam(t.var, ann2, t.body) if is_lam else PiT(t.var, ann2, t.body)
            v, body = t.var, t.body
            if v in fv_s and x in free_vars(body):
                nv = prime(v, fv_s | _all_names(body) | {x})
                body = rename(body, v, nv)
                v = nv
            return Lam(v, ann2, go(body)) if is_lam else PiT(v, ann2, go(body))
        raise TypeError(f"not a term: {t!r}")

    return go(t)


def rename(t, old: str, new: str) -> Term:
    return subst(t, old, Var(new))


# -- alpha equivalence ------------------------------------------------------

def de_bruijn(t, env=()):
    """Nameless form; free variables keep their names."""
    if isinstance(t, Var):
        for i, n in enumerate(reversed(env)):
            if n == t.name:
                return ("b", i)
        return ("f", t.name)
    if isinstance(t, Const):
        return ("c", t.name)
    if isinstance(t, App):
        return ("app", de_bruijn(t.fn, env), de_bruijn(t.arg, env))
    if isinstance(t, Lam):
        ann = de_bruijn(t.ty, env) if isinstance(t.ty, Term) else ("ty", str(t.ty))
        return ("lam", ann, de_bruijn(t.body, env + (t.var,)))
    if isinstance(t, PiT):
        return ("pi", de_bruijn(t.dom, env), de_bruijn(t.body, env + (t.var,)))
    if isinstance(t, Random):
        return ("rnd", float(t.rho), de_bruijn(t.left, env), de_bruijn(t.right, env))
    if isinstance(t, Sample):
        return ("sample", de_bruijn(t.arg, env))
    if isinstance(t, Thunk):
        return ("thunk", de_bruijn(t.arg, env))
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(a, b) -> bool:
    return de_bruijn(a) == de_bruijn(b)


def size(t) -> int:
    if isinstance(t, (Var, Const)):
        return 1
    if isinstance(t, App):
        return 1 + size(t.fn) + size(t.arg)
    if isinstance(t, Lam):
        return 1 + size(t.body) + (size(t.ty) if isinstance(t.ty, Term) else 0)
    if isinstance(t, PiT):
        return 1 + size(t.dom) + size(t.body)
    if isinstance(t, Random):
        return 1 + size(t.left) + size(t.right)
    return 1 + size(t.arg)


def count_lams(t) -> int:
    if isinstance(t, App):
        return count_lams(t.fn) + count_lams(t.arg)
    if isinstance(t, Lam):
        return 1 + count_lams(t.body)
    if isinstance(t, PiT):
        return count_lams(t.dom) + count_lams(t.body)
    if isinstance(t, Random):
        return count_lams(t.left) + count_lams(t.right)
    if isinstance(t, (Sample, Thunk)):
        return count_lams(t.arg)
    return 0


# -- generic full beta ------------------------------------------------------

def beta_steps(t) -> list:
    """One result per beta redex anywhere in ``t`` (including under binders)."""
    out = []
    if isinstance(t, App):
        if isinstance(t.fn, Lam):
            out.append(subst(t.fn.body, t.fn.var, t.arg))
        out += [App(f, t.arg) for f in beta_steps(t.fn)]
        out += [App(t.fn, a) for a in beta_steps(t.arg)]
    elif isinstance(t, Lam):
        if isinstance(t.ty, Term):
            out += [Lam(t.var, a, t.body) for a in beta_steps(t.ty)]
        out += [Lam(t.var, t.ty, b) for b in beta_steps(t.body)]
    elif isinstance(t, PiT):
        out += [PiT(t.var, a, t.body) for a in beta_steps(t.dom)]
        out += [PiT(t.var, t.dom, b) for b in beta_steps(t.body)]
    elif isinstance(t, Random):
        out += [Random(t.rho, a, t.right) for a in beta_steps(t.left)]
        out += [Random(t.rho, t.left, b) for b in beta_steps(t.right)]
    elif isinstance(t, Sample):
        out += [Sample(a) for a in beta_steps(t.arg)]
    elif isinstance(t, Thunk):
        out += [Thunk(a) for a in beta_steps(t.arg)]
    return out


def normal_order_step(t):
    """Leftmost-outermost beta step, or None at a normal form."""
    if isinstance(t, App):
        if isinstance(t.fn, Lam):
            return subst(t.fn.body, t.fn.var, t.arg)
        f = normal_order_step(t.fn)
        if f is not None:
            return App(f, t.arg)
        a = normal_order_step(t.arg)
        return None if a is None else App(t.fn, a)
    if isinstance(t, Lam):
        if isinstance(t.ty, Term):
            a = normal_order_step(t.ty)
            if a is not None:
                return Lam(t.var, a, t.body)
        b = normal_order_step(t.body)
        return None if b is None else Lam(t.var, t.ty, b)
    if isinstance(t, PiT):
        a = normal_order_step(t.dom)
        if a is not None:
            return PiT(t.var, a, t.body)
        b = normal_order_step(t.body)
        return None if b is None else PiT(t.var, t.dom, b)
    return None


class NormalizationBudgetError(RuntimeError):
    pass


def normalize(t, budget: int = 10_000):
    """Beta normal form by normal-order reduction."""
    for _ in range(budget):
        nxt = normal_order_step(t)
        if nxt is None:
            return t
        t = nxt
    if normal_order_step(t) is None:
        return t
    raise NormalizationBudgetError(f"no normal form within {budget} steps")


__all__ = [
    "Term", "Var", "Const", "App", "Lam", "PiT", "Random", "Sample", "Thunk", "apps", "spine",
    "show", "show_type", "free_vars", "subst", "rename", "prime", "de_bruijn", "alpha_eq", "size",
    "count_lams", "beta_steps", "normal_order_step", "normalize", "NormalizationBudgetError",
]
