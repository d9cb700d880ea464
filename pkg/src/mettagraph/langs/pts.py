"""Pure type systems: specs, typing with beta conversion, reduction."""

from __future__ import annotations

from dataclasses import dataclass

from ..types import Arrow, Base
from .stlc import ObjectTypeError, TypeMismatch, UnboundVariable
from .terms import (App, Const, Lam, NormalizationBudgetError, PiT, Term, Var, alpha_eq,
                    beta_steps, free_vars, normal_order_step, subst)


class ConversionBudgetError(ObjectTypeError):
    """Beta conversion did not settle within the normalisation budget."""


class NoRuleError(ObjectTypeError):
    pass


@dataclass(frozen=True)
class PtsSpec:
    """Sorts plus axioms ``(s1, s2)`` meaning s1 : s2 and rules ``(s1, s2, s3)``."""
    sorts: tuple
    axioms: frozenset
    rules: frozenset

    def __post_init__(self):
        known = set(self.sorts)
        for ax in self.axioms:
            if len(ax) != 2 or not set(ax) <= known:
                raise ValueError(f"axiom {ax} mentions an undeclared sort")
        for r in self.rules:
            if len(r) != 3 or not set(r) <= known:
                raise ValueError(f"rule {r} mentions an undeclared sort")

    @classmethod
    def indexed(cls, n: int, axioms=(), rules=()):
        """Sorts ``s1..sN`` with 1-based index pairs/triples."""
        names = tuple(f"s{i}" for i in range(1, n + 1))
        return cls(names,
                   frozenset((names[a - 1], names[b - 1]) for a, b in axioms),
                   frozenset((names[a - 1], names[b - 1], names[c - 1]) for a, b, c in rules))

    def index(self, sort: str) -> int:
        return self.sorts.index(sort) + 1

    def axiom_types(self, s):
        return sorted(b for a, b in self.axioms if a == s)

    def rule_results(self, s1, s2):
        return sorted(c for a, b, c in self.rules if a == s1 and b == s2)


# the simply typed calculus as a PTS: * : [] and (*, *, *)
LAMBDA_ARROW = PtsSpec(("*", "[]"), frozenset({("*", "[]")}), frozenset({("*", "*", "*")}))
QUINE = PtsSpec.indexed(1, axioms=[(1, 1)], rules=[(1, 1, 1)])


def pts_beta_step(e: Term) -> list:
    out, seen = [], set()
    for r in beta_steps(e):
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def _normalize(e, budget):
    for _ in range(budget):
        nxt = normal_order_step(e)
        if nxt is None:
            return e
        e = nxt
    if normal_order_step(e) is None:
        return e
    raise ConversionBudgetError(f"conversion did not normalise within {budget} steps")


def _whnf(e, budget):
    """Weak head normal form; enough to expose a sort or a product."""
    for _ in range(budget):
        head, args = e, []
        while isinstance(head, App):
            args.append(head.arg)
            head = head.fn
        if isinstance(head, Lam) and args:
            args.reverse()
            e = subst(head.body, head.var, args[0])
            for a in args[1:]:
                e = App(e, a)
            continue
        return e
    raise ConversionBudgetError(f"weak head reduction exceeded {budget} steps")


def pts_convertible(a: Term, b: Term, budget: int = 1000) -> bool:
    if alpha_eq(a, b):
        return True
    return alpha_eq(_normalize(a, budget), _normalize(b, budget))


class _Checker:
    def __init__(self, spec: PtsSpec, budget: int):
        self.spec = spec
        self.budget = budget

    def sort_of(self, ctx, t, what):
        ty = _whnf(self.type_of(ctx, t), self.budget)
        if not isinstance(ty, Const):
            raise TypeMismatch(f"{what} {t} has type {ty}, which is not a sort")
        return ty.name

    def type_of(self, ctx, e):
        spec = self.spec
        if isinstance(e, Const):
            if e.name not in spec.sorts:
                raise ObjectTypeError(f"unknown sort {e.name}")
            ups = spec.axiom_types(e.name)
            if not ups:
                raise NoRuleError(f"no axiom types the sort {e.name}")
            return Const(ups[0])
        if isinstance(e, Var):
            for name, ty in reversed(ctx):
                if name == e.name:
                    return ty
            raise UnboundVariable(f"unbound variable {e.name}")
        if isinstance(e, App):
            tf = _whnf(self.type_of(ctx, e.fn), self.budget)
            if not isinstance(tf, PiT):
                raise TypeMismatch(f"{e.fn} : {tf} is not a product")
            ta = self.type_of(ctx, e.arg)
            if not pts_convertible(ta, tf.dom, self.budget):
                raise TypeMismatch(f"argument {e.arg} : {ta}, expected {tf.dom}")
            return subst(tf.body, tf.var, e.arg)
        if isinstance(e, Lam):
            if not isinstance(e.ty, Term):
                raise ObjectTypeError(f"lambda over {e.var} needs a term annotation")
            self.sort_of(ctx, e.ty, "domain")
            inner = ctx + ((e.var, e.ty),)
            tb = self.type_of(inner, e.body)
            prod = PiT(e.var, e.ty, tb)
            self.type_of(ctx, prod)
            return prod
        if isinstance(e, PiT):
            s1 = self.sort_of(ctx, e.dom, "domain")
            s2 = self.sort_of(ctx + ((e.var, e.dom),), e.body, "codomain")
            out = spec.rule_results(s1, s2)
            if not out:
                raise NoRuleError(f"no rule ({s1}, {s2}, _) for the product {e}")
            return Const(out[0])
        raise ObjectTypeError(f"{type(e).__name__} is not a PTS expression")


def pts_typecheck(spec: PtsSpec, gamma, e: Term, budget: int = 1000,
                  check_context: bool = True) -> Term:
    """Type of ``e``.  Conversion normalises within ``budget`` steps and raises
    ConversionBudgetError when that is not enough."""
    ctx = tuple(gamma.items()) if isinstance(gamma, dict) else tuple(gamma or ())
    names = [n for n, _ in ctx]
    if len(set(names)) != len(names):
        raise ObjectTypeError("context binds a variable twice")
    ck = _Checker(spec, budget)
    if check_context:
        for i, (name, ty) in enumerate(ctx):
            ck.sort_of(ctx[:i], ty, f"type of {name}")
    return ck.type_of(ctx, e)


def _nonfree(x, t):
    return x not in free_vars(t)


def stlc_to_pts(ty, base_sort: str = "*"):
    """Simple type as a PTS term (arrows become non-dependent products)."""
    if isinstance(ty, Base):
        return Var(ty.name)
    if isinstance(ty, Arrow):
        return PiT("_", stlc_to_pts(ty.dom, base_sort), stlc_to_pts(ty.cod, base_sort))
    raise ValueError(f"not a simple type: {ty}")


def pts_to_stlc(t):
    if isinstance(t, Var):
        return Base(t.name)
    if isinstance(t, PiT) and _nonfree(t.var, t.body):
        return Arrow(pts_to_stlc(t.dom), pts_to_stlc(t.body))
    raise ValueError(f"not a simple type: {t}")


def stlc_term_to_pts(e):
    if isinstance(e, Var):
        return e
    if isinstance(e, App):
        return App(stlc_term_to_pts(e.fn), stlc_term_to_pts(e.arg))
    if isinstance(e, Lam):
        return Lam(e.var, stlc_to_pts(e.ty), stlc_term_to_pts(e.body))
    raise ValueError(f"not a simply typed term: {e}")


def stlc_context_to_pts(gamma, term=None, base_sort="*"):
    """Base types (from the context and the term's annotations) become
    ``A : *`` entries ahead of the translated bindings."""
    items = list(gamma.items()) if isinstance(gamma, dict) else list(gamma)
    bases = []

    def walk(t):
        if isinstance(t, Base):
            if t.name not in bases:
                bases.append(t.name)
        elif hasattr(t, "dom"):
            walk(t.dom)
            walk(t.cod)
    for _, t in items:
        walk(t)

    def walk_term(e):
        if isinstance(e, App):
            walk_term(e.fn)
            walk_term(e.arg)
        elif isinstance(e, Lam):
            walk(e.ty)
            walk_term(e.body)
    if term is not None:
        walk_term(term)
    return [(b, Const(base_sort)) for b in sorted(bases)] + [(x, stlc_to_pts(t)) for x, t in items]


__all__ = ["PtsSpec", "LAMBDA_ARROW", "QUINE", "pts_typecheck", "pts_beta_step", "pts_convertible",
           "ConversionBudgetError", "NoRuleError", "NormalizationBudgetError", "stlc_to_pts",
           "pts_to_stlc", "stlc_term_to_pts", "stlc_context_to_pts"]
