"""Probabilistic dependent types: typing, weighted reduction, full evaluation, sampling."""

from __future__ import annotations

import random as _random
from dataclasses import dataclass, field

from ..types import Arrow, Dist, InterT, Pi, SubtypeRelation, TypeExpr, UnionT, subst_type
from .stlc import ObjectTypeError, TypeMismatch, UnboundVariable, as_context
from .terms import App, Lam, Random, Sample, Term, Thunk, Var, de_bruijn, subst


@dataclass(frozen=True)
class WeightedStep:
    term: Term
    weight: float


class EvaluationBudgetError(RuntimeError):
    pass


# -- typing -----------------------------------------------------------------

def pdts_typecheck(gamma, e: Term, rel: SubtypeRelation | None = None) -> TypeExpr:
    """Type of ``e``; application uses subsumption against the domain."""
    rel = rel or SubtypeRelation()
    return _tc(as_context(gamma), e, rel)


def _tc(ctx, e, rel):
    if isinstance(e, Var):
        if e.name not in ctx:
            raise UnboundVariable(f"unbound variable {e.name}")
        return ctx[e.name]
    if isinstance(e, App):
        return _apply(_tc(ctx, e.fn, rel), _tc(ctx, e.arg, rel), e, rel)
    if isinstance(e, Lam):
        if not isinstance(e.ty, TypeExpr):
            raise ObjectTypeError(f"lambda over {e.var} needs a type annotation")
        inner = dict(ctx)
        inner[e.var] = e.ty
        return Arrow(e.ty, _tc(inner, e.body, rel))
    if isinstance(e, Random):
        return UnionT(_tc(ctx, e.left, rel), _tc(ctx, e.right, rel))
    if isinstance(e, Thunk):
        return Dist(_tc(ctx, e.arg, rel))
    if isinstance(e, Sample):
        tp = _tc(ctx, e.arg, rel)
        if isinstance(tp, Dist):
            return tp.arg
        raise TypeMismatch(f"sample expects a distribution, got {e.arg} : {tp}")
    raise ObjectTypeError(f"{type(e).__name__} is not a PDTS expression")


def _apply(tf, ta, e, rel):
    if isinstance(tf, (Arrow, Pi)):
        if not rel.leq(ta, tf.dom):
            raise TypeMismatch(f"argument {e.arg} : {ta} is not a subtype of {tf.dom}")
        return tf.cod if isinstance(tf, Arrow) else subst_type(tf.body, tf.var, ta)
    if isinstance(tf, UnionT):
        # whichever branch was chosen, the result lies in the union
        return UnionT(_apply(tf.left, ta, e, rel), _apply(tf.right, ta, e, rel))
    if isinstance(tf, InterT):
        try:
            return _apply(tf.left, ta, e, rel)
        except TypeMismatch:
            return _apply(tf.right, ta, e, rel)
    raise TypeMismatch(f"{e.fn} : {tf} is not a function")


# -- weighted reduction -----------------------------------------------------

def cbv_steps(e: Term) -> list:
    """Weak call-by-value step, innermost and left to right.

    Arguments (including both branches of ``random``) are evaluated before
    the enclosing redex fires; nothing reduces under a lambda.  Returns a
    list of WeightedStep; empty at values and stuck terms.
    """
    if isinstance(e, App):
        s = cbv_steps(e.fn)
        if s:
            return [WeightedStep(App(x.term, e.arg), x.weight) for x in s]
        s = cbv_steps(e.arg)
        if s:
            return [WeightedStep(App(e.fn, x.term), x.weight) for x in s]
        if isinstance(e.fn, Lam):
            return [WeightedStep(subst(e.fn.body, e.fn.var, e.arg), 1.0)]
        return []
    if isinstance(e, Random):
        s = cbv_steps(e.left)
        if s:
            return [WeightedStep(Random(e.rho, x.term, e.right), x.weight) for x in s]
        s = cbv_steps(e.right)
        if s:
            return [WeightedStep(Random(e.rho, e.left, x.term), x.weight) for x in s]
        # the second alternative goes to b with weight 1 - rho
        return [WeightedStep(e.left, e.rho), WeightedStep(e.right, 1.0 - e.rho)]
    if isinstance(e, Sample):
        s = cbv_steps(e.arg)
        if s:
            return [WeightedStep(Sample(x.term), x.weight) for x in s]
        if isinstance(e.arg, Thunk):
            return [WeightedStep(e.arg.arg, 1.0)]
        return []
    if isinstance(e, Thunk):
        s = cbv_steps(e.arg)
        return [WeightedStep(Thunk(x.term), x.weight) for x in s]
    return []


def pdts_step(e: Term) -> list:
    return cbv_steps(e)


@dataclass
class FullEval:
    dist: dict
    residual: float = 0.0
    steps: int = 0
    frontier: list = field(default_factory=list)

    @property
    def exhausted(self) -> bool:
        return bool(self.frontier)

    @property
    def mass(self) -> float:
        return sum(self.dist.values())


def pdts_full_eval(e: Term, budget: int = 10_000) -> FullEval:
    """Distribution over normal forms, summing path products.

    ``budget`` bounds the number of expanded terms; on exhaustion the mass
    still in flight is reported as ``residual``.  Zero-weight branches are
    dropped.  Alpha-equivalent normal forms are merged.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    dist, reps = {}, {}
    frontier = {de_bruijn(e): (e, 1.0)}
    steps = 0
    while frontier:
        nxt = {}
        items = list(frontier.values())
        for i, (t, m) in enumerate(items):
            succ = cbv_steps(t)
            if not succ:
                k = de_bruijn(t)
                rep = reps.setdefault(k, t)
                dist[rep] = dist.get(rep, 0.0) + m
                continue
            if steps >= budget:
                rest = []
                for x, w in items[i:]:
                    if cbv_steps(x):
                        rest.append((x, w))
                    else:
                        rep = reps.setdefault(de_bruijn(x), x)
                        dist[rep] = dist.get(rep, 0.0) + w
                rest += list(nxt.values())
                return FullEval(dist, sum(w for _, w in rest), steps, [x for x, _ in rest])
            steps += 1
            for s in succ:
                if s.weight <= 0.0:
                    continue
                k = de_bruijn(s.term)
                old = nxt.get(k)
                nxt[k] = (s.term if old is None else old[0], m * s.weight + (old[1] if old else 0.0))
        frontier = nxt
    return FullEval(dist, 0.0, steps, [])


def pdts_sample(e: Term, seed=None, budget: int = 10_000) -> Term:
    """Follow one reduction path, choosing among alternatives by weight."""
    rng = seed if isinstance(seed, _random.Random) else _random.Random(seed)
    for _ in range(budget + 1):
        succ = [s for s in cbv_steps(e) if s.weight > 0.0]
        if not succ:
            return e
        if len(succ) == 1:
            e = succ[0].term
            continue
        r = rng.random() * sum(s.weight for s in succ)
        acc = 0.0
        for s in succ:
            acc += s.weight
            if r < acc:
                e = s.term
                break
        else:
            e = succ[-1].term
    raise EvaluationBudgetError(f"sampled path longer than {budget} steps")


__all__ = ["pdts_typecheck", "pdts_step", "cbv_steps", "pdts_full_eval", "pdts_sample",
           "WeightedStep", "FullEval", "EvaluationBudgetError"]
