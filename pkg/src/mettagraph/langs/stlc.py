"""Simply typed and untyped lambda calculus: typing and beta reduction."""

from __future__ import annotations

from ..types import Arrow, Base, TypeExpr
from .terms import App, Lam, Term, Var, beta_steps, normalize


class ObjectTypeError(Exception):
    """Base class for object-language typing failures."""


class UnboundVariable(ObjectTypeError):
    pass


class TypeMismatch(ObjectTypeError):
    pass


def as_context(gamma) -> dict:
    if gamma is None:
        return {}
    if isinstance(gamma, dict):
        return dict(gamma)
    out = {}
    for name, ty in gamma:
        if name in out:
            raise ValueError(f"context binds {name!r} twice")
        out[name] = ty
    return out


def _is_simple(t) -> bool:
    if isinstance(t, Base):
        return True
    return isinstance(t, Arrow) and _is_simple(t.dom) and _is_simple(t.cod)


def stlc_typecheck(gamma, e: Term) -> TypeExpr:
    """Principal type of ``e`` under ``gamma`` with the var/app/abs rules."""
    ctx = as_context(gamma)
    for x, t in ctx.items():
        if not _is_simple(t):
            raise ObjectTypeError(f"context entry {x} : {t} is not a simple type")
    return _tc(ctx, e)


def _tc(ctx, e):
    if isinstance(e, Var):
        if e.name not in ctx:
            raise UnboundVariable(f"unbound variable {e.name}")
        return ctx[e.name]
    if isinstance(e, App):
        tf = _tc(ctx, e.fn)
        ta = _tc(ctx, e.arg)
        if not isinstance(tf, Arrow):
            raise TypeMismatch(f"{e.fn} : {tf} is not a function")
        if tf.dom != ta:
            raise TypeMismatch(f"argument {e.arg} : {ta}, expected {tf.dom}")
        return tf.cod
    if isinstance(e, Lam):
        if e.ty is None or not _is_simple(e.ty):
            raise ObjectTypeError(f"lambda over {e.var} needs a simple type annotation")
        inner = dict(ctx)
        inner[e.var] = e.ty
        return Arrow(e.ty, _tc(inner, e.body))
    raise ObjectTypeError(f"{type(e).__name__} is not part of the simply typed calculus")


def stlc_beta_step(e: Term) -> list:
    """All one-step beta reducts (one per redex), capture-avoiding."""
    out, seen = [], set()
    for r in beta_steps(e):
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def stlc_normalize(e: Term, budget: int = 10_000) -> Term:
    return normalize(e, budget)


untyped_beta_step = stlc_beta_step


__all__ = ["stlc_typecheck", "stlc_beta_step", "stlc_normalize", "untyped_beta_step",
           "ObjectTypeError", "UnboundVariable", "TypeMismatch", "as_context"]
