"""Transition-system views of object programs and encoded atomspaces.

Both views share one action alphabet: ``update`` for a reduction step plus
relation probes.  A probe is a self-loop that fires iff its judgment holds
at the state (or, for the ``not`` form, iff it fails):

* ``("is-of-type", T)``: the expression's type is below ``T``
* ``("is-of-subtype", T1, T2)``: ``T1 <= T2`` in the state's subtype relation
* ``("is-body-of-lambda",)``: the expression is a lambda (a closure when encoded)
* ``("head", name)``: the head symbol of the expression's application spine
"""

from __future__ import annotations

from dataclasses import dataclass

from ..atomspace import Atomspace, Sym, spine as mspine
from ..engine import TAU_RULES, update_steps
from ..lts import Lts
from ..types import SubtypeRelation, type_to_text
from . import pdts as _pdts
from . import stlc as _stlc
from .pts import pts_beta_step
from .terms import Lam, Random, Sample, Thunk, Var, spine


@dataclass(frozen=True)
class Observation:
    type: object
    head: str | None
    is_lambda: bool


def probe_name(p, positive=True) -> str:
    kind, *args = p
    txt = f"{kind}({', '.join(type_to_text(a) if not isinstance(a, str) else a for a in args)})"
    return txt if positive else "not " + txt


def _fire(probes, obs: Observation, rel: SubtypeRelation):
    out = []
    for p in probes:
        kind = p[0]
        if kind == "is-of-type":
            ok = obs.type is not None and rel.leq(obs.type, p[1])
        elif kind == "is-of-subtype":
            ok = rel.leq(p[1], p[2])
        elif kind == "is-body-of-lambda":
            ok = obs.is_lambda
        elif kind == "head":
            ok = obs.head == p[1]
        else:
            raise ValueError(f"unknown probe {p!r}")
        out.append(probe_name(p, ok))
    return out


# -- object side ------------------------------------------------------------

def _term_head(e):
    h, _ = spine(e)
    if isinstance(h, Var):
        return h.name
    if isinstance(h, Lam):
        return "lambda"
    if isinstance(h, Random):
        return "random"
    if isinstance(h, Sample):
        return "sample"
    if isinstance(h, Thunk):
        return "thunk"
    return None


def observe_term(lang, gamma, e) -> Observation:
    try:
        if lang == "stlc":
            t = _stlc.stlc_typecheck(gamma, e)
        elif lang == "pdts":
            t = _pdts.pdts_typecheck(gamma, e)
        else:
            t = None
    except _stlc.ObjectTypeError:
        t = None
    return Observation(t, _term_head(e), isinstance(e, Lam))


def object_steps(lang, e):
    """(term, weight) successors under the evaluation strategy shared with the engine."""
    if lang == "pts":
        return [(x, 1.0) for x in pts_beta_step(e)]
    return [(s.term, s.weight) for s in _pdts.cbv_steps(e)]


def lts_of_object(lang: str, gamma, e=None, probes=(), weighted: bool = False,
                  rel: SubtypeRelation | None = None) -> Lts:
    """States are expressions; ``update`` is one reduction step.

    STLC, untyped and PDTS terms step by the weak call-by-value strategy
    the encoded atomspaces follow; PTS terms by full beta.  With
    ``weighted`` the PDTS weights are kept (alternatives reaching the same
    term are merged).
    """
    rel = rel or SubtypeRelation()
    ctx = _stlc.as_context(gamma) if lang != "pts" else gamma

    def step(s):
        out = []
        if weighted:
            acc = {}
            for t, w in object_steps(lang, s):
                if w > 0:
                    acc[t] = acc.get(t, 0.0) + w
            out += [("update", t, w) for t, w in acc.items()]
        else:
            seen = set()
            for t, w in object_steps(lang, s):
                if w > 0 and t not in seen:
                    seen.add(t)
                    out.append(("update", t))
        if probes:
            for name in _fire(probes, observe_term(lang, ctx, s), rel):
                out.append((name, s, 1.0) if weighted else (name, s))
        return out

    return Lts(step, weighted, f"{lang}-terms", e)


# -- atomspace side ---------------------------------------------------------

def settle(space: Atomspace, limit: int = 100_000) -> Atomspace:
    """Follow pointer moves, returns and deactivations until a rewrite or halt."""
    for _ in range(limit):
        steps = update_steps(space)
        if len(steps) != 1 or steps[0].rule not in TAU_RULES:
            return space
        space = steps[0].space
    raise RuntimeError("internal steps did not settle")


def observe_space(space: Atomspace, table=None) -> Observation:
    if space.pointer is None:
        return Observation(None, None, False)
    atom = space.atoms[space.pointer[0]]
    head, args = mspine(atom)
    name = head.label.name if isinstance(head.label, Sym) else None
    is_lam = False
    if name is not None:
        if table is not None:
            is_lam = name in table and len(args) == len(table[name][1])
            if name in table:
                name = "lambda"
        elif any(len(mspine(lhs)[1]) > len(args) for lhs, _ in space.equations(name)):
            is_lam = True
            name = "lambda"
    return Observation(atom.type, name, is_lam)


def lts_of_atomspace(space, probes=(), compress: bool = True, table=None) -> Lts:
    """States are pointed atomspaces (compared up to graph isomorphism).

    With ``compress`` the engine's pointer moves, returns and
    deactivations are internal: each ``update`` is one rewrite followed by
    internal steps up to the next rewrite or halt.
    """
    from .encode import Encoding
    if isinstance(space, Encoding):
        table = space.table if table is None else table
        space = space.space

    def step(s):
        out = []
        for st in update_steps(s):
            nxt = settle(st.space) if compress else st.space
            out.append(("update", nxt))
        seen, uniq = set(), []
        for a, t in out:
            if t not in seen:
                seen.add(t)
                uniq.append((a, t))
        if probes:
            for name in _fire(probes, observe_space(s, table), s.rel):
                uniq.append((name, s))
        return uniq

    start = settle(space) if compress else space
    return Lts(step, False, "atomspace", start)


def erase_weights(lts: Lts) -> Lts:
    if not lts.weighted:
        return lts

    def step(s):
        seen, out = set(), []
        for a, t, w in lts.successors(s):
            if w > 0 and (a, t) not in seen:
                seen.add((a, t))
                out.append((a, t))
        return out
    return Lts(step, False, lts.name + "-unweighted", lts.initial)


__all__ = ["Observation", "observe_term", "observe_space", "object_steps", "lts_of_object",
           "lts_of_atomspace", "settle", "erase_weights", "probe_name"]
