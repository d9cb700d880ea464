"""Encoding object-language programs as pointed atomspaces, and decoding back.

Each lambda becomes a combinator symbol with a typing atom and one
equation.  Lifting runs innermost first; variables bound by enclosing
lambdas that occur free in the body become leading parameters, so a
lambda with free locals is encoded as a partial application of its
combinator (a closure).  Closures carry no ``@`` mark: they are values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..atomspace import (FUNAPP, Atomspace, Node, Sym, Ty, Var as MVar, add_atom, mk_app,
                         mk_equation, mk_sym, mk_type, mk_typing, node_to_type, spine as mspine)
from ..engine import BudgetExhausted, NormalForms, evaluate, instantiate, match_node
from ..types import TOP_TYPE, Arrow, Base, Pi, TApp, TVar, TypeExpr
from . import pdts as _pdts
from . import pts as _pts
from . import stlc as _stlc
from .terms import (App, Const, Lam, PiT, Random, Sample, Term, Thunk, Var, apps, de_bruijn,
                    free_vars, subst)


class EncodingError(Exception):
    pass


@dataclass
class Encoding:
    """A pointed atomspace plus what is needed to read results back."""
    space: Atomspace
    lang: str
    table: dict = field(default_factory=dict)     # combinator -> (lambda, free locals)
    sorts: dict = field(default_factory=dict)     # PTS sort -> encoded type symbol

    @property
    def combinators(self):
        return sorted(self.table)


PDTS_ATOMS = """
(: Distribution (-> Type Type))
(: random (-> $t1 $t2 (U $t1 $t2)))
(= (random $a $b) $a)
(= (random $a $b) $b)
(: sample (-> (Distribution $t1) $t1))
(: thunk (-> $t1 (Distribution $t1)))
(= (sample (thunk $a)) $a)
"""

_PRIMS = ("random", "sample", "thunk", "Distribution")


# -- lifting ----------------------------------------------------------------

class _Lifter:
    def __init__(self, space, type_of, ann, to_texpr, avoid, untyped=False):
        self.space = space
        self.type_of = type_of          # (locals, term) -> object type
        self.ann = ann                  # lambda -> object type of its binder
        self.to_texpr = to_texpr
        self.avoid = set(avoid)
        self.untyped = untyped
        self.table = {}
        self.ids = None

    def fresh(self):
        while True:
            n = self.space.next_sym
            self.space = self.space._derived(next_sym=n + 1, keep_index=True)
            name = f"s{n}"
            if name not in self.avoid:
                return name

    def tag(self, locs, e):
        if self.untyped:
            return TOP_TYPE
        return self.to_texpr(self.type_of(locs, e))

    def add(self, node):
        self.space = add_atom(self.space, node)
        self.ids.next = max(self.ids.next, self.space.next_id)

    def lift(self, e, locs):
        """``locs`` is a tuple of (name, object type), outermost first."""
        names = [n for n, _ in locs]
        if isinstance(e, Var):
            if e.name in names:
                return mk_var(e.name, self.ids())
            t = TOP_TYPE if self.untyped else self.tag(locs, e)
            return mk_sym(e.name, t, self.ids())
        if isinstance(e, Const):
            return mk_type(self.to_texpr(e), self.ids())
        if isinstance(e, PiT):
            return mk_type(self.to_texpr(e), self.ids())
        if isinstance(e, App):
            fn = self.lift(e.fn, locs)
            arg = self.lift(e.arg, locs)
            return mk_app(fn, arg, self.tag(locs, e), act=self.ids(), eid=self.ids())
        if isinstance(e, Random):
            a = self.lift(e.left, locs)
            b = self.lift(e.right, locs)
            inner = mk_app(mk_sym("random", TOP_TYPE, self.ids()), a, TOP_TYPE,
                           act=self.ids(), eid=self.ids())
            return mk_app(inner, b, self.tag(locs, e), act=self.ids(), eid=self.ids())
        if isinstance(e, (Sample, Thunk)):
            prim = "sample" if isinstance(e, Sample) else "thunk"
            a = self.lift(e.arg, locs)
            return mk_app(mk_sym(prim, TOP_TYPE, self.ids()), a, self.tag(locs, e),
                          act=self.ids(), eid=self.ids())
        if isinstance(e, Lam):
            return self.lift_lam(e, locs)
        raise EncodingError(f"cannot encode {type(e).__name__}")

    def lift_lam(self, e, locs):
        fv = free_vars(e)
        seen, params = set(), []
        for name, t in reversed(locs):          # innermost binding wins
            if name in fv and name not in seen:
                seen.add(name)
                params.append((name, t))
        params.reverse()
        dom = self.ann(e)
        inner = tuple((n, t) for n, t in locs if n != e.var) + ((e.var, dom),)
        body = self.lift(e.body, inner)
        name = self.fresh()
        if self.untyped:
            ctype = TOP_TYPE
        else:
            ctype = self.to_texpr(self.type_of(tuple(params), _close(e, params)))
        lhs = mk_sym(name, ctype, self.ids())
        for v, _ in params + [(e.var, dom)]:
            lhs = mk_app(lhs, mk_var(v, self.ids()), eid=self.ids())
        self.add(mk_typing(mk_sym(name, ctype, self.ids()), ctype, self.ids()))
        self.add(mk_equation(lhs, body, self.ids()))
        self.table[name] = (e, tuple(v for v, _ in params))
        clo = mk_sym(name, ctype, self.ids())
        for v, _ in params:
            clo = mk_app(clo, mk_var(v, self.ids()), eid=self.ids())
        return clo


def mk_var(name, eid=0):
    return Node(MVar(name), TVar(name), eid=eid)


def _close(lam, params):
    """The combinator's own term: the lambda abstracted over its free locals."""
    out = lam
    for v, t in reversed(params):
        out = Lam(v, t, out)
    return out


def _finish(lifter, m_e, lang, sorts=None):
    space = add_atom(lifter.space, m_e, pointer=())
    return Encoding(space, lang, lifter.table, sorts or {})


def _names(e) -> set:
    out = set()
    if isinstance(e, Var):
        out.add(e.name)
    for f in ("fn", "arg", "body", "left", "right", "dom"):
        sub = getattr(e, f, None)
        if isinstance(sub, Term):
            out |= _names(sub)
    if isinstance(e, (Lam, PiT)):
        out.add(e.var)
    return out


def _context_atoms(space, ctx_items, to_texpr):
    for name, t in ctx_items:
        tt = to_texpr(t)
        space = add_atom(space, mk_typing(mk_sym(name, tt, space.next_id), tt, space.next_id + 1))
    return space


def _start(space, avoid, **kw):
    lf = _Lifter(space, avoid=avoid, **kw)
    lf.ids = space.ids()
    return lf


# -- STLC and untyped -------------------------------------------------------

def encode_stlc(gamma, e: Term) -> Encoding:
    """Pointed atomspace for ``e`` under ``gamma``: context typings, one
    combinator per lambda, and m_e with ``@`` on every application."""
    ctx = _stlc.as_context(gamma)
    _stlc.stlc_typecheck(ctx, e)
    space = _context_atoms(Atomspace(), ctx.items(), lambda t: t)

    def type_of(locs, t):
        full = dict(ctx)
        full.update(dict(locs))
        return _stlc._tc(full, t)

    lf = _start(space, _names(e) | set(ctx), type_of=type_of, ann=lambda lam: lam.ty,
                to_texpr=lambda t: t)
    m_e = lf.lift(e, ())
    return _finish(lf, m_e, "stlc")


def encode_untyped(e: Term) -> Encoding:
    """Every type becomes TopType; no typing precondition."""
    lf = _start(Atomspace(), _names(e), type_of=None, ann=lambda lam: TOP_TYPE,
                to_texpr=lambda t: TOP_TYPE, untyped=True)
    m_e = lf.lift(_erase(e), ())
    return _finish(lf, m_e, "untyped")


def _erase(e):
    if isinstance(e, Lam):
        return Lam(e.var, None, _erase(e.body))
    if isinstance(e, App):
        return App(_erase(e.fn), _erase(e.arg))
    return e


# -- PDTS -------------------------------------------------------------------

def pdts_base_space() -> Atomspace:
    return Atomspace().add(PDTS_ATOMS)


def encode_pdts(gamma, e: Term) -> Encoding:
    ctx = _stlc.as_context(gamma)
    _pdts.pdts_typecheck(ctx, e)
    space = _context_atoms(pdts_base_space(), ctx.items(), lambda t: t)

    def type_of(locs, t):
        full = dict(ctx)
        full.update(dict(locs))
        return _pdts.pdts_typecheck(full, t)

    lf = _start(space, _names(e) | set(ctx) | set(_PRIMS), type_of=type_of,
                ann=lambda lam: lam.ty, to_texpr=lambda t: t)
    m_e = lf.lift(e, ())
    return _finish(lf, m_e, "pdts")


# -- PTS --------------------------------------------------------------------

def sort_symbols(spec) -> dict:
    return {s: f"t{i}" for i, s in enumerate(spec.sorts, 1)}


def pts_to_texpr(t, sorts: dict, bound=frozenset(), arrows=True) -> TypeExpr:
    """PTS type as a type expression; non-dependent products become arrows
    unless ``arrows`` is false."""
    if isinstance(t, Const):
        return Base(sorts[t.name])
    if isinstance(t, Var):
        return TVar(t.name) if t.name in bound else Base(t.name)
    if isinstance(t, PiT):
        dom = pts_to_texpr(t.dom, sorts, bound, arrows)
        if arrows and t.var not in free_vars(t.body):
            return Arrow(dom, pts_to_texpr(t.body, sorts, bound, arrows))
        return Pi(t.var, dom, pts_to_texpr(t.body, sorts, bound | {t.var}, arrows))
    if isinstance(t, App):
        return TApp(pts_to_texpr(t.fn, sorts, bound, arrows), pts_to_texpr(t.arg, sorts, bound, arrows))
    return TOP_TYPE


def texpr_to_pts(t, sorts: dict) -> Term:
    back = {v: k for k, v in sorts.items()}
    if isinstance(t, Base):
        return Const(back[t.name]) if t.name in back else Var(t.name)
    if isinstance(t, TVar):
        return Var(t.name)
    if isinstance(t, Arrow):
        return PiT("_", texpr_to_pts(t.dom, sorts), texpr_to_pts(t.cod, sorts))
    if isinstance(t, Pi):
        return PiT(t.var, texpr_to_pts(t.dom, sorts), texpr_to_pts(t.body, sorts))
    if isinstance(t, TApp):
        return App(texpr_to_pts(t.fn, sorts), texpr_to_pts(t.arg, sorts))
    raise EncodingError(f"type {t} has no PTS reading")


def pts_rule_atoms(spec) -> str:
    sym = sort_symbols(spec)
    lines = [f"(: {sym[a]} {sym[b]})" for a, b in sorted(spec.axioms)]
    for l, m, n in sorted(spec.rules):
        tl, tm, tn = sym[l], sym[m], sym[n]
        lines.append(f"(: (-> $ta $tb) (trans (, (: $ta {tl}) (: $tb {tm})) {tn}))")
        lines.append(f"(: (Pi $x $ta $m) (trans (, (: $ta {tl}) (: $m {tm})) {tn}))")
    return "\n".join(lines)


def encode_pts(spec, gamma, e: Term, budget: int = 1000) -> Encoding:
    ctx = tuple(gamma.items()) if isinstance(gamma, dict) else tuple(gamma or ())
    if not (isinstance(e, Const) and e.name in spec.sorts):
        _pts.pts_typecheck(spec, ctx, e, budget)
    sorts = sort_symbols(spec)
    space = Atomspace().add(pts_rule_atoms(spec))
    to_t = lambda t: pts_to_texpr(_pts._normalize(t, budget), sorts)   # noqa: E731
    space = _context_atoms(space, ctx, to_t)
    checker = _pts._Checker(spec, budget)

    def type_of(locs, t):
        return checker.type_of(ctx + tuple(locs), t)

    avoid = _names(e) | {n for n, _ in ctx} | set(sorts.values())
    lf = _start(space, avoid, type_of=type_of, ann=lambda lam: lam.ty, to_texpr=to_t)
    m_e = lf.lift(e, ())
    return _finish(lf, m_e, "pts", sorts)


def pts_sort_of(space: Atomspace | Encoding, ty, sorts: dict | None = None,
                budget: int = 10_000) -> set:
    """Sorts assigned to the type ``ty`` by the encoded rule atoms.

    Each rule atom whose subject matches ``ty`` has its ``trans`` template
    run by the engine; a non-nul entry in the resulting tuple means the
    rule's conclusion sort applies.  A product given as a term is matched
    against the product atoms; a ``TypeExpr`` arrow against the arrow atoms.
    """
    if isinstance(space, Encoding):
        sorts = space.sorts if sorts is None else sorts
        space = space.space
    sorts = sorts or {}
    back = {v: k for k, v in sorts.items()}
    node = ty if isinstance(ty, Node) else mk_type(
        pts_to_texpr(ty, sorts, arrows=False) if isinstance(ty, Term) else ty)
    base = Atomspace(space.atoms, None, space.rel, space.next_id, space.next_sym)
    found = set()
    for atom in space.atoms:
        if not atom.is_key(":") or not atom.children[1].is_key("trans"):
            continue
        b = match_node(atom.children[0], node, {}, space.rel)
        if b is None:
            continue
        ids = base.ids()
        query = instantiate(atom.children[1], b, ids).replace(act=ids.next + 1)
        probe = add_atom(base, query, pointer=())
        res = evaluate(probe, budget)
        if not isinstance(res, NormalForms):
            continue
        concl = atom.children[1].children[1]
        for nf in res.spaces:
            _, entries = mspine(nf.atoms[nf.pointer[0]])
            if any(not (isinstance(x.label, Sym) and x.label.name == "nul") for x in entries):
                name = concl.label.t.name if isinstance(concl.label, Ty) else str(concl.label)
                found.add(back.get(name, name))
    return found


# -- decoding ---------------------------------------------------------------

def decode(node: Node, enc: Encoding) -> Term:
    """Read an expression node back as an object term via the combinator table."""
    lab = node.label
    if isinstance(lab, Sym):
        if lab.name in enc.table:
            lam, fv = enc.table[lab.name]
            if not fv:
                return lam
        return Var(lab.name)
    if isinstance(lab, MVar):
        return Var(lab.name)
    if isinstance(lab, Ty) or node.is_key("->"):
        t = node_to_type(node)
        if enc.lang == "pts":
            return texpr_to_pts(t, enc.sorts)
        return Var(str(t))
    if lab == FUNAPP:
        head, args = mspine(node)
        dargs = [decode(a, enc) for a in args]
        if isinstance(head.label, Sym):
            name = head.label.name
            if name in enc.table:
                lam, fv = enc.table[name]
                if len(args) >= len(fv):
                    return apps(_instantiate(lam, fv, dargs[:len(fv)]), *dargs[len(fv):])
            if enc.lang == "pdts" and name in ("sample", "thunk") and len(dargs) == 1:
                return Sample(dargs[0]) if name == "sample" else Thunk(dargs[0])
        return apps(decode(head, enc), *dargs)
    raise EncodingError(f"cannot decode node {node!r}")


def _instantiate(lam, fv, vals):
    tmp = [f"{v}#{i}" for i, v in enumerate(fv)]
    out = lam
    for v, t in zip(fv, tmp):
        out = subst(out, v, Var(t))
    for t, val in zip(tmp, vals):
        out = subst(out, t, val)
    return out


def decode_space(space: Atomspace, enc: Encoding) -> Term:
    return decode(space.atoms[space.pointer[0]], enc)


@dataclass
class EncodedResult:
    normal_forms: list          # decoded terms, alpha-distinct, in discovery order
    steps: int
    exhausted: bool = False
    raw: object = None


def run_encoded(enc: Encoding, budget: int = 10_000, trace=None) -> EncodedResult:
    res = evaluate(enc.space, budget, trace)
    spaces = res.spaces if isinstance(res, NormalForms) else res.normal
    out, seen = [], set()
    for s in spaces:
        t = decode_space(s, enc)
        k = de_bruijn(t)
        if k not in seen:
            seen.add(k)
            out.append(t)
    return EncodedResult(out, res.steps, isinstance(res, BudgetExhausted), res)


__all__ = ["Encoding", "EncodingError", "encode_stlc", "encode_untyped", "encode_pdts", "encode_pts",
           "pts_sort_of", "pts_rule_atoms", "sort_symbols", "pts_to_texpr", "texpr_to_pts",
           "decode", "decode_space", "run_encoded", "EncodedResult", "PDTS_ATOMS",
           "pdts_base_space"]
