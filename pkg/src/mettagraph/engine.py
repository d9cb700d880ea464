"""Pointer-driven rewriting of atomspaces: funapp and trans rules, update, evaluate."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from . import metagraph as mg
from .atomspace import (FUNAPP, NUL, Atomspace, Key, Node, Sym, Ty, Var, get_at, mk_app,
                        mk_sym, mk_type, node_violations, plain_sig, replace_at, spine)
from .types import TOP, TOP_TYPE, TYPE, Base, Pi, TVar, TypeExpr, has_tvars, type_to_text


class EngineError(Exception):
    pass


# -- matching ---------------------------------------------------------------

def match_node(pat: Node, host: Node, binds: dict, rel) -> dict | None:
    """Structural match of ``pat`` against ``host``; variables bind subtrees."""
    if isinstance(pat.label, Var):
        name = pat.label.name
        if name in binds:
            return binds if plain_sig(binds[name]) == plain_sig(host) else None
        out = dict(binds)
        out[name] = host
        return out
    if isinstance(pat.label, Ty) and isinstance(host.label, Ty) and has_tvars(pat.label.t):
        return _unify_type(pat.label.t, host.label.t, binds)
    if not _same_label(pat.label, host.label) or len(pat.children) != len(host.children):
        return None
    if (pat.label == host.label and not has_tvars(pat.type) and not has_tvars(host.type)
            and not rel.leq(host.type, pat.type)):
        return None
    for pc, hc in zip(pat.children, host.children):
        binds = match_node(pc, hc, binds, rel)
        if binds is None:
            return None
    return binds


def _same_label(a, b) -> bool:
    if a == b:
        return True
    # a base type used as a term and the same name as a symbol
    for x, y in ((a, b), (b, a)):
        if isinstance(x, Ty) and isinstance(y, Sym) and x.t == Base(y.name):
            return True
    return False


def _unify_type(pt, ht, binds):
    """Match a type pattern with type variables against a closed type."""
    if isinstance(pt, TVar):
        # keep bound type variables as opaque leaves, never as pattern variables
        node = Node(Ty(ht), TYPE) if isinstance(ht, TVar) else mk_type(ht)
        if pt.name in binds:
            return binds if plain_sig(binds[pt.name]) == plain_sig(node) else None
        out = dict(binds)
        out[pt.name] = node
        return out
    if type(pt) is not type(ht):
        return None
    if isinstance(pt, Pi):
        binds = _unify_type(pt.dom, ht.dom, binds)
        return None if binds is None else _unify_type(pt.body, ht.body, binds)
    fields = [f for f in pt.__dataclass_fields__]
    for f in fields:
        a, b = getattr(pt, f), getattr(ht, f)
        if isinstance(a, TypeExpr):
            binds = _unify_type(a, b, binds)
            if binds is None:
                return None
        elif a != b:
            return None
    return binds


@dataclass(frozen=True)
class Match:
    atom: int
    path: tuple
    bindings: dict = field(hash=False, compare=False)

    def binding_text(self):
        from .atomspace import node_text
        return {k: node_text(v) for k, v in sorted(self.bindings.items())}


def _canonical_atoms(space: Atomspace, exclude=None):
    idx = [i for i in range(len(space.atoms)) if i != exclude]
    idx.sort(key=lambda i: space.atoms[i].sig)
    return idx


def match(pattern: Node, host: Atomspace, exclude=None) -> list:
    """All matches of ``pattern`` against top-level atoms, in canonical order."""
    out = []
    for i in _canonical_atoms(host, exclude):
        b = match_node(pattern, host.atoms[i], {}, host.rel)
        if b is not None:
            out.append(Match(i, (), b))
    return out


def _conjuncts(pattern: Node):
    head, args = spine(pattern)
    if isinstance(head.label, Sym) and head.label.name == "," and args:
        out = []
        for a in args:
            out.extend(_conjuncts(a))
        return out
    return [pattern]


def match_conj(pattern: Node, host: Atomspace, exclude=None) -> list:
    """Joint matches of a ``(, p1 p2 ...)`` conjunction; returns binding dicts."""
    order = _canonical_atoms(host, exclude)
    results = [{}]
    for p in _conjuncts(pattern):
        nxt = []
        for b in results:
            for i in order:
                b2 = match_node(p, host.atoms[i], b, host.rel)
                if b2 is not None:
                    nxt.append(b2)
        results = nxt
    return results


# -- instantiation ----------------------------------------------------------

def instantiate(template: Node, binds: dict, ids) -> Node:
    """Substitute bindings into ``template`` with fresh edge ids.

    Closed tags on template nodes are kept; open ones are re-inferred from
    the instantiated children.
    """
    if isinstance(template.label, Var):
        v = binds.get(template.label.name)
        if v is None:
            return Node(template.label, template.type, eid=ids())
        return _copy(v, ids)
    kids = tuple(instantiate(c, binds, ids) for c in template.children)
    act = ids() if template.act is not None else None
    if template.label == FUNAPP:
        fresh = mk_app(kids[0], kids[1])
        tag = template.type if not has_tvars(template.type) else fresh.type
        return Node(FUNAPP, tag, fresh.slots, kids, eid=ids(), act=act)
    return Node(template.label, template.type, template.slots, kids, eid=ids(), act=act)


def _copy(n: Node, ids) -> Node:
    kids = tuple(_copy(c, ids) for c in n.children)
    return Node(n.label, n.type, n.slots, kids, eid=ids(),
                act=ids() if n.act is not None else None)


# -- rule graphs ------------------------------------------------------------

@dataclass(frozen=True)
class RuleGraph:
    """A grounded rewrite rule.

    ``lhs`` is the activated node being replaced (input, ``*``), ``rhs`` the
    output (``**``).  ``context`` is the atom around the input, which is
    carried over unchanged (the LR part).
    """
    kind: str                 # "funapp" | "trans"
    lhs: Node
    rhs: Node
    position: tuple
    bindings: dict = field(default_factory=dict, hash=False, compare=False)

    def to_metagraph(self):
        def side(n: Node, s, marker, top=True):
            g = mg.Edge(len(n.children), n.type,
                        mg.Label((n.label, s, marker if top else ""), n.eid), n.slots)
            for i, c in enumerate(n.children):
                target = i + 1
                for _ in range(i):
                    target = 2 * target + 1
                g = mg.Connect(g, side(c, s, marker, False), n.type, mg.Label(NUL, 0), ((target, 0),))
            return g
        return mg.union(side(self.lhs, "L", "*"), side(self.rhs, "R", "**"), TOP, mg.Label(NUL, 0))


Action = tuple  # sequence of RuleGraphs, applied left to right


def _require_active(space: Atomspace, kw: str):
    if space.pointer is None:
        raise EngineError("atomspace has no pointer")
    F = space.pointed()
    if F.act is None:
        raise EngineError("pointed node is not activated")
    if not F.is_key(kw):
        raise EngineError(f"pointed node is not a {kw} node")
    return F


def instantiate_funapp(F_or_space, host: Atomspace | None = None) -> list:
    """One rule per equation whose left side matches the activated funapp."""
    space = F_or_space if isinstance(F_or_space, Atomspace) else host
    F = _require_active(space, "funapp")
    head, _ = spine(F)
    if not isinstance(head.label, Sym):
        return []
    ids = space.ids()
    rules = []
    for lhs, rhs in space.equations(head.label.name):
        b = match_node(lhs, F, {}, space.rel)
        if b is None:
            continue
        out = instantiate(rhs, b, ids)
        if not has_tvars(out.type) and not has_tvars(F.type) and not space.rel.leq(out.type, F.type):
            out = out.replace(type=F.type)
        rules.append(RuleGraph("funapp", F, out, space.pointer, b))
    return rules


def instantiate_trans(F_or_space, host: Atomspace | None = None) -> RuleGraph:
    space = F_or_space if isinstance(F_or_space, Atomspace) else host
    F = _require_active(space, "trans")
    pattern, template = F.children
    ai = space.pointer[0]
    ids = space.ids()
    found = match_conj(pattern, space, exclude=ai)
    results = [instantiate(template, b, ids) for b in found]
    width = max(space.node_count(exclude=ai), len(results))
    results += [mk_sym("nul", TOP_TYPE, ids()) for _ in range(width - len(results))]
    out = mk_sym("tuple", TOP_TYPE, ids())
    for r in results:
        out = mk_app(out, r, eid=ids())
    return RuleGraph("trans", F, out, space.pointer, {"matches": found})


def apply_rule(rule: RuleGraph, host: Atomspace, m=None) -> Atomspace:
    """Replace the rule's input by its output; invalid results leave ``host`` unchanged."""
    if host.pointer != rule.position or host.pointed() != rule.lhs:
        return host
    nxt = max(host.next_id, _max_id(rule.rhs) + 1)
    new = host.replace_pointed(rule.rhs, next_id=nxt)
    atom = new.atoms[new.pointer[0]]
    if node_violations(atom, new.rel):
        return host
    return new


def _max_id(n: Node) -> int:
    m = max(n.eid, n.act or 0)
    for c in n.children:
        m = max(m, _max_id(c))
    return m


# -- update -----------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    rule: str            # move-pointer | return | deactivate | funapp | trans
    space: Atomspace


TAU_RULES = frozenset({"move-pointer", "return", "deactivate"})


def update_steps(space: Atomspace) -> list:
    """Labelled successors of one update; empty means the space has halted."""
    if space.pointer is None:
        return []
    ai, path = space.pointer[0], space.pointer[1:]
    atom = space.atoms[ai]
    F = get_at(atom, path)
    if F.act is None:
        for k in range(len(path) - 1, -1, -1):
            if get_at(atom, path[:k]).act is not None:
                return [Step("return", space.with_pointer((ai,) + path[:k]))]
        return []
    for i, c in enumerate(F.children):
        if c.act is not None:
            return [Step("move-pointer", space.with_pointer(space.pointer + (i,)))]
    if F.is_key("funapp"):
        rules = instantiate_funapp(space)
        if not rules:
            return [Step("deactivate", space.replace_pointed(F.replace(act=None)))]
        out, seen = [], set()
        for r in rules:
            new = apply_rule(r, space)
            if new is space or new.key in seen:
                continue
            seen.add(new.key)
            out.append(Step("funapp", new))
        return out
    if F.is_key("trans"):
        r = instantiate_trans(space)
        new = apply_rule(r, space)
        return [] if new is space else [Step("trans", new)]
    return [Step("deactivate", space.replace_pointed(F.replace(act=None)))]


def update(space: Atomspace) -> list:
    return [s.space for s in update_steps(space)]


# -- evaluation -------------------------------------------------------------

@dataclass
class NormalForms:
    spaces: list
    steps: int


@dataclass
class BudgetExhausted:
    frontier: list
    steps: int
    normal: list = field(default_factory=list)


def evaluate(space: Atomspace, budget: int = 10_000, trace: Callable | None = None):
    """Breadth-first closure of update, ``budget`` bounding the expansions."""
    if budget < 1:
        raise ValueError("budget must be positive")
    frontier = [space]
    normal, nf_keys = [], set()
    steps = 0
    while frontier:
        layer = {}
        for i, s in enumerate(frontier):
            succ = update_steps(s)
            if not succ:
                if s.key not in nf_keys:
                    nf_keys.add(s.key)
                    normal.append(s)
                continue
            if steps >= budget:
                rest = [s] + frontier[i + 1:] + list(layer.values())
                return BudgetExhausted(rest, steps, normal)
            steps += 1
            if trace is not None:
                trace({"step": steps, "rule": succ[0].rule if len({x.rule for x in succ}) == 1
                       else "mixed", "position": list(s.pointer or ()),
                       "successors": [x.space.digest() for x in succ]})
            for st in succ:
                layer.setdefault(st.space.key, st.space)
        frontier = list(layer.values())
    return NormalForms(normal, steps)


def json_trace(stream):
    def emit(rec):
        stream.write(json.dumps(rec) + "\n")
    return emit


def result_node(space: Atomspace) -> Node:
    """The expression the pointer's atom currently holds."""
    return space.atoms[space.pointer[0]] if space.pointer is not None else None


__all__ = [
    "match", "match_node", "match_conj", "Match", "instantiate", "RuleGraph", "Action",
    "instantiate_funapp", "instantiate_trans", "apply_rule", "update", "update_steps", "Step",
    "TAU_RULES", "evaluate", "NormalForms", "BudgetExhausted", "json_trace", "result_node",
    "EngineError",
]
