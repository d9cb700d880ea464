"""Typed metagraphs built from the empty graph, single edges and connect.

Positions inside a metagraph are natural numbers.  For an edge ``edge(n, t0,
l0, ts)`` position 0 is the edge itself and position ``k`` (1 <= k <= n) is
its k-th target.  For ``connect(a1, a2, t0, l0, q)`` position 0 is the whole
graph; the positions of the two operands (their own position 0 included) are
interleaved: ``2k+1`` is position ``k`` of ``a1`` and ``2k+2`` is position
``k`` of ``a2``.

The wiring ``q`` of a connect maps a target position of ``a1`` (in a1's own
numbering) to a position of ``a2`` (in a2's own numbering).  Absent keys are
unconnected (``INF``).

Rational (infinite but regular) graphs are written with ``Fix``/``FixRef``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, NamedTuple

import networkx as nx
from networkx.algorithms import isomorphism as nxiso

from .sexpr import SAtom, SList, parse_one

INF = math.inf

Order = Callable[[Any, Any], bool]


class MetagraphError(Exception):
    pass


class ArityMismatch(MetagraphError, ValueError):
    pass


class DanglingWiring(MetagraphError, IndexError):
    pass


class UnguardedFix(MetagraphError):
    pass


class UnfoldBudgetExceeded(MetagraphError):
    pass


class ConstraintViolation(MetagraphError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"{len(report)} constraint violation(s): {report[0]}")


class Label(NamedTuple):
    """A label paired with an edge id; graph_iso ignores the id."""
    base: Any
    eid: int = 0


@dataclass(frozen=True)
class Empty:
    def __repr__(self):
        return "eps"


EPS = Empty()


@dataclass(frozen=True)
class Edge:
    arity: int
    type: Any
    label: Any
    targets: tuple


@dataclass(frozen=True)
class Connect:
    left: Any
    right: Any
    type: Any
    label: Any
    wiring: tuple = ()

    @property
    def q(self) -> dict:
        return dict(self.wiring)


@dataclass(frozen=True)
class Fix:
    binder: int
    body: Any


@dataclass(frozen=True)
class FixRef:
    binder: int


@dataclass(frozen=True)
class Violation:
    target_index: int   # global index of the wired source target
    sink_index: int     # global index of the position it feeds
    source_type: Any
    sink_type: Any
    kind: str = "order"  # "order" | "single-input"


def _norm_wiring(q) -> tuple:
    items = q.items() if isinstance(q, dict) else q
    out = {}
    for k, j in items:
        if j == INF or j is None:
            continue
        k, j = int(k), int(j)
        if k in out:
            raise DanglingWiring(f"wiring maps target {k} twice")
        out[k] = j
    return tuple(sorted(out.items()))


# -- head resolution for rational terms ------------------------------------

def _head(m, env):
    hops = 0
    while isinstance(m, (Fix, FixRef)):
        if isinstance(m, Fix):
            env = {**env, m.binder: m}
            m = m.body
        else:
            if m.binder not in env:
                raise MetagraphError(f"unbound FixRef {m.binder}")
            m = env[m.binder]
        hops += 1
        if hops > 2 * len(env) + 2:
            raise UnguardedFix("fixpoint body is not guarded by a constructor")
    return m, env


def _locate(m, n, env):
    """Walk to the leaf constructor owning global position ``n``."""
    if n < 0:
        raise IndexError(f"negative position {n}")
    m, env = _head(m, env)
    while isinstance(m, Connect) and n > 0:
        k, side = divmod(n - 1, 2)
        m, env = _head(m.right if side else m.left, env)
        n = k
    return m, n, env


# -- constructors -----------------------------------------------------------

def mk_edge(n: int, t0, l0, targets: Iterable) -> Edge:
    targets = tuple(targets)
    if n < 0 or len(targets) != n:
        raise ArityMismatch(f"edge arity {n} but {len(targets)} target types")
    return Edge(n, t0, l0, targets)


def mk_connect(a1, a2, t0, l0, q, order: Order | None) -> Connect:
    """Connect two closed metagraphs, validating wiring and constraints.

    ``order=None`` skips the constraint check (wiring is still validated).
    """
    wiring = _norm_wiring(q)
    for k, j in wiring:
        if not is_target(a1, k):
            raise DanglingWiring(f"left operand has no target at position {k}")
        if connection(a1, k) != INF:
            raise DanglingWiring(f"target {k} of the left operand is already wired")
        if not has_position(a2, j):
            raise DanglingWiring(f"right operand has no position {j}")
    g = Connect(a1, a2, t0, l0, wiring)
    if order is not None:
        report = check_constraints(g, order)
        if report:
            raise ConstraintViolation(report)
    return g


def union(a1, a2, t0, l0) -> Connect:
    return Connect(a1, a2, t0, l0, ())


def mk_fix(binder: int, body) -> Fix:
    f = Fix(binder, body)
    _head(f, {})
    return f


# -- queries ----------------------------------------------------------------

def type_at(m, n: int, env=None):
    """Type of the edge or target at global position ``n``."""
    m, n, env = _locate(m, n, env or {})
    if isinstance(m, Edge):
        if n == 0:
            return m.type
        if 1 <= n <= m.arity:
            return m.targets[n - 1]
    elif isinstance(m, Connect):
        return m.type
    raise IndexError(f"no position {n} in {type(m).__name__}")


def has_position(m, n: int, env=None) -> bool:
    try:
        type_at(m, n, env)
    except IndexError:
        return False
    return True


def is_target(m, n: int, env=None) -> bool:
    try:
        leaf, k, _ = _locate(m, n, env or {})
    except IndexError:
        return False
    return isinstance(leaf, Edge) and 1 <= k <= leaf.arity


def connection(m, n: int, env=None):
    """Global position fed by target ``n``, or INF when unconnected."""
    m, env = _head(m, env or {})
    if isinstance(m, Edge):
        if 1 <= n <= m.arity:
            return INF
        raise IndexError(f"position {n} is not a target")
    if not isinstance(m, Connect) or n <= 0:
        raise IndexError(f"position {n} is not a target")
    k, side = divmod(n - 1, 2)
    if side == 0:
        for key, j in m.wiring:
            if key == k:
                return 2 * j + 2
        r = connection(m.left, k, env)
        return INF if r == INF else 2 * r + 1
    r = connection(m.right, k, env)
    return INF if r == INF else 2 * r + 2


def _receives(m, j, env) -> bool:
    m, env = _head(m, env)
    while isinstance(m, Connect) and j > 0:
        k, side = divmod(j - 1, 2)
        if side and any(v == k for _, v in m.wiring):
            return True
        m, env = _head(m.right if side else m.left, env)
        j = k
    return False


def check_constraints(m, order: Order) -> list:
    """Every wire must respect ``order`` and feed a target at most once.

    Each syntactic connect is visited once; for rational graphs this covers
    every unfolding since the copies are identical.
    """
    out = []
    seen_fix = set()
    stack = [(m, {}, 1, 0)]
    while stack:
        g, env, a, b = stack.pop()
        if isinstance(g, Fix):
            if id(g) in seen_fix:
                continue
            seen_fix.add(id(g))
            stack.append((g.body, {**env, g.binder: g}, a, b))
            continue
        if not isinstance(g, Connect):
            continue
        fed = set()
        for k, j in g.wiring:
            st = type_at(g.left, k, env)
            tt = type_at(g.right, j, env)
            src = a * (2 * k + 1) + b
            snk = a * (2 * j + 2) + b
            if not order(st, tt):
                out.append(Violation(src, snk, st, tt, "order"))
            if is_target(g.right, j, env):
                if j in fed or _receives(g.right, j, env):
                    out.append(Violation(src, snk, st, tt, "single-input"))
                fed.add(j)
        stack.append((g.right, env, 2 * a, 2 * a + b))
        stack.append((g.left, env, 2 * a, a + b))
    out.sort(key=lambda v: (v.target_index, v.kind))
    return out


def positions(m, max_unfold: int = 2) -> list:
    """All global positions of ``m`` (rational graphs unfolded ``max_unfold`` times)."""
    def go(g, env, budget):
        if isinstance(g, Fix):
            return go(g.body, {**env, g.binder: g}, budget)
        if isinstance(g, FixRef):
            if budget <= 0:
                return [0]
            return go(env[g.binder], env, budget - 1)
        if isinstance(g, Edge):
            return list(range(g.arity + 1))
        if isinstance(g, Connect):
            return ([0] + [2 * p + 1 for p in go(g.left, env, budget)]
                    + [2 * p + 2 for p in go(g.right, env, budget)])
        return []
    return go(m, {}, max_unfold)


# -- rational graphs --------------------------------------------------------

def _subst_ref(t, binder, repl):
    if isinstance(t, FixRef):
        return repl if t.binder == binder else t
    if isinstance(t, Fix):
        if t.binder == binder:
            return t
        return Fix(t.binder, _subst_ref(t.body, binder, repl))
    if isinstance(t, Connect):
        return Connect(_subst_ref(t.left, binder, repl), _subst_ref(t.right, binder, repl),
                       t.type, t.label, t.wiring)
    return t


def unfold(m: Fix):
    if not isinstance(m, Fix):
        raise TypeError("unfold expects a Fix")
    body = m.body
    while isinstance(body, Fix):
        body = body.body
    if isinstance(body, FixRef):
        raise UnguardedFix(f"Fix {m.binder} is not guarded")
    return _subst_ref(m.body, m.binder, m)


def is_closed(m, bound=frozenset()) -> bool:
    if isinstance(m, FixRef):
        return m.binder in bound
    if isinstance(m, Fix):
        return is_closed(m.body, bound | {m.binder})
    if isinstance(m, Connect):
        return is_closed(m.left, bound) and is_closed(m.right, bound)
    return True


# -- isomorphism ------------------------------------------------------------

def _label_key(label):
    if isinstance(label, Label):
        return label.base
    return label


def _flatten(m, key, budget):
    g = nx.DiGraph()
    ids = itertools.count()
    unfolds = [budget]

    def build(t, env):
        if isinstance(t, Fix):
            return build(t.body, {**env, t.binder: t})
        if isinstance(t, FixRef):
            if unfolds[0] <= 0:
                raise UnfoldBudgetExceeded("rational graph exceeds the unfolding budget")
            unfolds[0] -= 1
            return build(env[t.binder], env)
        root = next(ids)
        if isinstance(t, Edge):
            g.add_node(root, sig=("edge", t.type, key(t.label), t.arity))
            pos = {0: root}
            for k, ty in enumerate(t.targets, 1):
                s = next(ids)
                g.add_node(s, sig=("slot", k, ty))
                g.add_edge(root, s, kind=("slot", k))
                pos[k] = s
            return pos
        if isinstance(t, Connect):
            g.add_node(root, sig=("connect", t.type, key(t.label)))
            lp = build(t.left, env)
            rp = build(t.right, env)
            pos = {0: root}
            if lp:
                g.add_edge(root, lp[0], kind="left")
            if rp:
                g.add_edge(root, rp[0], kind="right")
            for p, node in lp.items():
                pos[2 * p + 1] = node
            for p, node in rp.items():
                pos[2 * p + 2] = node
            for k, j in t.wiring:
                g.add_edge(lp[k], rp[j], kind="wire")
            return pos
        g.add_node(root, sig=("eps",))
        return {}

    build(m, {})
    return g


def graph_iso(m1, m2, label_key=_label_key, unfold_budget: int = 64) -> bool:
    """Structure/type/label-preserving isomorphism, ignoring edge ids."""
    g1 = _flatten(m1, label_key, unfold_budget)
    g2 = _flatten(m2, label_key, unfold_budget)
    if g1.number_of_nodes() != g2.number_of_nodes() or g1.number_of_edges() != g2.number_of_edges():
        return False
    matcher = nxiso.DiGraphMatcher(
        g1, g2,
        node_match=lambda a, b: a["sig"] == b["sig"],
        edge_match=lambda a, b: a["kind"] == b["kind"],
    )
    return matcher.is_isomorphic()


# -- canonical S-expression form --------------------------------------------

def _tag_text(x) -> str:
    if isinstance(x, Label):
        return f"{x.base}#{x.eid}"
    return str(x)


def to_sexpr(m, fmt=_tag_text) -> str:
    if isinstance(m, Empty):
        return "eps"
    if isinstance(m, Edge):
        ts = " ".join(fmt(t) for t in m.targets)
        return f"(edge {m.arity} {fmt(m.type)} {fmt(m.label)} ({ts}))"
    if isinstance(m, Connect):
        ws = " ".join(f"({k} {j})" for k, j in m.wiring)
        return (f"(connect {to_sexpr(m.left, fmt)} {to_sexpr(m.right, fmt)} "
                f"{fmt(m.type)} {fmt(m.label)} ({ws}))")
    if isinstance(m, Fix):
        return f"(fix {m.binder} {to_sexpr(m.body, fmt)})"
    if isinstance(m, FixRef):
        return f"(ref {m.binder})"
    raise TypeError(f"not a metagraph: {m!r}")


def _atom_text(x):
    if isinstance(x, SAtom):
        base, sep, eid = x.text.rpartition("#")
        if sep and base and eid.isdigit():
            return Label(base, int(eid))
        return x.text
    return str(x)


def from_sexpr(src, parse_tag=_atom_text):
    x = parse_one(src) if isinstance(src, str) else src
    if isinstance(x, SAtom):
        if x.text == "eps":
            return EPS
        raise MetagraphError(f"unexpected atom {x.text!r}")
    head = x.head
    try:
        if head == "edge":
            _, n, t, l, ts = x.items
            return mk_edge(int(n.text), parse_tag(t), parse_tag(l), [parse_tag(a) for a in ts.items])
        if head == "connect":
            _, g1, g2, t, l, ws = x.items
            wiring = tuple((int(w[0].text), int(w[1].text)) for w in ws.items)
            return Connect(from_sexpr(g1, parse_tag), from_sexpr(g2, parse_tag),
                           parse_tag(t), parse_tag(l), _norm_wiring(wiring))
        if head == "fix":
            _, b, body = x.items
            return Fix(int(b.text), from_sexpr(body, parse_tag))
        if head == "ref":
            return FixRef(int(x.items[1].text))
    except (ValueError, AttributeError) as exc:
        raise MetagraphError(f"malformed {head} form: {x}") from exc
    raise MetagraphError(f"unknown metagraph form {head!r}")


__all__ = [
    "INF", "EPS", "Empty", "Edge", "Connect", "Fix", "FixRef", "Label", "Violation",
    "mk_edge", "mk_connect", "union", "mk_fix", "type_at", "connection", "is_target",
    "has_position", "check_constraints", "unfold", "positions", "graph_iso",
    "to_sexpr", "from_sexpr", "is_closed",
    "MetagraphError", "ArityMismatch", "DanglingWiring", "UnguardedFix",
    "UnfoldBudgetExceeded", "ConstraintViolation",
]
