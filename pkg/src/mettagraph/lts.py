"""Labelled transition systems, bisimulation and probabilistic bisimulation."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .refine import refine_history


class NotNormalizedError(ValueError):
    pass


class NotTotalError(ValueError):
    pass


@dataclass
class Lts:
    """``step(s)`` yields ``(action, state)`` or, if weighted, ``(action, state, weight)``."""
    step: Callable[[Any], Iterable]
    weighted: bool = False
    name: str = "lts"
    initial: Any = None

    def successors(self, s) -> list:
        out = []
        for tr in self.step(s):
            if self.weighted:
                a, t, w = tr
            else:
                a, t = tr[0], tr[1]
                w = 1.0
            out.append((a, t, w))
        return out

    @classmethod
    def from_table(cls, transitions, weighted=False, name="table"):
        """``transitions``: iterable of (src, action, dst[, weight])."""
        table: dict = {}
        for tr in transitions:
            table.setdefault(tr[0], []).append(tuple(tr[1:]) if weighted else (tr[1], tr[2]))
        return cls(lambda s: table.get(s, ()), weighted, name)


@dataclass
class Reach:
    states: list
    index: dict
    transitions: list          # (i, action, j, weight)
    truncated: bool

    def __contains__(self, s):
        return s in self.index

    def __len__(self):
        return len(self.states)


def reachable(lts: Lts, s0, budget: int = 100_000) -> Reach:
    """Breadth-first closure from ``s0`` holding at most ``budget`` states."""
    if budget < 1:
        raise ValueError("budget must be positive")
    index = {s0: 0}
    states = [s0]
    trans = []
    queue = deque([0])
    truncated = False
    while queue:
        i = queue.popleft()
        for a, t, w in lts.successors(states[i]):
            j = index.get(t)
            if j is None:
                if len(states) >= budget:
                    truncated = True
                    continue
                j = index[t] = len(states)
                states.append(t)
                queue.append(j)
            trans.append((i, a, j, w))
    return Reach(states, index, trans, truncated)


# -- modal witnesses --------------------------------------------------------

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Tt(Formula):
    def __str__(self):
        return "tt"

    def depth(self):
        return 0

    def holds(self, lts, s):
        return True


@dataclass(frozen=True)
class Diamond(Formula):
    action: Any
    conj: tuple = ()

    def __str__(self):
        body = " & ".join(str(f) for f in self.conj) if self.conj else "tt"
        return f"<{self.action}>({body})"

    def depth(self):
        return 1 + max((f.depth() for f in self.conj), default=0)

    def holds(self, lts, s):
        return any(a == self.action and all(f.holds(lts, t) for f in self.conj)
                   for a, t, _ in lts.successors(s))


@dataclass(frozen=True)
class Neg(Formula):
    sub: Formula

    def __str__(self):
        return f"~{self.sub}"

    def depth(self):
        return self.sub.depth()

    def holds(self, lts, s):
        return not self.sub.holds(lts, s)


def trace_of(f: Formula) -> list:
    """Flatten a witness into an alternating action trace."""
    if isinstance(f, Neg):
        return trace_of(f.sub)
    if isinstance(f, Diamond):
        out = [f.action]
        if f.conj:
            out.append([trace_of(g) for g in f.conj])
        return out
    return []


# -- verdicts ---------------------------------------------------------------

@dataclass
class Bisimilar:
    relation: set
    blocks: int = 0

    def __bool__(self):
        return True

    def __str__(self):
        return f"Bisimilar ({len(self.relation)} related pairs)"


@dataclass
class Distinguished:
    witness: Any
    depth: int = 0

    def __bool__(self):
        return False

    def __str__(self):
        return f"Distinguished by {self.witness}"


@dataclass
class Inconclusive:
    reason: str

    def __bool__(self):
        return False

    def __str__(self):
        return f"Inconclusive: {self.reason}"


# -- coproduct construction --------------------------------------------------

@dataclass
class _Coproduct:
    n1: int
    states: list            # (side, state)
    src: list
    act: list
    dst: list
    weight: list
    actions: list
    out: list               # per state: list of (action_id, dst, weight)


def _coproduct(r1: Reach, r2: Reach) -> _Coproduct:
    acts = sorted({a for _, a, _, _ in r1.transitions} | {a for _, a, _, _ in r2.transitions}, key=repr)
    aid = {a: i for i, a in enumerate(acts)}
    n1 = len(r1.states)
    states = [(1, s) for s in r1.states] + [(2, s) for s in r2.states]
    src, act, dst, weight = [], [], [], []
    out = [[] for _ in states]
    for off, r in ((0, r1), (n1, r2)):
        for i, a, j, w in r.transitions:
            src.append(i + off)
            act.append(aid[a])
            dst.append(j + off)
            weight.append(w)
            out[i + off].append((aid[a], j + off, w))
    return _Coproduct(n1, states, src, act, dst, weight, acts, out)


def _first_split(history, s, t):
    for k, blocks in enumerate(history):
        if blocks[s] != blocks[t]:
            return k
    return None


def _witness(cp: _Coproduct, history, s, t, memo) -> Formula:
    """Formula true at ``s`` and false at ``t`` of minimal modal depth."""
    key = (s, t)
    if key in memo:
        return memo[key]
    k = _first_split(history, s, t)
    prev = history[k - 1]
    sig_s = {(a, prev[d]) for a, d, _ in cp.out[s]}
    sig_t = {(a, prev[d]) for a, d, _ in cp.out[t]}
    diff = sorted(sig_s - sig_t)
    if diff:
        a, blk = diff[0]
        s2 = min(d for b, d, _ in cp.out[s] if b == a and prev[d] == blk)
        subs = []
        for b, t2, _ in sorted(cp.out[t]):
            if b == a:
                f = _witness(cp, history, s2, t2, memo)
                if f not in subs:
                    subs.append(f)
        f = Diamond(cp.actions[a], tuple(subs))
    else:
        f = Neg(_witness(cp, history, t, s, memo))
    memo[key] = f
    return f


def bisim_check(lts1: Lts, s1, lts2: Lts, s2, budget: int = 100_000):
    r1 = reachable(lts1, s1, budget)
    r2 = reachable(lts2, s2, budget)
    if r1.truncated or r2.truncated:
        return Inconclusive(f"state budget {budget} exhausted during exploration")
    cp = _coproduct(r1, r2)
    n = len(cp.states)
    history = refine_history(n, cp.src, cp.act, cp.dst)
    final = history[-1]
    i, j = 0, cp.n1
    if final[i] == final[j]:
        by_block: dict = {}
        for k in range(cp.n1, n):
            by_block.setdefault(final[k], []).append(cp.states[k][1])
        rel = set()
        for k in range(cp.n1):
            for y in by_block.get(final[k], ()):
                rel.add((cp.states[k][1], y))
        return Bisimilar(rel, len(set(final)))
    f = _witness(cp, history, i, j, {})
    return Distinguished(f, f.depth())


def bisim_gfp(lts1: Lts, s1, lts2: Lts, s2, budget: int = 10_000) -> bool:
    """Brute-force greatest fixpoint over all state pairs (test oracle)."""
    r1, r2 = reachable(lts1, s1, budget), reachable(lts2, s2, budget)
    succ1 = {x: lts1.successors(x) for x in r1.states}
    succ2 = {y: lts2.successors(y) for y in r2.states}
    rel = {(x, y) for x in r1.states for y in r2.states}
    changed = True
    while changed:
        changed = False
        for x, y in list(rel):
            ok = all(any(b == a and (x2, y2) in rel for b, y2, _ in succ2[y]) for a, x2, _ in succ1[x]) and \
                 all(any(b == a and (x2, y2) in rel for b, x2, _ in succ1[x]) for a, y2, _ in succ2[y])
            if not ok:
                rel.discard((x, y))
                changed = True
    return (s1, s2) in rel


def verify_bisimulation(lts1: Lts, lts2: Lts, relation) -> list:
    """Pairs of ``relation`` failing either transfer condition (empty if it is a bisimulation)."""
    rel = set(relation)
    bad = []
    for x, y in rel:
        sx, sy = lts1.successors(x), lts2.successors(y)
        fwd = all(any(b == a and (x2, y2) in rel for b, y2, _ in sy) for a, x2, _ in sx)
        bwd = all(any(b == a and (x2, y2) in rel for b, x2, _ in sx) for a, y2, _ in sy)
        if not (fwd and bwd):
            bad.append((x, y))
    return bad


def extract_maps(relation, states1, states2):
    """Pick g1: X1 -> X2 and g2: X2 -> X1 inside ``relation``."""
    fwd: dict = {}
    bwd: dict = {}
    for x, y in sorted(relation, key=repr):
        fwd.setdefault(x, y)
        bwd.setdefault(y, x)
    missing = [x for x in states1 if x not in fwd] + [y for y in states2 if y not in bwd]
    if missing:
        raise NotTotalError(f"relation is not total; {len(missing)} state(s) unrelated, e.g. {missing[0]!r}")
    return fwd, bwd


# -- probabilistic ----------------------------------------------------------

def _close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _check_normalized(cp: _Coproduct, tol):
    for s, outs in enumerate(cp.out):
        tot: dict = {}
        for a, _, w in outs:
            if w < 0:
                raise NotNormalizedError(f"negative weight {w} at {cp.states[s][1]!r}")
            tot[a] = tot.get(a, 0.0) + w
        for a, m in tot.items():
            if not _close(m, 1.0, tol):
                raise NotNormalizedError(
                    f"weights for action {cp.actions[a]!r} at {cp.states[s][1]!r} sum to {m}")


def _mass_vector(cp, s, block):
    vec: dict = {}
    for a, d, w in cp.out[s]:
        k = (a, block[d])
        vec[k] = vec.get(k, 0.0) + w
    return vec


def _vec_close(u, v, tol):
    for k in set(u) | set(v):
        if not _close(u.get(k, 0.0), v.get(k, 0.0), tol):
            return False
    return True


def prob_bisim_check(lts1: Lts, s1, lts2: Lts, s2, budget: int = 100_000, tol: float = 1e-9):
    """Larsen-Skou refinement: equal cumulative mass into every block, per action."""
    r1, r2 = reachable(lts1, s1, budget), reachable(lts2, s2, budget)
    if r1.truncated or r2.truncated:
        return Inconclusive(f"state budget {budget} exhausted during exploration")
    cp = _coproduct(r1, r2)
    _check_normalized(cp, tol)
    n = len(cp.states)
    block = [0] * n
    history = [block]
    while True:
        reps: list = []      # (old block, vector, new id)
        new = [0] * n
        for s in range(n):
            vec = _mass_vector(cp, s, block)
            for ob, rv, nid in reps:
                if ob == block[s] and _vec_close(vec, rv, tol):
                    new[s] = nid
                    break
            else:
                new[s] = len(reps)
                reps.append((block[s], vec, len(reps)))
        history.append(new)
        if len(reps) == len(set(block)):
            break
        block = new
    i, j = 0, cp.n1
    if block[i] == block[j]:
        rel = {(cp.states[a][1], cp.states[b][1]) for a in range(cp.n1) for b in range(cp.n1, n)
               if block[a] == block[b]}
        return Bisimilar(rel, len(set(block)))
    k = _first_split(history, i, j)
    prev = history[k - 1]
    u, v = _mass_vector(cp, i, prev), _mass_vector(cp, j, prev)
    diffs = sorted((key for key in set(u) | set(v) if not _close(u.get(key, 0.0), v.get(key, 0.0), tol)))
    a, blk = diffs[0]
    members = [cp.states[x] for x in range(n) if prev[x] == blk]
    witness = {"depth": k, "action": cp.actions[a], "block": members,
               "mass": (u.get((a, blk), 0.0), v.get((a, blk), 0.0))}
    return Distinguished(witness, k)


# -- I/O --------------------------------------------------------------------

def _action_text(a) -> str:
    if isinstance(a, tuple):
        return " ".join(map(str, a))
    return str(a)


def lts_to_json(lts: Lts, s0, budget: int = 100_000, show=str, show_action=_action_text) -> dict:
    r = reachable(lts, s0, budget)
    acts = sorted({a for _, a, _, _ in r.transitions}, key=repr)
    trans = []
    for i, a, j, w in r.transitions:
        rec = {"from": i, "action": show_action(a), "to": j}
        if lts.weighted:
            rec["weight"] = w
        trans.append(rec)
    return {"states": [show(s) for s in r.states], "initial": 0,
            "actions": [show_action(a) for a in acts], "transitions": trans, "truncated": r.truncated}


def lts_from_json(doc) -> tuple:
    """Returns (Lts over integer states, initial state)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    weighted = any("weight" in t for t in doc["transitions"])
    rows = [(t["from"], t["action"], t["to"]) + ((float(t.get("weight", 1.0)),) if weighted else ())
            for t in doc["transitions"]]
    return Lts.from_table(rows, weighted=weighted), doc.get("initial", 0)


def lts_to_dot(lts: Lts, s0, budget: int = 10_000, show=str, name="lts",
               show_action=_action_text) -> str:
    r = reachable(lts, s0, budget)
    lines = [f"digraph {json.dumps(name)} {{", "  rankdir=LR;"]
    for i, s in enumerate(r.states):
        shape = "doublecircle" if i == 0 else "ellipse"
        lines.append(f"  n{i} [label={json.dumps(show(s))}, shape={shape}];")
    for i, a, j, w in r.transitions:
        lab = show_action(a) + (f" [{w:g}]" if lts.weighted else "")
        lines.append(f"  n{i} -> n{j} [label={json.dumps(lab)}];")
    lines.append("}")
    return "\n".join(lines)


__all__ = [
    "Lts", "Reach", "reachable", "bisim_check", "prob_bisim_check", "bisim_gfp",
    "verify_bisimulation", "extract_maps", "Bisimilar", "Distinguished", "Inconclusive",
    "Formula", "Tt", "Diamond", "Neg", "trace_of", "lts_to_json", "lts_from_json", "lts_to_dot",
    "NotNormalizedError", "NotTotalError",
]
