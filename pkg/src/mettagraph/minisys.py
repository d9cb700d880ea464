"""The small closed system: one type A with v1, v2 : A, f1 : A -> A and
sample/thunk, evaluated two ways and compared by bisimulation.

``str2`` steps expressions with a direct case analysis (``beta3``).
``str1`` steps encoded atomspaces with the rewrite engine; pointer moves,
returns and deactivations are internal and compressed away.  Both systems
get an extra root state with one ``init`` transition per expression, so a
single bisimulation check covers every starting point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import product

from .atomspace import Atomspace, mk_app, mk_sym
from .lts import Bisimilar, Lts, bisim_check, lts_to_dot, reachable, verify_bisimulation
from .langs.views import Observation, _fire, observe_space, settle
from .engine import update_steps
from .types import TOP_TYPE, Arrow, Base, Dist, SubtypeRelation

A = Base("A")
MAX_NODES = 3


@dataclass(frozen=True)
class MiniExpr:
    head: str                    # v1 | v2 | f1 | thunk | sample
    arg: "MiniExpr | None" = None

    def __post_init__(self):
        if (self.arg is None) != (self.head in ("v1", "v2")):
            raise ValueError(f"{self.head} takes {'no' if self.arg is None else 'one'} argument")

    def __str__(self):
        return self.head if self.arg is None else f"({self.head} {self.arg})"

    __repr__ = __str__

    @property
    def size(self) -> int:
        return 1 + (self.arg.size if self.arg is not None else 0)


V1, V2 = MiniExpr("v1"), MiniExpr("v2")


def F1(x):
    return MiniExpr("f1", x)


def Thunk(x):
    return MiniExpr("thunk", x)


def Sample(x):
    return MiniExpr("sample", x)


def mini_type(e: MiniExpr):
    """Type of ``e`` or None if ill typed."""
    if e.head in ("v1", "v2"):
        return A
    t = mini_type(e.arg)
    if t is None:
        return None
    if e.head == "f1":
        return A if t == A else None
    if e.head == "thunk":
        return Dist(t)
    if e.head == "sample":
        return t.arg if isinstance(t, Dist) else None
    return None


def enumerate_exprs(max_nodes: int = MAX_NODES) -> list:
    """All well-typed expressions with at most ``max_nodes`` subexpressions."""
    by_size = {1: [V1, V2]}
    for n in range(2, max_nodes + 1):
        by_size[n] = [MiniExpr(h, x) for h, x in product(("f1", "thunk", "sample"), by_size[n - 1])]
    out = [e for n in sorted(by_size) for e in by_size[n] if mini_type(e) is not None]
    return sorted(out, key=lambda e: (e.size, str(e)))


def beta3(e: MiniExpr):
    """One leftmost-innermost step, or None at a normal form."""
    if e.arg is not None:
        inner = beta3(e.arg)
        if inner is not None:
            return MiniExpr(e.head, inner)
    if e.head == "f1" and e.arg in (V1, V2):
        return V2 if e.arg == V1 else V1
    if e.head == "sample" and e.arg.head == "thunk" and beta3(e.arg.arg) is None:
        return e.arg.arg
    return None


# -- encoding ---------------------------------------------------------------

BASE_ATOMS = """
(: A Type)
(: v1 A)
(: v2 A)
(: f1 (-> A A))
(: Distribution (-> Type Type))
(: sample (-> (Distribution $t1) $t1))
(: thunk (-> $t1 (Distribution $t1)))
(= (sample (thunk $a)) $a)
"""

F1_EQUATIONS = "(= (f1 v1) v2)\n(= (f1 v2) v1)"
F1_MUTANT = "(= (f1 v1) v1)\n(= (f1 v2) v2)"


def base_space(mutated: bool = False) -> Atomspace:
    return Atomspace().add(BASE_ATOMS + (F1_MUTANT if mutated else F1_EQUATIONS))


def encode_mini(e: MiniExpr, base: Atomspace | None = None) -> Atomspace:
    """Pointed atomspace for ``e`` with ``@`` on every application."""
    base = base or base_space()
    ids = base.ids()

    def go(x):
        if x.arg is None:
            return mk_sym(x.head, A, ids())
        arg = go(x.arg)
        fn_tag = Arrow(A, A) if x.head == "f1" else TOP_TYPE
        return mk_app(mk_sym(x.head, fn_tag, ids()), arg, mini_type(x), act=ids(), eid=ids())

    return base.add(go(e), pointer=())


# -- transition systems -----------------------------------------------------

ROOT = "root"


def default_probes():
    return [("is-of-type", A), ("is-of-type", Dist(A))] + [("head", h) for h in ("v1", "v2", "f1", "thunk", "sample")]


def _mini_probes(probes, e):
    return _fire(probes, Observation(mini_type(e), e.head, False), SubtypeRelation())


def _space_probes(probes, s):
    return _fire(probes, observe_space(s), s.rel)


def build_systems(mutated: bool = False, probes=None, exprs=None):
    """(str1, str2): engine-driven and case-analysis transition systems."""
    probes = default_probes() if probes is None else probes
    exprs = enumerate_exprs() if exprs is None else exprs
    base = base_space(mutated)
    start1 = {str(e): settle(encode_mini(e, base)) for e in exprs}

    def step1(s):
        if s == ROOT:
            return [(("init", k), v) for k, v in start1.items()]
        out, seen = [], set()
        for st in update_steps(s):
            t = settle(st.space)
            if t not in seen:
                seen.add(t)
                out.append(("update", t))
        return out + [(name, s) for name in _space_probes(probes, s)]

    def step2(e):
        if e == ROOT:
            return [(("init", str(x)), x) for x in exprs]
        nxt = beta3(e)
        out = [("update", nxt)] if nxt is not None else []
        return out + [(name, e) for name in _mini_probes(probes, e)]

    return Lts(step1, False, "str1", ROOT), Lts(step2, False, "str2", ROOT)


@dataclass
class MinisysReport:
    verdict: object
    relation: set
    states1: int
    states2: int
    violations: list
    seconds: float

    @property
    def ok(self) -> bool:
        return isinstance(self.verdict, Bisimilar) and not self.violations


def prove_bisim(mutated: bool = False) -> MinisysReport:
    """Check str1 ~ str2 exhaustively and re-verify the relation pairwise."""
    t0 = time.perf_counter()
    str1, str2 = build_systems(mutated)
    verdict = bisim_check(str1, ROOT, str2, ROOT)
    relation, bad = set(), []
    if isinstance(verdict, Bisimilar):
        relation = {(b, a) for a, b in verdict.relation if a != ROOT}
        full = {(a, b) for b, a in relation} | {(ROOT, ROOT)}
        bad = verify_bisimulation(str1, str2, full)
    n1 = len(reachable(str1, ROOT).states) - 1
    n2 = len(reachable(str2, ROOT).states) - 1
    return MinisysReport(verdict, relation, n1, n2, bad, time.perf_counter() - t0)


def systems_dot(mutated: bool = False) -> tuple:
    str1, str2 = build_systems(mutated, probes=[])

    def show1(s):
        return "root" if s == ROOT else s.text().splitlines()[-1]
    return (lts_to_dot(str1, ROOT, show=show1, name="str1"),
            lts_to_dot(str2, ROOT, show=str, name="str2"))


__all__ = ["MiniExpr", "V1", "V2", "F1", "Thunk", "Sample", "mini_type", "enumerate_exprs", "beta3",
           "encode_mini", "base_space", "build_systems", "prove_bisim", "MinisysReport",
           "systems_dot", "ROOT", "MAX_NODES"]
