"""Seeded generators for test corpora of object-language terms."""

from __future__ import annotations

import random

from ..types import Arrow, Base, Dist
from .terms import App, Lam, Random, Sample, Thunk, Var, size

A, B = Base("A"), Base("B")

# first-order constants only, so every base-typed term's weak normal form
# is also its full beta normal form
STLC_CONTEXT = {
    "a": A, "c": A, "b": B,
    "g": Arrow(A, B), "h": Arrow(B, A), "k": Arrow(A, Arrow(B, A)), "m": Arrow(A, Arrow(A, A)),
}

PDTS_CONTEXT = {
    "v1": A, "v2": A, "w": B, "f": Arrow(A, A), "g": Arrow(A, B),
}

_ARG_TYPES = (A, B, A, B, Arrow(A, A), Arrow(A, B))


class _Gen:
    def __init__(self, rng, ctx, prob=False):
        self.rng = rng
        self.ctx = ctx
        self.prob = prob
        self.n = 0

    def fresh(self):
        self.n += 1
        return f"x{self.n}"

    def vars_of(self, t, env):
        names = {}
        for n, ty in list(self.ctx.items()) + list(env):
            names[n] = ty      # later (inner) bindings shadow
        return [n for n, ty in names.items() if ty == t]

    def gen(self, t, env, fuel):
        rng = self.rng
        leaves = self.vars_of(t, env)
        if fuel <= 1 or (leaves and rng.random() < 0.25):
            if leaves:
                return Var(rng.choice(leaves))
            if isinstance(t, Arrow):
                return self.lam(t, env, max(fuel, 2))
            if isinstance(t, Dist):
                return Thunk(self.gen(t.arg, env, 1))
            raise _Dead()
        if isinstance(t, Arrow) and rng.random() < 0.6:
            return self.lam(t, env, fuel)
        if isinstance(t, Dist):
            return Thunk(self.gen(t.arg, env, fuel - 1))
        choice = rng.random()
        if self.prob and not isinstance(t, Arrow) and choice < 0.2:
            rho = rng.choice([0.1, 0.25, 0.3, 0.5, 0.7, 0.9])
            return Random(rho, self.gen(t, env, fuel // 2), self.gen(t, env, fuel // 2))
        if self.prob and not isinstance(t, Arrow) and choice < 0.35:
            return Sample(self.gen(Dist(t), env, fuel - 1))
        s = rng.choice(_ARG_TYPES)
        f = self.gen(Arrow(s, t), env, fuel // 2)
        x = self.gen(s, env, fuel - fuel // 2 - 1)
        return App(f, x)

    def lam(self, t, env, fuel):
        v = self.fresh()
        return Lam(v, t.dom, self.gen(t.cod, env + [(v, t.dom)], fuel - 1))


class _Dead(Exception):
    pass


def _terms(seed, ctx, count, max_size, prob, types, min_size=1):
    rng = random.Random(seed)
    out, seen = [], set()
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > count * 500:
            raise RuntimeError("corpus generator stalled")
        g = _Gen(rng, ctx, prob)
        t = rng.choice(types)
        try:
            e = g.gen(t, [], rng.randint(3, max_size))
        except (_Dead, RecursionError):
            continue
        if not min_size <= size(e) <= max_size or e in seen:
            continue
        seen.add(e)
        out.append(e)
    return out


def stlc_corpus(count: int = 200, seed: int = 0, max_size: int = 20) -> list:
    """Distinct well-typed base-typed terms under STLC_CONTEXT."""
    return _terms(seed, STLC_CONTEXT, count, max_size, False, [A, B], min_size=3)


def pdts_corpus(count: int = 100, seed: int = 0, max_size: int = 20) -> list:
    """Terminating PDTS terms (typed, hence normalising) under PDTS_CONTEXT."""
    return _terms(seed, PDTS_CONTEXT, count, max_size, True, [A, B, A, Dist(A)], min_size=3)


def mutate(e, rng):
    """Perturb a term so that it is often (not always) ill typed."""
    choice = rng.randrange(4)
    if choice == 0 and isinstance(e, App):
        return App(e.arg, e.fn)
    if choice == 1:
        return App(e, Var(rng.choice(sorted(STLC_CONTEXT))))
    if choice == 2 and isinstance(e, Lam):
        return Lam(e.var, B if e.ty == A else A, e.body)
    if choice == 3:
        return App(Var(rng.choice(["g", "h", "k"])), e)
    return App(Var("undefined"), e)


def mixed_corpus(count: int = 200, seed: int = 0) -> list:
    """Half well-typed terms, half mutants, for checker agreement tests."""
    rng = random.Random(seed + 7919)
    good = stlc_corpus(count - count // 2, seed)
    bad = [mutate(e, rng) for e in stlc_corpus(count // 2, seed + 1)]
    return good + bad


__all__ = ["STLC_CONTEXT", "PDTS_CONTEXT", "stlc_corpus", "pdts_corpus", "mixed_corpus", "mutate"]
