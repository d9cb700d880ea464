"""Reference signature-based partition refinement (pure Python)."""

from __future__ import annotations


def _canon(keys):
    ids = {}
    return [ids.setdefault(k, len(ids)) for k in keys]


def refine_history(n: int, src, act, dst, init=None) -> list:
    """Refine ``init`` until stable; returns every round's block vector.

    Block ids are numbered by first occurrence in state order, so the result
    is canonical and comparable across implementations.
    """
    block = _canon(init if init is not None else [0] * n)
    out_edges = [[] for _ in range(n)]
    for s, a, t in zip(src, act, dst):
        out_edges[s].append((a, t))
    history = [block]
    while True:
        keys = [(block[s], tuple(sorted({(a, block[t]) for a, t in out_edges[s]})))
                for s in range(n)]
        new = _canon(keys)
        history.append(new)
        if max(new, default=-1) == max(block, default=-1):
            return history
        block = new
