"""Acceptance criteria 1-7 at full scale.

Each test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary and also when this file is run directly.
"""

import math
import random
import sys
from collections import Counter
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import test_metagraph as tm  # noqa: E402
from test_engine import assert_safe  # noqa: E402
from test_lts import naive_bisimilar  # noqa: E402

from mettagraph.atomspace import Atomspace, mk_sym, typing_query  # noqa: E402
from mettagraph.engine import RuleGraph, apply_rule, update_steps  # noqa: E402
from mettagraph.langs.corpus import PDTS_CONTEXT, STLC_CONTEXT, mixed_corpus, pdts_corpus, stlc_corpus  # noqa: E402
from mettagraph.langs.encode import encode_pdts, encode_pts, encode_stlc, run_encoded  # noqa: E402
from mettagraph.langs.pdts import pdts_full_eval, pdts_sample  # noqa: E402
from mettagraph.langs.pts import (LAMBDA_ARROW, QUINE, ConversionBudgetError, pts_convertible,  # noqa: E402
                                  pts_typecheck, stlc_context_to_pts, stlc_term_to_pts, stlc_to_pts)
from mettagraph.langs.stlc import ObjectTypeError, stlc_beta_step, stlc_typecheck  # noqa: E402
from mettagraph.langs.syntax import parse_term  # noqa: E402
from mettagraph.langs.terms import App, Const, PiT, Var, alpha_eq, de_bruijn  # noqa: E402
from mettagraph.lts import (Bisimilar, Distinguished, Lts, bisim_check, prob_bisim_check,  # noqa: E402
                            verify_bisimulation)
from mettagraph.metagraph import check_constraints  # noqa: E402
from mettagraph.minisys import base_space, encode_mini, enumerate_exprs, prove_bisim  # noqa: E402
from mettagraph.types import Base  # noqa: E402

RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS[n] = line
    print(line)
    assert ok, line


def beta_normal_form(e, budget=10_000):
    """Iterate stlc_beta_step to a normal form."""
    for _ in range(budget):
        nxt = stlc_beta_step(e)
        if not nxt:
            return e
        e = nxt[0]
    raise AssertionError("reference reduction did not finish")


def test_criterion_1_minisys_bisimulation():
    r = prove_bisim()
    str1_ok = isinstance(r.verdict, Bisimilar) and not r.violations and r.seconds < 5.0
    m = prove_bisim(mutated=True)
    ok = str1_ok and isinstance(m.verdict, Distinguished)
    record(1, ok, f"{len(enumerate_exprs())} terms, relation {len(r.relation)}, "
                  f"{r.seconds:.2f}s, mutation {type(m.verdict).__name__}")


def test_criterion_2_stlc_oracle_equivalence():
    corpus = stlc_corpus(200)
    agree = 0
    for e in corpus:
        res = run_encoded(encode_stlc(STLC_CONTEXT, e), budget=10_000)
        want = beta_normal_form(e)
        if not res.exhausted and len(res.normal_forms) == 1 and alpha_eq(res.normal_forms[0], want):
            agree += 1
    record(2, agree == len(corpus) >= 200, f"{agree}/{len(corpus)} agree")


def test_criterion_3_pdts_distributions():
    corpus = pdts_corpus(100)
    rng = random.Random(0)
    n = 10_000
    mass_ok = support_ok = band_ok = 0
    worst = 0.0
    for e in corpus:
        fe = pdts_full_eval(e)
        mass_ok += (not fe.exhausted) and abs(fe.mass - 1.0) <= 1e-9
        got = run_encoded(encode_pdts(PDTS_CONTEXT, e))
        support_ok += {de_bruijn(t) for t in got.normal_forms} == {de_bruijn(t) for t in fe.dist}
        if len(fe.dist) == 1:
            band_ok += de_bruijn(pdts_sample(e, rng)) == de_bruijn(next(iter(fe.dist)))
            continue
        counts = Counter(de_bruijn(pdts_sample(e, rng)) for _ in range(n))
        inside = True
        for t, p in fe.dist.items():
            sigma = math.sqrt(n * p * (1 - p))
            z = abs(counts[de_bruijn(t)] - n * p) / sigma
            worst = max(worst, z)
            inside &= z <= 3.0
        band_ok += inside
    worked = pdts_full_eval(parse_term("sample(thunk(random[0.3](v1, v2)))")).dist
    exact = worked == {Var("v1"): 0.3, Var("v2"): 0.7}
    ok = mass_ok == support_ok == band_ok == len(corpus) >= 100 and exact
    record(3, ok, f"mass {mass_ok}/{len(corpus)}, support {support_ok}, 3-sigma {band_ok} "
                  f"(max |z| {worst:.2f}), worked example {'exact' if exact else 'WRONG'}")


def test_criterion_4_pts():
    corpus = mixed_corpus(200)
    agree = 0
    for e in corpus:
        try:
            want = stlc_to_pts(stlc_typecheck(STLC_CONTEXT, e))
        except ObjectTypeError:
            want = None
        try:
            got = pts_typecheck(LAMBDA_ARROW, stlc_context_to_pts(STLC_CONTEXT, e), stlc_term_to_pts(e))
        except ObjectTypeError:
            got = None
        agree += (got is None and want is None) or (got is not None and want is not None and alpha_eq(got, want))
    quine = pts_typecheck(QUINE, {}, Const("s1")) == Const("s1")
    quine_q = typing_query(encode_pts(QUINE, {}, Const("s1")).space, "t1", Base("t1"))
    d = parse_term(r"\z. z z", "untyped")
    omega = App(d, d)
    budgeted = []
    for thunk in (lambda: pts_convertible(omega, Var("a"), budget=200),
                  lambda: pts_typecheck(QUINE, [("f", PiT("_", omega, Const("s1"))), ("a", Const("s1"))],
                                        App(Var("f"), Var("a")), budget=200, check_context=False)):
        try:
            thunk()
            budgeted.append(False)
        except ConversionBudgetError:
            budgeted.append(True)
    ok = agree == len(corpus) and quine and quine_q and all(budgeted)
    record(4, ok, f"{agree}/{len(corpus)} agree, quine {quine and quine_q}, budgeted conversion {all(budgeted)}")


def test_criterion_5_metagraph_core():
    props = [tm.test_constructor_round_trip, tm.test_union_is_connect_with_empty_wiring,
             tm.test_constraint_monotonicity, tm.test_unfold_preserves_type_at]
    for prop in props:
        prop()
    fig = tm.build_nested_example()
    tm.test_connection_on_z_prime(fig)
    clean = all(check_constraints(g, tm.order) == [] for g in fig.values())
    record(5, clean, f"{len(props)} properties x 500 examples, nested example graphs {len(fig)} clean={clean}")


def random_rows(rng):
    n = rng.randint(1, 6)
    return [(rng.randrange(n), rng.choice("ab"), rng.randrange(n)) for _ in range(rng.randint(0, 12))]


def test_criterion_6_bisimulation_checker():
    rng = random.Random(6)
    agree = 0
    total = 1000
    for _ in range(total):
        r1, r2 = random_rows(rng), random_rows(rng)
        l1, l2 = Lts.from_table(r1), Lts.from_table(r2)
        v = bisim_check(l1, 0, l2, 0)
        expected = naive_bisimilar(r1, r2, 0, 0)
        good = isinstance(v, Bisimilar) == expected
        if isinstance(v, Bisimilar):
            good &= verify_bisimulation(l1, l2, v.relation) == []
        else:
            good &= v.witness.holds(l1, 0) != v.witness.holds(l2, 0)
        agree += good
    left = Lts.from_table([(0, "a", 1), (1, "b", 2), (1, "c", 3)])
    right = Lts.from_table([(0, "a", 1), (0, "a", 2), (1, "b", 3), (2, "c", 4)])
    v = bisim_check(left, 0, right, 0)
    classic = isinstance(v, Distinguished) and v.depth == 2
    split = Lts.from_table([("s", "u", "t1", 0.5), ("s", "u", "t2", 0.5), ("t1", "b", "e", 1.0),
                            ("t2", "b", "e", 1.0)], weighted=True)
    single = Lts.from_table([("r", "u", "t", 1.0), ("t", "b", "z", 1.0)], weighted=True)
    prob = isinstance(prob_bisim_check(split, "s", single, "r", tol=1e-9), Bisimilar)
    ok = agree == total and classic and prob
    record(6, ok, f"{agree}/{total} agree with brute force, a.(b+c) depth {getattr(v, 'depth', None)}, "
                  f"aggregation {'Bisimilar' if prob else 'not bisimilar'}")


def test_criterion_7_engine_safety():
    spaces = [encode_stlc(STLC_CONTEXT, e).space for e in stlc_corpus(200)]
    spaces += [encode_pdts(PDTS_CONTEXT, e).space for e in pdts_corpus(100)]
    spaces += [encode_mini(e, base_space(m)) for e in enumerate_exprs() for m in (False, True)]
    for s in spaces:
        assert_safe(s)
    host = Atomspace().add("(: A Type)\n(: B Type)\n(: b B)\n(: v1 A)\n(: f (-> A A))\n"
                           "(: g (-> A B))\n(g (! (@ (f v1))))")
    bad = RuleGraph("funapp", host.pointed(), mk_sym("b", Base("B"), 999), host.pointer)
    identity = apply_rule(bad, host) is host
    emitted = any(st.space == host for st in update_steps(host))
    record(7, identity and not emitted, f"{len(spaces)} corpus runs safe, invalid rewrite "
                                        f"{'falls back to identity' if identity else 'EMITTED'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
