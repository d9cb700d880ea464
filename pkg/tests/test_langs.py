import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mettagraph.atomspace import node_text, subtype_query, typing_query
from mettagraph.engine import update
from mettagraph.langs.corpus import PDTS_CONTEXT, STLC_CONTEXT, mixed_corpus, pdts_corpus, stlc_corpus
from mettagraph.langs.encode import (
    decode_space, encode_pdts, encode_pts, encode_stlc, encode_untyped, pts_sort_of, run_encoded,
)
from mettagraph.langs.pdts import (
    EvaluationBudgetError, WeightedStep, pdts_full_eval, pdts_sample, pdts_step, pdts_typecheck,
)
from mettagraph.langs.pts import (
    LAMBDA_ARROW, QUINE, ConversionBudgetError, NoRuleError, PtsSpec, pts_beta_step, pts_convertible,
    pts_typecheck, stlc_context_to_pts, stlc_term_to_pts, stlc_to_pts,
)
from mettagraph.langs.stlc import ObjectTypeError, TypeMismatch, UnboundVariable, stlc_beta_step, stlc_typecheck
from mettagraph.langs.syntax import ParseError, parse_context, parse_obj_type, parse_pts_spec, parse_term
from mettagraph.langs.terms import (
    App, Const, Lam, PiT, Random, Sample, Thunk, Var, alpha_eq, count_lams, normalize, show,
)
from mettagraph.langs.views import erase_weights, lts_of_atomspace, lts_of_object
from mettagraph.lts import Bisimilar, bisim_check, reachable
from mettagraph.types import Arrow, Base, Dist, SubtypeRelation, UnionT

A, B = Base("A"), Base("B")


def term(text, mode="simple"):
    return parse_term(text, mode)


def untyped(text):
    return parse_term(text, "untyped")


def omega():
    d = untyped(r"\z. z z")
    return App(d, d)


# -- syntax ----------------------------------------------------------------------

def test_parse_concrete_forms():
    assert term(r"\x:A. x") == Lam("x", A, Var("x"))
    assert term("f a b") == App(App(Var("f"), Var("a")), Var("b"))
    assert term("random[0.3](v1, v2)") == Random(0.3, Var("v1"), Var("v2"))
    assert term("sample(thunk(v1))") == Sample(Thunk(Var("v1")))
    assert parse_term("Pi x:s1. x", "pts", sorts=("s1",)) == PiT("x", Const("s1"), Var("x"))


@pytest.mark.parametrize("src", [r"\x:A. x", r"(\x:A -> A. x) (\y:A. y)",
                                 "sample(thunk(random[0.25](v1, f v2)))", r"\f:A -> B. \x:A. f x"])
def test_show_parse_round_trip(src):
    e = term(src)
    assert term(show(e)) == e


def test_parse_errors_are_positioned():
    with pytest.raises(ParseError) as err:
        term(r"\x:A.")
    assert err.value.span.start == 5
    with pytest.raises(ParseError):
        term("random[0.3](a)")
    with pytest.raises(ParseError) as err:
        term("random[1.5](a, b)")
    assert err.value.span.start == 7
    with pytest.raises(ValueError):
        Random(1.5, Var("a"), Var("b"))


def test_context_and_types():
    assert parse_context("x:A, f:A -> B") == [("x", A), ("f", Arrow(A, B))]
    assert parse_obj_type("A -> A -> B") == Arrow(A, Arrow(A, B))
    with pytest.raises(ParseError):
        parse_context("x:A, x:B")


def test_pts_spec_file():
    spec = parse_pts_spec("sort s1 s2\n(s1 : s2)   # axiom\n(s1, s1, s1)\n")
    assert spec == PtsSpec.indexed(2, axioms=[(1, 2)], rules=[(1, 1, 1)])
    with pytest.raises(ParseError):
        parse_pts_spec("axioms everywhere")
    with pytest.raises(ValueError):
        parse_pts_spec("sort s1\n(s1 : s9)")


# -- STLC --------------------------------------------------------------------------

def test_stlc_typing_examples():
    assert stlc_typecheck({}, term(r"\x:A. x")) == Arrow(A, A)
    assert stlc_typecheck({"a": A}, term(r"(\x:A. x) a")) == A
    with pytest.raises(TypeMismatch):
        stlc_typecheck({"b": B}, term(r"(\x:A. x) b"))
    with pytest.raises(UnboundVariable):
        stlc_typecheck({}, term("a"))


def test_stlc_beta_examples():
    assert stlc_beta_step(term(r"(\x:A. x) a")) == [Var("a")]
    (out,) = stlc_beta_step(untyped(r"(\x. \y. x) y"))
    # the bound y is renamed so the free y is not captured
    assert isinstance(out, Lam) and out.var != "y" and out.body == Var("y")
    assert stlc_beta_step(Var("a")) == []


def test_beta_step_one_result_per_redex():
    e = term(r"(\x:A. x) ((\y:A. y) a)")
    assert len(stlc_beta_step(e)) == 2


def test_encode_identity_application():
    enc = encode_stlc({"a": A}, term(r"(\x:A. x) a"))
    lines = enc.space.text().splitlines()
    (name,) = enc.table
    assert f"(: {name} (-> A A))" in lines
    assert f"(= ({name} $x) $x)" in lines
    assert lines[-1] == f"(! (@ ({name} a)))"
    assert [show(t) for t in run_encoded(enc).normal_forms] == ["a"]


def test_encode_normal_form_has_no_activation():
    enc = encode_stlc({"a": A}, term("a"))
    assert "@" not in enc.space.text()
    res = run_encoded(enc)
    assert res.steps == 0 and res.normal_forms == [Var("a")]


def test_lambda_lifting_one_combinator_per_lambda():
    e = term(r"(\f:A -> A. \x:A. f (f x)) (\y:A. y) a")
    enc = encode_stlc({"a": A}, e)
    assert len(enc.table) == count_lams(e) == 3
    assert alpha_eq(run_encoded(enc).normal_forms[0], normalize(e))


def test_free_variables_become_leading_parameters():
    e = term(r"\x:A. (\y:B. x) b")
    enc = encode_stlc({"b": B}, e)
    assert sorted(len(fv) for _, fv in enc.table.values()) == [0, 1]


def test_ill_typed_input_is_rejected():
    with pytest.raises(ObjectTypeError):
        encode_stlc({"b": B}, term(r"(\x:A. x) b"))


def test_stlc_oracle_equivalence_sample():
    for e in stlc_corpus(60, seed=11):
        res = run_encoded(encode_stlc(STLC_CONTEXT, e))
        assert not res.exhausted
        assert len(res.normal_forms) == 1
        assert alpha_eq(res.normal_forms[0], normalize(e))


# -- untyped -----------------------------------------------------------------------------

def test_untyped_identity():
    assert run_encoded(encode_untyped(untyped(r"(\x. x) a"))).normal_forms == [Var("a")]


def test_untyped_omega_hits_budget():
    res = run_encoded(encode_untyped(omega()), budget=300)
    assert res.exhausted and res.steps == 300


def test_untyped_k_combinator():
    res = run_encoded(encode_untyped(untyped(r"(\x. \y. x) a b")))
    assert res.normal_forms == [Var("a")]


# -- PTS -----------------------------------------------------------------------------------

def test_pts_axiom_judgement():
    spec = PtsSpec.indexed(2, axioms=[(1, 2)])
    assert pts_typecheck(spec, {}, Const("s1")) == Const("s2")
    with pytest.raises(NoRuleError):
        pts_typecheck(spec, {}, Const("s2"))


def test_quine_atom():
    assert pts_typecheck(QUINE, {}, Const("s1")) == Const("s1")
    enc = encode_pts(QUINE, {}, Const("s1"))
    assert typing_query(enc.space, "t1", Base("t1"))


def test_product_without_rule_is_rejected():
    spec = PtsSpec.indexed(1, axioms=[(1, 1)])
    with pytest.raises(NoRuleError):
        pts_typecheck(spec, [("x", Const("s1"))], PiT("y", Var("x"), Var("x")))


def test_pts_beta_steps():
    assert pts_beta_step(App(Lam("x", Const("s1"), Var("x")), Var("y"))) == [Var("y")]
    redex = App(Lam("z", Const("s1"), Var("z")), Var("A"))
    assert pts_beta_step(PiT("x", Var("A"), redex)) == [PiT("x", Var("A"), Var("A"))]
    assert pts_beta_step(Var("y")) == []


def test_non_normalising_conversion_is_budgeted():
    with pytest.raises(ConversionBudgetError):
        pts_convertible(omega(), Var("a"), budget=50)
    # a product whose domain is the looping term: the application check must convert it
    ctx = [("f", PiT("_", omega(), Const("s1"))), ("a", Const("s1"))]
    with pytest.raises(ConversionBudgetError):
        pts_typecheck(QUINE, ctx, App(Var("f"), Var("a")), budget=50, check_context=False)
    assert issubclass(ConversionBudgetError, ObjectTypeError)
    assert ConversionBudgetError is not TypeMismatch


def test_rule_atoms_type_products():
    spec = PtsSpec.indexed(1, axioms=[(1, 1)], rules=[(1, 1, 1)])
    enc = encode_pts(spec, [("X", Const("s1"))], Var("X"))
    text = enc.space.text()
    assert "(: (Pi $x $ta $m) (trans" in text
    assert pts_sort_of(enc, PiT("y", Var("X"), Var("X"))) == {"s1"}
    assert pts_sort_of(enc, Var("X")) == set()


def stlc_on_pts(e):
    ctx = stlc_context_to_pts(STLC_CONTEXT, e)
    try:
        t = pts_typecheck(LAMBDA_ARROW, ctx, stlc_term_to_pts(e))
    except ObjectTypeError:
        return None
    return t


def test_lambda_arrow_agrees_with_stlc_on_corpus():
    for e in mixed_corpus(80, seed=4):
        try:
            want = stlc_to_pts(stlc_typecheck(STLC_CONTEXT, e))
        except ObjectTypeError:
            want = None
        got = stlc_on_pts(e)
        assert (got is None) == (want is None)
        if got is not None:
            assert alpha_eq(got, want)


def test_pts_encoding_evaluates_like_stlc():
    for e in stlc_corpus(25, seed=2):
        ctx = stlc_context_to_pts(STLC_CONTEXT, e)
        pe = stlc_term_to_pts(e)
        got = run_encoded(encode_pts(LAMBDA_ARROW, ctx, pe)).normal_forms
        want = run_encoded(encode_stlc(STLC_CONTEXT, e)).normal_forms
        assert len(got) == 1 and alpha_eq(got[0], stlc_term_to_pts(want[0]))


# -- PDTS ----------------------------------------------------------------------------------

PCTX = {"a": A, "b": B, "v1": A, "v2": A}


def test_pdts_special_typing_rules():
    assert pdts_typecheck(PCTX, term("random[0.3](a, b)")) == UnionT(A, B)
    assert pdts_typecheck(PCTX, term("thunk(random[0.3](a, b))")) == Dist(UnionT(A, B))
    assert pdts_typecheck(PCTX, term("sample(thunk(a))")) == A
    with pytest.raises(ObjectTypeError):
        pdts_typecheck(PCTX, term("sample(a)"))


def test_pdts_step_examples():
    assert pdts_step(term("random[0.3](v1, v2)")) == [WeightedStep(Var("v1"), 0.3), WeightedStep(Var("v2"), 0.7)]
    assert pdts_step(term("sample(thunk(v1))")) == [WeightedStep(Var("v1"), 1.0)]
    assert pdts_step(Var("v1")) == []


def test_full_eval_worked_example():
    fe = pdts_full_eval(term("sample(thunk(random[0.3](v1, v2)))"))
    assert fe.dist == {Var("v1"): 0.3, Var("v2"): 0.7}
    assert not fe.exhausted


def test_full_eval_deterministic_and_nested():
    assert pdts_full_eval(term(r"(\x:A. x) v1")).dist == {Var("v1"): 1.0}
    nested = term("random[0.5](random[0.5](a, b), random[0.5](v1, v2))")
    dist = pdts_full_eval(nested).dist
    assert sorted(dist.values()) == [0.25] * 4


def test_full_eval_budget_reports_residual():
    fe = pdts_full_eval(omega(), budget=20)
    assert fe.exhausted and fe.residual == pytest.approx(1.0)
    with pytest.raises(ValueError):
        pdts_full_eval(Var("a"), budget=0)


def test_sample_examples():
    for seed in range(5):
        assert pdts_sample(term(r"(\x:A. x) v1"), seed) == Var("v1")
        assert pdts_sample(term("random[1.0](a, b)"), seed) == Var("a")
    with pytest.raises(EvaluationBudgetError):
        pdts_sample(omega(), 0, budget=30)


def test_sampled_frequency_within_three_sigma():
    e = term("sample(thunk(random[0.3](v1, v2)))")
    rng = random.Random(1234)
    n = 10_000
    hits = sum(pdts_sample(e, rng) == Var("v1") for _ in range(n))
    sigma = math.sqrt(n * 0.3 * 0.7)
    assert abs(hits - n * 0.3) <= 3 * sigma


def test_encoded_sample_thunk():
    res = run_encoded(encode_pdts(PCTX, term("sample(thunk(v1))")))
    assert res.normal_forms == [Var("v1")]


def test_encoded_random_has_two_successors():
    enc = encode_pdts(PCTX, term("random[0.3](v1, v2)"))
    lts = lts_of_atomspace(enc)
    succ = [t for a, t, _ in lts.successors(lts.initial) if a == "update"]
    assert len(succ) == 2
    assert sorted(show(decode_space(s, enc)) for s in succ) == ["v1", "v2"]
    # the raw engine reaches the redex through internal moves first
    assert len(update(enc.space)) == 1


def test_engine_support_matches_full_eval():
    for e in pdts_corpus(30, seed=6):
        fe = pdts_full_eval(e)
        got = run_encoded(encode_pdts(PDTS_CONTEXT, e)).normal_forms
        assert {show(t) for t in got} == {show(t) for t in fe.dist}


@settings(max_examples=150)
@given(st.integers(0, 10_000))
def test_full_eval_mass_is_one(seed):
    (e,) = pdts_corpus(1, seed=seed)
    fe = pdts_full_eval(e)
    assert abs(fe.mass - 1.0) <= 1e-9


@settings(max_examples=150)
@given(st.integers(0, 10_000))
def test_subject_reduction(seed):
    (e,) = pdts_corpus(1, seed=seed)
    t1 = pdts_typecheck(PDTS_CONTEXT, e)
    for s in pdts_step(e):
        if s.weight > 0:
            t2 = pdts_typecheck(PDTS_CONTEXT, s.term)
            assert SubtypeRelation().leq(t2, t1)


# -- transition-system views -----------------------------------------------------------------

def test_object_lts_of_minisys_style_term():
    ctx = {"v1": A, "v2": A}
    e = term(r"(\x:A. v2) v1")
    lts = lts_of_object("stlc", ctx, e, probes=[("is-of-type", A)])
    succ = lts.successors(e)
    assert ("update", Var("v2"), 1.0) in succ
    assert ("is-of-type(A)", e, 1.0) in succ
    assert [a for a, _, _ in lts.successors(Var("v2"))] == ["is-of-type(A)"]


def test_object_and_atomspace_views_bisimilar():
    probes = [("head", "a"), ("head", "g"), ("is-body-of-lambda",)]
    for e in stlc_corpus(15, seed=8):
        enc = encode_stlc(STLC_CONTEXT, e)
        obj = lts_of_object("stlc", STLC_CONTEXT, e, probes)
        spc = lts_of_atomspace(enc, probes)
        assert isinstance(bisim_check(obj, e, spc, spc.initial), Bisimilar)


def test_erased_pdts_view_matches_atomspace():
    for e in pdts_corpus(10, seed=12):
        enc = encode_pdts(PDTS_CONTEXT, e)
        weighted = lts_of_object("pdts", PDTS_CONTEXT, e, weighted=True)
        assert weighted.weighted
        spc = lts_of_atomspace(enc)
        assert isinstance(bisim_check(erase_weights(weighted), e, spc, spc.initial), Bisimilar)


def test_normal_form_has_no_update():
    lts = lts_of_object("stlc", STLC_CONTEXT, Var("a"))
    assert lts.successors(Var("a")) == []
    assert len(reachable(lts, Var("a")).states) == 1


def test_subtype_query_on_encoded_union():
    enc = encode_pdts(PCTX, term("random[0.3](a, b)"))
    assert subtype_query(enc.space, A, UnionT(A, B))
    assert node_text(enc.space.atoms[enc.space.pointer[0]]).startswith("(@ ((@ (random a)) b)")
