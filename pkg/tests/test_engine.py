import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mettagraph.atomspace import Atomspace, check_mconstraints, mk_sym, node_text, parse_atoms
from mettagraph.engine import (
    BudgetExhausted, EngineError, NormalForms, RuleGraph, TAU_RULES, apply_rule, evaluate,
    instantiate_funapp, instantiate_trans, match, match_node, result_node, update, update_steps,
)
from mettagraph.langs.corpus import STLC_CONTEXT, stlc_corpus
from mettagraph.langs.encode import PDTS_ATOMS, encode_stlc
from mettagraph.metagraph import graph_iso
from mettagraph.minisys import F1, V1, V2, base_space, encode_mini, enumerate_exprs
from mettagraph.types import Base

A = Base("A")


def node(text, space=None):
    ((n, _),) = parse_atoms(text, space)
    return n


# -- matching -------------------------------------------------------------------

def brute_force_matches(pattern, host):
    """Every top-level atom, every consistent assignment of the pattern's variables."""
    out = []
    for i, atom in enumerate(host.atoms):
        if match_node(pattern, atom, {}, host.rel) is not None:
            out.append(i)
    return sorted(out)


def test_match_binds_each_argument():
    host = Atomspace().add("(f a)\n(f b)\n(g a)")
    ms = match(node("(f $x)"), host)
    assert sorted(m.binding_text()["x"] for m in ms) == ["a", "b"]
    assert sorted(m.atom for m in ms) == brute_force_matches(node("(f $x)"), host)


def test_match_without_variables_is_identity():
    host = Atomspace().add("(: v1 A)")
    ms = match(host.atoms[0], host)
    assert len(ms) == 1 and ms[0].bindings == {}


def test_match_respects_type_tags():
    host = Atomspace().add("(: A Type)\n(: B Type)\n(: v1 A)\n(g v1)")
    pat = mk_sym("v1", Base("B"))
    assert match(pat, host) == []


def test_repeated_variable_must_agree():
    host = Atomspace().add("(h a a)\n(h a b)")
    ms = match(node("(h $x $x)"), host)
    assert [m.binding_text() for m in ms] == [{"x": "a"}]


# -- rules -----------------------------------------------------------------------

def test_funapp_rule_on_minisys():
    s = encode_mini(F1(V1))
    (rule,) = instantiate_funapp(s)
    out = apply_rule(rule, s)
    assert node_text(result_node(out)) == "v2"
    assert check_mconstraints(out) == []


def test_funapp_with_pi_typed_function():
    s = Atomspace().add("(: A Type)\n(: v1 A)\n(: id (Pi $T Type (-> $T $T)))\n"
                        "(= (id $T $x) $x)\n(! (@ (id A v1)))")
    (rule,) = instantiate_funapp(s)
    assert node_text(rule.bindings["T"]) == "A"
    res = evaluate(s)
    assert [node_text(result_node(x)) for x in res.spaces] == ["v1"]


def test_two_equations_two_rules():
    s = Atomspace().add(PDTS_ATOMS + "(: A Type)\n(: v1 A)\n(: v2 A)\n(! (@ (random v1 v2)))")
    rules = instantiate_funapp(s)
    assert len(rules) == 2
    assert sorted(node_text(r.rhs) for r in rules) == ["v1", "v2"]
    assert len(update(s)) == 2


def test_funapp_requires_activation():
    s = Atomspace().add("(: A Type)\n(: v1 A)\n(! (f v1))")
    with pytest.raises(EngineError):
        instantiate_funapp(s)


def test_invalid_result_leaves_host_unchanged():
    s = Atomspace().add("(: A Type)\n(: B Type)\n(: b B)\n(: v1 A)\n(: f (-> A A))\n"
                        "(: g (-> A B))\n(g (! (@ (f v1))))")
    bad = RuleGraph("funapp", s.pointed(), mk_sym("b", Base("B"), 999), s.pointer)
    assert apply_rule(bad, s) is s


def test_rule_graph_markers():
    s = encode_mini(F1(V1))
    (rule,) = instantiate_funapp(s)
    g = rule.to_metagraph()

    def head_edge(x):
        while hasattr(x, "left"):
            x = x.left
        return x
    assert head_edge(g.left).label.base[1:] == ("L", "*")
    assert head_edge(g.right).label.base[1:] == ("R", "**")


def test_trans_collects_matches_padded_with_nul():
    s = Atomspace().add("(: A Type)\n(: a A)\n(: b A)\n(! (@ (trans (: $x A) $x)))")
    rule = instantiate_trans(s)
    items = node_text(rule.rhs)[1:-1].split()
    assert items[0] == "tuple"
    assert items[1:3] == ["a", "b"]
    assert set(items[3:]) == {"nul"}
    assert len(items) - 1 == s.node_count(exclude=3)


def test_trans_without_matches_is_all_nul():
    s = Atomspace().add("(: A Type)\n(! (@ (trans (: $x B) $x)))")
    assert node_text(instantiate_trans(s).rhs) == "(tuple nul nul nul)"


def test_trans_single_match():
    s = Atomspace().add("(: a A)\n(! (@ (trans (: $x A) $x)))")
    assert node_text(instantiate_trans(s).rhs) == "(tuple a nul nul)"


# -- update and evaluate -----------------------------------------------------------

def test_unactivated_pointer_halts():
    assert update(encode_mini(V1)) == []


def test_pointer_moves_to_inner_activation():
    s = encode_mini(F1(F1(V1)))
    (step,) = update_steps(s)
    assert step.rule == "move-pointer"
    assert step.space.pointer == s.pointer + (1,)


def test_nested_minisys_normalises():
    res = evaluate(encode_mini(F1(F1(V1))))
    assert isinstance(res, NormalForms)
    assert [node_text(result_node(x)) for x in res.spaces] == ["v1"]


def test_normal_space_takes_zero_steps():
    s = encode_mini(V2)
    res = evaluate(s)
    assert res.steps == 0 and res.spaces == [s]


def test_looping_equation_exhausts_budget():
    s = Atomspace().add("(: A Type)\n(: a A)\n(: g (-> A A))\n(= (g $x) (@ (g $x)))\n(! (@ (g a)))")
    res = evaluate(s, budget=25)
    assert isinstance(res, BudgetExhausted) and res.steps == 25


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        evaluate(encode_mini(V1), budget=0)


def test_trace_records():
    recs = []
    evaluate(encode_mini(F1(F1(V1))), trace=recs.append)
    assert recs[0]["rule"] == "move-pointer"
    assert {r["rule"] for r in recs} <= {"funapp", "trans", "move-pointer", "return", "deactivate"}
    assert [r["step"] for r in recs] == list(range(1, len(recs) + 1))


# -- invariants on corpora -------------------------------------------------------------

def edge_ids(space):
    out = []
    for a in space.atoms:
        for _, n in a.walk():
            out.append(n.eid)
            if n.act is not None:
                out.append(n.act)
    return out


def walk_all(space, budget=2000):
    """Every state reachable by update, with its step list."""
    seen, todo = {space}, [space]
    while todo and len(seen) < budget:
        s = todo.pop()
        steps = update_steps(s)
        yield s, steps
        for st_ in steps:
            if st_.space not in seen:
                seen.add(st_.space)
                todo.append(st_.space)


def assert_safe(space):
    for s, steps in walk_all(space):
        for st_ in steps:
            t = st_.space
            assert check_mconstraints(t) == []
            assert t.text().count("(!") + t.text().startswith("!") <= 1
            assert t.pointer is not None
            assert t is not s and t != s
            old = set(edge_ids(s))
            assert all(i >= s.next_id for i in set(edge_ids(t)) - old)


def test_engine_safety_on_minisys():
    for e in enumerate_exprs():
        assert_safe(encode_mini(e))


def test_engine_safety_on_stlc_corpus():
    for e in stlc_corpus(40, seed=3):
        assert_safe(encode_stlc(STLC_CONTEXT, e).space)


def test_deterministic_when_lhs_do_not_overlap():
    for e in stlc_corpus(40, seed=5):
        for s, steps in walk_all(encode_stlc(STLC_CONTEXT, e).space):
            assert len(steps) <= 1


def test_confluence_on_corpora():
    spaces = [encode_mini(e) for e in enumerate_exprs()]
    spaces += [encode_stlc(STLC_CONTEXT, e).space for e in stlc_corpus(30, seed=9)]
    for s in spaces:
        res = evaluate(s)
        assert isinstance(res, NormalForms)
        nfs = res.spaces
        assert all(graph_iso(a.to_metagraph(), b.to_metagraph()) for a, b in itertools.combinations(nfs, 2))
        assert len({x.key for x in nfs}) == 1


@settings(max_examples=60)
@given(st.sampled_from(enumerate_exprs()), st.booleans())
def test_tau_steps_are_single_successors(e, mutated):
    s = encode_mini(e, base_space(mutated))
    for _, steps in walk_all(s):
        taus = [x for x in steps if x.rule in TAU_RULES]
        assert not taus or len(steps) == 1
