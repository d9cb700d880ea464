import pytest
from hypothesis import given, settings, strategies as st

from mettagraph.atomspace import (
    Atomspace, MConstraintError, PointerError, check_mconstraints, fresh_edge_id, fresh_symbol,
    mk_app, mk_sym, node_text, node_violations, prelude_tuples, subtype_query, to_metagraph,
    typing_query, wire_order,
)
from mettagraph.engine import evaluate, result_node
from mettagraph.metagraph import check_constraints
from mettagraph.types import (TOP, TOP_TYPE, Arrow, Base, Dist, InterT, Pi, SubtypeBudgetError,
                              SubtypeRelation, UnionT)

A, B, C = Base("A"), Base("B"), Base("C")


def test_add_typing_atom():
    s = Atomspace().add("(: f (-> A B))")
    assert len(s) == 1
    assert node_text(s.atoms[0]) == "(: f (-> A B))"
    assert check_mconstraints(s) == []


def test_subtype_declaration_extends_relation():
    s = Atomspace().add("(<= t1 t2)")
    assert subtype_query(s, Base("t1"), Base("t2"))
    assert not subtype_query(s, Base("t2"), Base("t1"))


def test_second_pointer_rejected():
    s = Atomspace().add("(! a)")
    with pytest.raises(PointerError):
        s.add("(! b)")


def test_funapp_codomain_side_condition():
    Bp = Base("Bp")
    f = mk_sym("f", Arrow(A, Bp), 1)
    a = mk_sym("a", A, 2)
    node = mk_app(f, a, tag=B, eid=3)
    assert node_violations(node, SubtypeRelation([(Bp, B)])) == []
    bad = node_violations(node, SubtypeRelation())
    assert len(bad) == 1 and "codomain" in bad[0].message


def test_empty_space_is_valid():
    assert check_mconstraints(Atomspace()) == []


def test_union_and_intersection_rules():
    s = Atomspace()
    t, u = Base("t"), Base("u")
    assert subtype_query(s, t, UnionT(t, u))
    assert subtype_query(s, InterT(t, u), TOP)
    assert subtype_query(s, InterT(t, u), t)
    assert not subtype_query(s, Base("t1"), Base("t2"))


def test_transitivity_and_pi_variance():
    s = Atomspace().add("(<= A B)\n(<= B C)")
    assert subtype_query(s, A, C)
    # contravariant domain, covariant body
    assert subtype_query(s, Pi("v", B, A), Pi("v", A, C))
    assert not subtype_query(s, Pi("v", A, A), Pi("v", B, A))
    assert subtype_query(s, Arrow(B, A), Arrow(A, B))
    assert subtype_query(s, Dist(A), Dist(C))


def test_typing_query():
    s = Atomspace().add("(: A Type)\n(: v1 A)")
    assert typing_query(s, "v1", A)
    assert typing_query(s, "v1", UnionT(A, B))
    assert not typing_query(s, "v2", A)


def test_prelude_tuples():
    s = prelude_tuples(Atomspace().add("(: A Type)\n(: B Type)\n(: a A)\n(: b B)"))
    assert check_mconstraints(s) == []
    assert any(node_text(x).startswith("(: tuple (Pi") for x in s.atoms)
    for proj, want in (("pi1", "a"), ("pi2", "b")):
        res = evaluate(s.add(f"(! (@ ({proj} (tuple A B a b))))"))
        assert [node_text(result_node(x)) for x in res.spaces] == [want]


def test_fresh_symbols_and_ids():
    name, s = fresh_symbol(Atomspace())
    assert name == "s1"
    assert fresh_symbol(s)[0] == "s2"
    used = Atomspace().add("(: s1 A)\n(: s2 A)\n(: s3 A)")
    assert fresh_symbol(used)[0] == "s4"
    i, s = fresh_edge_id(used)
    j, _ = fresh_edge_id(s)
    assert j > i >= used.next_id


def test_invalid_atom_rejected():
    bad = mk_app(mk_sym("f", Arrow(A, B), 90), mk_sym("b", B, 91), tag=B, eid=92)
    with pytest.raises(MConstraintError):
        Atomspace().add(bad)


def test_metagraph_view_respects_wire_order():
    s = Atomspace().add("(: A Type)\n(: v1 A)\n(: f (-> A A))\n(! (@ (f v1)))")
    g = to_metagraph(s)
    assert check_constraints(g, lambda slot, child: True) == []
    assert all(v.kind == "order" for v in check_constraints(g, wire_order(s.rel)))


def test_space_equality_ignores_ids_and_order():
    s1 = Atomspace().add("(: a A)\n(: b B)")
    s2 = Atomspace(next_id=50).add("(: b B)\n(: a A)")
    assert s1 == s2 and hash(s1) == hash(s2)


def test_cyclic_declarations_hit_budget_or_terminate():
    rel = SubtypeRelation([(A, B), (B, A)], budget=8)
    assert rel.leq(A, B) and rel.leq(B, A)
    deep = A
    for _ in range(20):
        deep = Arrow(deep, deep)
    with pytest.raises(SubtypeBudgetError):
        rel.leq(deep, Arrow(deep, B))


# -- properties -------------------------------------------------------------

NAMES = st.sampled_from(["A", "B", "C", "D", "E"])
PAIRS = st.lists(st.tuples(NAMES.map(Base), NAMES.map(Base)), max_size=8)


@settings(max_examples=300)
@given(PAIRS)
def test_closure_is_a_fixed_point(pairs):
    rel = SubtypeRelation(pairs)
    again = SubtypeRelation(rel.closure())
    assert again.closure() == rel.closure()


@settings(max_examples=300)
@given(PAIRS, NAMES, NAMES, NAMES)
def test_relation_is_a_preorder(pairs, a, b, c):
    rel = SubtypeRelation(pairs)
    a, b, c = Base(a), Base(b), Base(c)
    assert rel.leq(a, a)
    assert rel.leq(a, TOP) and rel.leq(a, TOP_TYPE)
    if rel.leq(a, b) and rel.leq(b, c):
        assert rel.leq(a, c)


@settings(max_examples=300)
@given(PAIRS, PAIRS, NAMES)
def test_typing_query_monotone(pairs, extra, target):
    text = "(: v1 A)\n" + "\n".join(f"(<= {a} {b})" for a, b in pairs)
    s = Atomspace().add(text)
    bigger = s.add("\n".join(f"(<= {a} {b})" for a, b in extra)) if extra else s
    t = Base(target)
    if typing_query(s, "v1", t):
        assert typing_query(bigger, "v1", t)


@settings(max_examples=200)
@given(st.lists(st.sampled_from(["(: v1 A)", "(<= A B)", "(: f (-> A B))", "(= (f $x) $x)",
                                 "(: g (-> B B))", "(= (g $y) (g $y))"]), max_size=6))
def test_committed_spaces_pass_constraints(lines):
    s = Atomspace().add("\n".join(lines))
    assert check_mconstraints(s) == []
