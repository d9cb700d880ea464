import re

import pytest
from hypothesis import given, settings, strategies as st

from mettagraph.atomspace import Atomspace, AtomspaceError, Key, parse_atoms
from mettagraph.sexpr import ParseError, SAtom, SList, parse, parse_one


def squash(s):
    return re.sub(r"\s+", " ", s).strip()


def test_typing_atom():
    x = parse_one("(: f (-> A B))")
    assert x.head == ":"
    assert str(x) == "(: f (-> A B))"
    ((node, ptr),) = parse_atoms("(: f (-> A B))")
    assert node.label == Key(":") and ptr is None


def test_equation_with_variable():
    ((node, _),) = parse_atoms("(= (f $x) $x)")
    assert node.label == Key("=")
    variables = {n.label.name for _, n in node.walk() if type(n.label).__name__ == "Var"}
    assert variables == {"x"}


def test_unclosed_list_is_positioned():
    with pytest.raises(ParseError) as err:
        parse("(: f")
    e = err.value
    assert e.expected == (")",)
    assert (e.span.line, e.span.col, e.span.start) == (1, 5, 4)


def test_unbalanced_close():
    with pytest.raises(ParseError) as err:
        parse("a )")
    assert err.value.span.start == 2


def test_spans_address_the_input():
    text = "(= (f $x)\n   $x) ; done\n(: a A)"
    xs = parse(text)
    assert [text[x.span.start:x.span.end] for x in xs] == ["(= (f $x)\n   $x)", "(: a A)"]
    inner = xs[0].items[1]
    assert text[inner.span.start:inner.span.end] == "(f $x)"
    assert xs[1].span.line == 3


def test_comments_and_blank_lines():
    assert parse("; nothing\n\n  ; more\n") == []
    assert [str(x) for x in parse("a ; c\nb")] == ["a", "b"]


def test_bad_arity_is_an_atomspace_error():
    with pytest.raises(AtomspaceError):
        Atomspace().add("(: a)")


# -- properties -------------------------------------------------------------

ATOM = st.from_regex(r"[A-Za-z$:=<>@!\-][A-Za-z0-9_'\-]{0,4}", fullmatch=True).filter(lambda s: s != "$")


def sexprs():
    return st.recursive(ATOM.map(SAtom), lambda kids: st.lists(kids, max_size=4).map(lambda xs: SList(tuple(xs))),
                        max_leaves=20)


@settings(max_examples=400)
@given(sexprs())
def test_print_parse_round_trip(x):
    assert parse_one(str(x)) == x


@settings(max_examples=300)
@given(sexprs(), st.lists(st.sampled_from([" ", "\n", "\t", "  ; c\n"]), min_size=1, max_size=3))
def test_round_trip_up_to_whitespace(x, ws):
    spaced = str(x).replace(" ", "".join(ws)).replace("(", "(" + ws[0])
    assert parse_one(spaced) == x


@settings(max_examples=1000)
@given(st.text(alphabet="()$:; ab\n=@!->", max_size=40))
def test_parser_is_total(text):
    try:
        parse(text)
    except ParseError as e:
        assert 0 <= e.span.start <= len(text)
        assert e.span.line >= 1


@settings(max_examples=500)
@given(st.text(max_size=60))
def test_atom_builder_never_crashes(text):
    try:
        Atomspace().add(text)
    except (ParseError, AtomspaceError, ValueError):
        pass


GOLDEN = """
(: A Type)
(: B Type)
(: f (-> A B))
(: g (-> A (-> A A)))
(<= A B)
(= (f $x) (g $x $x))
(: v1 A)
(! (@ (f v1)))
"""


def test_golden_corpus_round_trip():
    space = Atomspace().add(GOLDEN)
    again = Atomspace().add(space.text())
    assert again == space
    assert squash(again.text()) == squash(space.text())
