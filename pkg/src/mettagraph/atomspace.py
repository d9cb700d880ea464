"""Atomspace states: atoms as persistent typed trees over the keyword labels.

Each atom is a tree of :class:`Node` values.  A node is one edge of the
underlying metagraph: its label, type tag and target (slot) types, with one
child per target.  Activation (``@``) is stored on the node as the id of the
activating edge; the unique execution pointer (``!``) is a path into one atom.
``to_metagraph`` materialises the full typed metagraph, including the ``@``
and ``!`` edges.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Any, Iterable

from . import metagraph as mg
from .sexpr import SAtom, SList, parse
from .types import (EXEC, JUDG, NUL_T, TOP, TOP_TYPE, TYPE, Arrow, Base, Pi, SubtypeRelation,
                    TVar, TypeExpr, TypeSyntaxError, has_tvars, parse_type, subst_type,
                    type_to_text)

KEYWORDS = (":", "<=", "=", "->", "Eq", "funapp", "trans", "@", "!")


class AtomspaceError(Exception):
    pass


class MConstraintError(AtomspaceError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations[:3]))


class PointerError(AtomspaceError):
    pass


# -- labels -----------------------------------------------------------------

@dataclass(frozen=True)
class Sym:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return "$" + self.name


@dataclass(frozen=True)
class Key:
    kw: str

    def __post_init__(self):
        if self.kw not in KEYWORDS:
            raise ValueError(f"not a keyword: {self.kw!r}")

    def __str__(self):
        return self.kw


@dataclass(frozen=True)
class Ty:
    t: TypeExpr

    def __str__(self):
        return type_to_text(self.t)


COLON, SUB, EQ, ARROW, EQT, FUNAPP, TRANS = (Key(k) for k in (":", "<=", "=", "->", "Eq", "funapp", "trans"))
NUL = Sym("nul")


# -- nodes ------------------------------------------------------------------

class Node:
    """Immutable tree node.  ``sig`` is a canonical string ignoring edge ids."""

    __slots__ = ("label", "type", "slots", "children", "eid", "act", "sig")

    def __init__(self, label, type, slots=(), children=(), eid=0, act=None):
        self.label = label
        self.type = type
        self.slots = tuple(slots)
        self.children = tuple(children)
        self.eid = eid
        self.act = act
        if len(self.slots) != len(self.children):
            raise ValueError("slot/child count mismatch")
        inner = ",".join(c.sig for c in self.children)
        slots_txt = ",".join(type_to_text(s) for s in self.slots)
        self.sig = (f"{'@' if act is not None else ''}{_label_text(label)}"
                    f"<{type_to_text(type)}|{slots_txt}>({inner})")

    def __eq__(self, other):
        return isinstance(other, Node) and self.sig == other.sig

    def __hash__(self):
        return hash(self.sig)

    def __repr__(self):
        return f"Node({node_text(self)})"

    @property
    def kind(self):
        return type(self.label).__name__.lower()

    def is_key(self, kw):
        return isinstance(self.label, Key) and self.label.kw == kw

    def replace(self, **kw) -> "Node":
        d = dict(label=self.label, type=self.type, slots=self.slots, children=self.children,
                 eid=self.eid, act=self.act)
        d.update(kw)
        return Node(**d)

    def walk(self, path=()):
        yield path, self
        for i, c in enumerate(self.children):
            yield from c.walk(path + (i,))

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


def _label_text(label):
    if isinstance(label, Ty):
        return "T:" + type_to_text(label.t)
    return str(label)


def plain_sig(n: Node) -> str:
    """Signature ignoring activation flags."""
    inner = ",".join(plain_sig(c) for c in n.children)
    return f"{_label_text(n.label)}<{type_to_text(n.type)}>({inner})"


def get_at(n: Node, path) -> Node:
    for i in path:
        n = n.children[i]
    return n


def replace_at(n: Node, path, new: Node) -> Node:
    if not path:
        return new
    i = path[0]
    kids = list(n.children)
    kids[i] = replace_at(kids[i], path[1:], new)
    return n.replace(children=tuple(kids))


def spine(n: Node):
    """Head and argument list of a curried application chain."""
    args = []
    while n.is_key("funapp"):
        args.append(n.children[1])
        n = n.children[0]
    return n, args[::-1]


def node_text(n: Node, pointer=None) -> str:
    """Surface syntax; ``pointer`` is a path inside ``n`` to print as ``(! ...)``."""
    def go(x, path):
        body = _plain(x, path)
        if x.act is not None:
            body = f"(@ {body})"
        if pointer is not None and tuple(path) == tuple(pointer):
            body = f"(! {body})"
        return body

    def _plain(x, path):
        lab = x.label
        if isinstance(lab, Key) and lab.kw == "funapp":
            # flatten only through non-activated, non-pointed heads
            head, hp = x, path
            args = []
            while (head.is_key("funapp") and (head is x or (head.act is None and
                   not (pointer is not None and tuple(hp) == tuple(pointer))))):
                args.append((head.children[1], hp + (1,)))
                head, hp = head.children[0], hp + (0,)
            parts = [go(head, hp)] + [go(a, p) for a, p in reversed(args)]
            return "(" + " ".join(parts) + ")"
        if isinstance(lab, Key):
            return "(" + " ".join([lab.kw] + [go(c, path + (i,)) for i, c in enumerate(x.children)]) + ")"
        return str(lab)

    return go(n, ())


# -- tag helpers ------------------------------------------------------------

def node_to_type(n: Node):
    """Read a type-position node back as a TypeExpr (None if it is not one)."""
    lab = n.label
    if isinstance(lab, Ty):
        return lab.t
    if isinstance(lab, Var):
        return TVar(lab.name)
    if isinstance(lab, Key) and lab.kw == "->":
        a, b = (node_to_type(c) for c in n.children)
        if a is None or b is None:
            return None
        return Arrow(a, b)
    if isinstance(lab, Sym):
        return Base(lab.name)
    return None


def funapp_tags(fn: Node, arg: Node):
    """(slots, tag) of an application node from the function's type tag."""
    ft = fn.type
    if isinstance(ft, Arrow):
        return (ft, ft.dom), ft.cod
    if isinstance(ft, Pi):
        at = node_to_type(arg) if isinstance(arg.label, (Ty, Key)) else None
        body = subst_type(ft.body, ft.var, at) if at is not None else ft.body
        return (ft, ft.dom), body
    return (TOP_TYPE, TOP), TOP_TYPE


class _Ids:
    def __init__(self, start):
        self.next = start

    def __call__(self):
        self.next += 1
        return self.next - 1


def mk_sym(name, tag=TOP_TYPE, eid=0) -> Node:
    return Node(Sym(name), tag, eid=eid)


def mk_var(name, eid=0) -> Node:
    return Node(Var(name), TVar(name), eid=eid)


def mk_app(fn: Node, arg: Node, tag=None, act=None, eid=0) -> Node:
    slots, inferred = funapp_tags(fn, arg)
    return Node(FUNAPP, inferred if tag is None else tag, slots, (fn, arg), eid=eid, act=act)


def mk_type(t, eid=0) -> Node:
    """Type-position node: arrows become ``->`` edges, the rest are type leaves."""
    if isinstance(t, Arrow):
        return Node(ARROW, TYPE, (TYPE, TYPE), (mk_type(t.dom), mk_type(t.cod)), eid=eid)
    if isinstance(t, TVar):
        return Node(Var(t.name), TVar(t.name), eid=eid)
    return Node(Ty(t), TYPE, eid=eid)


def mk_typing(subject: Node, t, eid=0) -> Node:
    tnode = t if isinstance(t, Node) else mk_type(t)
    if not subject.children and isinstance(subject.label, Sym):
        tt = node_to_type(tnode) if not isinstance(t, TypeExpr) else t
        if tt is not None:
            subject = subject.replace(type=tt)
    return Node(COLON, JUDG, (TOP, TOP), (subject, tnode), eid=eid)


def mk_equation(lhs: Node, rhs: Node, eid=0) -> Node:
    return Node(EQ, JUDG, (TOP_TYPE, TOP_TYPE), (lhs, rhs), eid=eid)


def mk_subtype(a, b, eid=0) -> Node:
    return Node(SUB, JUDG, (TYPE, TYPE), (mk_type(a), mk_type(b)), eid=eid)


def mk_trans(pattern: Node, template: Node, act=None, eid=0) -> Node:
    return Node(TRANS, TOP, (TOP, TOP), (pattern, template), eid=eid, act=act)


def reid(n: Node, ids) -> Node:
    kids = tuple(reid(c, ids) for c in n.children)
    return Node(n.label, n.type, n.slots, kids, eid=ids(),
                act=(ids() if n.act is not None else None))


def max_id(n: Node) -> int:
    m = max(n.eid, n.act or 0)
    for c in n.children:
        m = max(m, max_id(c))
    return m


# -- constraint checking ----------------------------------------------------

@dataclass(frozen=True)
class MViolation:
    path: tuple
    message: str

    def __str__(self):
        return f"at {self.path}: {self.message}"


_SHAPES = {
    ":": (2, JUDG, (TOP, TOP)),
    "<=": (2, JUDG, (TYPE, TYPE)),
    "=": (2, JUDG, (TOP_TYPE, TOP_TYPE)),
    "->": (2, TYPE, (TYPE, TYPE)),
    "trans": (2, TOP, (TOP, TOP)),
}


def _open(*ts):
    return any(has_tvars(t) for t in ts)


def node_violations(node: Node, rel: SubtypeRelation, path=()) -> list:
    out = []
    for sub, n in node.walk(path):
        lab = n.label
        where = sub
        if isinstance(lab, Key):
            kw = lab.kw
            if kw in _SHAPES:
                arity, tag, slots = _SHAPES[kw]
                if len(n.children) != arity or n.type != tag or n.slots != slots:
                    out.append(MViolation(where, f"malformed {kw} edge"))
                    continue
            elif kw == "Eq":
                if len(n.children) != 3 or n.type != TYPE or n.slots[0] != TYPE:
                    out.append(MViolation(where, "malformed Eq edge"))
                    continue
                if n.slots[1] != n.slots[2]:
                    out.append(MViolation(where, "Eq sides must share a type"))
            elif kw == "funapp":
                if len(n.children) != 2:
                    out.append(MViolation(where, "funapp must have two targets"))
                    continue
                fs, arg_slot = n.slots
                if isinstance(fs, Arrow):
                    if arg_slot != fs.dom:
                        out.append(MViolation(where, "funapp argument slot differs from domain"))
                    elif not _open(fs.cod, n.type) and not rel.leq(fs.cod, n.type):
                        out.append(MViolation(where, f"codomain {fs.cod} is not below {n.type}"))
                elif isinstance(fs, Pi):
                    if arg_slot != fs.dom:
                        out.append(MViolation(where, "funapp argument slot differs from Pi domain"))
                elif (fs, arg_slot) != (TOP_TYPE, TOP):
                    out.append(MViolation(where, f"funapp function slot {fs} is not a function type"))
            else:
                out.append(MViolation(where, f"keyword {kw} cannot label a node"))
                continue
        elif n.children:
            out.append(MViolation(where, f"leaf label {lab} with targets"))
            continue
        for i, (c, s) in enumerate(zip(n.children, n.slots)):
            if _open(c.type, s):
                continue
            if not rel.leq(c.type, s):
                out.append(MViolation(where + (i,), f"{c.type} flows into slot {s}"))
        if n.is_key("<=") and not _open(*(node_to_type(c) or TOP for c in n.children)):
            a, b = (node_to_type(c) for c in n.children)
            if a is not None and b is not None and not rel.leq(a, b):
                out.append(MViolation(where, f"declared {a} <= {b} missing from relation"))
    return out


# -- atomspace --------------------------------------------------------------

_SYM_RE = re.compile(r"^s(\d+)$")


class Atomspace:
    """An immutable atomspace value.

    ``atoms`` keeps insertion order; equality and hashing use a canonical
    key that ignores edge ids and atom order (agreeing with graph_iso on the
    materialised metagraph).
    """

    __slots__ = ("atoms", "pointer", "rel", "next_id", "next_sym", "_key", "_eqs", "_decls")

    def __init__(self, atoms=(), pointer=None, rel=None, next_id=1, next_sym=1):
        self.atoms = tuple(atoms)
        self.pointer = tuple(pointer) if pointer is not None else None
        self.rel = rel if rel is not None else SubtypeRelation()
        self.next_id = next_id
        self.next_sym = next_sym
        self._key = None
        self._eqs = None
        self._decls = None

    # identity
    @property
    def key(self) -> str:
        if self._key is None:
            sigs = sorted(a.sig for a in self.atoms)
            if self.pointer is None:
                ptr = "-"
            else:
                ptr = self.atoms[self.pointer[0]].sig + "#" + ".".join(map(str, self.pointer[1:]))
            self._key = "\n".join(sigs) + "\n|" + ptr
        return self._key

    def digest(self) -> str:
        return hashlib.sha1(self.key.encode()).hexdigest()[:12]

    def __eq__(self, other):
        return isinstance(other, Atomspace) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Atomspace({len(self.atoms)} atoms, pointer={self.pointer})"

    def __len__(self):
        return len(self.atoms)

    # derived indices
    def equations(self, head: str):
        if self._eqs is None:
            eqs = {}
            for a in self.atoms:
                if a.is_key("="):
                    h, _ = spine(a.children[0])
                    if isinstance(h.label, Sym):
                        eqs.setdefault(h.label.name, []).append((a.children[0], a.children[1]))
            self._eqs = eqs
        return self._eqs.get(head, ())

    @property
    def decls(self) -> dict:
        """symbol name -> first declared closed simple type."""
        if self._decls is None:
            d = {}
            for a in self.atoms:
                if a.is_key(":"):
                    subj, tn = a.children
                    t = node_to_type(tn)
                    if (isinstance(subj.label, Sym) and not subj.children and t is not None
                            and not has_tvars(t) and not isinstance(t, Pi)):
                        d.setdefault(subj.label.name, t)
            self._decls = d
        return self._decls

    def _derived(self, atoms=None, pointer=..., rel=None, next_id=None, next_sym=None, keep_index=False):
        s = Atomspace(self.atoms if atoms is None else atoms,
                      self.pointer if pointer is ... else pointer,
                      self.rel if rel is None else rel,
                      self.next_id if next_id is None else next_id,
                      self.next_sym if next_sym is None else next_sym)
        if keep_index:
            s._eqs = self._eqs
            s._decls = self._decls
        return s

    # pointer access
    def pointed(self):
        if self.pointer is None:
            return None
        return get_at(self.atoms[self.pointer[0]], self.pointer[1:])

    def with_pointer(self, pointer) -> "Atomspace":
        return self._derived(pointer=pointer, keep_index=True)

    def replace_pointed(self, new: Node, pointer=None, next_id=None) -> "Atomspace":
        """Swap the pointed subtree for ``new`` (the pointed atom must be an expression)."""
        ai, path = self.pointer[0], self.pointer[1:]
        atoms = list(self.atoms)
        atoms[ai] = replace_at(atoms[ai], path, new)
        return self._derived(atoms=tuple(atoms), pointer=self.pointer if pointer is None else pointer,
                             next_id=next_id, keep_index=True)

    def ids(self):
        return _Ids(self.next_id)

    def node_count(self, exclude=None) -> int:
        return sum(a.size() for i, a in enumerate(self.atoms) if i != exclude)

    def text(self) -> str:
        lines = []
        for i, a in enumerate(self.atoms):
            ptr = self.pointer[1:] if self.pointer is not None and self.pointer[0] == i else None
            lines.append(node_text(a, ptr))
        return "\n".join(lines)

    def to_metagraph(self):
        return to_metagraph(self)

    def add(self, text_or_node, pointer=None) -> "Atomspace":
        if isinstance(text_or_node, Node):
            return add_atom(self, text_or_node, pointer)
        space = self
        for x in parse(text_or_node) if isinstance(text_or_node, str) else [text_or_node]:
            node, ptr = surface_to_node(space, x)
            space = add_atom(space, node, ptr)
        return space


def empty_space() -> Atomspace:
    return Atomspace()


def add_atom(space: Atomspace, atom: Node, pointer=None) -> Atomspace:
    """Add ``atom`` as a new disjoint atom; ``pointer`` is a path inside it."""
    if pointer is not None and space.pointer is not None:
        raise PointerError("atomspace already has a pointer edge")
    rel = space.rel
    if atom.is_key("<="):
        a, b = (node_to_type(c) for c in atom.children)
        if a is not None and b is not None and not has_tvars(a) and not has_tvars(b):
            rel = rel.add(a, b)
    viol = node_violations(atom, rel)
    if viol:
        raise MConstraintError(viol)
    next_sym = space.next_sym
    for _, n in atom.walk():
        if isinstance(n.label, Sym):
            m = _SYM_RE.match(n.label.name)
            if m:
                next_sym = max(next_sym, int(m.group(1)) + 1)
    ptr = (len(space.atoms),) + tuple(pointer) if pointer is not None else space.pointer
    return space._derived(atoms=space.atoms + (atom,), pointer=ptr, rel=rel,
                          next_id=max(space.next_id, max_id(atom) + 1), next_sym=next_sym)


def check_mconstraints(space: Atomspace) -> list:
    out = []
    for i, a in enumerate(space.atoms):
        out.extend(node_violations(a, space.rel, (i,)))
    if space.pointer is not None:
        try:
            space.pointed()
        except (IndexError, TypeError):
            out.append(MViolation(space.pointer, "dangling pointer"))
    return out


def subtype_query(space: Atomspace, t1, t2) -> bool:
    return space.rel.leq(t1, t2)


def _term_key(n: Node) -> str:
    """Structure only: labels and shape, no tags, ids or activation."""
    if not n.children:
        return _label_text(n.label)
    return _label_text(n.label) + "(" + ",".join(_term_key(c) for c in n.children) + ")"


def typing_query(space: Atomspace, subject, t) -> bool:
    if isinstance(subject, str):
        subject, _ = surface_to_node(space, parse(subject)[0])
    k = _term_key(subject)
    for a in space.atoms:
        if a.is_key(":") and _term_key(a.children[0]) == k:
            declared = node_to_type(a.children[1])
            if declared is not None and not has_tvars(declared) and space.rel.leq(declared, t):
                return True
    st = subject.type
    if st in (TOP, TOP_TYPE, JUDG, EXEC) or has_tvars(st):
        return False
    return space.rel.leq(st, t)


def fresh_symbol(space: Atomspace):
    n = space.next_sym
    return f"s{n}", space._derived(next_sym=n + 1, keep_index=True)


def fresh_edge_id(space: Atomspace):
    n = space.next_id
    return n, space._derived(next_id=n + 1, keep_index=True)


# -- surface syntax ---------------------------------------------------------

_TYPE_HEADS = {"U", "I", "Distribution", "Pi", "Eq"}


class _Builder:
    def __init__(self, space):
        self.space = space
        self.ids = space.ids()
        self.pointer = None
        self.decls = dict(space.decls)

    def term(self, x, path):
        if isinstance(x, SAtom):
            if x.is_var:
                return mk_var(x.text[1:], self.ids())
            if x.text in ("Type", "TopType", "Top"):
                return mk_type(parse_type(x), self.ids())
            return mk_sym(x.text, self.decls.get(x.text, TOP_TYPE), self.ids())
        items = x.items
        if not items:
            raise AtomspaceError(f"empty expression at {x.span}")
        head = x.head
        if head == "@":
            self._arity(x, 1)
            n = self.term(items[1], path)
            return n.replace(act=self.ids())
        if head == "!":
            self._arity(x, 1)
            if self.pointer is not None:
                raise PointerError("more than one pointer in atom")
            self.pointer = path
            return self.term(items[1], path)
        if head == ":":
            self._arity(x, 2)
            subj = self.term(items[1], path + (0,))
            tn = self.type_pos(items[2], path + (1,))
            return mk_typing(subj, tn, self.ids())
        if head == "<=":
            self._arity(x, 2)
            a = self.type_pos(items[1], path + (0,))
            b = self.type_pos(items[2], path + (1,))
            return Node(SUB, JUDG, (TYPE, TYPE), (a, b), eid=self.ids())
        if head == "=":
            self._arity(x, 2)
            lhs = self.term(items[1], path + (0,))
            rhs = self.term(items[2], path + (1,))
            return mk_equation(lhs, rhs, self.ids())
        if head == "trans":
            self._arity(x, 2)
            return mk_trans(self.term(items[1], path + (0,)), self.term(items[2], path + (1,)),
                            eid=self.ids())
        if head == "->":
            return self.type_pos(x, path)
        if head == "Eq":
            self._arity(x, 3)
            tn = self.type_pos(items[1], path + (0,))
            a = self.term(items[2], path + (1,))
            b = self.term(items[3], path + (2,))
            t = node_to_type(tn) or TOP_TYPE
            return Node(EQT, TYPE, (TYPE, t, t), (tn, a, b), eid=self.ids())
        if head in _TYPE_HEADS:
            return self.type_pos(x, path)
        if len(items) == 1:
            return self.term(items[0], path)
        # curried application: the spine's head sits at path (0, 0, ..., 0)
        k = len(items) - 1
        fn = self.term(items[0], path + (0,) * k)
        for i, a in enumerate(items[1:], 1):
            arg = self.term(a, path + (0,) * (k - i) + (1,))
            fn = mk_app(fn, arg, eid=self.ids())
        return fn

    def type_pos(self, x, path):
        if isinstance(x, SAtom):
            if x.is_var:
                return mk_var(x.text[1:], self.ids())
            return mk_type(parse_type(x), self.ids())
        head = x.head
        if head == "!":
            self._arity(x, 1)
            self.pointer = path
            return self.type_pos(x.items[1], path)
        if head == "->":
            if len(x.items) < 3:
                raise AtomspaceError(f"-> needs two arguments at {x.span}")
            parts = x.items[1:]
            node = self.type_pos(parts[-1], path)
            for p in reversed(parts[:-1]):
                node = Node(ARROW, TYPE, (TYPE, TYPE), (self.type_pos(p, path), node), eid=self.ids())
            return node
        if head in _TYPE_HEADS:
            try:
                return mk_type(parse_type(x), self.ids())
            except TypeSyntaxError as exc:
                raise AtomspaceError(str(exc)) from exc
        return self.term(x, path)

    @staticmethod
    def _arity(x, n):
        if len(x.items) != n + 1:
            raise AtomspaceError(f"{x.head} expects {n} argument(s) at {x.span}: {x}")


def surface_to_node(space: Atomspace, x):
    """Convert one parsed atom; returns (node, pointer path or None)."""
    b = _Builder(space)
    node = b.term(x, ())
    return node, b.pointer


def parse_atoms(text: str, space: Atomspace | None = None):
    """Parse ``text`` into nodes (tags resolved against ``space``)."""
    space = space or Atomspace()
    out = []
    for x in parse(text):
        node, ptr = surface_to_node(space, x)
        out.append((node, ptr))
    return out


def space_from_text(text: str, base: Atomspace | None = None) -> Atomspace:
    return (base or Atomspace()).add(text)


# -- prelude ----------------------------------------------------------------

PRELUDE_TUPLES = """
(: tuple (Pi $A Type (Pi $B Type (-> $A $B Type))))
(: pi1 (Pi $A Type (Pi $B Type (-> (tuple $A $B) $A))))
(: pi2 (Pi $A Type (Pi $B Type (-> (tuple $A $B) $B))))
(= (pi1 (tuple $A $B $a $b)) $a)
(= (pi2 (tuple $A $B $a $b)) $b)
(: tuple' (Pi $A Type (Pi $B (-> $A Type) (Pi $a $A (-> ($B $a) Type)))))
(= (pi1 (tuple' $A $B $a $b)) $a)
(= (pi2 (tuple' $A $B $a $b)) $b)
"""


def prelude_tuples(space: Atomspace) -> Atomspace:
    return space.add(PRELUDE_TUPLES)


# -- metagraph view ---------------------------------------------------------

def _mg_node(n: Node, pointer_path, path):
    g = mg.Edge(len(n.children), n.type, mg.Label(n.label, n.eid), n.slots)
    for i, c in enumerate(n.children):
        target = i + 1
        for _ in range(i):
            target = 2 * target + 1
        sub = _mg_node(c, pointer_path, path + (i,))
        g = mg.Connect(g, sub, n.type, mg.Label(NUL, 0), ((target, 0),))
    if n.act is not None:
        at = mg.Edge(1, EXEC, mg.Label(Key("@"), n.act), (TOP,))
        g = mg.Connect(at, g, n.type, mg.Label(NUL, 0), ((1, 0),))
    if pointer_path is not None and tuple(pointer_path) == tuple(path):
        dag = mg.Edge(1, EXEC, mg.Label(Key("!"), 0), (TOP,))
        g = mg.Connect(dag, g, n.type, mg.Label(NUL, 0), ((1, 0),))
    return g


def to_metagraph(space: Atomspace):
    g = mg.EPS
    for i, a in enumerate(space.atoms):
        ptr = space.pointer[1:] if space.pointer is not None and space.pointer[0] == i else None
        g = mg.union(g, _mg_node(a, ptr, ()), TOP, mg.Label(NUL, 0))
    return g


def wire_order(rel: SubtypeRelation):
    """Order for wires running from a slot to the node it feeds: child <= slot."""
    def order(slot_t, child_t):
        if has_tvars(slot_t) or has_tvars(child_t):
            return True
        return rel.leq(child_t, slot_t)
    return order


__all__ = [
    "KEYWORDS", "Sym", "Var", "Key", "Ty", "NUL", "Node", "Atomspace", "MViolation",
    "AtomspaceError", "MConstraintError", "PointerError",
    "mk_sym", "mk_var", "mk_app", "mk_type", "mk_typing", "mk_equation", "mk_subtype", "mk_trans",
    "add_atom", "check_mconstraints", "subtype_query", "typing_query", "fresh_symbol",
    "fresh_edge_id", "prelude_tuples", "surface_to_node", "parse_atoms", "space_from_text",
    "to_metagraph", "wire_order", "node_text", "plain_sig", "spine", "get_at", "replace_at",
    "node_to_type", "funapp_tags", "reid", "empty_space", "node_violations",
]
