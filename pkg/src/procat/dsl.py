"""Text syntax for signatures and diagrams, a printer, and DOT/JSON export.

Example::

    object Q
    gen f : Q -> Q
    frobenius Z on Q
    assign f = {"dims": [2, 2], "field": "complex",
                "entries": [[0,0],[1,0],[1,0],[0,0]]}
    diagram snake = (cap(Q) * id(Q)) . (id(Q) * cup(Q))
    diagram twice = f ; f

``g . f`` is g after f, ``f ; g`` is the same composite written in
pipeline order, and ``*`` (parallel) binds tighter than both.  A
``frobenius Z on Q`` line declares the spider family ``Z`` together with
the names ``Z_delta``, ``Z_eps``, ``Z_mu`` and ``Z_unit``.  Assigning
tensors to ``Z_delta`` and ``Z_eps`` fixes the algebra in a model.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import tensor as T
from .core import (
    BOUNDARY,
    CAP,
    CUP,
    DISCARD,
    GEN,
    SPIDER,
    Diagram,
    DiagramError,
    ObjectType,
    Signature,
    SignatureError,
    TypeMismatch,
    cap,
    compose_par,
    compose_seq,
    cup,
    dagger,
    discard,
    identity,
    spider,
    symmetry,
)

KEYWORDS = {"object", "gen", "frobenius", "on", "assign", "diagram"}
STATEMENTS = ("object", "gen", "frobenius", "assign", "diagram")
BUILTINS = {"id", "sym", "cup", "cap", "dag", "spider", "discard"}
ALGEBRA_PARTS = {"delta": (1, 2), "eps": (1, 0), "mu": (2, 1), "unit": (0, 1)}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")


class ParseError(ValueError):
    """Syntax error at a source position (1-based line and column)."""

    def __init__(self, line: int, column: int, message: str, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.message = message
        self.expected = tuple(expected)
        text = f"{line}:{column}: {message}"
        if expected:
            text += f" (expected {', '.join(expected)})"
        super().__init__(text)


class ElaborationError(TypeError):
    """A well-formed expression that does not denote a well-typed diagram."""

    def __init__(self, line: int, column: int, message: str, position: int | None = None, expected=None, found=None):
        self.line = line
        self.column = column
        self.message = message
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(f"{line}:{column}: {message}")


# -- lexing -----------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, a punctuation string, JSON, or EOF
    text: str
    line: int
    column: int
    offset: int


class _Lexer:
    PUNCT = ("->", "(", ")", ",", ":", "*", ".", ";", "=")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: Token | None = None

    def _where(self, offset: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col

    def _skip(self):
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif c == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl
            else:
                return

    def _scan(self) -> Token:
        self._skip()
        start = self.pos
        line, col = self._where(start)
        if start >= len(self.text):
            return Token("EOF", "", line, col, start)
        c = self.text[start]
        if c in "{[":
            return Token("JSON", c, line, col, start)
        m = _NAME.match(self.text, start)
        if m:
            self.pos = m.end()
            return Token("NAME", m.group(), line, col, start)
        m = _INT.match(self.text, start)
        if m:
            self.pos = m.end()
            return Token("INT", m.group(), line, col, start)
        for p in self.PUNCT:
            if self.text.startswith(p, start):
                self.pos = start + len(p)
                return Token(p, p, line, col, start)
        raise ParseError(line, col, f"unexpected character {c!r}")

    def peek(self) -> Token:
        if self._peeked is None:
            self._peeked = self._scan()
        return self._peeked

    def next(self) -> Token:
        tok = self.peek()
        self._peeked = None
        return tok

    def read_json(self) -> tuple[Any, Token]:
        tok = self.peek()
        if tok.kind != "JSON":
            raise ParseError(tok.line, tok.column, "expected a tensor literal", ("{",))
        try:
            value, end = json.JSONDecoder().raw_decode(self.text, tok.offset)
        except json.JSONDecodeError as exc:
            line, col = self._where(exc.pos)
            raise ParseError(line, col, f"bad tensor literal: {exc.msg}") from None
        self._peeked = None
        self.pos = end
        return value, tok


# -- syntax tree ---------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    op: str  # name, id, sym, cup, cap, dag, spider, discard, seq, par
    args: tuple
    line: int
    column: int


@dataclass(frozen=True)
class Statement:
    kind: str
    name: str
    line: int
    column: int
    data: Any = None


@dataclass
class SourceFile:
    """The statements of a file in source order."""

    statements: list[Statement] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str):
        self.lex = _Lexer(text)

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.lex.next()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ParseError(tok.line, tok.column, f"unexpected {shown!r}", (what or kind,))
        return tok

    def name(self, what: str = "NAME") -> Token:
        tok = self.expect("NAME", what)
        if tok.text in KEYWORDS:
            raise ParseError(tok.line, tok.column, f"keyword {tok.text!r} cannot be used as a name", (what,))
        return tok

    def file(self) -> SourceFile:
        out = SourceFile()
        while True:
            tok = self.lex.peek()
            if tok.kind == "EOF":
                return out
            if tok.kind != "NAME" or tok.text not in STATEMENTS:
                raise ParseError(tok.line, tok.column, f"unexpected {tok.text!r}", STATEMENTS)
            out.statements.append(self.statement())

    def statement(self) -> Statement:
        kw = self.lex.next()
        if kw.text == "object":
            n = self.name("object name")
            return Statement("object", n.text, n.line, n.column)
        if kw.text == "gen":
            n = self.name("generator name")
            self.expect(":")
            dom = self.type_()
            self.expect("->")
            cod = self.type_()
            return Statement("gen", n.text, n.line, n.column, (dom, cod))
        if kw.text == "frobenius":
            n = self.name("algebra name")
            on = self.lex.next()
            if on.kind != "NAME" or on.text != "on":
                raise ParseError(on.line, on.column, f"unexpected {on.text!r}", ("on",))
            carrier = self.name("object name")
            return Statement("frobenius", n.text, n.line, n.column, carrier.text)
        if kw.text == "assign":
            n = self.name("generator name")
            self.expect("=")
            value, _ = self.lex.read_json()
            return Statement("assign", n.text, n.line, n.column, value)
        n = self.name("diagram name")
        self.expect("=")
        return Statement("diagram", n.text, n.line, n.column, self.expr())

    def type_(self) -> tuple[str, ...]:
        tok = self.name("type")
        if tok.text == "I":
            return ()
        word = [tok.text]
        while self.lex.peek().kind == "*":
            self.lex.next()
            word.append(self.name("object name").text)
        if "I" in word:
            raise ParseError(tok.line, tok.column, "I cannot appear inside a product type")
        return tuple(word)

    def expr(self) -> Expr:
        left = self.term()
        while self.lex.peek().kind in (".", ";"):
            op = self.lex.next()
            right = self.term()
            args = (left, right) if op.kind == "." else (right, left)
            left = Expr("seq", args, op.line, op.column)
        return left

    def term(self) -> Expr:
        left = self.atom()
        while self.lex.peek().kind == "*":
            op = self.lex.next()
            left = Expr("par", (left, self.atom()), op.line, op.column)
        return left

    def atom(self) -> Expr:
        tok = self.lex.next()
        if tok.kind == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind != "NAME" or tok.text in KEYWORDS:
            shown = tok.text or "end of input"
            raise ParseError(tok.line, tok.column, f"unexpected {shown!r}", ("expression",))
        word = tok.text
        if word not in BUILTINS:
            return Expr("name", (word,), tok.line, tok.column)
        self.expect("(")
        if word in ("id", "cup", "cap", "discard"):
            args: tuple = (self.type_(),)
        elif word == "sym":
            a = self.type_()
            self.expect(",")
            args = (a, self.type_())
        elif word == "dag":
            args = (self.expr(),)
        else:
            fam = self.name("algebra name")
            self.expect(",")
            n = self.expect("INT", "integer")
            self.expect(",")
            m = self.expect("INT", "integer")
            args = (fam.text, int(n.text), int(m.text))
        self.expect(")")
        return Expr(word, args, tok.line, tok.column)


def parse_source(text: str) -> SourceFile:
    """Syntax only; see :func:`parse` for elaboration."""
    return _Parser(text).file()


# -- elaboration ------------------------------------------------------------------------


@dataclass
class Program:
    """An elaborated file: signature, named diagrams and assigned tensors."""

    source: SourceFile
    signature: Signature
    diagrams: dict[str, Diagram]
    tensors: dict[str, np.ndarray]

    def dims(self, overrides: dict[str, int] | None = None) -> dict[str, int]:
        """Object dimensions read off assigned tensors (``overrides`` win)."""
        dims: dict[str, int] = {}
        for name, t in self.tensors.items():
            dom, cod = self._typing(name)
            for obj, d in zip(cod + dom, t.shape):
                if dims.setdefault(obj, d) != d:
                    raise ElaborationError(*self._pos(name), f"object {obj!r} assigned dimensions {dims[obj]} and {d}")
        dims.update(overrides or {})
        return dims

    def _pos(self, name: str) -> tuple[int, int]:
        for st in self.source.statements:
            if st.kind == "assign" and st.name == name:
                return st.line, st.column
        return 0, 0

    def _typing(self, name: str):
        sig = self.signature
        if name in sig.generators:
            return sig.generators[name]
        fam, part = _split_part(name, sig)
        n, m = ALGEBRA_PARTS[part]
        obj = sig.algebras[fam]
        return (obj,) * n, (obj,) * m

    def algebra_specs(self, model: str, dims: dict[str, int]) -> dict:
        from .frobenius import FHILB, FREL, FrobeniusAlgebraSpec, copy_algebra_frel, z_algebra

        out = {}
        for fam, obj in self.signature.algebras.items():
            delta = self.tensors.get(f"{fam}_delta")
            eps = self.tensors.get(f"{fam}_eps")
            d = dims[obj]
            if delta is None and eps is None:
                out[fam] = copy_algebra_frel(d, obj) if model == FREL else z_algebra(d, obj)
                continue
            if delta is None or eps is None:
                raise ElaborationError(0, 0, f"algebra {fam!r} needs both {fam}_delta and {fam}_eps assigned")
            mu = self.tensors.get(f"{fam}_mu")
            unit = self.tensors.get(f"{fam}_unit")
            conv = (lambda t: _as_bool(t, fam)) if model == FREL else (lambda t: np.asarray(t, dtype=complex))
            out[fam] = FrobeniusAlgebraSpec(
                obj,
                conv(delta).reshape(d * d, d),
                conv(eps).reshape(1, d),
                None if mu is None else conv(mu).reshape(d, d * d),
                None if unit is None else conv(unit).reshape(d, 1),
                model=FHILB if model != FREL else FREL,
                name=fam,
            )
        return out

    def model(self, kind: str = "fhilb", dims: dict[str, int] | None = None):
        """A :class:`ModelAssignment` (``fhilb``) or :class:`RelAssignment` (``frel``)."""
        from .fhilb import ModelAssignment
        from .frel import RelAssignment

        table = self.dims(dims)
        missing = sorted(self.signature.objects - set(table))
        if missing:
            raise ElaborationError(0, 0, f"no dimension known for object(s) {', '.join(missing)}")
        gens = {n: t for n, t in self.tensors.items() if n in self.signature.generators}
        algebras = self.algebra_specs(kind, table)
        if kind == "frel":
            return RelAssignment(table, {n: _as_bool(t, n) for n, t in gens.items()}, algebras)
        if kind != "fhilb":
            raise ValueError(f"unknown model {kind!r}")
        return ModelAssignment(table, gens, algebras)


def _as_bool(t: np.ndarray, name: str) -> np.ndarray:
    t = np.asarray(t)
    if t.dtype == bool:
        return t
    if np.any((np.abs(t) > 1e-12) & (np.abs(t - 1) > 1e-12)):
        raise ElaborationError(0, 0, f"tensor {name!r} is not 0/1-valued, cannot read it as a relation")
    return np.abs(t - 1) <= 1e-12


def _split_part(name: str, sig: Signature):
    fam, _, part = name.rpartition("_")
    if fam in sig.algebras and part in ALGEBRA_PARTS:
        return fam, part
    return None, None


class _Elaborator:
    def __init__(self, source: SourceFile):
        self.source = source
        self.sig = Signature()
        self.diagrams: dict[str, Diagram] = {}
        self.tensors: dict[str, np.ndarray] = {}
        self.names: set[str] = set()

    def declare(self, st: Statement, name: str):
        if name in self.names or name in KEYWORDS or name in BUILTINS or name == "I":
            raise ElaborationError(st.line, st.column, f"name {name!r} declared twice or reserved")
        self.names.add(name)

    def run(self) -> Program:
        for st in self.source.statements:
            try:
                getattr(self, "do_" + st.kind)(st)
            except SignatureError as exc:
                raise ElaborationError(st.line, st.column, str(exc)) from None
        return Program(self.source, self.sig, self.diagrams, self.tensors)

    def do_object(self, st):
        self.declare(st, st.name)
        self.sig.add_object(st.name)

    def do_gen(self, st):
        self.declare(st, st.name)
        dom, cod = st.data
        self.sig.add_generator(st.name, dom, cod)

    def do_frobenius(self, st):
        self.declare(st, st.name)
        if st.data not in self.sig.objects:
            raise ElaborationError(st.line, st.column, f"unknown object {st.data!r}")
        self.sig.add_algebra(st.name, st.data)
        for part in ALGEBRA_PARTS:
            self.declare(st, f"{st.name}_{part}")

    def do_assign(self, st):
        name = st.name
        if name not in self.sig.generators and _split_part(name, self.sig)[0] is None:
            raise ElaborationError(st.line, st.column, f"cannot assign to undeclared generator {name!r}")
        if name in self.tensors:
            raise ElaborationError(st.line, st.column, f"{name!r} assigned twice")
        try:
            t = T.tensor_from_dict(st.data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ElaborationError(st.line, st.column, f"bad tensor literal: {exc}") from None
        prog = Program(self.source, self.sig, {}, {})
        dom, cod = prog._typing(name)
        if len(t.shape) != len(dom) + len(cod):
            raise ElaborationError(
                st.line, st.column, f"tensor for {name!r} has {len(t.shape)} axes, type needs {len(dom) + len(cod)}"
            )
        self.tensors[name] = t

    def do_diagram(self, st):
        self.declare(st, st.name)
        self.diagrams[st.name] = self.expr(st.data)

    def obj(self, e: Expr, word) -> ObjectType:
        for a in word:
            if a not in self.sig.objects:
                raise ElaborationError(e.line, e.column, f"unknown object {a!r}")
        return ObjectType(word)

    def expr(self, e: Expr) -> Diagram:
        op = e.op
        if op == "name":
            (name,) = e.args
            if name in self.diagrams:
                return self.diagrams[name]
            if name in self.sig.generators:
                return self.sig.gen(name)
            fam, part = _split_part(name, self.sig)
            if fam is not None:
                n, m = ALGEBRA_PARTS[part]
                return self.sig.spider(fam, n, m)
            raise ElaborationError(e.line, e.column, f"unknown name {name!r}")
        if op == "id":
            return identity(self.obj(e, e.args[0]))
        if op == "sym":
            return symmetry(self.obj(e, e.args[0]), self.obj(e, e.args[1]))
        if op == "cup":
            return cup(self.obj(e, e.args[0]))
        if op == "cap":
            return cap(self.obj(e, e.args[0]))
        if op == "discard":
            return discard(self.obj(e, e.args[0]))
        if op == "dag":
            return dagger(self.expr(e.args[0]))
        if op == "spider":
            fam, n, m = e.args
            if fam not in self.sig.algebras:
                raise ElaborationError(e.line, e.column, f"unknown algebra {fam!r}")
            try:
                return self.sig.spider(fam, n, m)
            except DiagramError as exc:
                raise ElaborationError(e.line, e.column, str(exc)) from None
        if op == "par":
            return compose_par(self.expr(e.args[0]), self.expr(e.args[1]))
        g, f = self.expr(e.args[0]), self.expr(e.args[1])
        try:
            return compose_seq(g, f)
        except TypeMismatch as exc:
            raise ElaborationError(
                e.line, e.column, str(exc), exc.position, str(exc.expected), str(exc.found)
            ) from None


def parse(text: str) -> Program:
    """Parse and elaborate a source file."""
    return _Elaborator(parse_source(text)).run()


def parse_expr(text: str, signature: Signature) -> Diagram:
    """Elaborate a single expression against an existing signature."""
    p = _Parser(text)
    e = p.expr()
    tok = p.lex.peek()
    if tok.kind != "EOF":
        raise ParseError(tok.line, tok.column, f"unexpected {tok.text!r}", (".", ";", "*"))
    el = _Elaborator(SourceFile())
    el.sig = signature
    return el.expr(e)


# -- printing ------------------------------------------------------------------------


def _type_text(word) -> str:
    return "*".join(word) if len(word) else "I"


def _box_text(node) -> str:
    if node.kind == GEN:
        if not _NAME.fullmatch(node.label) or node.label in KEYWORDS | BUILTINS:
            raise ValueError(f"anonymous or unprintable generator {node.label!r}")
        return f"dag({node.label})" if node.adjoint else node.label
    if node.kind == CUP:
        return f"cup({node.label})"
    if node.kind == CAP:
        return f"cap({node.label})"
    if node.kind == SPIDER:
        n, m = node.arity
        return f"spider({node.label}, {n}, {m})"
    if node.kind == DISCARD:
        return f"dag(discard({node.label}))" if node.adjoint else f"discard({node.label})"
    raise ValueError(f"cannot print node kind {node.kind!r}")


def _layer(pre, body: str, post) -> str:
    parts = ([f"id({_type_text(pre)})"] if pre else []) + [body] + ([f"id({_type_text(post)})"] if post else [])
    return parts[0] if len(parts) == 1 else "(" + " * ".join(parts) + ")"


def print_diagram(d: Diagram) -> str:
    """An expression denoting ``d`` (up to isomorphism).

    Nodes are placed one per layer in topological order; wires are brought
    together with block crossings ``sym(W, X)`` where needed.
    """
    from .core import _topological_nodes

    frontier: list[tuple[int, int]] = [(BOUNDARY, k) for k in range(len(d.dom))]
    layers: list[str] = []

    def types(ends):
        return [d._source_type(e) for e in ends]

    def move(j: int, i: int):
        """Bring the wire at position j to position i < j."""
        w = frontier[i:j]
        x = frontier[j]
        layers.append(_layer(types(frontier[:i]), f"sym({_type_text(types(w))}, {_type_text(types([x]))})", types(frontier[j + 1:])))
        frontier[i: j + 1] = [x] + w

    for v in _topological_nodes(d):
        node = d.nodes[v]
        needed = [d.source_of[(v, p)] for p in range(len(node.dom))]
        if needed:
            start = min(frontier.index(e) for e in needed)
            for k, e in enumerate(needed):
                j = frontier.index(e)
                if j != start + k:
                    move(j, start + k)
        else:
            start = len(frontier)
        pre, post = frontier[:start], frontier[start + len(needed):]
        layers.append(_layer(types(pre), _box_text(node), types(post)))
        frontier[start: start + len(needed)] = [(v, p) for p in range(len(node.cod))]
    for k in range(len(d.cod)):
        j = frontier.index(d.source_of[(BOUNDARY, k)])
        if j != k:
            move(j, k)
    if not layers:
        return f"id({_type_text(d.dom)})"
    return " . ".join(reversed(layers))


def signature_source(sig: Signature) -> str:
    """Declarations recreating ``sig``."""
    lines = [f"object {o}" for o in sorted(sig.objects)]
    for name, (dom, cod) in sorted(sig.generators.items()):
        lines.append(f"gen {name} : {_type_text(dom)} -> {_type_text(cod)}")
    for name, obj in sorted(sig.algebras.items()):
        lines.append(f"frobenius {name} on {obj}")
    return "\n".join(lines) + "\n"


# -- export -----------------------------------------------------------------------------


def to_dot(d: Diagram, name: str = "diagram") -> str:
    """Graphviz digraph: boxes are nodes, wires are edges labelled by their type."""
    if not _NAME.fullmatch(name):
        name = "diagram"
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for k, t in enumerate(d.dom):
        lines.append(f'  in{k} [shape=point, xlabel="in {k}"];')
    for i, n in enumerate(d.nodes):
        label = _box_text(n) if n.kind != GEN or _NAME.fullmatch(n.label) else n.label
        shape = "box" if n.kind == GEN else "ellipse"
        lines.append(f'  n{i} [label="{_escape(label)}", shape={shape}];')
    for k, t in enumerate(d.cod):
        lines.append(f'  out{k} [shape=point, xlabel="out {k}"];')

    def end(e, role):
        n, p = e
        if n == BOUNDARY:
            return f"{role}{p}"
        return f"n{n}"

    for s, t in d.wires:
        attrs = [f'label="{_escape(d._source_type(s))}"']
        if s[0] != BOUNDARY:
            attrs.append(f'taillabel="{s[1]}"')
        if t[0] != BOUNDARY:
            attrs.append(f'headlabel="{t[1]}"')
        lines.append(f"  {end(s, 'in')} -> {end(t, 'out')} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def diagram_to_dict(d: Diagram) -> dict:
    return {
        "dom": list(d.dom),
        "cod": list(d.cod),
        "nodes": [
            {"kind": n.kind, "label": n.label, "dom": list(n.dom), "cod": list(n.cod), "adjoint": n.adjoint, "tag": n.tag}
            for n in d.nodes
        ],
        "wires": [[list(s), list(t)] for s, t in d.wires],
    }


def diagram_from_dict(obj: dict) -> Diagram:
    from .core import Node

    nodes = [Node(n["kind"], n["label"], n["dom"], n["cod"], n.get("adjoint", False), n.get("tag", "process")) for n in obj["nodes"]]
    wires = [(tuple(s), tuple(t)) for s, t in obj["wires"]]
    return Diagram(obj["dom"], obj["cod"], nodes, wires)


def to_json(value, indent: int | None = None) -> str:
    """JSON text for a diagram, a tensor, or anything with ``to_dict``."""
    if isinstance(value, Diagram):
        obj = diagram_to_dict(value)
    elif isinstance(value, np.ndarray):
        obj = T.tensor_to_dict(value)
    elif hasattr(value, "to_dict"):
        obj = value.to_dict()
    else:
        obj = value
    return json.dumps(obj, indent=indent, sort_keys=False)
