"""Typed open string diagrams.

A :class:`Diagram` is an open directed port graph.  Every wire runs from a
*source* endpoint (an in-boundary position or an output port of a node) to a
*target* endpoint (an out-boundary position or an input port of a node).
Endpoints are ``(node, port)`` pairs; node ``BOUNDARY`` (-1) addresses the
boundary, so ``(BOUNDARY, k)`` as a source is the k-th input of the diagram
and as a target its k-th output.

Symmetries are pure wiring and never produce nodes; cups, caps, spiders,
discards and generator boxes are nodes.  Compact structure is self-dual: the
cup on ``A`` has type ``I -> A*A``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

BOUNDARY = -1

GEN = "gen"
CUP = "cup"
CAP = "cap"
SPIDER = "spider"
DISCARD = "discard"
NODE_KINDS = (GEN, CUP, CAP, SPIDER, DISCARD)
# ports of these nodes are interchangeable (commutative / self-dual structure)
SYMMETRIC_KINDS = frozenset({CUP, CAP, SPIDER})

Endpoint = tuple[int, int]
Wire = tuple[Endpoint, Endpoint]


class DiagramError(ValueError):
    """Malformed diagram or invalid structural request."""


class SignatureError(DiagramError):
    """Reference to an undeclared object, generator or algebra."""


class TypeMismatch(TypeError):
    """Sequential composition of diagrams whose boundaries do not agree."""

    def __init__(self, position: int, expected, found, message: str | None = None):
        self.position = position
        self.expected = expected
        self.found = found
        if message is None:
            message = (
                f"type mismatch at boundary position {position}: "
                f"expected {expected}, found {found}"
            )
        super().__init__(message)


@dataclass(frozen=True)
class ObjectType:
    """A word of generating-object names; the empty word is the unit ``I``."""

    word: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))

    @classmethod
    def of(cls, value: "ObjectType | str | Iterable[str]") -> "ObjectType":
        if isinstance(value, ObjectType):
            return value
        if isinstance(value, str):
            text = value.replace(" ", "")
            if text in ("", "I"):
                return cls()
            return cls(tuple(text.split("*")))
        return cls(tuple(value))

    def __mul__(self, other: "ObjectType") -> "ObjectType":
        return ObjectType(self.word + ObjectType.of(other).word)

    def __len__(self) -> int:
        return len(self.word)

    def __iter__(self):
        return iter(self.word)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return ObjectType(self.word[item])
        return self.word[item]

    def __str__(self) -> str:
        return "*".join(self.word) if self.word else "I"


I = ObjectType()


def _word(t) -> tuple[str, ...]:
    return ObjectType.of(t).word


@dataclass(frozen=True)
class Node:
    """One box of a diagram.

    ``label`` is the generator name for ``gen`` nodes, the algebra name for
    spiders and the object name for cups, caps and discards.  ``tag`` records
    whether the box is read as a process, a symmetry relation or a vacuous
    relation; no rule consults it.
    """

    kind: str
    label: str
    dom: tuple[str, ...]
    cod: tuple[str, ...]
    adjoint: bool = False
    tag: str = "process"

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise DiagramError(f"unknown node kind {self.kind!r}")
        object.__setattr__(self, "dom", tuple(self.dom))
        object.__setattr__(self, "cod", tuple(self.cod))

    def dagger(self) -> "Node":
        kind = {CUP: CAP, CAP: CUP}.get(self.kind, self.kind)
        adjoint = (not self.adjoint) if self.kind in (GEN, DISCARD) else False
        return Node(kind, self.label, self.cod, self.dom, adjoint, self.tag)

    @property
    def symmetric(self) -> bool:
        return self.kind in SYMMETRIC_KINDS

    @property
    def arity(self) -> tuple[int, int]:
        return len(self.dom), len(self.cod)


@dataclass(frozen=True, eq=True)
class Diagram:
    """An immutable open diagram ``dom -> cod``.

    ``wires`` holds ``(source, target)`` pairs, kept sorted by target so that
    structurally equal diagrams compare equal.  A wire's id is its index in
    ``wires``.
    """

    dom: tuple[str, ...]
    cod: tuple[str, ...]
    nodes: tuple[Node, ...] = ()
    wires: tuple[Wire, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dom", tuple(self.dom))
        object.__setattr__(self, "cod", tuple(self.cod))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        wires = tuple(sorted((tuple(s), tuple(t)) for s, t in self.wires))
        wires = tuple(sorted(wires, key=lambda w: w[1]))
        object.__setattr__(self, "wires", wires)
        self._validate()

    # -- structure ---------------------------------------------------------

    def _source_type(self, src: Endpoint) -> str:
        n, p = src
        if n == BOUNDARY:
            return self.dom[p]
        return self.nodes[n].cod[p]

    def _target_type(self, tgt: Endpoint) -> str:
        n, p = tgt
        if n == BOUNDARY:
            return self.cod[p]
        return self.nodes[n].dom[p]

    def _validate(self):
        sources = {(BOUNDARY, k) for k in range(len(self.dom))}
        targets = {(BOUNDARY, k) for k in range(len(self.cod))}
        for i, node in enumerate(self.nodes):
            sources.update((i, p) for p in range(len(node.cod)))
            targets.update((i, p) for p in range(len(node.dom)))
        seen_s = [s for s, _ in self.wires]
        seen_t = [t for _, t in self.wires]
        if len(set(seen_s)) != len(seen_s) or set(seen_s) != sources:
            raise DiagramError("every source endpoint needs exactly one wire")
        if len(set(seen_t)) != len(seen_t) or set(seen_t) != targets:
            raise DiagramError("every target endpoint needs exactly one wire")
        for s, t in self.wires:
            if self._source_type(s) != self._target_type(t):
                raise DiagramError(
                    f"wire {s}->{t} joins {self._source_type(s)} to {self._target_type(t)}"
                )
        if self._has_directed_cycle():
            raise DiagramError("diagram has a directed cycle")

    def _has_directed_cycle(self) -> bool:
        succ = self.successors
        state = [0] * len(self.nodes)
        for root in range(len(self.nodes)):
            if state[root]:
                continue
            stack = [(root, iter(succ[root]))]
            state[root] = 1
            while stack:
                v, it = stack[-1]
                for u in it:
                    if state[u] == 1:
                        return True
                    if state[u] == 0:
                        state[u] = 1
                        stack.append((u, iter(succ[u])))
                        break
                else:
                    state[v] = 2
                    stack.pop()
        return False

    @cached_property
    def successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in self.nodes]
        for (sn, _), (tn, _) in self.wires:
            if sn != BOUNDARY and tn != BOUNDARY:
                succ[sn].append(tn)
        return succ

    @cached_property
    def source_of(self) -> dict[Endpoint, Endpoint]:
        return {t: s for s, t in self.wires}

    @cached_property
    def target_of(self) -> dict[Endpoint, Endpoint]:
        return {s: t for s, t in self.wires}

    @cached_property
    def wire_id(self) -> dict[Endpoint, int]:
        """Wire id keyed by either of its endpoints' (role, endpoint)."""
        ids = {}
        for i, (s, t) in enumerate(self.wires):
            ids[("s",) + s] = i
            ids[("t",) + t] = i
        return ids

    def wire_type(self, wire: int) -> str:
        return self._source_type(self.wires[wire][0])

    def input_wire(self, k: int) -> int:
        return self.wire_id[("s", BOUNDARY, k)]

    def output_wire(self, k: int) -> int:
        return self.wire_id[("t", BOUNDARY, k)]

    @property
    def dom_type(self) -> ObjectType:
        return ObjectType(self.dom)

    @property
    def cod_type(self) -> ObjectType:
        return ObjectType(self.cod)

    @property
    def is_weight(self) -> bool:
        return not self.dom and not self.cod

    def count(self, kind: str) -> int:
        return sum(1 for n in self.nodes if n.kind == kind)

    # -- operator sugar ----------------------------------------------------

    def __rshift__(self, other: "Diagram") -> "Diagram":
        """``f >> g`` is ``g`` after ``f``."""
        return compose_seq(other, self)

    def __matmul__(self, other: "Diagram") -> "Diagram":
        return compose_par(self, other)

    def __repr__(self) -> str:
        return (
            f"Diagram({ObjectType(self.dom)} -> {ObjectType(self.cod)}, "
            f"{len(self.nodes)} nodes, {len(self.wires)} wires)"
        )


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


@dataclass
class Signature:
    """Declared objects, generator boxes and Frobenius algebra families.

    Every generator ``f`` has a dagger partner, written ``dag(f)``, with
    swapped domain and codomain; it is represented by the same name with the
    ``adjoint`` flag set.
    """

    objects: set[str] = field(default_factory=set)
    generators: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = field(default_factory=dict)
    algebras: dict[str, str] = field(default_factory=dict)

    def add_object(self, name: str) -> None:
        if name in self.objects:
            raise SignatureError(f"object {name!r} declared twice")
        self.objects.add(name)

    def add_generator(self, name: str, dom, cod) -> None:
        if name in self.generators or name in self.algebras:
            raise SignatureError(f"generator {name!r} declared twice")
        dom, cod = self.type(dom), self.type(cod)
        self.generators[name] = (dom.word, cod.word)

    def add_algebra(self, name: str, carrier: str) -> None:
        if name in self.algebras or name in self.generators:
            raise SignatureError(f"algebra {name!r} declared twice")
        self.type(carrier)
        self.algebras[name] = carrier

    def type(self, value) -> ObjectType:
        t = ObjectType.of(value)
        for name in t:
            if name not in self.objects:
                raise SignatureError(f"unknown object {name!r}")
        return t

    def gen(self, name: str, adjoint: bool = False) -> Diagram:
        if name not in self.generators:
            raise SignatureError(f"unknown generator {name!r}")
        dom, cod = self.generators[name]
        d = box(name, dom, cod)
        return dagger(d) if adjoint else d

    def spider(self, family: str, n: int, m: int) -> Diagram:
        if family not in self.algebras:
            raise SignatureError(f"unknown algebra {family!r}")
        return spider(family, self.algebras[family], n, m)

    def check(self, d: Diagram) -> None:
        """Raise :class:`SignatureError` if ``d`` uses undeclared names."""
        self.type(d.dom)
        self.type(d.cod)
        for node in d.nodes:
            if node.kind == GEN:
                sig = self.generators.get(node.label)
                expected = (node.cod, node.dom) if node.adjoint else (node.dom, node.cod)
                if sig is None or sig != expected:
                    raise SignatureError(f"generator {node.label!r} not in signature")
            elif node.kind == SPIDER:
                carrier = node.dom[0] if node.dom else node.cod[0]
                if self.algebras.get(node.label) != carrier:
                    raise SignatureError(f"algebra {node.label!r} not in signature")
            else:
                self.type(node.label)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def _single(node: Node) -> Diagram:
    wires = [((BOUNDARY, p), (0, p)) for p in range(len(node.dom))]
    wires += [((0, p), (BOUNDARY, p)) for p in range(len(node.cod))]
    return Diagram(node.dom, node.cod, (node,), wires)


def box(name: str, dom, cod, adjoint: bool = False, tag: str = "process") -> Diagram:
    """A single generator box ``name: dom -> cod``."""
    node = Node(GEN, name, _word(dom), _word(cod), False, tag)
    if adjoint:
        node = node.dagger()
    return _single(node)


def spider(family: str, obj: str, n: int, m: int) -> Diagram:
    """The spider with ``n`` inputs and ``m`` outputs of one algebra family."""
    if n < 0 or m < 0:
        raise DiagramError("spider arity must be nonnegative")
    if n == 0 and m == 0:
        raise DiagramError("the closed spider with no legs is excluded")
    return _single(Node(SPIDER, family, (obj,) * n, (obj,) * m))


def discard(A) -> Diagram:
    """Feed each wire of ``A`` into the environment (one node per factor)."""
    word = _word(A)
    if not word:
        return identity(I)
    return compose_par(*[_single(Node(DISCARD, a, (a,), ())) for a in word])


def identity(A) -> Diagram:
    word = _word(A)
    return Diagram(word, word, (), [((BOUNDARY, k), (BOUNDARY, k)) for k in range(len(word))])


def permutation_diagram(p: Sequence[int], A) -> Diagram:
    """Pure wiring whose k-th output is the ``p[k]``-th input."""
    word = _word(A)
    p = list(p)
    if sorted(p) != list(range(len(word))):
        raise DiagramError(f"{p} is not a permutation of {len(word)} wires")
    cod = tuple(word[i] for i in p)
    return Diagram(word, cod, (), [((BOUNDARY, p[k]), (BOUNDARY, k)) for k in range(len(p))])


def symmetry(A, B) -> Diagram:
    """The wire crossing ``A*B -> B*A``."""
    a, b = len(_word(A)), len(_word(B))
    return permutation_diagram(list(range(a, a + b)) + list(range(a)), _word(A) + _word(B))


def cup(A) -> Diagram:
    """``I -> A*A``; output ``k`` is paired with output ``len(A)+k``."""
    word = _word(A)
    n = len(word)
    nodes = [Node(CUP, a, (), (a, a)) for a in word]
    wires = []
    for k in range(n):
        wires.append(((k, 0), (BOUNDARY, k)))
        wires.append(((k, 1), (BOUNDARY, n + k)))
    return Diagram((), word + word, nodes, wires)


def cap(A) -> Diagram:
    """``A*A -> I``; input ``k`` is paired with input ``len(A)+k``."""
    word = _word(A)
    n = len(word)
    nodes = [Node(CAP, a, (a, a), ()) for a in word]
    wires = []
    for k in range(n):
        wires.append(((BOUNDARY, k), (k, 0)))
        wires.append(((BOUNDARY, n + k), (k, 1)))
    return Diagram(word + word, (), nodes, wires)


# ---------------------------------------------------------------------------
# Compositions
# ---------------------------------------------------------------------------


def _shift(e: Endpoint, nodes: int, boundary: int) -> Endpoint:
    n, p = e
    return (n, p + boundary) if n == BOUNDARY else (n + nodes, p)


def compose_seq(g: Diagram, f: Diagram) -> Diagram:
    """``g`` after ``f``: the outputs of ``f`` are plugged into the inputs of ``g``."""
    if f.cod != g.dom:
        if len(f.cod) != len(g.dom):
            pos = min(len(f.cod), len(g.dom))
        else:
            pos = next(i for i, (a, b) in enumerate(zip(f.cod, g.dom)) if a != b)
        raise TypeMismatch(
            pos,
            ObjectType(g.dom),
            ObjectType(f.cod),
            f"cannot compose: domain {ObjectType(g.dom)} of the later diagram does not match "
            f"codomain {ObjectType(f.cod)} of the earlier one (first difference at position {pos})",
        )
    n = len(f.nodes)
    feeds = {t[1]: s for s, t in f.wires if t[0] == BOUNDARY}
    wires = [(s, t) for s, t in f.wires if t[0] != BOUNDARY]
    for s, t in g.wires:
        src = feeds[s[1]] if s[0] == BOUNDARY else (s[0] + n, s[1])
        tgt = t if t[0] == BOUNDARY else (t[0] + n, t[1])
        wires.append((src, tgt))
    return Diagram(f.dom, g.cod, f.nodes + g.nodes, wires)


def compose_par(*ds: Diagram) -> Diagram:
    """Side-by-side composition; boundaries are concatenated left to right."""
    dom: tuple[str, ...] = ()
    cod: tuple[str, ...] = ()
    nodes: tuple[Node, ...] = ()
    wires: list[Wire] = []
    for d in ds:
        n, a, b = len(nodes), len(dom), len(cod)
        wires.extend((_shift(s, n, a), _shift(t, n, b)) for s, t in d.wires)
        dom, cod, nodes = dom + d.dom, cod + d.cod, nodes + d.nodes
    return Diagram(dom, cod, nodes, wires)


def compose_all(*ds: Diagram) -> Diagram:
    """``compose_all(f1, f2, f3)`` is ``f3 after f2 after f1``."""
    out = ds[0]
    for d in ds[1:]:
        out = compose_seq(d, out)
    return out


def dagger(f: Diagram) -> Diagram:
    """Flip a diagram upside down."""
    return Diagram(f.cod, f.dom, tuple(n.dagger() for n in f.nodes), [(t, s) for s, t in f.wires])


def whisker(left, d: Diagram, right) -> Diagram:
    """``id(left) * d * id(right)``."""
    return compose_par(identity(left), d, identity(right))


# ---------------------------------------------------------------------------
# Bending wires
# ---------------------------------------------------------------------------


def bend_input(f: Diagram, k: int, at: int = 0) -> Diagram:
    """Turn input ``k`` into a new output at position ``at`` through a cup."""
    if not 0 <= k < len(f.dom):
        raise DiagramError(f"input index {k} out of range for {len(f.dom)} inputs")
    if not 0 <= at <= len(f.cod):
        raise DiagramError(f"output position {at} out of range")
    c = f.dom[k]
    u = len(f.nodes)
    wires = []
    for s, t in f.wires:
        if s[0] == BOUNDARY:
            j = s[1]
            s = (u, 1) if j == k else (BOUNDARY, j - (j > k))
        if t[0] == BOUNDARY and t[1] >= at:
            t = (BOUNDARY, t[1] + 1)
        wires.append((s, t))
    wires.append(((u, 0), (BOUNDARY, at)))
    dom = f.dom[:k] + f.dom[k + 1:]
    cod = f.cod[:at] + (c,) + f.cod[at:]
    return Diagram(dom, cod, f.nodes + (Node(CUP, c, (), (c, c)),), wires)


def bend_output(f: Diagram, k: int, at: int = 0) -> Diagram:
    """Turn output ``k`` into a new input at position ``at`` through a cap."""
    if not 0 <= k < len(f.cod):
        raise DiagramError(f"output index {k} out of range for {len(f.cod)} outputs")
    if not 0 <= at <= len(f.dom):
        raise DiagramError(f"input position {at} out of range")
    c = f.cod[k]
    u = len(f.nodes)
    wires = []
    for s, t in f.wires:
        if t[0] == BOUNDARY:
            j = t[1]
            t = (u, 1) if j == k else (BOUNDARY, j - (j > k))
        if s[0] == BOUNDARY and s[1] >= at:
            s = (BOUNDARY, s[1] + 1)
        wires.append((s, t))
    wires.append(((BOUNDARY, at), (u, 0)))
    dom = f.dom[:at] + (c,) + f.dom[at:]
    cod = f.cod[:k] + f.cod[k + 1:]
    return Diagram(dom, cod, f.nodes + (Node(CAP, c, (c, c), ()),), wires)


def bend(f: Diagram, inputs: Iterable[int] = (), outputs: Iterable[int] = ()) -> Diagram:
    """Bend the chosen inputs to the front of the outputs and vice versa.

    Bent inputs keep their relative order as the leading outputs; bent
    outputs keep theirs as the leading inputs.
    """
    inputs, outputs = sorted(set(inputs)), sorted(set(outputs))
    d = f
    # bend from the right so earlier indices stay valid
    for k in reversed(inputs):
        d = bend_input(d, k, 0)
    for k in reversed(outputs):
        d = bend_output(d, k + len(inputs), 0)
    return d


def causal_variants(f: Diagram, max_arity: int = 8) -> list[Diagram]:
    """All orientation variants of ``f``, one per iso class after yanking."""
    from .rewrite import canonical_form, normalize

    arity = len(f.dom) + len(f.cod)
    if arity > max_arity:
        raise DiagramError(f"boundary arity {arity} exceeds bound {max_arity}")
    seen: dict = {}
    for ins in itertools.product((False, True), repeat=len(f.dom)):
        for outs in itertools.product((False, True), repeat=len(f.cod)):
            v = bend(f, [i for i, b in enumerate(ins) if b], [j for j, b in enumerate(outs) if b])
            v = normalize(v, "structural")
            seen.setdefault(canonical_form(v).certificate, v)
    return list(seen.values())


# ---------------------------------------------------------------------------
# Graph predicates
# ---------------------------------------------------------------------------


def is_connected(f: Diagram) -> bool:
    """Connectivity of the underlying undirected graph of nodes and wires."""
    # union-find over nodes and node-less wires
    parent = list(range(len(f.nodes) + len(f.wires)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    offset = len(f.nodes)
    for i, (s, t) in enumerate(f.wires):
        w = offset + i
        for n, _ in (s, t):
            if n != BOUNDARY:
                parent[find(w)] = find(n)
    roots = {find(x) for x in range(len(parent))}
    return len(roots) <= 1


def _wire_reach(f: Diagram) -> list[set[int]]:
    """For each wire, the set of wires reachable along directed paths."""
    out_wires: dict[int, list[int]] = defaultdict(list)
    for i, (s, _) in enumerate(f.wires):
        if s[0] != BOUNDARY:
            out_wires[s[0]].append(i)
    reach: list[set[int] | None] = [None] * len(f.wires)

    order = _topological_nodes(f)
    node_reach: dict[int, set[int]] = {}
    for n in reversed(order):
        acc: set[int] = set()
        for w in out_wires[n]:
            acc.add(w)
            tn = f.wires[w][1][0]
            if tn != BOUNDARY:
                acc |= node_reach[tn]
        node_reach[n] = acc
    for i, (_, t) in enumerate(f.wires):
        reach[i] = set(node_reach[t[0]]) if t[0] != BOUNDARY else set()
    return reach  # type: ignore[return-value]


def _topological_nodes(f: Diagram) -> list[int]:
    indeg = [0] * len(f.nodes)
    for succ in f.successors:
        for u in succ:
            indeg[u] += 1
    ready = sorted(i for i, d in enumerate(indeg) if d == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for u in f.successors[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                ready.append(u)
        ready.sort()
    return order


def is_snapshot(f: Diagram, wires: Iterable[int]) -> bool:
    """True iff no two of the given wires lie on a common directed path."""
    wires = list(wires)
    for w in wires:
        if not 0 <= w < len(f.wires):
            raise DiagramError(f"unknown wire id {w}")
    chosen = set(wires)
    reach = _wire_reach(f)
    return all(not (reach[w] & chosen) for w in chosen)


def is_symmetric_state(psi: Diagram, model, tol: float = 1e-9) -> bool:
    """Invariance of a state under every permutation of its identical outputs.

    ``model`` must provide ``evaluate(diagram)`` returning an array.
    """
    import numpy as np

    if psi.dom:
        raise DiagramError("is_symmetric_state expects a state (empty domain)")
    if len(set(psi.cod)) > 1:
        raise DiagramError("state outputs must all share one object")
    base = np.asarray(model.evaluate(psi))
    for p in itertools.permutations(range(len(psi.cod))):
        permuted = np.asarray(model.evaluate(compose_seq(permutation_diagram(p, psi.cod), psi)))
        if permuted.dtype == bool:
            if not np.array_equal(permuted, base):
                return False
        elif np.max(np.abs(permuted - base), initial=0.0) > tol:
            return False
    return True
