"""Normalisation by rewriting, and diagram isomorphism.

Three rules act on diagrams:

``yank``
    a cup output plugged into a cap becomes a plain wire (the snake law).
``spider-fusion``
    a maximal connected cluster of spiders of one family becomes a single
    spider whose legs are the cluster's external wires.  Parallel and
    internal wires vanish, which is sound for special commutative
    Frobenius algebras.
``spider-identity``
    a one-in one-out spider is a wire.

Symmetries are wiring, so their laws hold by construction and need no rule.
A rule instance is skipped when its result would contain a directed cycle
(for instance a yank that would close a trace) or a spider without legs.
Closed cup/cap loops are left alone: removing them would need scalars.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable

from .core import (
    BOUNDARY,
    CAP,
    CUP,
    SPIDER,
    Diagram,
    DiagramError,
    Node,
    compose_par,
    compose_seq,
    identity,
    spider,
)
from .core import cap as cap_diagram
from .core import cup as cup_diagram

RULESETS = {
    "structural": ("yank",),
    "spiders": ("yank", "spider-fusion", "spider-identity"),
    "all": ("yank", "spider-fusion", "spider-identity"),
}


class RewriteError(ValueError):
    """A ruleset cannot be applied soundly (e.g. a non-special algebra)."""


@dataclass(frozen=True)
class RewriteRule:
    """A named rule with a representative left- and right-hand side on object ``A``."""

    name: str
    lhs: Diagram
    rhs: Diagram
    description: str


def _rules() -> dict[str, RewriteRule]:
    a = "A"
    snake = compose_seq(compose_par(cap_diagram(a), identity(a)), compose_par(identity(a), cup_diagram(a)))
    frob = compose_seq(
        compose_par(identity(a), spider("Z", a, 2, 1)),
        compose_par(spider("Z", a, 1, 2), identity(a)),
    )
    return {
        "yank": RewriteRule("yank", snake, identity(a), "cup output into a cap becomes a wire"),
        "spider-fusion": RewriteRule(
            "spider-fusion", frob, spider("Z", a, 2, 2), "connected same-family spiders merge"
        ),
        "spider-identity": RewriteRule(
            "spider-identity", spider("Z", a, 1, 1), identity(a), "a 1-to-1 spider is a wire"
        ),
    }


RULES = _rules()


@dataclass(frozen=True)
class Step:
    rule: str
    location: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"rule": self.rule, "location": list(self.location)}


# -- editing helpers --------------------------------------------------------------


def _rebuild(d: Diagram, remove: set[int], add: list[Node], wires: Iterable) -> Diagram:
    """New diagram without ``remove``; endpoints ``("new", j)`` refer to ``add[j]``."""
    keep = [i for i in range(len(d.nodes)) if i not in remove]
    index = {old: new for new, old in enumerate(keep)}
    base = len(keep)

    def fix(e):
        n, p = e
        if n == BOUNDARY:
            return e
        if isinstance(n, tuple):
            return (base + n[1], p)
        return (index[n], p)

    nodes = tuple(d.nodes[i] for i in keep) + tuple(add)
    return Diagram(d.dom, d.cod, nodes, [(fix(s), fix(t)) for s, t in wires])


def _touches(w, nodes: set[int]) -> bool:
    (sn, _), (tn, _) = w
    return sn in nodes or tn in nodes


# -- rule instances ----------------------------------------------------------------


def _yank_instances(d: Diagram) -> list[tuple[int, int]]:
    out = []
    for c, node in enumerate(d.nodes):
        if node.kind != CUP:
            continue
        for p in (0, 1):
            tn, _ = d.target_of[(c, p)]
            if tn != BOUNDARY and d.nodes[tn].kind == CAP:
                out.append((c, p))
    return out


def _apply_yank(d: Diagram, c: int, p: int) -> Diagram | None:
    k, q = d.target_of[(c, p)]
    s = d.source_of[(k, 1 - q)]
    if s[0] == c:
        return None  # closed loop
    t0 = d.target_of[(c, 1 - p)]
    wires = [w for w in d.wires if not _touches(w, {c, k})] + [(s, t0)]
    try:
        return _rebuild(d, {c, k}, [], wires)
    except DiagramError:
        return None  # would close a trace into a directed cycle


def _clusters(d: Diagram, family: str | None = None) -> list[list[int]]:
    parent = {i: i for i, n in enumerate(d.nodes) if n.kind == SPIDER and (family is None or n.label == family)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (sn, _), (tn, _) in d.wires:
        if sn in parent and tn in parent and d.nodes[sn].label == d.nodes[tn].label:
            parent[find(sn)] = find(tn)
    groups: dict[int, list[int]] = {}
    for i in parent:
        groups.setdefault(find(i), []).append(i)
    return sorted(sorted(g) for g in groups.values() if len(g) > 1)


def _apply_fusion(d: Diagram, cluster: list[int]) -> Diagram | None:
    members = set(cluster)
    label = d.nodes[cluster[0]].label
    obj = (d.nodes[cluster[0]].dom or d.nodes[cluster[0]].cod)[0]
    ins = [w for w in d.wires if w[1][0] in members and w[0][0] not in members]
    outs = [w for w in d.wires if w[0][0] in members and w[1][0] not in members]
    if not ins and not outs:
        return None  # a legless spider is excluded
    new = Node(SPIDER, label, (obj,) * len(ins), (obj,) * len(outs), tag=d.nodes[cluster[0]].tag)
    wires = [w for w in d.wires if not _touches(w, members)]
    wires += [(s, (("new", 0), k)) for k, (s, _) in enumerate(ins)]
    wires += [((("new", 0), k), t) for k, (_, t) in enumerate(outs)]
    try:
        return _rebuild(d, members, [new], wires)
    except DiagramError:
        return None  # a path through another box would become a directed cycle


def _identity_spiders(d: Diagram, family: str | None = None) -> list[int]:
    return [
        i
        for i, n in enumerate(d.nodes)
        if n.kind == SPIDER and n.arity == (1, 1) and (family is None or n.label == family)
    ]


def _apply_identity(d: Diagram, i: int) -> Diagram:
    s = d.source_of[(i, 0)]
    t = d.target_of[(i, 0)]
    wires = [w for w in d.wires if not _touches(w, {i})] + [(s, t)]
    return _rebuild(d, {i}, [], wires)


def _instances(d: Diagram, rules: tuple[str, ...], family: str | None = None):
    """All applicable ``(rule, location, result)`` triples, in a fixed order."""
    found = []
    if "yank" in rules:
        for c, p in _yank_instances(d):
            r = _apply_yank(d, c, p)
            if r is not None:
                found.append(("yank", (c, d.target_of[(c, p)][0]), r))
    if "spider-fusion" in rules:
        for cl in _clusters(d, family):
            r = _apply_fusion(d, cl)
            if r is not None:
                found.append(("spider-fusion", tuple(cl), r))
    if "spider-identity" in rules:
        for i in _identity_spiders(d, family):
            found.append(("spider-identity", (i,), _apply_identity(d, i)))
    return found


def measure(d: Diagram) -> tuple[int, int, int, int]:
    """Termination measure: cups and caps, symmetry nodes, spiders, same-family spider wires."""
    caps = d.count(CUP) + d.count(CAP)
    spiders = d.count(SPIDER)
    loops = sum(
        1
        for (sn, _), (tn, _) in d.wires
        if sn != BOUNDARY
        and tn != BOUNDARY
        and d.nodes[sn].kind == SPIDER
        and d.nodes[tn].kind == SPIDER
        and d.nodes[sn].label == d.nodes[tn].label
    )
    return caps, 0, spiders, loops


def _check_algebras(d: Diagram, rules, algebras: dict | None, family: str | None = None, tol: float = 1e-9):
    if not algebras or "spider-fusion" not in rules:
        return
    from .frobenius import check_laws

    families = {n.label for n in d.nodes if n.kind == SPIDER and (family is None or n.label == family)}
    for name in sorted(families):
        if name not in algebras:
            continue
        report = check_laws(algebras[name], tol)
        for law in ("special", "frobenius", "comm", "cocomm"):
            if not report.passed[law]:
                raise RewriteError(
                    f"algebra {name!r} fails the {law} law (residual {report.residuals[law]:.3g}); "
                    "spider fusion is unsound for it"
                )


def _run(d: Diagram, rules, rng, trace, family=None) -> Diagram:
    while True:
        found = _instances(d, rules, family)
        if not found:
            return d
        rule, loc, nxt = found[rng.randrange(len(found))] if rng is not None else found[0]
        if measure(nxt) >= measure(d):
            raise AssertionError(f"rule {rule} did not decrease the measure")
        if trace is not None:
            trace.append(Step(rule, loc))
        d = nxt


def rewrites(d: Diagram, ruleset: str = "all") -> list[tuple[Step, Diagram]]:
    """Every single-step rewrite of ``d`` under ``ruleset``."""
    if ruleset not in RULESETS:
        raise ValueError(f"unknown ruleset {ruleset!r}; choose from {sorted(RULESETS)}")
    return [(Step(rule, loc), nxt) for rule, loc, nxt in _instances(d, RULESETS[ruleset])]


def normalize(
    d: Diagram,
    ruleset: str = "all",
    rng: random.Random | int | None = None,
    trace: list | None = None,
    algebras: dict | None = None,
) -> Diagram:
    """Rewrite ``d`` to a fixpoint of ``ruleset``.

    With ``rng`` set the next rule instance is picked at random, otherwise
    the first one found.  Applied steps are appended to ``trace``.  When
    ``algebras`` maps spider families to their concrete structures, fusing a
    family whose structure is not special commutative Frobenius raises
    :class:`RewriteError`.
    """
    if ruleset not in RULESETS:
        raise ValueError(f"unknown ruleset {ruleset!r}; choose from {sorted(RULESETS)}")
    rules = RULESETS[ruleset]
    _check_algebras(d, rules, algebras)
    if isinstance(rng, int):
        rng = random.Random(rng)
    return _run(d, rules, rng, trace)


def spider_fuse(d: Diagram, algebra: str, algebras: dict | None = None, trace: list | None = None) -> Diagram:
    """Fuse the spiders of one family and drop its one-to-one spiders."""
    rules = ("spider-fusion", "spider-identity")
    _check_algebras(d, rules, algebras, family=algebra)
    return _run(d, rules, None, trace, family=algebra)


# -- canonical form and isomorphism ----------------------------------------------------


def _vertex_graph(d: Diagram):
    """Coloured undirected graph: nodes, node ports, boundary positions."""
    colors: list[str] = []
    adj: list[list[int]] = []
    kind: list[tuple] = []

    def vertex(color: str, what: tuple) -> int:
        colors.append(color)
        adj.append([])
        kind.append(what)
        return len(colors) - 1

    def link(u, v):
        adj[u].append(v)
        adj[v].append(u)

    node_v = []
    port_v: dict[tuple, int] = {}
    for i, n in enumerate(d.nodes):
        sym = n.symmetric
        head = repr((n.kind, n.label, n.dom, n.cod, n.adjoint, n.tag))
        v = vertex("N" + head, ("node", i))
        node_v.append(v)
        for p, t in enumerate(n.dom):
            pv = vertex(f"I{'' if sym else p}:{t}:{head}", ("in", i, p))
            port_v[("t", i, p)] = pv
            link(v, pv)
        for p, t in enumerate(n.cod):
            pv = vertex(f"O{'' if sym else p}:{t}:{head}", ("out", i, p))
            port_v[("s", i, p)] = pv
            link(v, pv)
    for k, t in enumerate(d.dom):
        port_v[("s", BOUNDARY, k)] = vertex(f"B<{k:06d}:{t}", ("bin", k))
    for k, t in enumerate(d.cod):
        port_v[("t", BOUNDARY, k)] = vertex(f"B>{k:06d}:{t}", ("bout", k))
    for s, t in d.wires:
        link(port_v[("s",) + s], port_v[("t",) + t])
    return colors, adj, kind


def _rank(keys: list) -> list[int]:
    table = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [table[k] for k in keys]


def _refine(cells: list[int], adj: list[list[int]], verts: list[int]) -> list[int]:
    """Colour refinement restricted to ``verts``; ``cells`` is indexed by position in ``verts``."""
    pos = {v: i for i, v in enumerate(verts)}
    colors = list(cells)
    n_colors = len(set(colors))
    while True:
        keys = [(colors[i], tuple(sorted(colors[pos[u]] for u in adj[v]))) for i, v in enumerate(verts)]
        new = _rank(keys)
        m = len(set(new))
        colors = new
        if m == n_colors:
            return colors
        n_colors = m


def _certificate(order: list[int], verts: list[int], labels: list[str], adj) -> tuple:
    where = {v: k for k, v in enumerate(order)}
    edges = sorted(
        (min(where[v], where[u]), max(where[v], where[u])) for v in verts for u in adj[v] if where[v] < where[u]
    )
    return tuple(labels[v] for v in order), tuple(edges)


def _canon_component(verts: list[int], labels: list[str], adj) -> tuple[tuple, list[int]]:
    """Minimal certificate over an individualisation-refinement search tree."""
    init = _refine(_rank([labels[v] for v in verts]), adj, verts)
    best: list = [None, None]

    def search(colors: list[int]):
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        split = [c for c, k in counts.items() if k > 1]
        if not split:
            order = [v for _, v in sorted(zip(colors, verts))]
            cert = _certificate(order, verts, labels, adj)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, order
            return
        target = min(split)
        for i, c in enumerate(colors):
            if c != target:
                continue
            trial = [2 * x + (1 if x >= target and j != i else 0) for j, x in enumerate(colors)]
            search(_refine(_rank(trial), adj, verts))

    search(init)
    return best[0], best[1]


@dataclass(frozen=True)
class CanonicalForm:
    """A canonically relabelled diagram.

    ``certificate`` is equal for two diagrams exactly when they are
    isomorphic.  ``node_order[k]`` is the original index of the node placed
    at position ``k`` of ``diagram``.
    """

    diagram: Diagram
    certificate: tuple
    node_order: tuple[int, ...] = field(compare=False)


def canonical_form(d: Diagram) -> CanonicalForm:
    labels, adj, kind = _vertex_graph(d)
    seen = [False] * len(labels)
    comps = []
    for root in range(len(labels)):
        if seen[root]:
            continue
        stack, comp = [root], []
        seen[root] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(sorted(comp))
    parts = sorted(_canon_component(c, labels, adj) for c in comps)
    order = [v for _, o in parts for v in o]
    certificate = tuple(cert for cert, _ in parts)

    node_order = [kind[v][1] for v in order if kind[v][0] == "node"]
    new_index = {old: new for new, old in enumerate(node_order)}
    rank = {v: k for k, v in enumerate(order)}
    # ports of symmetric nodes are renumbered by canonical position
    ports: dict[tuple, list[int]] = {}
    for v, what in enumerate(kind):
        if what[0] in ("in", "out") and d.nodes[what[1]].symmetric:
            ports.setdefault(what[:2], []).append(v)
    port_map: dict[tuple, int] = {}
    for (role, i), vs in ports.items():
        for k, v in enumerate(sorted(vs, key=rank.__getitem__)):
            port_map[(role, i, kind[v][2])] = k

    def fix(e, role):
        n, p = e
        if n == BOUNDARY:
            return e
        return (new_index[n], port_map.get((role, n, p), p))

    wires = [(fix(s, "out"), fix(t, "in")) for s, t in d.wires]
    nodes = tuple(d.nodes[i] for i in node_order)
    return CanonicalForm(Diagram(d.dom, d.cod, nodes, wires), certificate, tuple(node_order))


@dataclass(frozen=True)
class IsoResult:
    """Outcome of :func:`iso_equal`; ``witness[i]`` is the node of ``d2`` matched to node ``i`` of ``d1``."""

    equal: bool
    witness: dict[int, int] | None = None

    def __bool__(self) -> bool:
        return self.equal


def iso_equal(d1: Diagram, d2: Diagram) -> IsoResult:
    """Boundary- and type-preserving isomorphism test."""
    if d1.dom != d2.dom or d1.cod != d2.cod or len(d1.nodes) != len(d2.nodes) or len(d1.wires) != len(d2.wires):
        return IsoResult(False)
    c1, c2 = canonical_form(d1), canonical_form(d2)
    if c1.certificate != c2.certificate:
        return IsoResult(False)
    return IsoResult(True, {a: b for a, b in zip(c1.node_order, c2.node_order)})
