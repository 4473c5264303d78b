"""Random signatures, diagrams and models for property tests.

Diagrams are built as a list of layers (``id * piece * id``) so that
variants with extra identity-like pieces can be produced from the same
recipe.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .core import (
    Diagram,
    Signature,
    cap,
    compose_all,
    compose_par,
    compose_seq,
    cup,
    identity,
    permutation_diagram,
    spider,
    symmetry,
    whisker,
)
from .fhilb import ModelAssignment
from .frel import RelAssignment
from .frobenius import copy_algebra_frel, x_algebra, xor_algebra_frel, z_algebra

GENERATORS = {
    "f": (("Q",), ("Q",)),
    "g": (("Q", "Q"), ("Q",)),
    "h": (("Q",), ("Q", "P")),
    "k": (("P",), ("Q",)),
    "r": (("P", "Q"), ("Q", "P")),
    "s": ((), ("Q",)),
    "e": (("Q",), ()),
}
FAMILIES = {"Z": "Q", "X": "Q"}
DIMS = {"Q": 2, "P": 3}


def standard_signature() -> Signature:
    sig = Signature()
    for o in ("P", "Q"):
        sig.add_object(o)
    for name, (dom, cod) in GENERATORS.items():
        sig.add_generator(name, dom, cod)
    for fam, obj in FAMILIES.items():
        sig.add_algebra(fam, obj)
    return sig


def _random_tensor(rng: np.random.Generator, shape, boolean: bool):
    if boolean:
        return rng.random(shape) < 0.5
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_fhilb_model(rng: np.random.Generator, dims=None) -> ModelAssignment:
    dims = dict(DIMS if dims is None else dims)
    gens = {}
    for name, (dom, cod) in GENERATORS.items():
        gens[name] = _random_tensor(rng, tuple(dims[x] for x in cod + dom), False)
    return ModelAssignment(dims, gens, {"Z": z_algebra(dims["Q"], "Q"), "X": x_algebra("Q")})


def random_frel_model(rng: np.random.Generator, dims=None) -> RelAssignment:
    dims = dict(DIMS if dims is None else dims)
    gens = {}
    for name, (dom, cod) in GENERATORS.items():
        gens[name] = _random_tensor(rng, tuple(dims[x] for x in cod + dom), True)
    copy = copy_algebra_frel(dims["Q"], "Q")
    return RelAssignment(dims, gens, {"Z": copy, "X": xor_algebra_frel("Q") if dims["Q"] == 2 else copy})


@dataclass
class Recipe:
    """A diagram as a sequence of layers, first layer applied first."""

    dom: tuple[str, ...]
    layers: list[Diagram]

    def build(self) -> Diagram:
        if not self.layers:
            return identity(self.dom)
        return compose_all(*self.layers)


def _box(name: str) -> Diagram:
    from .core import box

    dom, cod = GENERATORS[name]
    return box(name, dom, cod)


def _pieces(rng: random.Random, cod: tuple[str, ...], width: int):
    """Candidate ``(position, piece)`` pairs that fit the current outputs."""
    out = []
    n = len(cod)
    for name, (dom, c) in GENERATORS.items():
        if n - len(dom) + len(c) > width:
            continue
        for i in range(n - len(dom) + 1):
            if cod[i: i + len(dom)] == dom:
                out.append((i, _box(name)))
    for fam, obj in FAMILIES.items():
        for k in range(0, 3):
            for i in range(n - k + 1):
                if all(x == obj for x in cod[i: i + k]):
                    m = rng.randint(0 if k else 1, 3)
                    if n - k + m <= width:
                        out.append((i, spider(fam, obj, k, m)))
    if n + 2 <= width:
        out.append((rng.randint(0, n), cup(rng.choice(("Q", "P")))))
    for i in range(n - 1):
        if cod[i] == cod[i + 1]:
            out.append((i, cap(cod[i])))
    if n >= 2:
        p = list(range(n))
        rng.shuffle(p)
        out.append((0, permutation_diagram(p, cod)))
    return out


def random_recipe(rng: random.Random, n_nodes: int = 12, width: int = 5, dom=None) -> Recipe:
    if dom is None:
        dom = tuple(rng.choice(("Q", "Q", "P")) for _ in range(rng.randint(0, 3)))
    layers: list[Diagram] = []
    cod = tuple(dom)
    nodes = 0
    while nodes < n_nodes:
        i, piece = rng.choice(_pieces(rng, cod, width))
        layer = whisker(cod[:i], piece, cod[i + len(piece.dom):])
        layers.append(layer)
        cod = layer.cod
        nodes += len(piece.nodes)
    return Recipe(tuple(dom), layers)


def random_diagram(rng: random.Random, n_nodes: int = 12, width: int = 5) -> Diagram:
    return random_recipe(rng, n_nodes, width).build()


def _identity_piece(rng: random.Random, obj: str) -> Diagram:
    """A piece ``obj -> obj`` that every ruleset reduces to a wire."""
    choices = ["snake_l", "snake_r"]
    if obj == "Q":
        choices += ["spider11", "loop"]
    kind = rng.choice(choices)
    if kind == "snake_l":
        return compose_seq(compose_par(cap(obj), identity(obj)), compose_par(identity(obj), cup(obj)))
    if kind == "snake_r":
        return compose_seq(compose_par(identity(obj), cap(obj)), compose_par(cup(obj), identity(obj)))
    fam = rng.choice(sorted(FAMILIES))
    if kind == "spider11":
        return spider(fam, obj, 1, 1)
    return compose_seq(spider(fam, obj, 2, 1), spider(fam, obj, 1, 2))


def variant(rng: random.Random, recipe: Recipe, inserts: int = 3) -> Diagram:
    """The recipe with identity-like pieces (snakes, double crossings, spider loops) spliced in."""
    layers = list(recipe.layers)
    for _ in range(inserts):
        at = rng.randint(0, len(layers))
        wires = layers[at - 1].cod if at > 0 else recipe.dom
        if not wires:
            continue
        j = rng.randrange(len(wires))
        if rng.random() < 0.25 and j + 1 < len(wires):
            a, b = wires[j], wires[j + 1]
            piece = compose_seq(symmetry(b, a), symmetry(a, b))
            layers.insert(at, whisker(wires[:j], piece, wires[j + 2:]))
        else:
            piece = _identity_piece(rng, wires[j])
            layers.insert(at, whisker(wires[:j], piece, wires[j + 1:]))
    if not layers:
        return identity(recipe.dom)
    return compose_all(*layers)


def random_spider_composite(rng: random.Random, family: str = "Z", obj: str = "Q", max_spiders: int = 8) -> Diagram:
    """A connected composite of spiders of one family with at least one open leg."""
    while True:
        d = spider(family, obj, rng.randint(0, 2), rng.randint(1, 2))
        for _ in range(rng.randint(0, max_spiders - 1)):
            sides = (["top"] if d.cod else []) + (["bottom"] if d.dom else [])
            if not sides:
                break
            if rng.choice(sides) == "top":
                k = rng.randint(1, min(3, len(d.cod)))
                p = list(range(len(d.cod)))
                rng.shuffle(p)
                d = compose_seq(permutation_diagram(p, d.cod), d)
                i = rng.randint(0, len(d.cod) - k)
                top = spider(family, obj, k, rng.randint(0, 3))
                d = compose_seq(whisker(d.cod[:i], top, d.cod[i + k:]), d)
            else:
                k = rng.randint(1, min(3, len(d.dom)))
                p = list(range(len(d.dom)))
                rng.shuffle(p)
                d = compose_seq(d, permutation_diagram(p, d.dom))
                i = rng.randint(0, len(d.dom) - k)
                bottom = spider(family, obj, rng.randint(0, 3), k)
                d = compose_seq(d, whisker(d.dom[:i], bottom, d.dom[i + k:]))
        if d.dom or d.cod:
            return d
