"""Evaluation of diagrams as boolean relations (the FRel model)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .core import CAP, CUP, DISCARD, GEN, SPIDER, Diagram, Node
from .fhilb import EvaluationError, adjoint_tensor, evaluate_network


@dataclass
class RelAssignment:
    """Carrier sizes and boolean tensors for a signature.

    Daggers are relational converses.  A discard node is the total relation
    to the one-point set.
    """

    sizes: dict[str, int]
    generators: dict[str, np.ndarray] = field(default_factory=dict)
    algebras: dict = field(default_factory=dict)

    semiring = T.BOOL

    def __post_init__(self):
        self.generators = {k: np.asarray(v, dtype=bool) for k, v in self.generators.items()}

    @property
    def dims(self) -> dict[str, int]:
        return self.sizes

    def node_tensor(self, node: Node) -> np.ndarray:
        if node.kind == GEN:
            if node.label not in self.generators:
                raise EvaluationError(f"generator {node.label!r} has no assigned relation")
            t = self.generators[node.label]
            return adjoint_tensor(t, len(node.dom)) if node.adjoint else t
        if node.kind in (CUP, CAP):
            return np.eye(self.sizes[node.label], dtype=bool)
        if node.kind == SPIDER:
            if node.label not in self.algebras:
                raise EvaluationError(f"algebra {node.label!r} has no assigned structure")
            n, m = node.arity
            d = self.sizes[(node.dom or node.cod)[0]]
            return np.asarray(self.algebras[node.label].spider(n, m), dtype=bool).reshape((d,) * (m + n))
        if node.kind == DISCARD:
            return np.ones((self.sizes[node.label],), dtype=bool)
        raise EvaluationError(f"cannot evaluate node kind {node.kind!r}")

    def evaluate(self, d: Diagram) -> np.ndarray:
        return evaluate_rel(d, self)


def evaluate_rel(d: Diagram, m: RelAssignment) -> np.ndarray:
    """Boolean tensor of ``d`` (or-of-ands contraction)."""
    return evaluate_network(d, m.sizes, m.node_tensor, T.BOOL)


def is_function(t: np.ndarray) -> bool:
    """Whether a binary relation (codomain axis first) is a total function."""
    t = np.asarray(t, dtype=bool)
    if t.ndim != 2:
        raise ValueError(f"is_function expects a binary relation, got {t.ndim} axes")
    return bool(np.all(t.sum(axis=0) == 1))


def relation(pairs, n_dom: int, n_cod: int) -> np.ndarray:
    """Boolean matrix (codomain rows) relating each ``(x, y)`` in ``pairs``."""
    out = np.zeros((n_cod, n_dom), dtype=bool)
    for x, y in pairs:
        out[y, x] = True
    return out
