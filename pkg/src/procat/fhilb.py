"""Evaluation of diagrams as complex tensors (the FHilb model)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import tensor as T
from .core import BOUNDARY, CAP, CUP, DISCARD, GEN, SPIDER, Diagram, DiagramError, Node


class EvaluationError(ValueError):
    """A diagram cannot be interpreted in the given model."""


def node_labels(d: Diagram) -> tuple[list[list[int]], list[int], list[int], list[tuple[int, int]]]:
    """Wire labels for every node axis (outputs then inputs) and the boundary.

    Wires running straight from an input to an output get a second label on
    their output end; those label pairs are returned so the caller can insert
    an identity tensor.
    """
    axes: list[list[int]] = [[0] * (len(n.cod) + len(n.dom)) for n in d.nodes]
    ins = [0] * len(d.dom)
    outs = [0] * len(d.cod)
    passthrough = []
    fresh = len(d.wires)
    for w, (s, t) in enumerate(d.wires):
        if s[0] == BOUNDARY:
            ins[s[1]] = w
        else:
            axes[s[0]][s[1]] = w
        if t[0] == BOUNDARY:
            if s[0] == BOUNDARY:
                outs[t[1]] = fresh
                passthrough.append((fresh, w))
                fresh += 1
            else:
                outs[t[1]] = w
        else:
            node = d.nodes[t[0]]
            axes[t[0]][len(node.cod) + t[1]] = w
    return axes, ins, outs, passthrough


def evaluate_network(
    d: Diagram,
    dims: dict[str, int],
    node_tensor: Callable[[Node], np.ndarray],
    field: str,
) -> np.ndarray:
    """Contract ``d`` with ``node_tensor`` supplying each node's tensor."""
    try:
        axes, ins, outs, passthrough = node_labels(d)
        network = []
        for node, labels in zip(d.nodes, axes):
            t = np.asarray(node_tensor(node))
            shape = tuple(dims[x] for x in node.cod + node.dom)
            if t.shape != shape and t.size == int(np.prod(shape, dtype=int)):
                t = t.reshape(shape)  # matrices are accepted in place of tensors
            if t.shape != shape:
                raise EvaluationError(
                    f"tensor for {node.kind} {node.label!r} has shape {t.shape}, expected {shape}"
                )
            network.append((t, labels))
        for out_label, in_label in passthrough:
            network.append((T.eye(dims[d.wire_type(in_label)], field), [out_label, in_label]))
    except KeyError as exc:
        raise EvaluationError(f"no dimension assigned to object {exc.args[0]!r}") from None
    return T.contract(network, outs + ins, field)


def adjoint_tensor(t: np.ndarray, n_cod: int) -> np.ndarray:
    """Conjugate transpose of a morphism tensor with ``n_cod`` codomain axes."""
    n = t.ndim
    perm = list(range(n_cod, n)) + list(range(n_cod))
    out = np.transpose(t, perm)
    return out if out.dtype == bool else out.conj()


@dataclass
class ModelAssignment:
    """Interpretation of a signature in FHilb.

    ``algebras`` maps a spider family to an object exposing
    ``spider(n, m)`` (a :class:`procat.frobenius.FrobeniusAlgebraSpec`).
    ``cup_override`` replaces the cup vector of an object; it exists to
    exhibit what goes wrong under a mismatched compact-structure convention.
    """

    dims: dict[str, int]
    generators: dict[str, np.ndarray] = field(default_factory=dict)
    algebras: dict = field(default_factory=dict)
    cup_override: dict[str, np.ndarray] = field(default_factory=dict)

    semiring = T.COMPLEX

    def __post_init__(self):
        for name, d in self.dims.items():
            if int(d) < 1:
                raise ValueError(f"dimension of {name!r} must be positive")
        self.generators = {k: np.asarray(v, dtype=complex) for k, v in self.generators.items()}

    def node_tensor(self, node: Node) -> np.ndarray:
        if node.kind == GEN:
            if node.label not in self.generators:
                raise EvaluationError(f"generator {node.label!r} has no assigned tensor")
            t = self.generators[node.label]
            if node.adjoint:
                t = adjoint_tensor(t, len(node.dom))
            return t
        if node.kind in (CUP, CAP):
            d = self.dims[node.label]
            if node.kind == CUP and node.label in self.cup_override:
                return np.asarray(self.cup_override[node.label], dtype=complex).reshape(d, d)
            return np.eye(d, dtype=complex)
        if node.kind == SPIDER:
            if node.label not in self.algebras:
                raise EvaluationError(f"algebra {node.label!r} has no assigned structure")
            n, m = node.arity
            d = self.dims[(node.dom or node.cod)[0]]
            return np.asarray(self.algebras[node.label].spider(n, m)).reshape((d,) * (m + n))
        if node.kind == DISCARD:
            raise EvaluationError("discard has no pure interpretation; use procat.cpm.evaluate_cp")
        raise EvaluationError(f"cannot evaluate node kind {node.kind!r}")

    def evaluate(self, d: Diagram) -> np.ndarray:
        return evaluate(d, self)


def evaluate(d: Diagram, m: ModelAssignment) -> np.ndarray:
    """The tensor of ``d``: codomain axes first, then domain axes."""
    return evaluate_network(d, m.dims, m.node_tensor, T.COMPLEX)


def evaluate_matrix(d: Diagram, m: ModelAssignment) -> np.ndarray:
    return T.as_matrix(evaluate(d, m), len(d.cod))


equal = T.equal
equal_upto_phase = T.equal_upto_phase


def weight_of(psi: Diagram, m: ModelAssignment) -> complex:
    """The squared norm ``psi-dagger after psi`` of a state."""
    from .core import compose_seq, dagger

    if psi.dom:
        raise DiagramError("weight_of expects a state (empty domain)")
    return complex(evaluate(compose_seq(dagger(psi), psi), m))
