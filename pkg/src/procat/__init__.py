"""Typed string diagrams for process theories: rewriting, evaluation and classical structures."""

from .core import (
    I,
    Diagram,
    DiagramError,
    Node,
    ObjectType,
    Signature,
    SignatureError,
    TypeMismatch,
    bend,
    bend_input,
    bend_output,
    box,
    cap,
    causal_variants,
    compose_all,
    compose_par,
    compose_seq,
    cup,
    dagger,
    discard,
    identity,
    is_connected,
    is_snapshot,
    is_symmetric_state,
    permutation_diagram,
    spider,
    symmetry,
)
from .fhilb import EvaluationError, ModelAssignment, evaluate, evaluate_matrix, weight_of
from .frel import RelAssignment, evaluate_rel, is_function
from .rewrite import CanonicalForm, RewriteError, canonical_form, iso_equal, normalize, rewrites, spider_fuse

__all__ = [
    "I",
    "CanonicalForm",
    "Diagram",
    "DiagramError",
    "EvaluationError",
    "ModelAssignment",
    "Node",
    "ObjectType",
    "RelAssignment",
    "RewriteError",
    "Signature",
    "SignatureError",
    "TypeMismatch",
    "bend",
    "bend_input",
    "bend_output",
    "box",
    "canonical_form",
    "cap",
    "causal_variants",
    "compose_all",
    "compose_par",
    "compose_seq",
    "cup",
    "dagger",
    "discard",
    "evaluate",
    "evaluate_matrix",
    "evaluate_rel",
    "identity",
    "is_connected",
    "is_function",
    "is_snapshot",
    "is_symmetric_state",
    "iso_equal",
    "normalize",
    "rewrites",
    "permutation_diagram",
    "spider",
    "spider_fuse",
    "symmetry",
    "weight_of",
]
