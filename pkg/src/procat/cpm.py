"""Open processes: discarding, doubling and completely positive maps.

A :class:`CPMap` ``A -> B`` is stored as the matrix of its action on
row-major vectorised density matrices, ``vec(rho)[i*dA + j] = rho[i, j]``,
so a pure ``f`` doubles to ``kron(f, conj(f))``.  Conjugation of the pure
part is entrywise complex conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tensor as T
from .core import BOUNDARY, DISCARD, Diagram, DiagramError, ObjectType
from .fhilb import EvaluationError, ModelAssignment, evaluate, node_labels


def _prod(dims: Sequence[int]) -> int:
    return int(np.prod(dims, dtype=int)) if len(dims) else 1


@dataclass(eq=False)
class CPMap:
    """A doubled morphism, optionally carrying the pure map it came from.

    ``witness`` (if present) is a pure matrix ``A -> B*E`` whose environment
    factor ``E`` (dims ``env_dims``) is traced out to give this map.
    """

    superop: np.ndarray
    dom_dims: tuple[int, ...]
    cod_dims: tuple[int, ...]
    witness: np.ndarray | None = None
    env_dims: tuple[int, ...] = ()
    witness_diagram: Diagram | None = None
    env: tuple[int, ...] = ()

    def __post_init__(self):
        self.superop = np.asarray(self.superop, dtype=complex)
        self.dom_dims = tuple(self.dom_dims)
        self.cod_dims = tuple(self.cod_dims)
        shape = (self.d_cod**2, self.d_dom**2)
        if self.superop.shape != shape:
            raise ValueError(f"superoperator shape {self.superop.shape}, expected {shape}")

    @property
    def d_dom(self) -> int:
        return _prod(self.dom_dims)

    @property
    def d_cod(self) -> int:
        return _prod(self.cod_dims)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex).reshape(self.d_dom, self.d_dom)
        return (self.superop @ rho.reshape(-1)).reshape(self.d_cod, self.d_cod)

    @property
    def d_env(self) -> int:
        return _prod(self.env_dims)

    def kraus(self) -> list[np.ndarray]:
        """Kraus operators read off the pure witness (one per environment basis state)."""
        if self.witness is None:
            raise ValueError("map carries no pure witness")
        w = self.witness.reshape(self.d_cod, self.d_env, self.d_dom)
        return [w[:, k, :] for k in range(self.d_env)]

    def after(self, other: "CPMap") -> "CPMap":
        """``self`` after ``other``."""
        if other.d_cod != self.d_dom:
            raise DiagramError("CP maps do not compose: dimension mismatch")
        witness = None
        if self.witness is not None and other.witness is not None:
            # (W2 (x) 1_E1) W1 : A -> C * E2 * E1
            witness = np.kron(self.witness, np.eye(other.d_env)) @ other.witness
        return CPMap(
            self.superop @ other.superop,
            other.dom_dims,
            self.cod_dims,
            witness=witness,
            env_dims=self.env_dims + other.env_dims if witness is not None else (),
        )

    def tensor(self, other: "CPMap") -> "CPMap":
        witness = None
        if self.witness is not None and other.witness is not None:
            kr = [np.kron(k1, k2) for k1 in self.kraus() for k2 in other.kraus()]
            witness = _witness_from_kraus(kr)
        return CPMap(
            _liouville_kron(self.superop, other.superop, self.d_cod, other.d_cod, self.d_dom, other.d_dom),
            self.dom_dims + other.dom_dims,
            self.cod_dims + other.cod_dims,
            witness=witness,
            env_dims=(self.d_env * other.d_env,) if witness is not None else (),
        )

    def __add__(self, other: "CPMap") -> "CPMap":
        witness = None
        if self.witness is not None and other.witness is not None:
            witness = _witness_from_kraus(self.kraus() + other.kraus())
        return CPMap(
            self.superop + other.superop,
            self.dom_dims,
            self.cod_dims,
            witness=witness,
            env_dims=(self.d_env + other.d_env,) if witness is not None else (),
        )

    def __rmul__(self, c: float) -> "CPMap":
        c = complex(c)
        ok = self.witness is not None and c.imag == 0 and c.real >= 0
        return CPMap(
            c * self.superop,
            self.dom_dims,
            self.cod_dims,
            witness=np.sqrt(c.real) * self.witness if ok else None,
            env_dims=self.env_dims if ok else (),
        )

    def adjoint(self) -> "CPMap":
        """Hilbert-Schmidt adjoint (the dagger of the doubled map)."""
        witness = None
        if self.witness is not None:
            witness = _witness_from_kraus([k.conj().T for k in self.kraus()])
        return CPMap(
            self.superop.conj().T,
            self.cod_dims,
            self.dom_dims,
            witness=witness,
            env_dims=(self.d_env,) if witness is not None else (),
        )

    def choi(self) -> np.ndarray:
        """``J[(b, a), (b', a')] = superop[(b, b'), (a, a')]``."""
        dB, dA = self.d_cod, self.d_dom
        s = self.superop.reshape(dB, dB, dA, dA).transpose(0, 2, 1, 3)
        return s.reshape(dB * dA, dB * dA)

    def to_dict(self) -> dict:
        from .dsl import print_diagram

        out = {
            "doubled": T.tensor_to_dict(self.superop),
            "dom_dims": list(self.dom_dims),
            "cod_dims": list(self.cod_dims),
            "witness": None,
            "env": list(self.env),
        }
        if self.witness_diagram is not None:
            try:
                out["witness"] = print_diagram(self.witness_diagram)
            except ValueError:
                out["witness"] = None
        if self.witness is not None:
            out["witness_tensor"] = T.tensor_to_dict(self.witness)
        return out


def _witness_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Stack Kraus operators into ``W[(b, k), a] = K_k[b, a]``."""
    k = np.stack([np.asarray(x, dtype=complex) for x in kraus], axis=1)
    return k.reshape(k.shape[0] * k.shape[1], k.shape[2])


def _liouville_kron(s1, s2, b1, b2, a1, a2) -> np.ndarray:
    k = np.kron(s1, s2).reshape(b1, b1, b2, b2, a1, a1, a2, a2)
    k = k.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return k.reshape((b1 * b2) ** 2, (a1 * a2) ** 2)


def double_matrix(
    f: np.ndarray,
    cod_dims: Sequence[int],
    dom_dims: Sequence[int],
    env: Sequence[int] = (),
) -> CPMap:
    """Double a pure matrix ``f`` and trace out the codomain factors ``env``."""
    cod_dims, dom_dims = tuple(cod_dims), tuple(dom_dims)
    env = sorted(set(env))
    if any(not 0 <= e < len(cod_dims) for e in env):
        raise DiagramError(f"environment positions {env} are not outputs")
    f = np.asarray(f, dtype=complex)
    F = f.reshape(cod_dims + dom_dims)
    S = np.tensordot(F, F.conj(), axes=(env, env))
    nk = len(cod_dims) - len(env)
    nd = len(dom_dims)
    # axes now: kept cod, dom, kept cod', dom'
    perm = (
        list(range(nk))
        + list(range(nk + nd, 2 * nk + nd))
        + list(range(nk, nk + nd))
        + list(range(2 * nk + nd, 2 * nk + 2 * nd))
    )
    S = np.transpose(S, perm) if perm else S
    kept = tuple(d for i, d in enumerate(cod_dims) if i not in env)
    dk, da = _prod(kept), _prod(dom_dims)
    # witness with environment moved to the right
    order = [i for i in range(len(cod_dims)) if i not in env] + list(env)
    W = np.transpose(F, order + list(range(len(cod_dims), len(cod_dims) + nd)))
    W = W.reshape(_prod(cod_dims), da)
    return CPMap(
        S.reshape(dk * dk, da * da),
        dom_dims,
        kept,
        witness=W,
        env_dims=tuple(cod_dims[e] for e in env),
        env=tuple(env),
    )


def double(f_pure: Diagram, env: Sequence[int] = (), m: ModelAssignment | None = None) -> CPMap:
    """CP map of a pure diagram with the output positions ``env`` discarded."""
    if m is None:
        raise ValueError("double needs a model assignment")
    cod = list(f_pure.cod)
    if any(not 0 <= e < len(cod) for e in env):
        raise DiagramError(f"environment {sorted(env)} is not a subset of the outputs")
    t = evaluate(f_pure, m)
    cod_dims = [m.dims[a] for a in f_pure.cod]
    dom_dims = [m.dims[a] for a in f_pure.dom]
    out = double_matrix(T.as_matrix(t, len(cod)), cod_dims, dom_dims, env)
    out.witness_diagram = f_pure
    return out


def pure(f: np.ndarray, cod_dims=None, dom_dims=None) -> CPMap:
    f = np.asarray(f, dtype=complex)
    cod_dims = cod_dims or (f.shape[0],)
    dom_dims = dom_dims or (f.shape[1],)
    return double_matrix(f, cod_dims, dom_dims)


def discard(A, m: ModelAssignment | dict | None = None) -> CPMap:
    """The trace-out map ``A -> I``.

    ``A`` may be an object type (dims taken from ``m``) or a tuple of dims.
    """
    if isinstance(A, (tuple, list)) and all(isinstance(x, (int, np.integer)) for x in A):
        dims = tuple(int(x) for x in A)
    else:
        word = ObjectType.of(A).word
        table = m.dims if isinstance(m, ModelAssignment) else (m or {})
        dims = tuple(table[a] for a in word)
    d = _prod(dims)
    row = np.eye(d, dtype=complex).reshape(1, d * d)
    return CPMap(row, dims, (), witness=np.eye(d, dtype=complex), env_dims=dims)


def maximally_mixed(dims) -> CPMap:
    """The dagger of discarding: the unnormalised identity state."""
    return discard(tuple(dims)).adjoint()


def transpose_map(d: int) -> CPMap:
    """``rho -> rho^T``: positive but not completely positive."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1
    return CPMap(s, (d,), (d,))


def kraus_map(kraus: Sequence[np.ndarray]) -> CPMap:
    """``rho -> sum_k K rho K^dagger``."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    s = sum(np.kron(k, k.conj()) for k in kraus)
    return CPMap(
        s,
        (kraus[0].shape[1],),
        (kraus[0].shape[0],),
        witness=_witness_from_kraus(kraus),
        env_dims=(len(kraus),),
    )


def purify(d: Diagram) -> tuple[Diagram, list[int]]:
    """A pure diagram and the output positions that feed the environment.

    Each discard becomes an extra output; each dagger of a discard becomes a
    cup with one leg sent to the environment.
    """
    from .core import CUP, Node

    keep = [i for i, n in enumerate(d.nodes) if n.kind != DISCARD]
    index = {old: new for new, old in enumerate(keep)}
    nodes = [d.nodes[i] for i in keep]
    cod = list(d.cod)
    env_pos: dict[int, int] = {}
    cups: dict[int, int] = {}
    for i, n in enumerate(d.nodes):
        if n.kind != DISCARD:
            continue
        env_pos[i] = len(cod)
        cod.append(n.label)
        if n.adjoint:
            nodes.append(Node(CUP, n.label, (), (n.label, n.label)))
            cups[i] = len(nodes) - 1
    wires = []
    for s, t in d.wires:
        if s[0] != BOUNDARY:
            s = (cups[s[0]], 0) if s[0] in cups else (index[s[0]], s[1])
        if t[0] != BOUNDARY:
            t = (BOUNDARY, env_pos[t[0]]) if t[0] in env_pos else (index[t[0]], t[1])
        wires.append((s, t))
    for i, c in cups.items():
        wires.append(((c, 1), (BOUNDARY, env_pos[i])))
    return Diagram(d.dom, cod, nodes, wires), sorted(env_pos.values())


def evaluate_cp(d: Diagram, m: ModelAssignment) -> CPMap:
    """Evaluate a diagram that may contain discards in the doubled model.

    The result carries the purified diagram and its tensor as witness.
    """
    pure_d, env = purify(d)
    return double(pure_d, env, m)


def check_cpm_axiom(f: np.ndarray, g: np.ndarray, tol: float = 1e-7) -> tuple[bool, bool]:
    """Both sides of: discarding after f equals discarding after g iff f^dag f = g^dag g."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape[1] != g.shape[1]:
        raise DiagramError(f"f and g must share a domain: {f.shape[1]} vs {g.shape[1]}")
    lhs_f = discard((f.shape[0],)).after(pure(f)).superop
    lhs_g = discard((g.shape[0],)).after(pure(g)).superop
    lhs = T.residual(lhs_f, lhs_g) <= tol
    rhs = T.residual(f.conj().T @ f, g.conj().T @ g) <= tol
    return bool(lhs), bool(rhs)


def is_isometry(f: np.ndarray, tol: float = 1e-9) -> bool:
    f = np.asarray(f, dtype=complex)
    return T.residual(f.conj().T @ f, np.eye(f.shape[1])) <= tol


def is_completely_positive(t: CPMap, tol: float = 1e-9) -> bool:
    """Choi positivity: Hermitian and no eigenvalue below ``-tol``."""
    if t.superop.shape[0] != t.d_cod**2 or t.superop.shape[1] != t.d_dom**2:
        raise ValueError("not a doubled tensor")
    J = t.choi()
    if T.residual(J, J.conj().T) > tol:
        return False
    return bool(np.linalg.eigvalsh((J + J.conj().T) / 2).min(initial=0.0) >= -tol)


def is_trace_preserving(t: CPMap, tol: float = 1e-9) -> bool:
    return T.residual(discard(t.cod_dims).after(t).superop, discard(t.dom_dims).superop) <= tol


def purification_residual(t: CPMap) -> float:
    """How far the stored witness is from reproducing ``t`` after discarding."""
    if t.witness is None:
        raise ValueError("map carries no pure witness")
    kept = t.cod_dims
    redo = double_matrix(t.witness, kept + t.env_dims, t.dom_dims, range(len(kept), len(kept) + len(t.env_dims)))
    return T.residual(redo.superop, t.superop)
