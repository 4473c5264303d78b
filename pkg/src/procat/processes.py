"""Classical processes, measurement probes and protocol checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tensor as T
from .core import box, cap, compose_par, compose_seq, cup, identity
from .cpm import CPMap, check_cpm_axiom, discard, double, kraus_map, pure
from .fhilb import ModelAssignment, evaluate_matrix
from .frobenius import FrobeniusAlgebraSpec, copyables, decoherence


@dataclass
class VerificationRecord:
    claim: str
    residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"claim": self.claim, "residual": float(self.residual), "tolerance": self.tolerance, "pass": bool(self.passed)}
        out.update(self.details)
        return out


# -- classical processes -----------------------------------------------------------


def _frame(a: FrobeniusAlgebraSpec) -> list[np.ndarray]:
    """Normalised copyable states of ``a``, in a fixed order."""
    return [x / np.linalg.norm(x) for x in copyables(a)]


@dataclass
class ClassicalProcessReport:
    is_classical: bool
    is_stochastic: bool
    is_deterministic: bool
    matrix: np.ndarray
    residuals: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "is_classical": self.is_classical,
            "is_stochastic": self.is_stochastic,
            "is_deterministic": self.is_deterministic,
            "matrix": np.real_if_close(self.matrix).real.round(12).tolist(),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


def induced_matrix(f: CPMap, aX: FrobeniusAlgebraSpec, aY: FrobeniusAlgebraSpec) -> np.ndarray:
    """``M[j, i]``: weight of copyable ``y_j`` in the image of copyable ``x_i``."""
    xs, ys = _frame(aX), _frame(aY)
    M = np.zeros((len(ys), len(xs)))
    for i, x in enumerate(xs):
        out = f.apply(np.outer(x, x.conj()))
        for j, y in enumerate(ys):
            M[j, i] = float(np.real(np.vdot(y, out @ y)))
    return M


def classify_classical(f: CPMap, aX: FrobeniusAlgebraSpec, aY: FrobeniusAlgebraSpec, tol: float = 1e-9) -> ClassicalProcessReport:
    """Test the classical, stochastic and deterministic equations for ``f: X -> Y``."""
    if f.d_dom != aX.dim or f.d_cod != aY.dim:
        raise ValueError(f"map {f.d_dom} -> {f.d_cod} does not match carriers {aX.dim} -> {aY.dim}")
    oX, oY = decoherence(aX), decoherence(aY)
    r_classical = T.residual(oY.after(f).after(oX).superop, f.superop)
    r_norm = T.residual(discard((aY.dim,)).after(f).superop, discard((aX.dim,)).superop)
    copy_x = pure(aX.delta, (aX.dim, aX.dim), (aX.dim,))
    copy_y = pure(aY.delta, (aY.dim, aY.dim), (aY.dim,))
    r_det = T.residual(copy_y.after(f).superop, f.tensor(f).after(copy_x).superop)
    classical = r_classical <= tol
    stochastic = classical and r_norm <= tol
    deterministic = stochastic and r_det <= tol
    return ClassicalProcessReport(
        classical,
        stochastic,
        deterministic,
        induced_matrix(f, aX, aY),
        {"classical": r_classical, "stochastic": r_norm, "deterministic": r_det},
    )


def classical_map(M: np.ndarray, aX: FrobeniusAlgebraSpec, aY: FrobeniusAlgebraSpec) -> CPMap:
    """The classical process with nonnegative transition matrix ``M`` (columns = inputs)."""
    M = np.asarray(M, dtype=float)
    if np.any(M < 0):
        raise ValueError("transition weights must be nonnegative")
    xs, ys = _frame(aX), _frame(aY)
    if M.shape != (len(ys), len(xs)):
        raise ValueError(f"matrix shape {M.shape}, expected {(len(ys), len(xs))}")
    kraus = [np.sqrt(M[j, i]) * np.outer(y, x.conj()) for i, x in enumerate(xs) for j, y in enumerate(ys)]
    return kraus_map(kraus)


def is_column_stochastic(M: np.ndarray, tol: float = 1e-9) -> bool:
    M = np.asarray(M)
    return bool(np.all(M >= -tol) and np.all(np.abs(M.sum(axis=0) - 1) <= tol))


def is_function_matrix(M: np.ndarray, tol: float = 1e-9) -> bool:
    """0/1 entries with exactly one 1 in each column."""
    M = np.asarray(M)
    binary = np.all((np.abs(M) <= tol) | (np.abs(M - 1) <= tol))
    return bool(binary and np.all(np.sum(np.abs(M - 1) <= tol, axis=0) == 1))


# -- probes -------------------------------------------------------------------------------


class ProbeError(ValueError):
    pass


@dataclass
class Probe:
    """``m: A -> A*X`` as a matrix with rows indexed ``a * dX + x``."""

    m: np.ndarray
    algebra: FrobeniusAlgebraSpec
    states: list[np.ndarray]
    idempotents: list[np.ndarray] | None = None

    @property
    def d_sys(self) -> int:
        return self.m.shape[1]


def make_probe(projectors: Sequence[np.ndarray], aX: FrobeniusAlgebraSpec) -> Probe:
    """``m = sum_i P_i (x) x_i`` over the copyable states ``x_i`` of ``aX``."""
    xs = copyables(aX)
    if len(projectors) != len(xs):
        raise ProbeError(f"{len(projectors)} idempotents for a carrier with {len(xs)} copyable states")
    ps = [np.asarray(p, dtype=complex) for p in projectors]
    m = sum(np.kron(p, x.reshape(-1, 1)) for p, x in zip(ps, xs))
    return Probe(m, aX, xs, ps)


def probe_equations(p: Probe) -> dict[str, float]:
    """Residuals of repeatability, self-adjointness and completeness."""
    a, dA, dX = p.algebra, p.d_sys, p.algebra.dim
    m = p.m
    twice = np.kron(m, np.eye(dX)) @ m
    copied = np.kron(np.eye(dA), a.delta) @ m
    pairing = a.eps @ a.mu  # X*X -> I
    adjoint_rhs = np.kron(np.eye(dA), pairing) @ np.kron(m, np.eye(dX))
    complete = np.kron(np.eye(dA), a.eps) @ m
    return {
        "repeatable": T.residual(twice, copied),
        "self_adjoint": T.residual(m.conj().T, adjoint_rhs),
        "complete": T.residual(complete, np.eye(dA)),
    }


def _duals(states: Sequence[np.ndarray]) -> list[np.ndarray]:
    B = np.stack(states, axis=1)
    inv = np.linalg.inv(B)
    return [inv[i] for i in range(len(states))]


def _idempotents(p: Probe) -> list[np.ndarray]:
    dA, dX = p.d_sys, p.algebra.dim
    return [np.kron(np.eye(dA), e.reshape(1, dX)) @ p.m for e in _duals(p.states)]


def check_probe(p: Probe, tol: float = 1e-9) -> dict:
    """The three probe equations plus the matching facts about the idempotents."""
    res = probe_equations(p)
    ps = _idempotents(p)
    dA = p.d_sys
    orth = max(
        (T.residual(pi @ pj, pi if i == j else np.zeros_like(pi)) for i, pi in enumerate(ps) for j, pj in enumerate(ps)),
        default=0.0,
    )
    herm = max((T.residual(pi, pi.conj().T) for pi in ps), default=0.0)
    total = T.residual(sum(ps), np.eye(dA))
    return {
        "eq1": res["repeatable"] <= tol,
        "eq2": res["self_adjoint"] <= tol,
        "eq3": res["complete"] <= tol,
        "orthogonal_idempotents": orth <= tol,
        "self_adjoint_idempotents": herm <= tol,
        "complete_idempotents": total <= tol,
        "residuals": {**res, "orthogonal_idempotents": orth, "self_adjoint_idempotents": herm, "complete_idempotents": total},
    }


def extract_idempotents(p: Probe, tol: float = 1e-9) -> list[np.ndarray]:
    """``P_i = (1 (x) dual effect of x_i) m``; requires repeatability."""
    r = probe_equations(p)["repeatable"]
    if r > tol:
        raise ProbeError(f"probe is not repeatable (residual {r:.3g})")
    ps = _idempotents(p)
    rebuilt = sum(np.kron(pi, x.reshape(-1, 1)) for pi, x in zip(ps, p.states))
    if T.residual(rebuilt, p.m) > tol:
        raise ProbeError("idempotents do not reconstruct the probe")
    return ps


def probe_from_tensor(m: np.ndarray, aX: FrobeniusAlgebraSpec) -> Probe:
    return Probe(np.asarray(m, dtype=complex), aX, copyables(aX))


def basis_projectors(a: FrobeniusAlgebraSpec) -> list[np.ndarray]:
    """Rank-one projectors onto the (normalised) copyables of ``a``."""
    return [np.outer(x, x.conj()) for x in _frame(a)]


# -- demonstrations -----------------------------------------------------------------------


def _snakes(obj: str):
    left = compose_seq(compose_par(cap(obj), identity(obj)), compose_par(identity(obj), cup(obj)))
    right = compose_seq(compose_par(identity(obj), cap(obj)), compose_par(cup(obj), identity(obj)))
    return left, right


def demo_teleport(dim: int = 2, cup_override: np.ndarray | None = None, tol: float = 1e-12) -> VerificationRecord:
    """The snake composite is the identity, by rewriting and by evaluation."""
    from .rewrite import iso_equal, normalize

    left, right = _snakes("A")
    m = ModelAssignment({"A": dim}, cup_override={} if cup_override is None else {"A": cup_override})
    rewrite_ok = all(bool(iso_equal(normalize(s, "structural"), identity("A"))) for s in (left, right))
    residual = max(T.residual(evaluate_matrix(s, m), np.eye(dim)) for s in (left, right))
    return VerificationRecord(
        "post-selected teleportation: (cap (x) 1)(1 (x) cup) = 1",
        residual,
        tol,
        rewrite_ok and residual <= tol,
        {"dim": dim, "rewrite": rewrite_ok, "evaluation": residual <= tol},
    )


def demo_no_signaling(aX: FrobeniusAlgebraSpec | None = None, projectors=None, tol: float = 1e-9) -> VerificationRecord:
    """Bob's half of a Bell state after Ali probes (or discards) hers.

    Without ``aX`` Ali only discards.  With ``aX`` she applies the probe
    built from ``projectors`` (default: the rank-one projectors onto the
    copyables of ``aX``) and both her outputs feed the environment.
    """
    if aX is None:
        dim = 2
        diagram = cup("A")
        env = [0]
        m = ModelAssignment({"A": dim})
        label = "discard only"
    else:
        dim = aX.dim
        p = make_probe(basis_projectors(aX) if projectors is None else projectors, aX)
        probe = box("m", "A", "A*X")
        diagram = compose_seq(compose_par(probe, identity("A")), cup("A"))
        env = [0, 1]
        m = ModelAssignment({"A": p.d_sys, "X": aX.dim}, {"m": p.m})
        dim = p.d_sys
        label = aX.name or "probe"
    bob = double(diagram, env, m).apply(np.ones((1, 1)))
    residual = T.residual(bob, np.eye(dim))
    return VerificationRecord(
        "no signalling: Bob's reduced state is the (unnormalised) identity",
        residual,
        tol,
        residual <= tol,
        {"probe": label, "bob": T.tensor_to_dict(bob)},
    )


def random_isometry(rng: np.random.Generator, d_out: int, d_in: int) -> np.ndarray:
    z = rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))
    q, _ = np.linalg.qr(z)
    return q[:, :d_in]


def demo_cpm_axiom(trials: int = 500, seed: int = 0, tol: float = 1e-7) -> VerificationRecord:
    """Equal after discarding iff equal Gram matrices, on random pairs."""
    rng = np.random.default_rng(seed)
    bad = 0
    agree_true = 0
    for t in range(trials):
        dc, da = rng.integers(1, 4, size=2)
        f = rng.normal(size=(da, dc)) + 1j * rng.normal(size=(da, dc))
        kind = t % 3
        if kind == 0:
            db = int(rng.integers(da, 4))
            g = random_isometry(rng, db, da) @ f
        elif kind == 1:
            db = int(rng.integers(1, 4))
            g = rng.normal(size=(db, dc)) + 1j * rng.normal(size=(db, dc))
        else:
            g = 2 * f
        lhs, rhs = check_cpm_axiom(f, g, tol)
        bad += lhs != rhs
        agree_true += lhs and rhs
    return VerificationRecord(
        "discarding after f equals discarding after g iff f^dag f = g^dag g",
        float(bad),
        0.0,
        bad == 0,
        {"trials": trials, "both_true": int(agree_true), "counterexamples": int(bad)},
    )
