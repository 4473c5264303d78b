"""Dense tensor plumbing shared by the FHilb and FRel models.

Index convention everywhere: a morphism ``A -> B`` is stored with the axes
of ``B`` first and then those of ``A``; entries are row-major with the first
factor most significant.  Boolean tensors use the (or, and) semiring.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

COMPLEX = "complex"
BOOL = "bool"


def _field_of(a: np.ndarray) -> str:
    return BOOL if a.dtype == bool else COMPLEX


def tensordot(a: np.ndarray, b: np.ndarray, axes) -> np.ndarray:
    if a.dtype == bool:
        out = np.tensordot(a.astype(np.int64), b.astype(np.int64), axes=axes)
        return out > 0
    return np.tensordot(a, b, axes=axes)


# -- matrix-level helpers ---------------------------------------------------


def mm(*ms: np.ndarray) -> np.ndarray:
    """Matrix product ``ms[0] @ ms[1] @ ...`` in the matching semiring."""
    out = ms[0]
    for m in ms[1:]:
        if out.dtype == bool:
            out = (out.astype(np.int64) @ m.astype(np.int64)) > 0
        else:
            out = out @ m
    return out


def kron(*ms: np.ndarray) -> np.ndarray:
    out = ms[0]
    for m in ms[1:]:
        if out.dtype == bool:
            out = np.kron(out.astype(np.int64), m.astype(np.int64)) > 0
        else:
            out = np.kron(out, m)
    return out


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose; relational converse for booleans."""
    return m.T.copy() if m.dtype == bool else m.conj().T


def eye(d: int, field: str = COMPLEX) -> np.ndarray:
    return np.eye(d, dtype=bool) if field == BOOL else np.eye(d, dtype=complex)


def swap_matrix(da: int, db: int, field: str = COMPLEX) -> np.ndarray:
    """Matrix of the crossing ``A*B -> B*A``."""
    s = np.zeros((db * da, da * db), dtype=bool if field == BOOL else complex)
    for i in range(da):
        for j in range(db):
            s[j * da + i, i * db + j] = 1
    return s


def as_matrix(t: np.ndarray, n_cod: int) -> np.ndarray:
    """View a morphism tensor with ``n_cod`` codomain axes as a matrix."""
    rows = int(np.prod(t.shape[:n_cod], dtype=int))
    cols = int(np.prod(t.shape[n_cod:], dtype=int))
    return t.reshape(rows, cols)


def residual(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm difference; the count of differing entries for booleans."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.dtype == bool or b.dtype == bool:
        return float(np.count_nonzero(a.astype(bool) != b.astype(bool)))
    return float(np.max(np.abs(a - b), initial=0.0))


def equal(t1: np.ndarray, t2: np.ndarray, tol: float = 1e-12) -> bool:
    t1, t2 = np.asarray(t1), np.asarray(t2)
    if t1.shape != t2.shape:
        raise ValueError(f"dims mismatch {t1.shape} vs {t2.shape}")
    return residual(t1, t2) <= tol


def equal_upto_phase(t1: np.ndarray, t2: np.ndarray, tol: float = 1e-12) -> bool:
    """Equality up to a global unit complex factor.

    The candidate factor is read off the largest-magnitude entry of ``t2``.
    """
    t1, t2 = np.asarray(t1, dtype=complex), np.asarray(t2, dtype=complex)
    if t1.shape != t2.shape:
        raise ValueError(f"dims mismatch {t1.shape} vs {t2.shape}")
    k = np.argmax(np.abs(t2))
    if abs(t2.flat[k]) <= tol:
        return bool(np.max(np.abs(t1), initial=0.0) <= tol)
    ratio = t1.flat[k] / t2.flat[k]
    if abs(ratio) == 0:
        return False
    c = ratio / abs(ratio)
    return bool(np.max(np.abs(t1 - c * t2), initial=0.0) <= tol)


# -- tensor-network contraction ----------------------------------------------


def contract(
    tensors: Sequence[tuple[np.ndarray, Sequence[int]]],
    output: Sequence[int],
    field: str = COMPLEX,
) -> np.ndarray:
    """Contract a network of labelled tensors.

    Each label appears on at most two axes overall; labels in ``output`` stay
    open and appear exactly once.  Pairs are contracted greedily, choosing the
    pair whose result is smallest.
    """
    work: list[tuple[np.ndarray, list[int]]] = []
    for arr, labels in tensors:
        arr, labels = _self_trace(np.asarray(arr), list(labels))
        work.append((arr, labels))
    dims: dict[int, int] = {}
    for arr, labels in work:
        for ax, lab in enumerate(labels):
            dims[lab] = arr.shape[ax]

    def result_size(la, lb):
        shared = set(la) & set(lb)
        size = 1
        for lab in la + lb:
            if lab not in shared:
                size *= dims[lab]
        return size, bool(shared)

    if not work:
        one = np.ones((), dtype=bool if field == BOOL else complex)
        work.append((one, []))
    while len(work) > 1:
        best = None
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                size, shares = result_size(work[i][1], work[j][1])
                key = (not shares, size, i, j)
                if best is None or key < best:
                    best = key
        _, _, i, j = best
        (a, la), (b, lb) = work[i], work[j]
        shared = [lab for lab in la if lab in lb]
        ax_a = [la.index(lab) for lab in shared]
        ax_b = [lb.index(lab) for lab in shared]
        c = tensordot(a, b, (ax_a, ax_b))
        lc = [lab for lab in la if lab not in shared] + [lab for lab in lb if lab not in shared]
        work = [w for k, w in enumerate(work) if k not in (i, j)] + [(c, lc)]
    arr, labels = work[0]
    if sorted(labels) != sorted(output):
        raise RuntimeError(f"open labels {labels} do not match requested {output}")
    perm = [labels.index(lab) for lab in output]
    arr = np.transpose(arr, perm) if perm else arr
    if field == BOOL:
        return arr.astype(bool)
    return arr.astype(complex)


def _self_trace(arr: np.ndarray, labels: list[int]):
    while True:
        dup = next((lab for lab in labels if labels.count(lab) > 1), None)
        if dup is None:
            return arr, labels
        i = labels.index(dup)
        j = labels.index(dup, i + 1)
        if arr.dtype == bool:
            arr = np.trace(arr.astype(np.int64), axis1=i, axis2=j) > 0
        else:
            arr = np.trace(arr, axis1=i, axis2=j)
        labels = [lab for k, lab in enumerate(labels) if k not in (i, j)]


# -- JSON ---------------------------------------------------------------------


def _num(x: float):
    x = float(x)
    if x == 0:
        return 0
    if x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def tensor_to_dict(t: np.ndarray) -> dict:
    t = np.asarray(t)
    if t.dtype == bool:
        entries = [int(v) for v in t.reshape(-1)]
        return {"dims": list(t.shape), "field": BOOL, "entries": entries}
    flat = np.asarray(t, dtype=complex).reshape(-1)
    entries = [[_num(v.real), _num(v.imag)] for v in flat]
    return {"dims": list(t.shape), "field": COMPLEX, "entries": entries}


def tensor_to_json(t: np.ndarray) -> str:
    return json.dumps(tensor_to_dict(t))


def tensor_from_dict(obj: dict) -> np.ndarray:
    dims = [int(d) for d in obj["dims"]]
    field = obj.get("field", COMPLEX)
    entries = obj["entries"]
    size = int(np.prod(dims, dtype=int))
    if len(entries) != size:
        raise ValueError(f"expected {size} entries for dims {dims}, got {len(entries)}")
    if field == BOOL:
        vals = []
        for e in entries:
            if e not in (0, 1, True, False):
                raise ValueError(f"boolean entry must be 0 or 1, got {e!r}")
            vals.append(bool(e))
        return np.array(vals, dtype=bool).reshape(dims)
    if field != COMPLEX:
        raise ValueError(f"unknown field {field!r}")
    vals = []
    for e in entries:
        if isinstance(e, (list, tuple)):
            re, im = e
            vals.append(complex(float(re), float(im)))
        else:
            vals.append(complex(float(e)))
    return np.array(vals, dtype=complex).reshape(dims)


def tensor_from_json(text: str) -> np.ndarray:
    return tensor_from_dict(json.loads(text))
