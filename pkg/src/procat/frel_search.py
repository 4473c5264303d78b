"""Exhaustive search for classical structures in FRel on small carriers.

Candidates are encoded as integers: bit ``a*n*n + b*n + c`` says the
multiplication relates ``(a, b)`` to ``c``; bit ``n**3 + x`` says the unit
contains ``x``.  Comultiplication and counit are the converses.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

import numpy as np

from .frobenius import FREL, FrobeniusAlgebraSpec

MAX_CARRIER = 3


def n_bits(n: int) -> int:
    return n**3 + n


def decode(index: int, n: int) -> FrobeniusAlgebraSpec:
    mu = np.zeros((n, n * n), dtype=bool)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if (index >> (a * n * n + b * n + c)) & 1:
                    mu[c, a * n + b] = True
    unit = np.array([(index >> (n**3 + x)) & 1 for x in range(n)], dtype=bool).reshape(n, 1)
    return FrobeniusAlgebraSpec("A", mu.T, unit.T, model=FREL)


def encode(a: FrobeniusAlgebraSpec) -> int:
    n = a.dim
    index = 0
    for a_ in range(n):
        for b in range(n):
            for c in range(n):
                if a.mu[c, a_ * n + b]:
                    index |= 1 << (a_ * n * n + b * n + c)
    for x in range(n):
        if a.unit[x, 0]:
            index |= 1 << (n**3 + x)
    return index


# -- pruned search --------------------------------------------------------------------


def _check_full(mu: dict, n: int) -> bool:
    """Associativity, Frobenius and speciality on a commutative unital table."""
    full = (1 << n) - 1
    X = range(n)

    def m(s: int, t: int) -> int:
        out = 0
        for a in X:
            if (s >> a) & 1:
                for b in X:
                    if (t >> b) & 1:
                        out |= mu[a, b]
        return out

    for a in X:
        for b in X:
            for c in X:
                if m(mu[a, b], 1 << c) != m(1 << a, mu[b, c]):
                    return False
    # special: each output y is reached only from pairs whose image is exactly {y}
    for y in X:
        reach = 0
        for a in X:
            for b in X:
                if (mu[a, b] >> y) & 1:
                    reach |= mu[a, b]
        if reach != 1 << y:
            return False
    # Frobenius: delta . mu == (1 (x) mu) . (delta (x) 1), both as relations (a,b) -> (c,d)
    for a in X:
        for b in X:
            for c in X:
                for d in X:
                    lhs = bool(mu[a, b] & mu[c, d])
                    rhs = any((mu[c, p] >> a) & 1 and (mu[p, b] >> d) & 1 for p in X)
                    if lhs != rhs:
                        return False
    _ = full
    return True


def _search_unit(n: int, u: int) -> list[int]:
    pairs = [(a, b) for a in range(n) for b in range(a, n)]
    index_of = {p: i for i, p in enumerate(pairs)}
    # unit law for x becomes checkable once every pair (e, x), e in u, is assigned
    ready: dict[int, list[int]] = {}
    for x in range(n):
        needed = [index_of[tuple(sorted((e, x)))] for e in range(n) if (u >> e) & 1]
        ready.setdefault(max(needed), []).append(x)
    results = []
    values = [0] * len(pairs)

    def table() -> dict:
        mu = {}
        for (a, b), v in zip(pairs, values):
            mu[a, b] = mu[b, a] = v
        return mu

    def unit_ok(x: int) -> bool:
        acc = 0
        for e in range(n):
            if (u >> e) & 1:
                a, b = sorted((e, x))
                acc |= values[index_of[a, b]]
        return acc == 1 << x

    def rec(i: int):
        if i == len(pairs):
            mu = table()
            if _check_full(mu, n):
                results.append(_encode_table(mu, u, n))
            return
        for v in range(1 << n):
            values[i] = v
            if all(unit_ok(x) for x in ready.get(i, ())):
                rec(i + 1)
        values[i] = 0

    rec(0)
    return results


def _encode_table(mu: dict, u: int, n: int) -> int:
    index = 0
    for (a, b), v in mu.items():
        for c in range(n):
            if (v >> c) & 1:
                index |= 1 << (a * n * n + b * n + c)
    return index | (u << n**3)


def enumerate_classical_structures_frel(n: int, threads: int = 1) -> list[FrobeniusAlgebraSpec]:
    """All classical structures on an n-element set, sorted by encoding.

    Commutativity is imposed by construction and the unit law is checked as
    soon as the entries it mentions are fixed.
    """
    return [decode(i, n) for i in enumerate_indices(n, threads)]


def enumerate_indices(n: int, threads: int = 1) -> list[int]:
    if not 1 <= n <= MAX_CARRIER:
        raise ValueError(f"carrier size must be in 1..{MAX_CARRIER}, got {n}")
    units = range(1, 1 << n)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        chunks = list(pool.map(lambda u: _search_unit(n, u), units))
    return sorted(i for chunk in chunks for i in chunk)


# -- independent oracle ------------------------------------------------------------


def _batch_bits(idx: np.ndarray, n: int):
    shifts = np.arange(n_bits(n), dtype=np.int64)
    bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
    mu = bits[:, : n**3].reshape(-1, n, n, n)
    u = bits[:, n**3:]
    return mu, u


def oracle_filter(idx: np.ndarray, n: int) -> np.ndarray:
    """Indices among ``idx`` satisfying every law, each tested on every candidate."""
    idx = np.asarray(idx, dtype=np.int64)
    mu, u = _batch_bits(idx, n)
    mu = mu.astype(np.float32)
    u = u.astype(np.float32)
    z, nn = len(idx), n * n
    eye = np.eye(n, dtype=bool)[None]

    def bmm(x, y):
        return np.matmul(x, y) > 0

    # mu[z, a, b, c]: (a, b) is related to c
    rows = mu.reshape(z, nn, n)  # (a b) x c
    ok = np.ones(z, dtype=bool)
    left = bmm(u[:, None, :], mu.reshape(z, n, n * n)).reshape(z, n, n)  # sum_e u_e mu[e, x, y]
    right = bmm(u[:, None, :], mu.transpose(0, 2, 1, 3).reshape(z, n, nn)).reshape(z, n, n)
    ok &= np.all(left == eye, axis=(1, 2)) & np.all(right == eye, axis=(1, 2))
    ok &= np.all(mu == mu.transpose(0, 2, 1, 3), axis=(1, 2, 3))
    special = bmm(rows.transpose(0, 2, 1), rows)  # sum_ab mu[a,b,y] mu[a,b,w]
    ok &= np.all(special == eye, axis=(1, 2))
    # ((a b) c) -> y  versus  (a (b c)) -> y
    assoc_l = bmm(rows, mu.reshape(z, n, n * n)).reshape(z, n, n, n, n)
    # for each a: (b c) -> x, then (a, x) -> y
    assoc_r = bmm(rows[:, None], mu).reshape(z, n, n, n, n)
    ok &= np.all(assoc_l == assoc_r, axis=(1, 2, 3, 4))
    frob_mid = bmm(rows, rows.transpose(0, 2, 1)).reshape(z, n, n, n, n)  # (a b) -> x -> (c d)
    # frob_l[a, b, c, d] = exists p: mu[c, p, a] and mu[p, b, d]
    cpa = mu.transpose(0, 3, 1, 2)  # a, c, p
    frob_l = bmm(cpa.reshape(z, nn, n), mu.reshape(z, n, nn)).reshape(z, n, n, n, n).transpose(0, 1, 3, 2, 4)
    # frob_r[a, b, c, d] = exists p: mu[p, d, b] and mu[a, p, c]
    apc = mu.transpose(0, 1, 3, 2)  # a, c, p
    pdb = mu.transpose(0, 1, 3, 2)  # p, b, d
    frob_r = bmm(apc.reshape(z, nn, n), pdb.reshape(z, n, nn)).reshape(z, n, n, n, n).transpose(0, 1, 3, 2, 4)
    ok &= np.all(frob_mid == frob_l, axis=(1, 2, 3, 4)) & np.all(frob_mid == frob_r, axis=(1, 2, 3, 4))
    return idx[ok]


def oracle_indices(n: int, idx: Iterable[int] | np.ndarray | None = None, chunk: int = 1 << 16, threads: int = 1) -> list[int]:
    """Brute-force filter over all candidates (or the given ones)."""
    if idx is None:
        idx = np.arange(1 << n_bits(n), dtype=np.int64)
    idx = np.asarray(idx, dtype=np.int64)
    parts = [idx[i: i + chunk] for i in range(0, len(idx), chunk)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        found = list(pool.map(lambda p: oracle_filter(p, n), parts))
    return sorted(int(x) for f in found for x in f)


def sample_slice(n: int, fraction: float = 0.01, seed: int = 0, block_bits: int = 16) -> np.ndarray:
    """A seeded random selection of whole index blocks covering ``fraction`` of the space."""
    total_bits = n_bits(n)
    block_bits = min(block_bits, total_bits)
    n_blocks = 1 << (total_bits - block_bits)
    k = max(1, int(round(fraction * n_blocks)))
    rng = np.random.default_rng(seed)
    blocks = np.sort(rng.choice(n_blocks, size=k, replace=False))
    base = np.arange(1 << block_bits, dtype=np.int64)
    return np.concatenate([(int(bk) << block_bits) + base for bk in blocks])
