"""Classical structures: laws, spiders, copyables, complementarity, phases.

An algebra is stored by its four structure matrices (codomain rows):
``delta: d*d x d``, ``eps: 1 x d``, ``mu: d x d*d`` and ``unit: d x 1``.
Boolean matrices make it an algebra in FRel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tensor as T
from .tensor import BOOL, COMPLEX, dag, eye, kron, mm

FHILB = "fhilb"
FREL = "frel"

LAWS = ("coassoc", "cocomm", "counit", "assoc", "comm", "unit", "frobenius", "special", "dagger_match")


class AlgebraError(ValueError):
    pass


@dataclass(eq=False)
class FrobeniusAlgebraSpec:
    """A candidate classical structure on one carrier object.

    When ``mu`` or ``unit`` is omitted it is the dagger of ``delta`` or
    ``eps``.
    """

    carrier: str
    delta: np.ndarray
    eps: np.ndarray
    mu: np.ndarray | None = None
    unit: np.ndarray | None = None
    model: str = FHILB
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        dtype = bool if self.model == FREL else complex
        d = int(np.asarray(self.delta).shape[-1])
        self.delta = np.asarray(self.delta, dtype=dtype).reshape(d * d, d)
        self.eps = np.asarray(self.eps, dtype=dtype).reshape(1, d)
        self.mu = dag(self.delta) if self.mu is None else np.asarray(self.mu, dtype=dtype).reshape(d, d * d)
        self.unit = dag(self.eps) if self.unit is None else np.asarray(self.unit, dtype=dtype).reshape(d, 1)

    @property
    def dim(self) -> int:
        return self.delta.shape[1]

    @property
    def field(self) -> str:
        return BOOL if self.model == FREL else COMPLEX

    def spider(self, n: int, m: int) -> np.ndarray:
        """Matrix ``d^m x d^n`` of the spider with n inputs and m outputs."""
        key = (n, m)
        if key not in self._cache:
            self._cache[key] = spider(self, n, m)
        return self._cache[key]

    @classmethod
    def from_dict(cls, obj: dict) -> "FrobeniusAlgebraSpec":
        model = obj.get("model", FHILB)
        delta = T.tensor_from_dict(obj["delta"])
        eps = T.tensor_from_dict(obj["eps"])
        return cls(obj.get("carrier", "A"), delta, eps, model=model, name=obj.get("name", ""))

    def to_dict(self) -> dict:
        d = self.dim
        return {
            "carrier": self.carrier,
            "model": self.model,
            "delta": T.tensor_to_dict(self.delta.reshape(d, d, d)),
            "eps": T.tensor_to_dict(self.eps.reshape(d)),
        }


# -- spiders --------------------------------------------------------------------


def _mu_tree(a: FrobeniusAlgebraSpec, tree) -> np.ndarray:
    """Matrix of a binary multiplication tree; leaves are ``None``."""
    if tree is None:
        return eye(a.dim, a.field)
    left, right = tree
    return mm(a.mu, kron(_mu_tree(a, left), _mu_tree(a, right)))


def _leaves(tree) -> int:
    return 1 if tree is None else _leaves(tree[0]) + _leaves(tree[1])


def comb(n: int):
    """Left comb with ``n`` leaves (``None`` for n == 1)."""
    tree = None
    for _ in range(n - 1):
        tree = (tree, None)
    return tree


def binary_trees(n: int):
    """All binary trees with ``n >= 1`` leaves."""
    if n == 1:
        yield None
        return
    for k in range(1, n):
        for left in binary_trees(k):
            for right in binary_trees(n - k):
                yield (left, right)


def tree_spider(a: FrobeniusAlgebraSpec, n: int, m: int, mu_tree=None, delta_tree=None) -> np.ndarray:
    """Spider built as a multiplication tree followed by a comultiplication tree."""
    if n == 0 and m == 0:
        raise AlgebraError("the spider with no legs is undefined")
    if n == 0:
        merge = a.unit
    else:
        mu_tree = comb(n) if mu_tree is None else mu_tree
        if _leaves(mu_tree) != n:
            raise AlgebraError("multiplication tree has the wrong number of leaves")
        merge = _mu_tree(a, mu_tree)
    if m == 0:
        split = a.eps
    else:
        delta_tree = comb(m) if delta_tree is None else delta_tree
        if _leaves(delta_tree) != m:
            raise AlgebraError("comultiplication tree has the wrong number of leaves")
        split = _delta_tree(a, delta_tree)
    return mm(split, merge)


def _delta_tree(a: FrobeniusAlgebraSpec, tree) -> np.ndarray:
    if tree is None:
        return eye(a.dim, a.field)
    left, right = tree
    return mm(kron(_delta_tree(a, left), _delta_tree(a, right)), a.delta)


def spider(a: FrobeniusAlgebraSpec, n: int, m: int) -> np.ndarray:
    if n < 0 or m < 0:
        raise AlgebraError("spider arity must be nonnegative")
    return tree_spider(a, n, m)


# -- laws ---------------------------------------------------------------------------


@dataclass
class LawReport:
    passed: dict[str, bool]
    residuals: dict[str, float]

    @property
    def classical(self) -> bool:
        return all(self.passed.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.passed.items() if not v]

    def to_dict(self) -> dict:
        return {k: {"pass": self.passed[k], "residual": self.residuals[k]} for k in self.passed}


def check_laws(a: FrobeniusAlgebraSpec, tol: float = 1e-10) -> LawReport:
    """Evaluate every classical-structure law as a tensor equation."""
    d, f = a.dim, a.field
    one = eye(d, f)
    sw = T.swap_matrix(d, d, f)
    dl, ep, mu, u = a.delta, a.eps, a.mu, a.unit
    sides = {
        "coassoc": [mm(kron(dl, one), dl), mm(kron(one, dl), dl)],
        "cocomm": [mm(sw, dl), dl],
        "counit": [mm(kron(ep, one), dl), one, mm(kron(one, ep), dl)],
        "assoc": [mm(mu, kron(mu, one)), mm(mu, kron(one, mu))],
        "comm": [mm(mu, sw), mu],
        "unit": [mm(mu, kron(u, one)), one, mm(mu, kron(one, u))],
        "frobenius": [mm(kron(one, mu), kron(dl, one)), mm(dl, mu), mm(kron(mu, one), kron(one, dl))],
        "special": [mm(mu, dl), one],
        "dagger_match": [mu, dag(dl)],
    }
    passed, res = {}, {}
    for law, terms in sides.items():
        r = max(T.residual(terms[0], t) for t in terms[1:])
        if law == "dagger_match":
            r = max(r, T.residual(u, dag(ep)))
        res[law] = r
        passed[law] = r <= (0 if f == BOOL else tol)
    return LawReport(passed, res)


# -- bases ------------------------------------------------------------------------------


def basis_to_algebra(basis: Sequence[np.ndarray], carrier: str = "A", tol: float = 1e-10, name: str = "") -> FrobeniusAlgebraSpec:
    """The algebra whose comultiplication copies each vector of an orthogonal basis."""
    B = np.column_stack([np.asarray(b, dtype=complex).reshape(-1) for b in basis])
    d = B.shape[0]
    if B.shape[1] != d:
        raise AlgebraError(f"need {d} basis vectors, got {B.shape[1]}")
    norms = np.linalg.norm(B, axis=0)
    if np.any(norms <= tol):
        raise AlgebraError("basis vectors must be nonzero")
    G = B.conj().T @ B
    off = G - np.diag(np.diag(G))
    if np.max(np.abs(off), initial=0.0) > tol * max(1.0, float(norms.max()) ** 2):
        raise AlgebraError("basis vectors are not pairwise orthogonal")
    dual = np.linalg.inv(B)  # rows: the dual functionals
    delta = sum(np.outer(np.kron(B[:, i], B[:, i]), dual[i]) for i in range(d))
    eps = dual.sum(axis=0).reshape(1, d)
    mu = sum(np.outer(B[:, i], np.kron(dual[i], dual[i])) for i in range(d))
    unit = B.sum(axis=1).reshape(d, 1)
    return FrobeniusAlgebraSpec(carrier, delta, eps, mu, unit, model=FHILB, name=name)


def z_algebra(d: int = 2, carrier: str = "A") -> FrobeniusAlgebraSpec:
    return basis_to_algebra(list(np.eye(d)), carrier, name="Z")


def x_algebra(carrier: str = "A") -> FrobeniusAlgebraSpec:
    s = 1 / np.sqrt(2)
    return basis_to_algebra([np.array([s, s]), np.array([s, -s])], carrier, name="X")


def y_algebra(carrier: str = "A") -> FrobeniusAlgebraSpec:
    s = 1 / np.sqrt(2)
    return basis_to_algebra([np.array([s, 1j * s]), np.array([s, -1j * s])], carrier, name="Y")


def copyables(a: FrobeniusAlgebraSpec, tol: float = 1e-7, rng=None, retries: int = 5) -> list[np.ndarray]:
    """States copied by the comultiplication.

    In FHilb the multiplication by a random element is diagonalised; its
    eigenvectors, rescaled so that ``delta(psi) = psi (x) psi``, are the
    copyables.  In FRel every nonempty subset of the carrier is tried.
    """
    if a.model == FREL:
        return _copyables_frel(a)
    rng = np.random.default_rng(rng)
    d = a.dim
    for _ in range(retries):
        x = rng.normal(size=d) + 1j * rng.normal(size=d)
        m_x = a.mu @ np.kron(x.reshape(d, 1), np.eye(d))
        vals, vecs = np.linalg.eig(m_x)
        gaps = [abs(vals[i] - vals[j]) for i in range(d) for j in range(i + 1, d)]
        if gaps and min(gaps) < 1e-6 * max(1.0, float(np.abs(vals).max())):
            continue
        out = []
        for k in range(d):
            v = vecs[:, k]
            vv = np.kron(v, v)
            lam = np.vdot(vv, a.delta @ v) / np.vdot(vv, vv)
            psi = lam * v
            if np.max(np.abs(a.delta @ psi - np.kron(psi, psi))) > tol:
                break
            out.append(psi)
        else:
            return sorted(out, key=_basis_key)
    raise AlgebraError("could not separate copyable states; is this a classical structure?")


def _basis_key(v: np.ndarray):
    k = int(np.argmax(np.abs(v) > 1e-9 * np.abs(v).max()))
    return (k, round(float(np.angle(v[-1] / v[k]) if abs(v[-1]) > 1e-9 else 0.0), 6))


def _copyables_frel(a: FrobeniusAlgebraSpec) -> list[np.ndarray]:
    d = a.dim
    out = []
    for mask in range(1, 2**d):
        s = np.array([(mask >> i) & 1 for i in range(d)], dtype=bool).reshape(d, 1)
        if np.array_equal(mm(a.delta, s), kron(s, s)):
            out.append(s.reshape(d))
    return out


# -- decoherence -------------------------------------------------------------------------


def decoherence(a: FrobeniusAlgebraSpec):
    """Copy, then feed one copy to the environment."""
    from .cpm import double_matrix

    if a.model != FHILB:
        raise AlgebraError("decoherence is defined for FHilb algebras")
    out = double_matrix(a.delta, (a.dim, a.dim), (a.dim,), env=[1])
    return out


# -- complementarity ----------------------------------------------------------


def complementary(a1: FrobeniusAlgebraSpec, a2: FrobeniusAlgebraSpec, tol: float = 1e-9) -> bool:
    """Hopf-style test: multiplying after comultiplying disconnects.

    ``mu_1 . delta_2`` must equal ``unit_1 . eps_2`` up to one nonzero scalar.
    The dualizer is taken to be the identity, which is only valid when both
    structures have real coefficients.
    """
    if a1.dim != a2.dim or a1.model != a2.model:
        raise AlgebraError("complementarity needs two algebras on one carrier in one model")
    connected = mm(a1.mu, a2.delta)
    disconnected = mm(a1.unit, a2.eps)
    if a1.model == FREL:
        return bool(np.array_equal(connected, disconnected))
    # both the tensors and the copied basis (up to a phase per vector) must
    # be real; a real delta alone is not enough, the Y structure has one
    for a in (a1, a2):
        for m in (a.delta, a.eps, a.mu, a.unit):
            if np.max(np.abs(m.imag), initial=0.0) > tol:
                raise AlgebraError("complex coefficients need a nontrivial dualizer; not supported")
        for v in copyables(a):
            v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
            if np.max(np.abs(v.imag), initial=0.0) > max(tol, 1e-7):
                raise AlgebraError("complex coefficients need a nontrivial dualizer; not supported")
    nc, nd = np.linalg.norm(connected), np.linalg.norm(disconnected)
    if nc <= tol or nd <= tol:
        return False
    u, v = connected / nc, disconnected / nd
    c = np.vdot(v, u)
    return bool(abs(c) > tol and np.max(np.abs(u - c * v)) <= tol)


# -- phase groups -------------------------------------------------------------------


@dataclass
class GroupTable:
    elements: list
    table: list[list[int]]
    identity: int

    def order_of(self, i: int) -> int:
        k, x = 1, i
        while x != self.identity:
            x = self.table[x][i]
            k += 1
            if k > len(self.elements):
                raise AlgebraError("element has no finite order")
        return k

    @property
    def orders(self) -> list[int]:
        return [self.order_of(i) for i in range(len(self.elements))]

    def verify(self) -> None:
        n = len(self.elements)
        t = self.table
        e = self.identity
        for x in range(n):
            if t[e][x] != x or t[x][e] != x:
                raise AlgebraError(f"identity law fails at element {x}")
            if not any(t[x][y] == e and t[y][x] == e for y in range(n)):
                raise AlgebraError(f"element {x} has no inverse")
        for x, y, z in itertools.product(range(n), repeat=3):
            if t[t[x][y]][z] != t[x][t[y][z]]:
                raise AlgebraError(f"associativity fails at {(x, y, z)}")

    def isomorphism_class(self) -> str:
        n = len(self.elements)
        orders = self.orders
        abelian = all(self.table[x][y] == self.table[y][x] for x in range(n) for y in range(n))
        if n in orders:
            return f"cyclic-{n}"
        if n == 4 and sorted(orders) == [1, 2, 2, 2]:
            return "klein-4"
        return f"{'abelian' if abelian else 'group'}-{n}"

    def to_dict(self) -> dict:
        return {
            "order": len(self.elements),
            "identity": self.identity,
            "table": self.table,
            "element_orders": self.orders,
            "class": self.isomorphism_class(),
        }


def all_relational_states(d: int) -> list[np.ndarray]:
    return [np.array([(mask >> i) & 1 for i in range(d)], dtype=bool) for mask in range(2**d)]


def _is_phase(a: FrobeniusAlgebraSpec, psi: np.ndarray, tol: float) -> bool:
    d = a.dim
    m = mm(a.mu, kron(psi.reshape(d, 1), eye(d, a.field)))
    if a.model == FREL:
        return bool(np.all(m.sum(axis=0) == 1) and np.all(m.sum(axis=1) == 1))
    g = m.conj().T @ m
    c = np.trace(g).real / d
    if c <= tol:
        return False
    return bool(np.max(np.abs(g - c * np.eye(d)), initial=0.0) <= tol * max(1.0, c))


def phase_states(a: FrobeniusAlgebraSpec, universe: Sequence[np.ndarray] | None = None, tol: float = 1e-9) -> list[np.ndarray]:
    """States of the universe whose multiplication map is unitary (a bijection in FRel)."""
    if universe is None:
        if a.model != FREL:
            raise AlgebraError("an FHilb phase universe must be supplied explicitly")
        universe = all_relational_states(a.dim)
    dtype = bool if a.model == FREL else complex
    return [np.asarray(s, dtype=dtype).reshape(a.dim) for s in universe if _is_phase(a, np.asarray(s, dtype=dtype), tol)]


def _same_state(a: FrobeniusAlgebraSpec, x: np.ndarray, y: np.ndarray, tol: float) -> bool:
    if a.model == FREL:
        return bool(np.array_equal(x, y))
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx <= tol or ny <= tol:
        return False
    return bool(np.max(np.abs(x / nx - y / ny)) <= tol)


def phase_group(a: FrobeniusAlgebraSpec, universe: Sequence[np.ndarray] | None = None, tol: float = 1e-9) -> GroupTable:
    """Phases under the product ``mu(psi (x) phi)``, checked to form a group."""
    phases = phase_states(a, universe, tol)
    if not phases:
        raise AlgebraError("the universe contains no phases")
    d = a.dim
    table = []
    missing = []
    for x in phases:
        row = []
        for y in phases:
            z = mm(a.mu, kron(x.reshape(d, 1), y.reshape(d, 1))).reshape(d)
            k = next((i for i, p in enumerate(phases) if _same_state(a, z, p, tol)), None)
            if k is None:
                missing.append((x, y, z))
                k = -1
            row.append(k)
        table.append(row)
    if missing:
        x, y, z = missing[0]
        raise AlgebraError(
            f"universe not closed under multiplication: {len(missing)} products missing, "
            f"e.g. {x.tolist()} * {y.tolist()} = {np.asarray(z).tolist()}"
        )
    unit = a.unit.reshape(d)
    ident = next((i for i, p in enumerate(phases) if _same_state(a, unit, p, tol)), None)
    if ident is None:
        ident = next((i for i in range(len(phases)) if all(table[i][j] == j for j in range(len(phases)))), None)
    if ident is None:
        raise AlgebraError("no identity phase in the universe")
    g = GroupTable(phases, table, ident)
    g.verify()
    return g


def group_algebra_frel(table: Sequence[Sequence[int]], carrier: str = "A") -> FrobeniusAlgebraSpec:
    """FRel classical structure of a finite abelian group given by its table."""
    n = len(table)
    mu = np.zeros((n, n * n), dtype=bool)
    for x in range(n):
        for y in range(n):
            mu[table[x][y], x * n + y] = True
    e = next(x for x in range(n) if all(table[x][y] == y for y in range(n)))
    unit = np.zeros((n, 1), dtype=bool)
    unit[e] = True
    return FrobeniusAlgebraSpec(carrier, mu.T, unit.T, model=FREL)


def cyclic_table(n: int) -> list[list[int]]:
    return [[(x + y) % n for y in range(n)] for x in range(n)]


def klein_table() -> list[list[int]]:
    return [[x ^ y for y in range(4)] for x in range(4)]


def copy_algebra_frel(n: int = 2, carrier: str = "A") -> FrobeniusAlgebraSpec:
    """The diagonal copying relation ``x -> (x, x)``."""
    delta = np.zeros((n * n, n), dtype=bool)
    for x in range(n):
        delta[x * n + x, x] = True
    return FrobeniusAlgebraSpec(carrier, delta, np.ones((1, n), dtype=bool), model=FREL)


def xor_algebra_frel(carrier: str = "A") -> FrobeniusAlgebraSpec:
    """Comultiplication ``x -> {(a, b) : a xor b = x}`` on {0, 1}."""
    return group_algebra_frel(cyclic_table(2), carrier)


def standard_phase_universe(a: FrobeniusAlgebraSpec | None = None, k: int = 4) -> list[np.ndarray]:
    """``|0> + w^j |1>`` for the k-th roots of unity ``w`` (stabilizer phases for k = 4)."""
    out = []
    for j in range(k):
        w = np.exp(2j * np.pi * j / k)
        # clean float noise so i, -1 and -i are exact
        out.append(np.array([1, complex(round(w.real, 14), round(w.imag, 14))]))
    return out
