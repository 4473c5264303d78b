import numpy as np
import pytest
from hypothesis import given

import oracles as O
from conftest import np_rngs
from procat import tensor as T
from procat.core import DiagramError, box, compose_par, compose_seq, cup, identity, spider
from procat.core import discard as discard_node
from procat.cpm import (
    CPMap,
    check_cpm_axiom,
    discard,
    double,
    double_matrix,
    evaluate_cp,
    is_completely_positive,
    is_isometry,
    is_trace_preserving,
    kraus_map,
    maximally_mixed,
    pure,
    purification_residual,
    transpose_map,
)
from procat.fhilb import ModelAssignment
from procat.frobenius import decoherence, z_algebra
from procat.processes import random_isometry


def random_matrix(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_matrix(rng, d, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d):
    a = random_matrix(rng, d, d)
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_discard_is_the_trace():
    assert discard((2,)).apply(np.diag([0.3, 0.7]))[0, 0] == pytest.approx(1.0)


def test_discard_is_monoidal():
    m = ModelAssignment({"A": 2, "B": 3})
    both = discard("A*B", m)
    assert T.residual(both.superop, discard("A", m).tensor(discard("B", m)).superop) <= 1e-15


def test_discard_of_unit_is_one():
    d = discard((), {})
    assert d.superop.shape == (1, 1) and d.superop[0, 0] == 1


def test_double_unitary_conjugates():
    rng = np.random.default_rng(1)
    u, rho = random_unitary(rng, 3), random_density(rng, 3)
    m = ModelAssignment({"A": 3}, {"u": u})
    out = double(box("u", "A", "A"), (), m).apply(rho)
    assert T.residual(out, u @ rho @ u.conj().T) <= 1e-12


def test_double_copy_with_environment_is_decoherence():
    m = ModelAssignment({"Q": 2}, algebras={"Z": z_algebra(2, "Q")})
    dec = double(spider("Z", "Q", 1, 2), [1], m)
    assert T.residual(dec.superop, decoherence(z_algebra(2)).superop) <= 1e-12
    rho = random_density(np.random.default_rng(2), 2)
    assert T.residual(dec.apply(rho), np.diag(np.diag(rho))) <= 1e-12


def test_double_cup_is_bell_projector():
    rho = double(cup("Q"), (), ModelAssignment({"Q": 2})).apply(np.ones((1, 1)))
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[0, 3] = expected[3, 0] = expected[3, 3] = 1
    assert np.array_equal(rho, expected)


def test_double_rejects_bad_environment():
    m = ModelAssignment({"A": 2}, {"f": np.eye(2)})
    with pytest.raises(DiagramError):
        double(box("f", "A", "A"), [1], m)


def test_axiom_examples():
    rng = np.random.default_rng(3)
    f = random_matrix(rng, 2, 2)
    assert check_cpm_axiom(f, f) == (True, True)
    v = random_isometry(rng, 3, 2)
    assert check_cpm_axiom(f, v @ f) == (True, True)
    assert check_cpm_axiom(np.eye(2), 2 * np.eye(2)) == (False, False)
    with pytest.raises(DiagramError):
        check_cpm_axiom(np.eye(2), np.eye(3))


@given(np_rngs)
def test_axiom_sides_agree(rng):
    c, a, b = (int(x) for x in rng.integers(1, 4, size=3))
    f = random_matrix(rng, a, c)
    kind = int(rng.integers(3))
    if kind == 0 and b >= a:
        g = random_isometry(rng, b, a) @ f
    elif kind == 1:
        g = f * np.exp(1j * rng.uniform(0, 2 * np.pi))
        b = a
    else:
        g = random_matrix(rng, b, c)
    lhs, rhs = check_cpm_axiom(f, g)
    assert lhs == rhs


def test_isometry_examples():
    rng = np.random.default_rng(4)
    assert is_isometry(random_unitary(rng, 3))
    assert is_isometry(np.array([[1], [0]]))
    assert is_isometry(z_algebra(2).delta)
    assert not is_isometry(2 * np.eye(2))
    assert not is_isometry(z_algebra(2).mu)


@given(np_rngs)
def test_doubles_are_completely_positive(rng):
    a, b = (int(x) for x in rng.integers(1, 4, size=2))
    t = pure(random_matrix(rng, b, a))
    assert is_completely_positive(t)


def test_transpose_is_not_completely_positive():
    t = transpose_map(2)
    rho = random_density(np.random.default_rng(5), 2)
    assert T.residual(t.apply(rho), rho.T) <= 1e-15
    assert not is_completely_positive(t)
    eigs = np.linalg.eigvalsh(t.choi())
    assert np.allclose(eigs, O.choi_eigs_transpose(2))
    assert eigs.min() == pytest.approx(-1)


def test_convex_mix_is_completely_positive():
    rng = np.random.default_rng(6)
    mix = 0.3 * pure(random_unitary(rng, 2)) + 0.7 * pure(random_unitary(rng, 2))
    assert is_completely_positive(mix) and is_trace_preserving(mix)
    assert purification_residual(mix) <= 1e-12


def test_choi_of_identity_is_the_bell_projector():
    j = pure(np.eye(2)).choi()
    assert np.array_equal(j, np.outer([1, 0, 0, 1], [1, 0, 0, 1]))


@given(np_rngs)
def test_every_constructed_map_carries_a_purification(rng):
    a, b = (int(x) for x in rng.integers(1, 4, size=2))
    f = random_matrix(rng, b * 2, a)
    t = double_matrix(f, (b, 2), (a,), env=[1])
    g = pure(random_matrix(rng, a, b))
    maps = [
        t,
        g.after(t),
        t.tensor(g),
        t.adjoint(),
        t + 0.5 * t,
        kraus_map([random_matrix(rng, b, a) for _ in range(3)]),
        discard((a, b)),
        maximally_mixed((a,)),
    ]
    for x in maps:
        assert purification_residual(x) <= 1e-9 * max(1.0, np.abs(x.superop).max())


@given(np_rngs)
def test_doubling_is_monoidal_and_functorial(rng):
    da, db, dc = (int(x) for x in rng.integers(1, 4, size=3))
    f, g, h = random_matrix(rng, db, da), random_matrix(rng, dc, db), random_matrix(rng, da, dc)
    m = ModelAssignment({"A": da, "B": db, "C": dc}, {"f": f, "g": g, "h": h})
    bf, bg, bh = (box(n, *t) for n, t in (("f", ("A", "B")), ("g", ("B", "C")), ("h", ("C", "A"))))
    par = double(compose_par(bf, bh), (), m)
    assert T.residual(par.superop, double(bf, (), m).tensor(double(bh, (), m)).superop) <= 1e-9
    seq = double(compose_seq(bg, bf), (), m)
    assert T.residual(seq.superop, double(bg, (), m).after(double(bf, (), m)).superop) <= 1e-9


@given(np_rngs)
def test_discard_is_the_unique_deterministic_effect(rng):
    d = int(rng.integers(1, 5))
    states = [random_density(rng, d) for _ in range(d * d + 2)]
    rows = np.array([s.reshape(-1) for s in states])
    # the effect e with e(rho) = tr(rho) on a spanning set is forced
    e, *_ = np.linalg.lstsq(rows, np.ones(len(states), dtype=complex), rcond=None)
    assert np.linalg.matrix_rank(rows) == d * d
    assert T.residual(e.reshape(1, -1), discard((d,)).superop) <= 1e-9


def test_evaluate_with_discard_traces_out():
    rng = np.random.default_rng(7)
    f = random_matrix(rng, 2 * 3, 2)
    m = ModelAssignment({"Q": 2, "P": 3}, {"f": f})
    d = compose_seq(compose_par(identity("Q"), discard_node("P")), box("f", "Q", "Q*P"))
    t = evaluate_cp(d, m)
    rho = random_density(rng, 2)
    full = f @ rho @ f.conj().T
    expected = np.einsum("apbp->ab", full.reshape(2, 3, 2, 3))
    assert T.residual(t.apply(rho), expected) <= 1e-12
    assert purification_residual(t) <= 1e-12
    assert t.to_dict()["env"] == [1]


def test_cpmap_shape_checked():
    with pytest.raises(ValueError):
        CPMap(np.zeros((4, 3)), (2,), (2,))
