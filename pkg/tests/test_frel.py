import numpy as np
import pytest
from hypothesis import given

import oracles as O
from conftest import np_rngs, py_rngs
from procat import testing as TT
from procat.core import box, compose_par, compose_seq, dagger, identity, spider
from procat.frel import RelAssignment, evaluate_rel, is_function, relation
from procat.frobenius import copy_algebra_frel, xor_algebra_frel


def _delta_table(a):
    """x -> set of (y, z) related by the comultiplication."""
    t = a.delta.reshape(2, 2, 2)
    return {x: {(y, z) for y in range(2) for z in range(2) if t[y, z, x]} for x in range(2)}


def test_identity_relation():
    m = RelAssignment({"S": 3})
    assert np.array_equal(evaluate_rel(identity("S"), m), np.eye(3, dtype=bool))


def test_copy_table():
    assert _delta_table(copy_algebra_frel(2)) == {0: {(0, 0)}, 1: {(1, 1)}}


def test_xor_table():
    assert _delta_table(xor_algebra_frel()) == {0: {(0, 0), (1, 1)}, 1: {(0, 1), (1, 0)}}


def test_spider_nodes_use_the_algebra():
    m = RelAssignment({"S": 2}, {}, {"C": copy_algebra_frel(2, "S")})
    t = evaluate_rel(spider("C", "S", 1, 2), m)
    assert np.array_equal(t.reshape(4, 2), copy_algebra_frel(2).delta)


def test_is_function_examples():
    assert is_function(np.eye(3, dtype=bool))
    assert not is_function(np.zeros((2, 2), dtype=bool))
    mu = copy_algebra_frel(2).mu  # 2 x 4: only (0,0) and (1,1) are related
    assert not is_function(mu)
    with pytest.raises(ValueError):
        is_function(np.zeros((2, 2, 2), dtype=bool))


def test_relation_builder():
    r = relation([(0, 1), (1, 1)], 2, 2)
    assert r.tolist() == [[False, False], [True, True]]
    assert is_function(r)


@given(py_rngs, np_rngs)
def test_functoriality_and_converse(rng, nrng):
    a = TT.random_recipe(rng, 4, 4)
    b = TT.random_recipe(rng, 4, 4, dom=a.build().cod)
    x, y = a.build(), b.build()
    m = TT.random_frel_model(nrng)

    def mat(d):
        t = evaluate_rel(d, m)
        rows = int(np.prod([m.dims[o] for o in d.cod]))
        return t.reshape(rows, -1).astype(int)

    assert np.array_equal(mat(compose_seq(y, x)), (mat(y) @ mat(x)) > 0)
    assert np.array_equal(mat(compose_par(x, y)), np.kron(mat(x), mat(y)))
    assert np.array_equal(mat(dagger(x)), mat(x).T)


@given(py_rngs, np_rngs)
def test_agrees_with_reference_contraction(rng, nrng):
    d = TT.random_diagram(rng, 12, 5)
    m = TT.random_frel_model(nrng)
    spiders = {"Z": lambda n, k: O.diagonal_spider(2, n, k), "X": O.parity_spider}
    ref = O.evaluate(d, m.dims, m.generators, lambda fam, n, k: spiders[fam](n, k), boolean=True)
    assert np.array_equal(evaluate_rel(d, m), ref)


@given(np_rngs, py_rngs)
def test_functions_compose_to_functions(nrng, rng):
    # every generator a total function, so every composite is too
    maps = {}
    sizes = {"A": 2, "B": 3}
    gens = {"u": ("A", "B"), "v": ("B", "A"), "w": ("B", "B")}
    for name, (src, dst) in gens.items():
        img = nrng.integers(0, sizes[dst], size=sizes[src])
        maps[name] = relation(list(enumerate(img)), sizes[src], sizes[dst])
    m = RelAssignment(sizes, maps)
    d = box("u", "A", "B")
    for _ in range(rng.randint(1, 6)):
        name = rng.choice([n for n, (s, _) in gens.items() if s == d.cod[0]])
        d = compose_seq(box(name, *gens[name]), d)
    assert is_function(evaluate_rel(d, m))
