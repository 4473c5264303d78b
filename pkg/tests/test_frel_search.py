import itertools

import numpy as np
import pytest

import oracles as O
from procat import frel_search as S
from procat.frobenius import check_laws, copy_algebra_frel, copyables, xor_algebra_frel


@pytest.fixture(scope="module")
def found():
    return {n: S.enumerate_indices(n) for n in (1, 2, 3)}


def test_single_point(found):
    assert len(found[1]) == 1


def test_two_points_contain_both_tables(found):
    got = [S.decode(i, 2) for i in found[2]]
    for ref in (copy_algebra_frel(2), xor_algebra_frel()):
        assert any(np.array_equal(a.delta, ref.delta) and np.array_equal(a.eps, ref.eps) for a in got)


def test_two_points_match_the_oracle(found):
    assert found[2] == S.oracle_indices(2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_counts_match_groupoid_classification(found, n):
    assert len(found[n]) == O.abelian_groupoid_count(n)


def test_three_points_match_oracle_on_a_slice(found):
    cand = S.sample_slice(3, 0.01, seed=7)
    assert len(cand) >= 0.01 * (1 << S.n_bits(3))
    inside = set(cand.tolist())
    assert [i for i in found[3] if i in inside] == S.oracle_indices(3, cand)
    # the structures themselves pass the brute-force filter
    assert S.oracle_indices(3, np.array(found[3])) == found[3]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_every_result_is_a_classical_structure(found, n):
    for idx in found[n]:
        a = S.decode(idx, n)
        assert check_laws(a).classical
        assert S.encode(a) == idx


@pytest.mark.parametrize("n", [2, 3])
def test_results_split_into_abelian_groups(found, n):
    # each copyable subset is a group component whose table is an abelian group
    for idx in found[n]:
        a = S.decode(idx, n)
        mu = a.mu.reshape(n, n, n)
        comps = [np.flatnonzero(v) for v in copyables(a)]
        assert sorted(itertools.chain.from_iterable(comps)) == list(range(n))
        for comp in comps:
            table = {}
            for x, y in itertools.product(comp, repeat=2):
                out = np.flatnonzero(mu[:, x, y])
                assert len(out) == 1 and out[0] in comp
                table[x, y] = out[0]
            assert all(table[x, y] == table[y, x] for x, y in table)
            assert all(table[table[x, y], z] == table[x, table[y, z]] for x, y, z in itertools.product(comp, repeat=3))
            assert any(all(table[e, x] == x for x in comp) for e in comp)


def test_thread_count_does_not_change_output(found):
    assert S.enumerate_indices(3, threads=4) == found[3]


def test_out_of_range():
    with pytest.raises(ValueError):
        S.enumerate_indices(4)
    with pytest.raises(ValueError):
        S.enumerate_indices(0)


def test_slice_is_seeded():
    assert np.array_equal(S.sample_slice(3, 0.01, 3), S.sample_slice(3, 0.01, 3))
    assert not np.array_equal(S.sample_slice(3, 0.01, 3), S.sample_slice(3, 0.01, 4))
