import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import fsi
from fsi.errors import FsiCapacityError, FsiRangeError, FsiSetIdError, FsiValidationError
from fsi.oracles import (naive_common_colors, naive_hash_intersect,
                         naive_sorted_intersect, precompute_matrix)
from fsi.set_store import SetCollection


def test_naive_sorted_intersect():
    assert naive_sorted_intersect([1, 2, 3], [2, 3, 4]) == [2, 3]
    assert naive_sorted_intersect([1], []) == []
    assert naive_sorted_intersect(range(1, 101), range(50, 151)) == list(range(50, 101))


def test_naive_sorted_intersect_counts_probes():
    probes = [0]
    naive_sorted_intersect([1, 2, 3, 4, 5], [2, 9], probes)
    assert probes == [2]


@pytest.mark.parametrize("a,b", [([2, 1], [1]), ([1], [3, 3]), ([1, 1], [])])
def test_naive_sorted_intersect_rejects_unsorted(a, b):
    with pytest.raises(FsiValidationError):
        naive_sorted_intersect(a, b)


def test_naive_hash_intersect():
    col = SetCollection.from_sets([[1, 2, 3], [2, 3, 4], [], [5]])
    assert naive_hash_intersect(col, 0, 1) == [2, 3]
    assert naive_hash_intersect(col, 2, 3) == []
    assert naive_hash_intersect(col, 1, 1) == [2, 3, 4]
    with pytest.raises(FsiSetIdError):
        naive_hash_intersect(col, 0, 4)


def test_precompute_matrix():
    col = SetCollection.from_sets([[1, 2, 3], [2, 3, 4], [6]])
    table = precompute_matrix(col, materialize=True)
    assert table.pairwise.tolist() == [[3, 2, 0], [2, 3, 0], [0, 0, 1]]
    assert table.intersection(1, 0) == [2, 3]
    assert table.size(2, 2) == 1

    assert precompute_matrix(SetCollection.from_sets([])).pairwise.shape == (0, 0)
    assert precompute_matrix(SetCollection.from_sets([[1]])).pairwise.tolist() == [[1]]


def test_precompute_matrix_without_contents():
    table = precompute_matrix(SetCollection.from_sets([[1]]))
    with pytest.raises(FsiValidationError):
        table.intersection(0, 0)


def test_precompute_matrix_budget(monkeypatch):
    col = SetCollection.from_sets([[x] for x in range(20)])
    with pytest.raises(FsiCapacityError) as e_info:
        precompute_matrix(col, budget_bytes=100)
    assert e_info.value.required_bytes == 8 * 20 * 20
    assert "3200 bytes" in str(e_info.value)

    monkeypatch.setattr(fsi, "precompute_budget_bytes", 1000)
    with pytest.raises(MemoryError):
        precompute_matrix(col)


def test_naive_common_colors():
    colors = [1, 2, 1, 3, 2, 4, 1, 3]
    assert naive_common_colors(colors, (1, 3), (4, 8)) == [1, 2]
    assert naive_common_colors(colors, (6, 6), (6, 6)) == [4]
    assert naive_common_colors([1, 1, 2, 2], (1, 2), (3, 4)) == []
    with pytest.raises(FsiRangeError):
        naive_common_colors(colors, (0, 2), (4, 8))
    with pytest.raises(FsiRangeError):
        naive_common_colors(colors, (1, 2), (4, 9))


@settings(max_examples=50)
@given(sets=st.lists(st.sets(st.integers(0, 50), max_size=20), min_size=1, max_size=6))
def test_baselines_agree(sets):
    col = SetCollection.from_sets(sets)
    table = precompute_matrix(col)
    for i in range(col.m):
        for j in range(col.m):
            by_hash = naive_hash_intersect(col, i, j)
            assert by_hash == naive_sorted_intersect(col.elements(i), col.elements(j))
            assert table.size(i, j) == len(by_hash)
    assert np.array_equal(table.pairwise, table.pairwise.T)
