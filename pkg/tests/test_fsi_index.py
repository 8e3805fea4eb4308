import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import fsi
from fsi import oracles
from fsi.errors import FsiSetIdError, FsiValidationError
from fsi.fsi_index import (BuildConfig, FsiIndex, RootSummary, WorkCounters,
                           pair_counts, split_node)
from fsi.set_store import SetCollection

EXAMPLE = [[1, 2, 3, 4], [3, 4, 5], [6]]
MODES = ["explicit", "compact"]


def _example(mode):
    col = SetCollection.from_sets(EXAMPLE)
    return FsiIndex.build(col, BuildConfig(leaf_threshold=1, subset_mode=mode))


def _sub(index, node, sid):
    return sorted(index.subset(node, sid).tolist())


@pytest.mark.parametrize("mode", MODES)
def test_build_example_root(mode):
    index = _example(mode)
    root = index.root
    assert root.node_cost == 8
    assert root.large_ids == (0, 1)
    assert root.matrix[0, 1] and root.matrix[1, 0]
    assert root.remarked == 4

    assert root.left.node_cost == 4
    assert _sub(index, root.left, 0) == [1, 2, 3]
    assert _sub(index, root.left, 1) == [3]
    assert root.right.node_cost == 1
    assert _sub(index, root.right, 0) == []
    assert _sub(index, root.right, 1) == [5]
    assert set(root.left.handled_ids) == {0, 1}
    index.validate()


@pytest.mark.parametrize("mode", MODES)
def test_build_empty_collection(mode):
    index = FsiIndex.build(SetCollection.from_sets([]),
                           BuildConfig(subset_mode=mode))
    assert index.root.node_cost == 0
    assert index.root.is_leaf
    assert index.root.matrix is None
    index.validate()


def test_build_single_element():
    index = FsiIndex.build(SetCollection.from_sets([[7]]),
                           BuildConfig(leaf_threshold=1))
    assert index.root.node_cost == 1
    assert index.root.is_leaf
    assert index.root.large_ids == ()
    assert index.intersect(0, 0)[0] == [7]


def test_split_node_examples():
    e1, e, e2 = split_node([(0, np.array([1, 2, 3, 4], dtype=np.uint64)),
                            (1, np.array([3, 4, 5], dtype=np.uint64))], 4)
    assert e1.tolist() == [1, 2, 3]
    assert e == 4
    assert e2.tolist() == [5]

    e1, e, e2 = split_node([(0, np.array([9], dtype=np.uint64))], 5)
    assert e1.tolist() == [9]
    assert e is None
    assert e2.tolist() == []

    group = [(sid, np.array([1], dtype=np.uint64)) for sid in range(3)]
    e1, e, e2 = split_node(group, 1)
    assert e1.tolist() == []
    assert e == 1
    assert e2.tolist() == []


@pytest.mark.parametrize("mode", MODES)
def test_intersect_example(mode):
    index = _example(mode)
    common, counters = index.intersect(0, 1)
    assert common == [3, 4]
    assert counters.nodes_visited == 3
    assert counters.matrix_lookups == 1
    assert counters.stopper_elements_scanned == 1
    assert counters.hash_probes == 3

    common, counters = index.intersect(0, 2)
    assert common == []
    assert counters.nodes_visited == 1
    assert counters.stopper_elements_scanned == 1

    for i in range(3):
        assert index.intersect(i, i)[0] == EXAMPLE[i]


def test_intersect_bad_id():
    index = _example("explicit")
    with pytest.raises(FsiSetIdError):
        index.intersect(0, 3)
    with pytest.raises(FsiSetIdError):
        index.intersection_size(5, 0)


def test_intersection_empty_and_size_example():
    index = _example("explicit")
    assert index.intersection_empty(0, 2)
    assert not index.intersection_empty(0, 1)
    assert index.intersection_size(0, 1) == 2
    assert index.intersection_size(0, 2) == 0
    for i in range(3):
        assert index.intersection_size(i, i) == len(EXAMPLE[i])
        assert not index.intersection_empty(i, i)


def test_intersection_empty_on_empty_set():
    index = FsiIndex.build(SetCollection.from_sets([[], [1, 2]]))
    assert index.intersection_empty(0, 0)
    assert index.intersection_empty(0, 1)
    assert index.intersect(0, 1)[0] == []


def test_root_summary_standalone_counts_work():
    col = SetCollection.from_sets(EXAMPLE)
    summary = RootSummary.build(col)
    counters = WorkCounters()
    assert summary.intersection_size(1, 0, counters) == 2
    assert counters.matrix_lookups == 1
    assert counters.hash_probes == 0

    counters = WorkCounters()
    assert summary.intersection_empty(2, 0, counters)
    assert counters.hash_probes == 1


def test_intersect_many_sums_counters():
    index = _example("compact")
    counters = WorkCounters()
    results = index.intersect_many([(0, 1), (0, 2), (1, 1)], counters)
    assert results == [[3, 4], [], [3, 4, 5]]
    singles = [index.intersect(i, j)[1] for i, j in [(0, 1), (0, 2), (1, 1)]]
    assert counters == singles[0] + singles[1] + singles[2]


def test_work_counters_add_and_json():
    a = WorkCounters(hash_probes=2, nodes_visited=1)
    b = WorkCounters(hash_probes=3, matrix_lookups=4)
    total = a + b
    assert total.to_dict() == {"hash_probes": 5, "matrix_lookups": 4,
                               "nodes_visited": 1,
                               "stopper_elements_scanned": 0}
    assert a.hash_probes == 2
    assert '"hash_probes": 5' in total.to_json()


def test_build_config_validation():
    with pytest.raises(FsiValidationError):
        BuildConfig(leaf_threshold=0)
    with pytest.raises(FsiValidationError):
        BuildConfig(subset_mode="sparse")
    with pytest.raises(FsiValidationError):
        BuildConfig(element_order="random")


def test_build_config_reads_package_settings(monkeypatch):
    monkeypatch.setattr(fsi, "leaf_threshold", 9)
    monkeypatch.setattr(fsi, "subset_mode", "compact")
    config = BuildConfig.from_defaults()
    assert config.leaf_threshold == 9
    assert config.subset_mode == "compact"
    assert BuildConfig.from_defaults(leaf_threshold=2).leaf_threshold == 2

    index = FsiIndex.build(SetCollection.from_sets(EXAMPLE))
    assert index.config.leaf_threshold == 9
    assert index.order is not None


def _brute_pair_counts(subsets):
    k = len(subsets)
    plain = [set(s.tolist()) for s in subsets]
    return np.array([[len(plain[a] & plain[b]) for b in range(k)]
                     for a in range(k)], dtype=np.int64)


@pytest.mark.parametrize("k,universe,size", [(4, 30, 10), (12, 200, 60), (30, 500, 120)])
def test_pair_counts_matches_brute_force(k, universe, size):
    rng = np.random.default_rng(k)
    subsets = [np.unique(rng.integers(0, universe, size=size)).astype(np.uint64)
               for _ in range(k)]
    assert np.array_equal(pair_counts(subsets), _brute_pair_counts(subsets))


def test_pair_counts_batches(monkeypatch):
    monkeypatch.setattr("fsi.fsi_index.PAIR_BATCH", 16)
    rng = np.random.default_rng(3)
    subsets = [np.unique(rng.integers(0, 100, size=80)).astype(np.uint64)
               for _ in range(6)]
    assert np.array_equal(pair_counts(subsets), _brute_pair_counts(subsets))


collections = st.lists(
    st.sets(st.integers(min_value=0, max_value=120), max_size=40),
    min_size=1, max_size=10)


@settings(max_examples=60, deadline=None)
@given(sets=collections, leaf=st.integers(min_value=1, max_value=8),
       mode=st.sampled_from(MODES))
def test_agrees_with_oracles(sets, leaf, mode):
    col = SetCollection.from_sets(sets)
    index = FsiIndex.build(col, BuildConfig(leaf_threshold=leaf, subset_mode=mode))
    index.validate()
    for i in range(col.m):
        for j in range(col.m):
            expected = oracles.naive_sorted_intersect(col.elements(i),
                                                      col.elements(j))
            common, _ = index.intersect(i, j)
            assert common == expected
            assert index.intersection_size(i, j) == len(expected)
            assert index.intersection_empty(i, j) == (not expected)


@settings(max_examples=30, deadline=None)
@given(sets=collections)
def test_modes_agree(sets):
    col = SetCollection.from_sets(sets)
    explicit = FsiIndex.build(col, BuildConfig(subset_mode="explicit"))
    compact = FsiIndex.build(col, BuildConfig(subset_mode="compact"))
    for i in range(col.m):
        for j in range(i, col.m):
            assert explicit.intersect(i, j)[0] == compact.intersect(i, j)[0]


@pytest.mark.parametrize("mode", MODES)
def test_space_accounting(mode):
    rng = np.random.default_rng(11)
    sets = [np.unique(rng.integers(0, 5000, size=rng.integers(1, 400)))
            for _ in range(40)]
    col = SetCollection.from_sets(sets)
    index = FsiIndex.build(col, BuildConfig(subset_mode=mode))
    index.validate()
    stats = index.stats()
    n = col.total_size
    assert stats.depth <= math.ceil(math.log2(n / 4)) + 1
    assert stats.matrix_bits <= n * stats.depth
    assert all(bits <= n for bits in stats.level_matrix_bits)
    if mode == "compact":
        assert stats.rank_entries == n
        assert stats.subset_entries == 0
    else:
        assert stats.rank_entries == 0
