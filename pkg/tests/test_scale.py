"""
Large instances: million-element builds, the scaling grid, the latency
budget and seeded sweeps against the brute-force oracles. Set FSI_RUN_SLOW=1
to run them; the first few sweep seeds always run.
"""
import math
import os
import statistics
import time

import numpy as np
import pytest

from fsi import bench
from fsi.ccq import CcqIndex
from fsi.doc_index import DocIndex, PairIndex
from fsi.fsi_index import BuildConfig, FsiIndex
from fsi.generator import GenSpec, bench_spec, generate
from fsi.oracles import naive_common_colors, naive_sorted_intersect

slow = pytest.mark.skipif(os.environ.get("FSI_RUN_SLOW") != "1",
                          reason="set FSI_RUN_SLOW=1 to run large instances")


def _seeds(count, always):
    return [seed if seed < always else pytest.param(seed, marks=slow)
            for seed in range(count)]


@pytest.fixture(scope="module")
def million():
    spec = GenSpec(m=1000, size_dist=("uniform", 500, 1500), universe=8_000_000,
                   target_overlap=0.01, seed=2024)
    return generate(spec)


@slow
@pytest.mark.parametrize("mode", ["explicit", "compact"])
def test_million_element_structure_and_space(million, mode):
    index = FsiIndex.build(million, BuildConfig(subset_mode=mode))
    index.validate(matrix_check_limit=32)
    stats = index.stats()
    n = million.total_size
    assert n >= 900_000
    assert stats.matrix_bits <= n * stats.depth
    if mode == "compact":
        assert stats.rank_entries <= n


@slow
def test_latency_budget(million):
    index = FsiIndex.build(million, BuildConfig(subset_mode="compact"))
    rng = np.random.default_rng(0)
    timings = []
    while len(timings) < 50:
        i, j = rng.choice(million.m, size=2, replace=False).tolist()
        start = time.perf_counter()
        common, _ = index.intersect(i, j)
        elapsed = time.perf_counter() - start
        if len(common) <= 100:
            timings.append(elapsed)
    assert statistics.median(timings) < 0.050


@slow
def test_scaling_exponent():
    specs = [bench_spec(n, 64, 0.05, seed=k)
             for k, n in enumerate(bench.DEFAULT_SIZES)]
    rows = bench.run_bench(specs, pairs=20, timing=False)
    fit = bench.fit_exponent(rows)
    assert fit.skipped is None
    assert fit.slope <= 0.6


def _sweep_spec(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 51))
    cap = 5000 // m
    if seed % 2:
        size_dist = ("zipf", float(rng.uniform(0.5, 1.5)), cap)
    else:
        size_dist = ("uniform", 1, cap)
    spec = GenSpec(m=m, size_dist=size_dist, universe=20_000,
                   target_overlap=float(rng.uniform(0.0, 0.6)), seed=seed)
    return spec, int(rng.integers(1, 33))


@pytest.mark.parametrize("seed", _seeds(100, always=3))
@pytest.mark.parametrize("mode", ["explicit", "compact"])
def test_generated_collections_agree_with_oracles(seed, mode):
    spec, leaf = _sweep_spec(seed)
    col = generate(spec)
    assert col.total_size <= 5000
    index = FsiIndex.build(col, BuildConfig(leaf_threshold=leaf, subset_mode=mode))
    index.validate()
    sets = [col.elements(i) for i in range(col.m)]
    for i in range(col.m):
        for j in range(col.m):
            expected = naive_sorted_intersect(sets[i], sets[j])
            common, _ = index.intersect(i, j)
            assert common == expected
            assert index.intersection_size(i, j) == len(expected)
            assert index.intersection_empty(i, j) == (not expected)


def _disjoint_intervals(rng, n):
    cut = int(rng.integers(1, n))
    a = np.sort(rng.integers(1, cut + 1, size=2)).tolist()
    b = np.sort(rng.integers(cut + 1, n + 1, size=2)).tolist()
    return tuple(a), tuple(b)


@pytest.mark.parametrize("seed", _seeds(20, always=2))
def test_random_color_arrays_agree_with_scan(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 4097))
    colors = rng.integers(1, int(rng.integers(1, 65)) + 1, size=n).tolist()
    mode = "compact" if seed % 2 else "explicit"
    index = CcqIndex.build(colors, BuildConfig(subset_mode=mode))
    bound = max(1, 2 * math.ceil(math.log2(n)))
    for _ in range(1000):
        first, second = _disjoint_intervals(rng, n)
        for interval in (first, second):
            nodes = index.decompose(interval)
            assert len(nodes) <= bound
            assert nodes[0].lo == interval[0] and nodes[-1].hi == interval[1]
        expected = naive_common_colors(colors, first, second)
        assert index.common_colors(first, second) == expected


def _random_text(rng, alphabet, length):
    return "".join(rng.choice(list(alphabet), size=length).tolist())


def _substring(rng, texts):
    doc = texts[int(rng.integers(len(texts)))]
    width = int(rng.integers(1, min(6, len(doc)) + 1))
    start = int(rng.integers(0, len(doc) - width + 1))
    return doc[start:start + width]


@pytest.mark.parametrize("seed", _seeds(20, always=2))
def test_random_corpora_agree_with_brute_force(seed):
    rng = np.random.default_rng(2000 + seed)
    alphabet = "abcdefgh"[:int(rng.integers(2, 9))]
    count = int(rng.integers(1, 101))
    longest = min(500, 50_000 // count)
    corpus = [_random_text(rng, alphabet, int(rng.integers(0, longest + 1)))
              for _ in range(count)]
    if not any(corpus):
        corpus[0] = alphabet
    assert sum(len(doc) for doc in corpus) <= 50_000
    mode = "compact" if seed % 2 else "explicit"
    index = DocIndex.build(corpus, BuildConfig(subset_mode=mode))
    nonempty = [doc for doc in corpus if doc]
    samples = [_substring(rng, nonempty) for _ in range(200)]
    for k, p in enumerate(samples):
        q = samples[(k * 7 + 3) % len(samples)]
        assert index.list_docs_one(p) == [
            d + 1 for d, doc in enumerate(corpus) if p in doc]
        assert index.list_docs_two(p, q) == [
            d + 1 for d, doc in enumerate(corpus) if p in doc and q in doc]


@pytest.mark.parametrize("seed", _seeds(20, always=2))
def test_random_pair_databases_agree_with_brute_force(seed):
    rng = np.random.default_rng(3000 + seed)
    alphabet = "abcd"[:int(rng.integers(2, 5))]
    pairs = [(_random_text(rng, alphabet, int(rng.integers(1, 40))),
              _random_text(rng, alphabet, int(rng.integers(1, 40))))
             for _ in range(int(rng.integers(1, 101)))]
    index = PairIndex.build(pairs)
    firsts = [a for a, _ in pairs]
    seconds = [b for _, b in pairs]
    for _ in range(100):
        s1, s2 = _substring(rng, firsts), _substring(rng, seconds)
        expected = [k + 1 for k, (a, b) in enumerate(pairs) if s1 in a and s2 in b]
        assert index.pair_query(s1, s2) == expected
