"""
Benchmark sweep: runs the FSI index and both naive baselines on sampled pairs
of generated collections and records work counters per query.
"""
import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from fsi import generator, oracles
from fsi.fsi_index import BuildConfig, FsiIndex

logger = logging.getLogger(__name__)

MODES = ("fsi", "naive_hash", "naive_sorted")
DEFAULT_SIZES = (1 << 12, 1 << 14, 1 << 16, 1 << 18, 1 << 20)


@dataclass
class BenchRow:
    N: int
    m: int
    i: int
    j: int
    output: int
    hash_probes: int = 0
    matrix_lookups: int = 0
    nodes_visited: int = 0
    stopper_elements_scanned: int = 0
    wall_nanos: int = 0
    mode: str = "fsi"


BENCH_FIELDS = [f.name for f in fields(BenchRow)]


@dataclass
class FitResult:
    slope: float = None
    intercept: float = None
    points: int = 0
    skipped: str = None


def _timed(fn, timing):
    if not timing:
        return fn(), 0
    start = time.perf_counter_ns()
    result = fn()
    return result, time.perf_counter_ns() - start


def _sample_pairs(m, count, seed):
    """Pairs of distinct set ids (only (0, 0) when m is 1)."""
    if m == 0:
        return []
    if m == 1:
        return [(0, 0)] * count
    rng = np.random.Generator(np.random.PCG64(seed))
    first = rng.integers(0, m, size=count)
    second = (first + rng.integers(1, m, size=count)) % m
    return list(zip(first.tolist(), second.tolist()))


def _run_cell(index, i, j, timing):
    col = index.collection
    n, m = col.total_size, col.m
    rows = []

    (common, counters), nanos = _timed(lambda: index.intersect(i, j), timing)
    rows.append(BenchRow(n, m, i, j, len(common), wall_nanos=nanos, mode="fsi",
                         **counters.to_dict()))

    probes = [0]
    common, nanos = _timed(
        lambda: oracles.naive_hash_intersect(col, i, j, probes), timing)
    rows.append(BenchRow(n, m, i, j, len(common), hash_probes=probes[0],
                         stopper_elements_scanned=probes[0], wall_nanos=nanos,
                         mode="naive_hash"))

    probes = [0]
    common, nanos = _timed(
        lambda: oracles.naive_sorted_intersect(col.elements(i), col.elements(j),
                                               probes), timing)
    rows.append(BenchRow(n, m, i, j, len(common), hash_probes=probes[0],
                         stopper_elements_scanned=probes[0], wall_nanos=nanos,
                         mode="naive_sorted"))
    return rows


def run_bench(specs, pairs: int = 20, config: BuildConfig = None,
              timing: bool = True, workers: int = 1):
    '''
    Builds an index per GenSpec and queries sampled pairs with every mode.

    Arguments:
        specs (list): GenSpec objects, one collection each.
        pairs (int): pairs sampled per collection (seeded from the GenSpec).
        config (BuildConfig, optional): index build settings.
        timing (bool): record wall clock time; False writes 0 so the output
            is reproducible.
        workers (int): query threads per collection. Rows keep pair order.

    Returns:
        rows (list): BenchRow objects, three per sampled pair.
    '''
    rows = []
    for spec in specs:
        col = generator.generate(spec)
        index = FsiIndex.build(col, config)
        cells = _sample_pairs(col.m, pairs, spec.seed)
        logger.info("bench N=%d m=%d pairs=%d", col.total_size, col.m, len(cells))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = pool.map(lambda p: _run_cell(index, p[0], p[1], timing),
                                   cells)
                for cell_rows in results:
                    rows.extend(cell_rows)
        else:
            for i, j in cells:
                rows.extend(_run_cell(index, i, j, timing))
    return rows


def write_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(BENCH_FIELDS)
    for row in rows:
        writer.writerow(astuple(row))


def fit_exponent(rows, mode: str = "fsi",
                 metric: str = "stopper_elements_scanned") -> FitResult:
    '''
    Least squares fit of log(work + 1) against log(N * (output + 1)) over the
    rows of one mode. The slope estimates b in work = a * (N * (output+1))^b.

    Returns:
        fit (FitResult): slope and intercept, or a skipped reason when the
            rows cannot support a fit.
    '''
    picked = [r for r in rows if r.mode == mode]
    if not picked:
        return FitResult(skipped=f"no {mode} rows")
    if not any(r.output for r in picked):
        return FitResult(points=len(picked),
                         skipped="every sampled pair has an empty intersection")
    x = np.log([r.N * (r.output + 1) for r in picked])
    y = np.log([getattr(r, metric) + 1 for r in picked])
    if len(np.unique(x)) < 2:
        return FitResult(points=len(picked),
                         skipped="fewer than two distinct N*(output+1) values")
    slope, intercept = np.polyfit(x, y, 1)
    return FitResult(float(slope), float(intercept), len(picked))
