"""
Brute-force baselines and ground truth.

Nothing here shares code with the intersection tree, so agreement between the
two is real evidence.
"""
import logging
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

import fsi
from fsi.errors import FsiCapacityError, FsiRangeError, FsiValidationError

logger = logging.getLogger(__name__)


def _check_ascending(values, name):
    for prev, cur in zip(values, values[1:]):
        if not prev < cur:
            raise FsiValidationError(
                f"{name} must be strictly ascending, found {prev} before {cur}")


def naive_sorted_intersect(a, b, probes: list = None):
    '''
    Intersects two ascending, duplicate-free lists by scanning the shorter one
    and binary searching the longer one.

    Arguments:
        a (list): ascending elements.
        b (list): ascending elements.
        probes (list, optional): one-slot accumulator for the number of
            binary searches performed.

    Returns:
        elements (list): ascending intersection.
    '''
    a, b = list(a), list(b)
    _check_ascending(a, "first input")
    _check_ascending(b, "second input")
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    out = []
    for x in small:
        pos = bisect_left(large, x)
        if pos < len(large) and large[pos] == x:
            out.append(x)
    if probes is not None:
        probes[0] += len(small)
    return out


def naive_hash_intersect(collection, i, j, probes: list = None):
    '''
    Intersects sets i and j of a collection by probing the larger set's hash
    table with every element of the smaller one.
    '''
    if collection.size(i) > collection.size(j):
        i, j = j, i
    table = collection.member_table(j)
    out = [x for x in collection.elements(i) if x in table]
    if probes is not None:
        probes[0] += collection.size(i)
    return sorted(out)


@dataclass
class PrecomputedMatrix:
    """All pairwise intersection sizes, and optionally the intersections."""

    pairwise: np.ndarray
    contents: dict = None

    def size(self, i, j):
        return int(self.pairwise[i, j])

    def intersection(self, i, j):
        if self.contents is None:
            raise FsiValidationError("matrix was built without contents")
        return self.contents[(min(i, j), max(i, j))]


def precompute_matrix(collection, materialize: bool = False,
                      budget_bytes: int = None):
    '''
    Computes every pairwise intersection up front: O(output) queries in
    exchange for m^2 words (plus the intersections when materialized).

    Arguments:
        collection (SetCollection): the sets.
        materialize (bool): also keep each intersection's elements.
        budget_bytes (int, optional): defaults to fsi.precompute_budget_bytes.

    Raises:
        FsiCapacityError: the table would not fit the budget.
    '''
    budget = budget_bytes if budget_bytes is not None else fsi.precompute_budget_bytes
    m = collection.m
    required = 8 * m * m
    if materialize:
        sizes = [collection.size(i) for i in range(m)]
        required += 8 * sum(min(sizes[i], sizes[j])
                            for i in range(m) for j in range(i, m))
    if required > budget:
        raise FsiCapacityError(
            f"precomputing {m}x{m} intersections needs {required} bytes, "
            f"budget is {budget}",
            required_bytes=required)

    pairwise = np.zeros((m, m), dtype=np.int64)
    contents = {} if materialize else None
    for i in range(m):
        for j in range(i, m):
            common = naive_hash_intersect(collection, i, j)
            pairwise[i, j] = pairwise[j, i] = len(common)
            if materialize:
                contents[(i, j)] = common
    logger.debug("precomputed %dx%d intersection matrix", m, m)
    return PrecomputedMatrix(pairwise, contents)


def _check_interval(interval, n, name):
    lo, hi = interval
    if not 1 <= lo <= hi <= n:
        raise FsiRangeError(f"{name} [{lo}, {hi}] is not within [1, {n}]")


def naive_common_colors(colors, first, second):
    '''
    Distinct colors occurring in both 1-indexed inclusive intervals of an
    array, by direct scan.
    '''
    colors = [int(c) for c in colors]
    _check_interval(first, len(colors), "first interval")
    _check_interval(second, len(colors), "second interval")
    left = set(colors[first[0] - 1:first[1]])
    right = set(colors[second[0] - 1:second[1]])
    return sorted(left & right)
