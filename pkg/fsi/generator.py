"""
Synthetic set collections for tests and benchmarks.

All randomness comes from numpy's PCG64 bit generator seeded with
GenSpec.seed, so a GenSpec always yields the same collection on every
platform.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from fsi.errors import FsiValidationError
from fsi.set_store import SetCollection, write_sets

logger = logging.getLogger(__name__)

SIZE_DISTS = ("uniform", "zipf")


@dataclass(frozen=True)
class GenSpec:
    """
    Recipe for a random collection.

    Attributes:
        m: number of sets.
        size_dist: ("uniform", lo, hi) draws sizes uniformly from [lo, hi];
            ("zipf", s, max) gives the set of rank r the size max / r**s, with
            ranks assigned to sets in random order.
        universe: element ids are drawn from [0, universe).
        target_overlap: share of each set drawn from a shared core whose
            size is the largest shared portion, round(max size *
            target_overlap). Two sets with shared portions a and b meet in
            about a * b / core elements; this is not a pairwise intersection
            fraction. 0 gives pairwise disjoint sets.
        seed: PCG64 seed.
    """

    m: int = 10
    size_dist: tuple = ("uniform", 1, 100)
    universe: int = 1 << 32
    target_overlap: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.m < 0:
            raise FsiValidationError(f"m must be >= 0, got {self.m}")
        if not self.size_dist or self.size_dist[0] not in SIZE_DISTS:
            raise FsiValidationError(
                f"size_dist must start with one of {SIZE_DISTS}, got {self.size_dist!r}")
        if len(self.size_dist) != 3:
            raise FsiValidationError(
                f"size_dist takes two parameters, got {self.size_dist!r}")
        if self.size_dist[0] == "uniform" and not 0 <= self.size_dist[1] <= self.size_dist[2]:
            raise FsiValidationError(
                f"uniform sizes need 0 <= lo <= hi, got {self.size_dist!r}")
        if self.size_dist[0] == "zipf" and (self.size_dist[1] <= 0 or self.size_dist[2] < 1):
            raise FsiValidationError(
                f"zipf sizes need s > 0 and max >= 1, got {self.size_dist!r}")
        if not 0.0 <= self.target_overlap <= 1.0:
            raise FsiValidationError(
                f"target_overlap must be within [0, 1], got {self.target_overlap}")
        if self.universe < 1:
            raise FsiValidationError(f"universe must be >= 1, got {self.universe}")


def parse_size_dist(text: str):
    '''
    Parses "uniform:lo:hi" or "zipf:s:max" into a size_dist tuple.
    '''
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in SIZE_DISTS:
        raise FsiValidationError(
            f"size distribution must be uniform:lo:hi or zipf:s:max, got {text!r}")
    try:
        if parts[0] == "uniform":
            return ("uniform", int(parts[1]), int(parts[2]))
        return ("zipf", float(parts[1]), int(parts[2]))
    except ValueError:
        raise FsiValidationError(
            f"bad size distribution parameters in {text!r}") from None


def _sizes(spec, rng):
    kind, a, b = spec.size_dist
    if kind == "uniform":
        return rng.integers(a, b, size=spec.m, endpoint=True)
    ranks = rng.permutation(spec.m) + 1
    return np.maximum(1, np.floor(b / ranks.astype(np.float64)**a)).astype(np.int64)


def generate(spec: GenSpec) -> SetCollection:
    '''
    Draws a collection.

    Every set takes round(size * target_overlap) elements from a shared core
    and the rest from a private block no other set touches. The core is as
    large as the biggest shared portion and every set samples its shared
    elements from it independently, so two sets with shared portions a and b
    have about a * b / core elements in common.

    Raises:
        FsiValidationError: the universe cannot hold the core and the private
            blocks.
    '''
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    sizes = _sizes(spec, rng).astype(np.int64)
    shared = np.rint(sizes * spec.target_overlap).astype(np.int64)
    private = sizes - shared
    core = int(shared.max()) if spec.m else 0
    needed = core + int(private.sum())
    if needed > spec.universe:
        raise FsiValidationError(
            f"universe {spec.universe} is too small for {needed} distinct elements")

    pool = rng.choice(spec.universe, size=needed, replace=False).astype(np.uint64)
    core_ids, private_ids = pool[:core], pool[core:]
    bounds = np.cumsum(private)[:-1]
    blocks = np.split(private_ids, bounds) if spec.m else []

    sets = []
    for size, take, block in zip(sizes, shared, blocks):
        picked = rng.choice(core, size=int(take), replace=False) if take else []
        sets.append(np.sort(np.concatenate([core_ids[picked], block])))
    col = SetCollection(sets)
    logger.info("generated m=%d N=%d core=%d seed=%d", col.m, col.total_size,
                core, spec.seed)
    return col


def write_instance(spec: GenSpec, stream):
    write_sets(generate(spec), stream)


def bench_spec(n: int, m: int, overlap: float, seed: int) -> GenSpec:
    '''
    A GenSpec of roughly n elements in total: m sets with uniform sizes
    around n / m, drawn from a universe four times larger than n.
    '''
    mean = max(1, n // max(m, 1))
    lo, hi = max(1, mean // 2), max(1, mean + mean // 2)
    universe = max(4 * n, 1)
    return GenSpec(m=m, size_dist=("uniform", lo, hi),
                   universe=max(universe, math.ceil(1.5 * mean) * m + 1),
                   target_overlap=overlap, seed=seed)
