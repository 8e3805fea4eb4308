import logging
from dataclasses import dataclass

import numpy as np

from fsi.errors import FsiOverlapError, FsiRangeError, FsiValidationError
from fsi.fsi_index import BuildConfig, FsiIndex, WorkCounters
from fsi.set_store import SetCollection

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CanonicalNode:
    """A dyadic range [lo, hi] (1-indexed, inclusive) and its FSI set id."""

    level: int
    index: int
    lo: int
    hi: int
    set_id: int


class ColorMarker(object):
    """
    Presence bitmap over color codes. Starting a new epoch forgets every mark
    without clearing the array.
    """

    def __init__(self, size):
        self.stamps = np.zeros(size, dtype=np.int64)
        self.epoch = 0

    def next_epoch(self):
        self.epoch += 1

    def mark(self, code) -> bool:
        """Marks code, returning True the first time it is seen this epoch."""
        if self.stamps[code] == self.epoch:
            return False
        self.stamps[code] = self.epoch
        return True


class CcqIndex(object):
    """
    Common colors index over a color array.

    The array is padded to a power of two P and cut into dyadic ranges: level
    l has 2**l ranges of P / 2**l positions. Each range owns the set of
    distinct colors it contains (padding contributes nothing), and an FsiIndex
    is built over all 2P - 1 of those sets. The range at level l, index k has
    set id 2**l + k - 1, i.e. heap order.

    Colors are stored in the FSI as dense codes (positions in the sorted
    palette of distinct colors) and mapped back on output.
    """

    def __init__(self, colors, palette, padded_size, fsi_index):
        self.colors = colors
        self.palette = palette
        self.padded_size = padded_size
        self.levels = padded_size.bit_length()
        self.fsi = fsi_index

    def __str__(self):
        return f"<fsi.CcqIndex N={len(self)}>"

    def __repr__(self):
        return (f"<fsi.CcqIndex N={len(self)} colors={len(self.palette)} "
                f"levels={self.levels}>")

    def __len__(self):
        return len(self.colors)

    @classmethod
    def build(cls, colors, config: BuildConfig = None):
        '''
        Builds the dyadic canonical sets of a color array and indexes them.

        Arguments:
            colors (list): colors of positions 1..N, each >= 1.
            config (BuildConfig, optional): build settings for the inner FsiIndex.

        Returns:
            index: new CcqIndex object
        '''
        colors = np.asarray(colors, dtype=np.uint64)
        n = len(colors)
        if n == 0:
            raise FsiValidationError("cannot index an empty color array")
        if (colors == 0).any():
            raise FsiValidationError("color 0 is reserved for padding")

        palette, codes = np.unique(colors, return_inverse=True)
        padded_size = 1 << (n - 1).bit_length()
        padded = np.full(padded_size, -1, dtype=np.int64)
        padded[:n] = codes.reshape(-1)

        sets = []
        for level in range(padded_size.bit_length()):
            rows = np.sort(padded.reshape(1 << level, -1), axis=1)
            keep = rows >= 0
            keep[:, 1:] &= rows[:, 1:] != rows[:, :-1]
            bounds = np.cumsum(keep.sum(axis=1))[:-1]
            sets.extend(np.split(rows[keep].astype(np.uint64), bounds))

        collection = SetCollection(sets)
        fsi_index = FsiIndex.build(collection, config)
        logger.info("built CCQ index: N=%d colors=%d canonical elements=%d",
                    n, len(palette), collection.total_size)
        return cls(colors, palette, padded_size, fsi_index)

    def node(self, level, index):
        width = self.padded_size >> level
        lo = index * width + 1
        hi = min((index + 1) * width, len(self))
        return CanonicalNode(level, index, lo, hi, (1 << level) + index - 1)

    def _heap_node(self, h):
        level = h.bit_length() - 1
        return self.node(level, h - (1 << level))

    def canonical_colors(self, node: CanonicalNode):
        """The distinct colors of a canonical range, from its FSI set."""
        codes = self.fsi.collection.sets[node.set_id]
        return self.palette[codes.astype(np.int64)].tolist()

    def _check_interval(self, interval, name="interval"):
        lo, hi = interval
        if not 1 <= lo <= hi <= len(self):
            raise FsiRangeError(
                f"{name} [{lo}, {hi}] is not within [1, {len(self)}]")

    def decompose(self, interval):
        '''
        Minimal cover of a 1-indexed inclusive interval by canonical ranges.

        Returns:
            nodes (list): disjoint CanonicalNode objects, left to right, whose
                ranges tile the interval. At most 2 * ceil(log2 N) of them.
        '''
        self._check_interval(interval)
        lo = interval[0] - 1 + self.padded_size
        # An interval reaching position N may also claim the padding after it.
        end = self.padded_size if interval[1] == len(self) else interval[1]
        hi = end + self.padded_size
        left, right = [], []
        while lo < hi:
            if lo & 1:
                left.append(lo)
                lo += 1
            if hi & 1:
                hi -= 1
                right.append(hi)
            lo >>= 1
            hi >>= 1
        nodes = [self._heap_node(h) for h in left + right[::-1]]
        return [node for node in nodes if node.lo <= len(self)]

    def common_colors(self, first, second, marker: ColorMarker = None,
                      counters: WorkCounters = None):
        '''
        Lists the distinct colors occurring in both of two non-overlapping
        intervals, by intersecting every pair of canonical sets of their covers.

        Arguments:
            first (tuple): (l, r), 1-indexed inclusive.
            second (tuple): (l, r), 1-indexed inclusive.
            marker (ColorMarker, optional): dedup bitmap to reuse across queries.
            counters (WorkCounters, optional): accumulates the FSI work.

        Returns:
            colors (list): ascending distinct colors.
        '''
        self._check_interval(first, "first interval")
        self._check_interval(second, "second interval")
        if first[0] <= second[1] and second[0] <= first[1]:
            raise FsiOverlapError(
                f"intervals [{first[0]}, {first[1]}] and "
                f"[{second[0]}, {second[1]}] overlap")
        marker = marker or ColorMarker(len(self.palette))
        marker.next_epoch()
        grid = [(a.set_id, b.set_id)
                for a in self.decompose(first)
                for b in self.decompose(second)]
        found = []
        for common in self.fsi.intersect_many(grid, counters):
            for code in common:
                if marker.mark(code):
                    found.append(code)
        found.sort()
        return self.palette[np.asarray(found, dtype=np.int64)].tolist()
