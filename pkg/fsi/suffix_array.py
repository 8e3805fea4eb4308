import logging
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from fsi.errors import FsiValidationError

logger = logging.getLogger(__name__)

SENTINEL = 0


@dataclass(frozen=True)
class SaInterval:
    """Rank interval [lo, hi] (1-indexed, inclusive) of the suffixes starting
    with a pattern. Empty intervals have hi == lo - 1."""

    lo: int
    hi: int

    @property
    def empty(self):
        return self.hi < self.lo

    def __len__(self):
        return max(0, self.hi - self.lo + 1)

    def contains(self, other: "SaInterval"):
        return self.lo <= other.lo and other.hi <= self.hi

    def disjoint(self, other: "SaInterval"):
        return self.hi < other.lo or other.hi < self.lo


def build_suffix_array(text: bytes):
    '''
    Suffix array of a byte string by prefix doubling: after the round with
    step s every suffix is ranked by its first 2s bytes, and the loop stops
    once all ranks are distinct. A suffix that runs off the end ranks below
    every byte value.

    Returns:
        sa (np.ndarray): int64 start positions in lexicographic suffix order.
    '''
    n = len(text)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    rank = np.frombuffer(text, dtype=np.uint8).astype(np.int64)
    step = 1
    while True:
        following = np.full(n, -1, dtype=np.int64)
        if step < n:
            following[:n - step] = rank[step:]
        sa = np.lexsort((following, rank))
        r, f = rank[sa], following[sa]
        changed = np.empty(n, dtype=bool)
        changed[0] = False
        changed[1:] = (r[1:] != r[:-1]) | (f[1:] != f[:-1])
        rank = np.empty(n, dtype=np.int64)
        rank[sa] = np.cumsum(changed)
        if rank[sa[-1]] == n - 1:
            return sa.astype(np.int64)
        step *= 2


class GeneralizedSuffixArray(object):
    """
    Suffix array over documents joined by a sentinel byte (0) that sorts below
    every other byte. Suffixes starting at a sentinel are dropped, so `sa` and
    `colors` hold one entry per document byte; colors[r] is the 1-based
    position of the document owning the suffix of rank r + 1.
    """

    def __init__(self, text, sa, colors, starts):
        self.text = text
        self.sa = sa
        self.colors = colors
        self.starts = starts

    def __len__(self):
        return len(self.sa)

    def __repr__(self):
        return (f"<fsi.GeneralizedSuffixArray docs={len(self.starts)} "
                f"suffixes={len(self.sa)}>")

    @classmethod
    def build(cls, documents):
        '''
        Arguments:
            documents (list): byte strings without the sentinel byte.

        Returns:
            gsa: new GeneralizedSuffixArray object
        '''
        starts = []
        offset = 0
        for pos, doc in enumerate(documents, start=1):
            if bytes([SENTINEL]) in doc:
                raise FsiValidationError(
                    f"document {pos} contains the reserved byte 0")
            starts.append(offset)
            offset += len(doc) + 1
        text = b"".join(doc + bytes([SENTINEL]) for doc in documents)
        full = build_suffix_array(text)
        raw = np.frombuffer(text, dtype=np.uint8)
        sa = full[raw[full] != SENTINEL] if len(full) else full
        starts = np.asarray(starts, dtype=np.int64)
        colors = np.searchsorted(starts, sa, side="right").astype(np.int64)
        logger.debug("suffix array over %d documents, %d bytes", len(starts),
                     len(text))
        return cls(text, sa, colors, starts)

    def interval(self, pattern: bytes) -> SaInterval:
        '''
        Ranks of the suffixes that start with pattern, by two binary searches
        over pattern-length prefixes.
        '''
        if not pattern:
            raise FsiValidationError("pattern must not be empty")
        if SENTINEL in pattern:
            raise FsiValidationError("pattern contains the reserved byte 0")
        width = len(pattern)
        text, sa = self.text, self.sa

        def prefix(r):
            start = int(sa[r])
            return text[start:start + width]

        ranks = range(len(sa))
        lower = bisect_left(ranks, pattern, key=prefix)
        upper = bisect_right(ranks, pattern, key=prefix)
        return SaInterval(lower + 1, upper)

    def distinct_colors(self, interval: SaInterval):
        """Distinct colors inside an interval, by scan and dedup."""
        if interval.empty:
            return []
        return np.unique(self.colors[interval.lo - 1:interval.hi]).tolist()
