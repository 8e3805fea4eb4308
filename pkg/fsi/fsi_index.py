import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

import fsi
from fsi.errors import FsiConsistencyError, FsiValidationError

logger = logging.getLogger(__name__)

SUBSET_MODES = ("explicit", "compact")
ELEMENT_ORDERS = ("ascending",)

# Upper bound on element pairs expanded at once while counting overlaps.
PAIR_BATCH = 1 << 22
# Nodes with fewer stored elements than this count overlaps with plain dicts.
SMALL_NODE = 256

_EMPTY = np.empty(0, dtype=np.uint64)


@dataclass(frozen=True)
class BuildConfig:
    """
    Build parameters of an FsiIndex.

    Attributes:
        leaf_threshold: node cost at or below which a node is a leaf.
        subset_mode: "explicit" keeps element arrays at every node, "compact"
            keeps one rank-ordered array per set and recovers node subsets as
            slices.
        element_order: scan order of the greedy split. Only "ascending".
    """

    leaf_threshold: int = 4
    subset_mode: str = "explicit"
    element_order: str = "ascending"

    def __post_init__(self):
        if isinstance(self.leaf_threshold, bool) or not isinstance(
                self.leaf_threshold, int) or self.leaf_threshold < 1:
            raise FsiValidationError(
                f"leaf_threshold must be an integer >= 1, got {self.leaf_threshold!r}")
        if self.subset_mode not in SUBSET_MODES:
            raise FsiValidationError(
                f"subset_mode must be one of {SUBSET_MODES}, got {self.subset_mode!r}")
        if self.element_order not in ELEMENT_ORDERS:
            raise FsiValidationError(
                f"element_order must be one of {ELEMENT_ORDERS}, got {self.element_order!r}")

    @classmethod
    def from_defaults(cls, leaf_threshold: int = None, subset_mode: str = None):
        '''
        Builds a config, taking unset fields from the package-level settings
        (fsi.leaf_threshold, fsi.subset_mode) at call time.
        '''
        return cls(
            leaf_threshold=fsi.leaf_threshold if leaf_threshold is None else leaf_threshold,
            subset_mode=subset_mode or fsi.subset_mode,
        )


@dataclass
class WorkCounters:
    """Work done by one query. Fresh (all zero) at query start."""

    hash_probes: int = 0
    matrix_lookups: int = 0
    nodes_visited: int = 0
    stopper_elements_scanned: int = 0

    def merge(self, other: "WorkCounters"):
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def __add__(self, other: "WorkCounters"):
        return WorkCounters().merge(self).merge(other)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass
class IndexStats:
    node_count: int = 0
    depth: int = 0
    matrix_bits: int = 0
    level_matrix_bits: list = field(default_factory=list)
    rank_entries: int = 0
    subset_entries: int = 0


class FsiNode(object):
    """
    One node of the intersection tree.

    handled_ids lists every set with a (possibly empty) subset at this node;
    large_ids are those whose subset has more than sqrt(node_cost) elements,
    and matrix[a, b] tells whether the subsets of large_ids[a] and
    large_ids[b] meet. In explicit mode `subsets` maps set id to its subset;
    in compact mode the subsets live in the index's rank arrays and the node
    only keeps its rank range [lo, hi).
    """

    __slots__ = ("node_cost", "depth", "handled_ids", "subsets", "large_ids",
                 "large_index", "matrix", "remarked", "left", "right", "lo",
                 "hi")

    def __init__(self, node_cost, depth, handled_ids, subsets=None):
        self.node_cost = node_cost
        self.depth = depth
        self.handled_ids = tuple(handled_ids)
        self.subsets = subsets
        self.large_ids = ()
        self.large_index = {}
        self.matrix = None
        self.remarked = None
        self.left = None
        self.right = None
        self.lo = None
        self.hi = None

    def __str__(self):
        return f"<fsi.FsiNode cost={self.node_cost} depth={self.depth}>"

    def __repr__(self):
        return (f"<fsi.FsiNode cost={self.node_cost} depth={self.depth} "
                f"large={list(self.large_ids)} remarked={self.remarked}>")

    @property
    def is_leaf(self):
        return self.left is None and self.right is None

    def set_large(self, large_ids, matrix):
        self.large_ids = tuple(large_ids)
        self.large_index = {sid: a for a, sid in enumerate(self.large_ids)}
        self.matrix = matrix if self.large_ids else None

    def walk(self):
        """Preorder iteration over this subtree."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if node.right is not None:
                stack.append(node.right)
            if node.left is not None:
                stack.append(node.left)


def _is_large(size, node_cost):
    return size * size > node_cost


def pair_counts(subsets):
    """
    Exact pairwise intersection sizes of a list of ascending element arrays.

    Returns a symmetric k x k int64 matrix whose diagonal holds the subset
    sizes. Only elements shared by two or more subsets generate work.
    """
    k = len(subsets)
    counts = np.zeros((k, k), dtype=np.int64)
    if k == 0:
        return counts
    total = sum(len(s) for s in subsets)

    if total <= SMALL_NODE:
        owners_of = {}
        for a, sub in enumerate(subsets):
            for x in sub.tolist():
                owners_of.setdefault(x, []).append(a)
        for owners in owners_of.values():
            if len(owners) < 2:
                continue
            for a in owners:
                for b in owners:
                    counts[a, b] += 1
    else:
        elems = np.concatenate(subsets)
        owners = np.repeat(np.arange(k, dtype=np.int64),
                           [len(s) for s in subsets])
        order = np.argsort(elems, kind="stable")
        elems = elems[order]
        owners = owners[order]
        starts = np.flatnonzero(np.r_[True, elems[1:] != elems[:-1]])
        sizes = np.diff(np.r_[starts, len(elems)])
        shared = sizes >= 2
        starts, sizes = starts[shared], sizes[shared]
        flat = counts.reshape(-1)
        # Cut the groups into batches whose expanded pair lists stay bounded.
        work = np.cumsum(sizes * sizes)
        begin = 0
        while begin < len(sizes):
            base = work[begin - 1] if begin else 0
            end = int(np.searchsorted(work, base + PAIR_BATCH, side="right"))
            end = max(end, begin + 1)
            g_start, g_size = starts[begin:end], sizes[begin:end]
            entry = (np.arange(int(g_size.sum())) -
                     np.repeat(np.cumsum(g_size) - g_size, g_size) +
                     np.repeat(g_start, g_size))
            per_entry = np.repeat(g_size, g_size)
            entry_start = np.repeat(g_start, g_size)
            first = np.repeat(entry, per_entry)
            second = (np.repeat(entry_start, per_entry) +
                      np.arange(len(first)) -
                      np.repeat(np.cumsum(per_entry) - per_entry, per_entry))
            keys = owners[first] * k + owners[second]
            flat += np.bincount(keys, minlength=k * k)
            begin = end

    for a, sub in enumerate(subsets):
        counts[a, a] = len(sub)
    return counts


def split_node(group, budget):
    '''
    Splits the element universe of a propagated group between two children.

    Elements are scanned in ascending order; each costs the number of group
    subsets containing it. Elements go to E1 while the running cost stays
    within budget; the first element that would overflow is remarked, and
    everything after it forms E2.

    Arguments:
        group (list): (set_id, subset) pairs, subsets ascending and duplicate free.
        budget (float): cost allowed on each side, n / 2 for a node of cost n.

    Returns:
        (E1, e, E2): ascending element arrays E1 and E2 and the remarked
            element e, or None when nothing overflows (E2 is then empty).
    '''
    if not group:
        return _EMPTY, None, _EMPTY
    elems, mult = np.unique(np.concatenate([np.asarray(s, dtype=np.uint64)
                                            for _, s in group]),
                            return_counts=True)
    running = np.cumsum(mult)
    cut = int(np.searchsorted(running, budget, side="right"))
    if cut == len(elems):
        return elems, None, _EMPTY
    return elems[:cut], int(elems[cut]), elems[cut + 1:]


def _split_subset(subset, e):
    cut = int(np.searchsorted(subset, e, side="left"))
    skip = cut + 1 if cut < len(subset) and int(subset[cut]) == e else cut
    return subset[:cut], subset[skip:]


class RootSummary(object):
    """
    Root-level structure answering intersection-empty and intersection-size
    queries: the large sets of the whole collection (more than sqrt(N)
    elements) with their pairwise overlap bits and exact overlap sizes.
    Small sets are answered by scanning at most sqrt(N) elements.
    """

    def __init__(self, collection, large_ids, sizes):
        self.collection = collection
        self.large_ids = tuple(large_ids)
        self.large_index = {sid: a for a, sid in enumerate(self.large_ids)}
        self.sizes = sizes
        self.matrix = sizes > 0

    def __repr__(self):
        return (f"<fsi.RootSummary N={self.collection.total_size} "
                f"large={len(self.large_ids)}>")

    @classmethod
    def build(cls, collection):
        n = collection.total_size
        large = [sid for sid, s in enumerate(collection.sets)
                 if _is_large(len(s), n)]
        sizes = pair_counts([collection.sets[sid] for sid in large])
        return cls(collection, large, sizes)

    def _smaller_first(self, i, j):
        col = self.collection
        col.check_id(i)
        col.check_id(j)
        if col.size(i) <= col.size(j):
            return i, j
        return j, i

    def _scan(self, small, other, counters, stop_at_first):
        table = self.collection.member_table(other)
        hits = 0
        for x in self.collection.sets[small].tolist():
            if counters is not None:
                counters.hash_probes += 1
                counters.stopper_elements_scanned += 1
            if x in table:
                hits += 1
                if stop_at_first:
                    break
        return hits

    def intersection_empty(self, i, j, counters: WorkCounters = None) -> bool:
        small, other = self._smaller_first(i, j)
        a = self.large_index.get(small)
        if a is None:
            return self._scan(small, other, counters, True) == 0
        if counters is not None:
            counters.matrix_lookups += 1
        return not bool(self.matrix[a, self.large_index[other]])

    def intersection_size(self, i, j, counters: WorkCounters = None) -> int:
        small, other = self._smaller_first(i, j)
        a = self.large_index.get(small)
        if a is None:
            return self._scan(small, other, counters, False)
        if counters is not None:
            counters.matrix_lookups += 1
        return int(self.sizes[a, self.large_index[other]])


class FsiIndex(object):
    """
    Fast set intersection index over a SetCollection.

    An unbalanced binary tree: each node keeps only its large sets, records
    which pairs of them overlap, and pushes their subsets down into two
    children of at most half its cost (plus one remarked element that
    belongs to neither child). A query walks down while both sets are large
    and overlapping, and scans the smaller subset at the first node where it
    is small.
    """

    def __init__(self, collection, root, config, summary, order=None):
        self.collection = collection
        self.root = root
        self.config = config
        self.summary = summary
        self.order = order
        self._set_ranks = None
        self._set_by_rank = None
        if config.subset_mode == "compact":
            self._index_ranks()

    def __str__(self):
        return f"<fsi.FsiIndex N={self.collection.total_size}>"

    def __repr__(self):
        return (f"<fsi.FsiIndex N={self.collection.total_size} "
                f"m={self.collection.m} mode={self.config.subset_mode} "
                f"leaf_threshold={self.config.leaf_threshold}>")

    def _index_ranks(self):
        order = self.order if self.order is not None else _EMPTY
        sorter = np.argsort(order, kind="stable")
        sorted_elems = order[sorter]
        self._set_ranks = []
        self._set_by_rank = []
        for s in self.collection.sets:
            ranks = np.sort(sorter[np.searchsorted(sorted_elems, s)])
            self._set_ranks.append(ranks)
            self._set_by_rank.append(order[ranks])

    @classmethod
    def build(cls, collection, config: BuildConfig = None):
        '''
        Builds the intersection tree over a collection.

        Arguments:
            collection (SetCollection): the sets to index.
            config (BuildConfig, optional): defaults to BuildConfig.from_defaults().

        Returns:
            index: new FsiIndex object
        '''
        config = config or BuildConfig.from_defaults()
        summary = RootSummary.build(collection)
        builder = _TreeBuilder(config)
        handled = {sid: s for sid, s in enumerate(collection.sets)}
        root = builder.build(handled, summary)
        order = None
        if config.subset_mode == "compact":
            order = (np.concatenate(builder.placed)
                     if builder.placed else _EMPTY.copy())
        index = cls(collection, root, config, summary, order=order)
        if logger.isEnabledFor(logging.INFO):
            stats = index.stats()
            logger.info(
                "built %s index: N=%d m=%d nodes=%d depth=%d matrix_bits=%d",
                config.subset_mode, collection.total_size, collection.m,
                stats.node_count, stats.depth, stats.matrix_bits)
        return index

    def subset(self, node, set_id):
        """The subset of set_id handled at node (ascending in explicit mode,
        rank order in compact mode). Empty if the set is not at the node."""
        if self._set_ranks is None:
            return node.subsets.get(set_id, _EMPTY)
        ranks = self._set_ranks[set_id]
        a = int(np.searchsorted(ranks, node.lo, side="left"))
        b = int(np.searchsorted(ranks, node.hi, side="left"))
        return self._set_by_rank[set_id][a:b]

    def intersect(self, i, j):
        '''
        Reports the intersection of sets i and j.

        Arguments:
            i (int): set id.
            j (int): set id.

        Returns:
            (elements, counters): ascending list of common elements and the
                WorkCounters of this query.
        '''
        col = self.collection
        tables = {i: col.member_table(i), j: col.member_table(j)}
        counters = WorkCounters()
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            counters.nodes_visited += 1
            sub_i = self.subset(node, i)
            sub_j = self.subset(node, j)
            if len(sub_i) == 0 or len(sub_j) == 0:
                continue
            if len(sub_i) <= len(sub_j):
                small, small_id, other_id = sub_i, i, j
            else:
                small, small_id, other_id = sub_j, j, i

            a = node.large_index.get(small_id)
            if a is None:
                # stopper node
                other = tables[other_id]
                for x in small.tolist():
                    counters.stopper_elements_scanned += 1
                    counters.hash_probes += 1
                    if x in other:
                        out.append(x)
                continue

            counters.matrix_lookups += 1
            if not node.matrix[a, node.large_index[other_id]]:
                continue
            e = node.remarked
            if e is not None:
                counters.hash_probes += 1
                if e in tables[i]:
                    counters.hash_probes += 1
                    if e in tables[j]:
                        out.append(e)
            if node.right is not None:
                stack.append(node.right)
            if node.left is not None:
                stack.append(node.left)

        out.sort()
        logger.debug("intersect(%d, %d): output=%d %s", i, j, len(out),
                     counters.to_dict())
        return out, counters

    def intersect_many(self, pairs, counters: WorkCounters = None):
        '''
        Runs intersect() over a sequence of (i, j) pairs.

        Arguments:
            pairs (iterable): (set id, set id) tuples.
            counters (WorkCounters, optional): receives the summed work.

        Returns:
            results (list): one ascending element list per pair, in order.
        '''
        results = []
        for i, j in pairs:
            common, work = self.intersect(i, j)
            if counters is not None:
                counters.merge(work)
            results.append(common)
        return results

    def intersection_empty(self, i, j, counters: WorkCounters = None) -> bool:
        return self.summary.intersection_empty(i, j, counters)

    def intersection_size(self, i, j, counters: WorkCounters = None) -> int:
        return self.summary.intersection_size(i, j, counters)

    def depth_bound(self):
        n = self.collection.total_size
        if n <= self.config.leaf_threshold:
            return 1
        return math.ceil(math.log2(n / self.config.leaf_threshold)) + 1

    def stats(self):
        stats = IndexStats()
        for node in self.root.walk():
            stats.node_count += 1
            stats.depth = max(stats.depth, node.depth + 1)
            while len(stats.level_matrix_bits) <= node.depth:
                stats.level_matrix_bits.append(0)
            bits = len(node.large_ids)**2
            stats.matrix_bits += bits
            stats.level_matrix_bits[node.depth] += bits
            if node.subsets is not None:
                stats.subset_entries += sum(
                    len(s) for s in node.subsets.values())
        if self._set_ranks is not None:
            stats.rank_entries = sum(len(r) for r in self._set_ranks)
        return stats

    def validate(self, matrix_check_limit: int = None):
        '''
        Walks the tree and checks every structural invariant, raising
        FsiConsistencyError on the first violation.

        Arguments:
            matrix_check_limit (int, optional): brute-force the overlap matrix
                only at nodes with at most this many large sets. None checks
                every node.
        '''
        n_total = self.collection.total_size
        if self.root.node_cost != n_total:
            raise FsiConsistencyError(
                f"root cost {self.root.node_cost} != N {n_total}")
        stats = self.stats()
        if n_total and stats.depth > self.depth_bound():
            raise FsiConsistencyError(
                f"depth {stats.depth} exceeds bound {self.depth_bound()}")
        for bits in stats.level_matrix_bits:
            if bits > n_total:
                raise FsiConsistencyError(
                    f"a level stores {bits} matrix bits for N={n_total}")
        if self._set_ranks is not None and stats.rank_entries != n_total:
            raise FsiConsistencyError(
                f"{stats.rank_entries} rank entries for N={n_total}")
        for node in self.root.walk():
            self._validate_node(node, matrix_check_limit)

    def _validate_node(self, node, matrix_check_limit):
        where = f"node at depth {node.depth} (cost {node.node_cost})"
        subs = {sid: self.subset(node, sid) for sid in node.handled_ids}
        n = sum(len(s) for s in subs.values())
        if n != node.node_cost:
            raise FsiConsistencyError(f"{where}: subsets sum to {n}")
        k = len(node.large_ids)
        if k * k > n:
            raise FsiConsistencyError(f"{where}: {k} large sets")
        if node.large_ids:
            expected = tuple(sid for sid in node.handled_ids
                             if _is_large(len(subs[sid]), n))
            if expected != node.large_ids:
                raise FsiConsistencyError(
                    f"{where}: large sets {node.large_ids} != {expected}")
            m = node.matrix
            if m.shape != (k, k) or not np.array_equal(m, m.T):
                raise FsiConsistencyError(f"{where}: matrix not symmetric")
            if not m.diagonal().all():
                raise FsiConsistencyError(f"{where}: matrix diagonal not set")
            if matrix_check_limit is None or k <= matrix_check_limit:
                plain = [set(subs[sid].tolist()) for sid in node.large_ids]
                for a in range(k):
                    for b in range(a + 1, k):
                        if bool(m[a, b]) == plain[a].isdisjoint(plain[b]):
                            raise FsiConsistencyError(
                                f"{where}: matrix bit ({node.large_ids[a]}, "
                                f"{node.large_ids[b]}) is wrong")
        elif not node.is_leaf:
            raise FsiConsistencyError(f"{where}: inner node without large sets")

        children = [c for c in (node.left, node.right) if c is not None]
        for child in children:
            if child.node_cost > math.ceil(n / 2):
                raise FsiConsistencyError(
                    f"{where}: child cost {child.node_cost}")
            if not set(child.handled_ids) <= set(node.large_ids):
                raise FsiConsistencyError(
                    f"{where}: a child handles a set that is not large here")
            if child.lo is not None and not (node.lo <= child.lo <= child.hi <= node.hi):
                raise FsiConsistencyError(f"{where}: child rank range escapes")
        if not children:
            return
        e = node.remarked
        for sid in node.large_ids:
            whole = subs[sid].tolist()
            parts = [self.subset(c, sid).tolist() for c in children]
            pieces = [x for part in parts for x in part]
            if e is not None and e in set(whole):
                pieces.append(e)
            if len(pieces) != len(whole) or set(pieces) != set(whole):
                raise FsiConsistencyError(
                    f"{where}: set {sid} is not partitioned between children")


class _TreeBuilder(object):
    """Recursive construction state. `placed` collects the compact-mode
    element order chunk by chunk."""

    def __init__(self, config):
        self.config = config
        self.compact = config.subset_mode == "compact"
        self.placed = []
        self.position = 0

    def _place(self, elements):
        if len(elements):
            self.placed.append(np.asarray(elements, dtype=np.uint64))
            self.position += len(elements)

    def build(self, handled, summary):
        return self._build_node(handled, 0, summary)

    def _build_node(self, handled, depth, summary=None):
        n = sum(len(s) for s in handled.values())
        node = FsiNode(n, depth, handled.keys(),
                       subsets=None if self.compact else handled)
        node.lo = self.position if self.compact else None

        large = [sid for sid, s in handled.items() if _is_large(len(s), n)]
        if n <= self.config.leaf_threshold or not large:
            if self.compact:
                self._place(_union(handled.values()))
                node.hi = self.position
            return node

        if summary is not None:
            counts = summary.sizes
        else:
            counts = pair_counts([handled[sid] for sid in large])
        node.set_large(large, counts > 0)

        group = [(sid, handled[sid]) for sid in large]
        propagated = sum(len(s) for _, s in group)
        if 2 * propagated > n:
            _, e, _ = split_node(group, n / 2)
            left, right = {}, {}
            for sid, sub in group:
                left[sid], right[sid] = _split_subset(sub, e)
            node.remarked = e
        else:
            left = dict(group)
            right = None

        logger.debug("node depth=%d cost=%d large=%d propagated=%d remarked=%s",
                     depth, n, len(large), propagated, node.remarked)
        node.left = self._build_node(left, depth + 1)
        if right is not None:
            node.right = self._build_node(right, depth + 1)

        if self.compact:
            universe = _union(handled.values())
            kept = _union(s for _, s in group)
            if node.remarked is not None:
                kept = kept[kept != node.remarked]
            dropped = np.setdiff1d(universe, kept, assume_unique=True)
            self._place(dropped)
            node.hi = self.position
        return node


def _union(arrays):
    arrays = [a for a in arrays if len(a)]
    if not arrays:
        return _EMPTY
    return np.unique(np.concatenate(arrays))
