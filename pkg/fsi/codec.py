"""
Binary persistence for FsiIndex: the "FSI1" container.

All integers are little-endian. Layout:

    magic            4 bytes  b"FSI1"
    version          u16      1
    subset_mode      u8       0 explicit, 1 compact
    leaf_threshold   u32
    m                u64      number of sets
    m x set          u64 length, then length x u64 elements (ascending)
    U                u64      length of the compact element order (0 in explicit mode)
    U x u64                   element at each rank
    summary          u64 k, k x u64 large set ids, k*k x i64 overlap sizes
    node_count       u64
    node_count x node, in preorder (node, left subtree, right subtree):
        flags        u8       bit0 left child, bit1 right child, bit2 remarked
        node_cost    u64
        remarked     u64      0 when absent
        lo, hi       u64 u64  compact rank range, 0 0 in explicit mode
        h            u64      handled set count, then h x u64 set ids
        explicit mode only: h x (u64 length, length x u64 subset elements)
        k            u64      large set count, then k x u64 large set ids
        matrix       ceil(k*k / 8) bytes, row-major bits, numpy packbits order

Set rank arrays are not stored: they are a pure function of the sets and the
element order. dumps(loads(data)) == data for every valid container.
"""
import io
import logging
import struct

import numpy as np

from fsi.errors import FsiFormatError
from fsi.fsi_index import BuildConfig, FsiIndex, FsiNode, RootSummary
from fsi.set_store import SetCollection

logger = logging.getLogger(__name__)

MAGIC = b"FSI1"
VERSION = 1
MODES = {"explicit": 0, "compact": 1}
HAS_LEFT, HAS_RIGHT, HAS_REMARKED = 1, 2, 4


class _Writer(object):

    def __init__(self):
        self.buf = io.BytesIO()

    def u8(self, v):
        self.buf.write(struct.pack("<B", v))

    def u16(self, v):
        self.buf.write(struct.pack("<H", v))

    def u32(self, v):
        self.buf.write(struct.pack("<I", v))

    def u64(self, v):
        self.buf.write(struct.pack("<Q", v))

    def u64s(self, values):
        arr = np.asarray(values, dtype="<u8")
        self.u64(len(arr))
        self.buf.write(arr.tobytes())

    def raw(self, data):
        self.buf.write(data)


class _Reader(object):

    def __init__(self, data):
        self.data = data
        self.pos = 0

    def _take(self, size):
        if self.pos + size > len(self.data):
            raise FsiFormatError(
                f"container truncated at byte {self.pos}, wanted {size} more")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def u8(self):
        return struct.unpack("<B", self._take(1))[0]

    def u16(self):
        return struct.unpack("<H", self._take(2))[0]

    def u32(self):
        return struct.unpack("<I", self._take(4))[0]

    def u64(self):
        return struct.unpack("<Q", self._take(8))[0]

    def u64s(self, dtype=np.uint64):
        count = self.u64()
        arr = np.frombuffer(self._take(8 * count), dtype="<u8")
        return arr.astype(dtype)

    def raw(self, size):
        return self._take(size)


def dumps(index: FsiIndex) -> bytes:
    '''
    Serializes an index into an FSI1 container.
    '''
    w = _Writer()
    w.raw(MAGIC)
    w.u16(VERSION)
    w.u8(MODES[index.config.subset_mode])
    w.u32(index.config.leaf_threshold)
    w.u64(index.collection.m)
    for s in index.collection.sets:
        w.u64s(s)
    w.u64s(index.order if index.order is not None else [])

    summary = index.summary
    w.u64s(summary.large_ids)
    w.raw(np.asarray(summary.sizes, dtype="<i8").tobytes())

    nodes = list(index.root.walk())
    w.u64(len(nodes))
    compact = index.config.subset_mode == "compact"
    for node in nodes:
        flags = 0
        if node.left is not None:
            flags |= HAS_LEFT
        if node.right is not None:
            flags |= HAS_RIGHT
        if node.remarked is not None:
            flags |= HAS_REMARKED
        w.u8(flags)
        w.u64(node.node_cost)
        w.u64(node.remarked if node.remarked is not None else 0)
        w.u64(node.lo if compact else 0)
        w.u64(node.hi if compact else 0)
        w.u64s(node.handled_ids)
        if not compact:
            for sid in node.handled_ids:
                w.u64s(node.subsets[sid])
        w.u64s(node.large_ids)
        if node.large_ids:
            w.raw(np.packbits(node.matrix.reshape(-1)).tobytes())
    return w.buf.getvalue()


def loads(data: bytes) -> FsiIndex:
    '''
    Rebuilds an index from an FSI1 container.

    Raises:
        FsiFormatError: bad magic, unknown version or mode, truncated data.
    '''
    r = _Reader(bytes(data))
    if r.raw(4) != MAGIC:
        raise FsiFormatError("missing FSI1 magic bytes")
    version = r.u16()
    if version != VERSION:
        raise FsiFormatError(f"unsupported container version {version}")
    mode_code = r.u8()
    modes = {code: name for name, code in MODES.items()}
    if mode_code not in modes:
        raise FsiFormatError(f"unknown subset mode {mode_code}")
    config = BuildConfig(leaf_threshold=r.u32(), subset_mode=modes[mode_code])
    compact = config.subset_mode == "compact"

    m = r.u64()
    collection = SetCollection([r.u64s() for _ in range(m)])
    order = r.u64s()

    large_ids = r.u64s(dtype=np.int64).tolist()
    k = len(large_ids)
    sizes = np.frombuffer(r.raw(8 * k * k), dtype="<i8").astype(
        np.int64).reshape(k, k)
    summary = RootSummary(collection, large_ids, sizes)

    count = r.u64()
    flat = []
    for _ in range(count):
        flags = r.u8()
        cost = r.u64()
        remarked = r.u64()
        lo, hi = r.u64(), r.u64()
        handled = r.u64s(dtype=np.int64).tolist()
        subsets = None
        if not compact:
            subsets = {sid: r.u64s() for sid in handled}
        node = FsiNode(cost, 0, handled, subsets=subsets)
        if flags & HAS_REMARKED:
            node.remarked = remarked
        if compact:
            node.lo, node.hi = lo, hi
        large = r.u64s(dtype=np.int64).tolist()
        matrix = None
        if large:
            nbits = len(large) * len(large)
            packed = np.frombuffer(r.raw((nbits + 7) // 8), dtype=np.uint8)
            matrix = np.unpackbits(packed)[:nbits].astype(bool).reshape(
                len(large), len(large))
        node.set_large(large, matrix)
        flat.append((node, flags))
    if r.pos != len(r.data):
        raise FsiFormatError(f"{len(r.data) - r.pos} trailing bytes")
    if not flat:
        raise FsiFormatError("container has no root node")

    root = _link_preorder(flat)
    return FsiIndex(collection, root, config, summary,
                    order=order if compact else None)


def _link_preorder(flat):
    pos = 0

    def take(depth):
        nonlocal pos
        if pos >= len(flat):
            raise FsiFormatError("node list ends inside the tree")
        node, flags = flat[pos]
        pos += 1
        node.depth = depth
        if flags & HAS_LEFT:
            node.left = take(depth + 1)
        if flags & HAS_RIGHT:
            node.right = take(depth + 1)
        return node

    root = take(0)
    if pos != len(flat):
        raise FsiFormatError(f"{len(flat) - pos} nodes outside the tree")
    return root


def save(index: FsiIndex, file_path: str):
    data = dumps(index)
    with open(file_path, "wb") as fh:
        fh.write(data)
    logger.info("wrote %d-byte index to %s", len(data), file_path)


def load(file_path: str) -> FsiIndex:
    with open(file_path, "rb") as fh:
        return loads(fh.read())
