import logging

import numpy as np

from fsi import utils
from fsi.errors import FsiSetIdError, FsiValidationError

logger = logging.getLogger(__name__)


class SetCollection(object):
    """
    m sets over an unsigned 64-bit element universe.

    Each set is kept as an ascending numpy array (for slicing and binary
    search), a frozenset (set -> element membership) and, across the whole
    collection, an inverse table mapping every element to the ids of the sets
    that contain it. Set ids are 0-based positions in input order. The object
    is immutable after construction.
    """

    def __init__(self, sets):
        self.sets = [np.asarray(s, dtype=np.uint64) for s in sets]
        self._members = [frozenset(s.tolist()) for s in self.sets]
        inverse = {}
        for set_id, elements in enumerate(self.sets):
            for x in elements.tolist():
                inverse.setdefault(x, []).append(set_id)
        self._inverse = {x: tuple(ids) for x, ids in inverse.items()}
        self.total_size = int(sum(len(s) for s in self.sets))
        self.universe_bound = max((int(s[-1]) for s in self.sets if len(s)),
                                  default=0)

    def __len__(self):
        return len(self.sets)

    def __str__(self):
        return f"<fsi.SetCollection m={self.m} N={self.total_size}>"

    def __repr__(self):
        return (f"<fsi.SetCollection m={self.m} N={self.total_size} "
                f"universe_bound={self.universe_bound}>")

    @property
    def m(self):
        return len(self.sets)

    @classmethod
    def from_sets(cls, sets, dedupe: bool = False):
        '''
        Builds a collection from in-memory element lists.

        Arguments:
            sets (list): one iterable of non-negative integers per set.
            dedupe (bool): drop repeated elements instead of rejecting them.

        Returns:
            collection: new SetCollection object
        '''
        cleaned = []
        for set_id, elements in enumerate(sets):
            elements = [int(x) for x in elements]
            for x in elements:
                if x < 0 or x > utils.MAX_ELEMENT:
                    raise FsiValidationError(
                        f"set {set_id}: element {x} is not an unsigned 64-bit id")
            unique = sorted(set(elements))
            if len(unique) != len(elements) and not dedupe:
                seen = set()
                for x in elements:
                    if x in seen:
                        raise FsiValidationError(
                            f"set {set_id} lists element {x} more than once")
                    seen.add(x)
            cleaned.append(unique)
        col = cls(cleaned)
        logger.debug("loaded %d sets, N=%d", col.m, col.total_size)
        return col

    @classmethod
    def load(cls, source, dedupe: bool = False):
        '''
        Reads a collection from a stream in the Sets File Format.

        Arguments:
            source: binary or text stream, one set per line.
            dedupe (bool): sanitize repeated elements instead of failing.

        Returns:
            collection: new SetCollection object
        '''
        return cls.from_sets(utils.read_sets_lines(source), dedupe=dedupe)

    @classmethod
    def from_file(cls, file_path: str, dedupe: bool = False):
        with open(file_path, "rb") as fh:
            return cls.load(fh, dedupe=dedupe)

    def write(self, stream):
        write_sets(self, stream)

    def check_id(self, set_id):
        if (isinstance(set_id, bool)
                or not isinstance(set_id, (int, np.integer))
                or not 0 <= set_id < self.m):
            raise FsiSetIdError(
                f"set id {set_id} is out of range for {self.m} sets")

    def membership(self, set_id, x) -> bool:
        '''
        Tests whether element x is in set set_id, in expected O(1).
        '''
        self.check_id(set_id)
        return int(x) in self._members[set_id]

    def member_table(self, set_id):
        """The hash table behind membership(set_id, .), for hot query loops."""
        self.check_id(set_id)
        return self._members[set_id]

    def sets_of(self, x):
        '''
        Lists the ids of all sets containing element x, ascending.
        '''
        return list(self._inverse.get(int(x), ()))

    def size(self, set_id) -> int:
        self.check_id(set_id)
        return len(self.sets[set_id])

    def elements(self, set_id):
        self.check_id(set_id)
        return self.sets[set_id].tolist()


def write_sets(collection, stream):
    '''
    Writes a collection in the Sets File Format, one ascending set per line.

    Arguments:
        collection (SetCollection): the sets to write.
        stream: text stream.
    '''
    utils.write_sets_lines((s.tolist() for s in collection.sets), stream)
