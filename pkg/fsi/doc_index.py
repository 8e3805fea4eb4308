import logging
import zipfile
from dataclasses import dataclass, field

import numpy as np

from fsi import utils
from fsi.ccq import CcqIndex, ColorMarker
from fsi.errors import (FsiConsistencyError, FsiFormatError,
                        FsiValidationError)
from fsi.fsi_index import BuildConfig
from fsi.suffix_array import GeneralizedSuffixArray, SaInterval

logger = logging.getLogger(__name__)


@dataclass
class Corpus:
    """Documents and their external ids; texts[k] has the id ids[k]."""

    ids: list = field(default_factory=list)
    texts: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.ids) != len(self.texts):
            raise FsiValidationError("every document needs exactly one id")
        if len(set(self.ids)) != len(self.ids):
            raise FsiValidationError("document ids must be unique")

    def __len__(self):
        return len(self.texts)

    @classmethod
    def from_texts(cls, texts):
        texts = list(texts)
        return cls(list(range(1, len(texts) + 1)), texts)

    @classmethod
    def from_records(cls, records):
        records = list(records)
        return cls([r[0] for r in records], [r[1] for r in records])

    @classmethod
    def load(cls, path: str):
        '''
        Reads a corpus from a directory of .txt files or a JSON-lines file
        (see fsi.utils.load_corpus_records for the precedence rules).
        '''
        return cls.from_records(utils.load_corpus_records(path))


def _encode(pattern: str) -> bytes:
    if not pattern:
        raise FsiValidationError("pattern must not be empty")
    return pattern.encode("utf-8")


class DocIndex(object):
    """
    Two-pattern document listing.

    A generalized suffix array turns each pattern into one rank interval, the
    colors array maps ranks to documents, and a CcqIndex over the colors
    intersects the two intervals' document sets.
    """

    def __init__(self, corpus, gsa, ccq):
        self.corpus = corpus
        self.gsa = gsa
        self.ccq = ccq
        self._ids = np.asarray(corpus.ids, dtype=np.int64)

    def __str__(self):
        return f"<fsi.DocIndex docs={len(self.corpus)}>"

    def __repr__(self):
        return f"<fsi.DocIndex docs={len(self.corpus)} suffixes={len(self.gsa)}>"

    @property
    def sa(self):
        """Suffix start positions (1-based) in lexicographic order."""
        return self.gsa.sa + 1

    @property
    def colors(self):
        return self.gsa.colors

    @classmethod
    def build(cls, corpus, config: BuildConfig = None):
        '''
        Builds the suffix array, colors array and common colors index.

        Arguments:
            corpus (Corpus or list): documents; a plain list of strings gets
                ids 1..c in order.
            config (BuildConfig, optional): settings for the inner FsiIndex.

        Returns:
            index: new DocIndex object
        '''
        if not isinstance(corpus, Corpus):
            corpus = Corpus.from_texts(corpus)
        docs = [t.encode("utf-8") for t in corpus.texts]
        if not any(docs):
            raise FsiValidationError("corpus needs at least one nonempty document")
        gsa = GeneralizedSuffixArray.build(docs)
        ccq = CcqIndex.build(gsa.colors, config)
        logger.info("built document index: %d documents, %d suffixes",
                    len(corpus), len(gsa))
        return cls(corpus, gsa, ccq)

    def _external(self, colors):
        return sorted(self._ids[np.asarray(colors, dtype=np.int64) - 1].tolist())

    def pattern_interval(self, pattern: str) -> SaInterval:
        return self.gsa.interval(_encode(pattern))

    def list_docs_one(self, pattern: str):
        '''
        Ids of the documents containing pattern, ascending.
        '''
        return self._external(
            self.gsa.distinct_colors(self.pattern_interval(pattern)))

    def list_docs_two(self, p: str, q: str, marker: ColorMarker = None,
                      counters=None):
        '''
        Ids of the documents containing both p and q, ascending.

        Disjoint pattern intervals go through the common colors index. Nested
        intervals mean one pattern extends the other, so the documents of the
        inner interval are the answer.
        '''
        first = self.pattern_interval(p)
        second = self.pattern_interval(q)
        if first.empty or second.empty:
            return []
        if first.disjoint(second):
            colors = self.ccq.common_colors((first.lo, first.hi),
                                            (second.lo, second.hi),
                                            marker=marker,
                                            counters=counters)
        elif first.contains(second):
            colors = self.gsa.distinct_colors(second)
        elif second.contains(first):
            colors = self.gsa.distinct_colors(first)
        else:
            raise FsiConsistencyError(
                f"pattern intervals {first} and {second} partially overlap")
        return self._external(colors)

    def save(self, file_path: str):
        config = self.ccq.fsi.config
        with open(file_path, "wb") as fh:
            np.savez(fh,
                     text=np.frombuffer(self.gsa.text, dtype=np.uint8),
                     sa=self.gsa.sa,
                     colors=self.gsa.colors,
                     starts=self.gsa.starts,
                     ids=self._ids,
                     leaf_threshold=np.int64(config.leaf_threshold),
                     subset_mode=np.array(config.subset_mode))
        logger.info("wrote document index to %s", file_path)

    @classmethod
    def load(cls, file_path: str):
        '''
        Reads an index written by save(). The common colors index is rebuilt
        from the stored colors array.
        '''
        try:
            with np.load(file_path, allow_pickle=False) as data:
                text = data["text"].tobytes()
                sa = data["sa"].astype(np.int64)
                colors = data["colors"].astype(np.int64)
                starts = data["starts"].astype(np.int64)
                ids = data["ids"].tolist()
                config = BuildConfig(leaf_threshold=int(data["leaf_threshold"]),
                                     subset_mode=str(data["subset_mode"]))
        except (KeyError, ValueError, EOFError, OSError,
                zipfile.BadZipFile) as err:
            if isinstance(err, FileNotFoundError):
                raise
            raise FsiFormatError(f"not a document index: {err}") from None
        ends = np.r_[starts[1:], len(text)] - 1
        texts = [text[a:b].decode("utf-8") for a, b in zip(starts, ends)]
        gsa = GeneralizedSuffixArray(text, sa, colors, starts)
        return cls(Corpus(ids, texts), gsa, CcqIndex.build(colors, config))


class PairIndex(object):
    """
    Two-dimensional substring index over string pairs.

    The suffix ranks of all first components come first in one combined
    colors array (color = 1-based pair id), followed by the suffix ranks of
    all second components, so a first-component interval and a
    second-component interval never overlap and a single CcqIndex answers
    the pair query.
    """

    def __init__(self, pairs, firsts, seconds, ccq):
        self.pairs = pairs
        self.firsts = firsts
        self.seconds = seconds
        self.ccq = ccq
        self.offset = len(firsts)

    def __repr__(self):
        return f"<fsi.PairIndex pairs={len(self.pairs)}>"

    @classmethod
    def build(cls, pairs, config: BuildConfig = None):
        '''
        Arguments:
            pairs (list): (first, second) string tuples; pair ids are 1-based
                positions in this list.

        Returns:
            index: new PairIndex object
        '''
        pairs = [(a, b) for a, b in pairs]
        if not pairs:
            raise FsiValidationError("need at least one string pair")
        firsts = GeneralizedSuffixArray.build([a.encode("utf-8") for a, _ in pairs])
        seconds = GeneralizedSuffixArray.build([b.encode("utf-8") for _, b in pairs])
        combined = np.concatenate([firsts.colors, seconds.colors])
        if len(combined) == 0:
            raise FsiValidationError("all strings in the pair database are empty")
        ccq = CcqIndex.build(combined, config)
        logger.info("built pair index: %d pairs", len(pairs))
        return cls(pairs, firsts, seconds, ccq)

    def pair_query(self, first: str, second: str, marker: ColorMarker = None):
        '''
        Ids of the pairs whose first string contains `first` and whose second
        string contains `second`, ascending.
        '''
        a = self.firsts.interval(_encode(first))
        b = self.seconds.interval(_encode(second))
        if a.empty or b.empty:
            return []
        return self.ccq.common_colors(
            (a.lo, a.hi), (b.lo + self.offset, b.hi + self.offset),
            marker=marker)
