import os

from fsi.set_store import SetCollection
from fsi.fsi_index import BuildConfig, FsiIndex, RootSummary, WorkCounters
from fsi.ccq import CcqIndex
from fsi.doc_index import Corpus, DocIndex, PairIndex

leaf_threshold = int(os.environ.get("FSI_LEAF_THRESHOLD", 4))
subset_mode = os.environ.get("FSI_SUBSET_MODE", "explicit")
precompute_budget_bytes = int(
    os.environ.get("FSI_PRECOMPUTE_BUDGET", 256 * 1024 * 1024))
log_level = os.environ.get("FSI_LOG_LEVEL", "WARNING")
