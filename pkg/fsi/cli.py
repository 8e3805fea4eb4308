import argparse
import logging
import sys

import fsi
from fsi import bench, codec, generator, utils
from fsi.ccq import CcqIndex
from fsi.doc_index import Corpus, DocIndex
from fsi.errors import FsiConsistencyError, FsiError
from fsi.fsi_index import BuildConfig, FsiIndex, WorkCounters
from fsi.set_store import SetCollection

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _config(args):
    return BuildConfig.from_defaults(leaf_threshold=args.leaf_threshold,
                                     subset_mode=args.mode)


def _index(args):
    if args.index:
        return codec.load(args.index)
    if not args.sets:
        raise FsiError("one of --sets or --index is required")
    col = SetCollection.from_file(args.sets, dedupe=args.dedupe)
    return FsiIndex.build(col, _config(args))


def _emit_counters(args, counters):
    if args.counters:
        print(counters.to_json(), file=sys.stderr)


def cmd_build(args):
    col = SetCollection.from_file(args.sets, dedupe=args.dedupe)
    index = FsiIndex.build(col, _config(args))
    if args.validate:
        index.validate(matrix_check_limit=args.matrix_check_limit)
    codec.save(index, args.out)
    stats = index.stats()
    print(f"N={col.total_size} m={col.m} nodes={stats.node_count} "
          f"depth={stats.depth} matrix_bits={stats.matrix_bits}")


def cmd_query(args):
    index = _index(args)
    common, counters = index.intersect(args.i, args.j)
    for x in common:
        print(x)
    _emit_counters(args, counters)


def cmd_empty(args):
    index = _index(args)
    counters = WorkCounters()
    print("true" if index.intersection_empty(args.i, args.j, counters) else "false")
    _emit_counters(args, counters)


def cmd_size(args):
    index = _index(args)
    counters = WorkCounters()
    print(index.intersection_size(args.i, args.j, counters))
    _emit_counters(args, counters)


def cmd_ccq(args):
    with open(args.array, "rb") as fh:
        colors = utils.read_color_array(fh)
    index = CcqIndex.build(colors, _config(args))
    counters = WorkCounters()
    found = index.common_colors(utils.parse_interval(args.i1),
                                utils.parse_interval(args.i2),
                                counters=counters)
    for color in found:
        print(color)
    _emit_counters(args, counters)


def cmd_docindex_build(args):
    index = DocIndex.build(Corpus.load(args.corpus), _config(args))
    index.save(args.out)
    print(f"documents={len(index.corpus)} suffixes={len(index.gsa)}")


def cmd_docindex_query(args):
    index = DocIndex.load(args.index)
    if args.q is None:
        docs = index.list_docs_one(args.p)
    else:
        docs = index.list_docs_two(args.p, args.q)
    for doc_id in docs:
        print(doc_id)


def cmd_gen(args):
    spec = generator.GenSpec(m=args.m,
                             size_dist=generator.parse_size_dist(args.size_dist),
                             universe=args.universe,
                             target_overlap=args.overlap,
                             seed=args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            generator.write_instance(spec, fh)
    else:
        generator.write_instance(spec, sys.stdout)


def cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else bench.DEFAULT_SIZES
    specs = [generator.bench_spec(n, args.m, args.overlap, args.seed + k)
             for k, n in enumerate(sizes)]
    rows = bench.run_bench(specs, pairs=args.pairs, config=_config(args),
                           timing=not args.no_timing, workers=args.workers)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            bench.write_csv(rows, fh)
    else:
        bench.write_csv(rows, sys.stdout)
    fit = bench.fit_exponent(rows)
    if fit.skipped:
        print(f"regression skipped: {fit.skipped}", file=sys.stderr)
    else:
        print(f"fitted exponent b={fit.slope:.4f} over {fit.points} queries",
              file=sys.stderr)


def _add_build_flags(parser):
    parser.add_argument("--mode", choices=["explicit", "compact"],
                        help="subset representation (default: fsi.subset_mode)")
    parser.add_argument("--leaf-threshold", type=int,
                        help="node cost at which the tree stops splitting")


def _add_pair_query(sub, name, func, help_text):
    parser = sub.add_parser(name, help=help_text)
    parser.add_argument("--sets", help="sets file to build an index from")
    parser.add_argument("--index", help="index written by `fsi build`")
    parser.add_argument("-i", type=int, required=True, help="first set id")
    parser.add_argument("-j", type=int, required=True, help="second set id")
    parser.add_argument("--dedupe", action="store_true")
    parser.add_argument("--counters", action="store_true",
                        help="print work counters as JSON on stderr")
    _add_build_flags(parser)
    parser.set_defaults(func=func)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fsi", description="Fast set intersection index tools.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build and save an index")
    p.add_argument("--sets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dedupe", action="store_true")
    p.add_argument("--validate", action="store_true",
                   help="run the invariant walk before saving")
    p.add_argument("--matrix-check-limit", type=int, default=32)
    _add_build_flags(p)
    p.set_defaults(func=cmd_build)

    _add_pair_query(sub, "query", cmd_query, "list the intersection of two sets")
    _add_pair_query(sub, "empty", cmd_empty, "test whether two sets are disjoint")
    _add_pair_query(sub, "size", cmd_size, "count the common elements of two sets")

    p = sub.add_parser("ccq", help="common colors of two array intervals")
    p.add_argument("--array", required=True, help="color array file")
    p.add_argument("--i1", required=True, help="first interval, l:r")
    p.add_argument("--i2", required=True, help="second interval, l:r")
    p.add_argument("--counters", action="store_true")
    _add_build_flags(p)
    p.set_defaults(func=cmd_ccq)

    p = sub.add_parser("docindex", help="two-pattern document listing")
    doc_sub = p.add_subparsers(dest="doc_command", required=True)
    b = doc_sub.add_parser("build")
    b.add_argument("--corpus", required=True,
                   help="directory of .txt files or a JSON-lines file")
    b.add_argument("--out", required=True)
    _add_build_flags(b)
    b.set_defaults(func=cmd_docindex_build)
    q = doc_sub.add_parser("query")
    q.add_argument("--index", required=True)
    q.add_argument("-p", required=True)
    q.add_argument("-q", help="second pattern; omit to list documents of -p")
    q.set_defaults(func=cmd_docindex_query)

    p = sub.add_parser("gen", help="write a random sets file")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--size-dist", default="uniform:1:100",
                   help="uniform:lo:hi or zipf:s:max")
    p.add_argument("--universe", type=int, default=1 << 32)
    p.add_argument("--overlap", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run the scaling benchmark, CSV output")
    p.add_argument("--sizes", help="comma separated total sizes N")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--overlap", type=float, default=0.05)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_nanos=0 for reproducible output")
    p.add_argument("--out")
    _add_build_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    level = logging.DEBUG if args.verbose else fsi.log_level
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except FsiConsistencyError as err:
        logger.debug("invariant check failed", exc_info=True)
        print(f"internal error: {err.message}", file=sys.stderr)
        return EXIT_INTERNAL
    except FsiError as err:
        print(f"error: {err.message}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
