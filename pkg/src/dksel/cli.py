"""
Command line entry point: ``dksel select|sweep|bench|synth``.

Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""
import argparse
import json
import logging
import sys

from dksel.client import SelectClient
from dksel.errors import DkselError, InvalidParamsError
from dksel.metrics import DEFAULT_THETAS, summarize_sweep
from dksel.selectors import SELECTORS
from dksel.settings import Settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3


def _floats(text: str):
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma-separated numbers, got {text!r}')


def _ints(text: str):
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma-separated integers, got {text!r}')


def _methods(text: str):
    return [part.strip() for part in text.split(',') if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dksel', description='Diverse top-k selection over an embedding pool')
    parser.add_argument('-s', '--settings', help='Settings file (json format)')
    parser.add_argument('--log-level', default='WARNING', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    commands = parser.add_subparsers(dest='command', required=True)

    def pool_flags(sub, query_required=True):
        sub.add_argument('--pool', help='DKSEL1 embedding file, overrides the "pool" setting')
        sub.add_argument('--query', required=query_required, help='Gold file (jsonl format)')
        sub.add_argument('--query-pool', help='DKSEL1 file that embedding_ref entries point into')
        sub.add_argument('--k', type=int, help='Selection budget')
        sub.add_argument('--lambda', dest='lam', type=float, help='Penalty lambda (>= 2)')
        sub.add_argument('--seed', type=int, help='Seed for restart vertices, echoed into the output configuration')
        sub.add_argument('--restarts', type=int, help='Extra Frank-Wolfe starts, the best vertex wins')
        sub.add_argument('--polish', action='store_true', default=None,
                         help='Pairwise-swap ascent on every Frank-Wolfe vertex')

    select = commands.add_parser('select', help='Select k items for one query')
    pool_flags(select)
    select.add_argument('--query-id', help='Query to run, default the first in the file')
    select.add_argument('--method', default='fw', choices=list(SELECTORS))
    select.add_argument('--theta', type=float, help='Relevance/diversity trade-off in [0, 1]')
    select.add_argument('--max-iters', type=int, help='Frank-Wolfe iteration cap')
    select.add_argument('-o', '--out', help='Output file name/path, default stdout')

    sweep = commands.add_parser('sweep', help='Recall/ILAD/latency over a theta grid')
    pool_flags(sweep)
    sweep.add_argument('--methods', type=_methods, default=['fw', 'mmr', 'dpp', 'topk'])
    sweep.add_argument('--thetas', type=_floats, default=list(DEFAULT_THETAS))
    sweep.add_argument('-o', '--out', default='sweep.csv', help='Per-query CSV')
    sweep.add_argument('--summary', help='Also write the per-(method, theta) summary CSV here')

    bench = commands.add_parser('bench', help='Latency over a (method, k, theta) grid')
    pool_flags(bench)
    bench.add_argument('--methods', type=_methods, default=['fw', 'mmr'])
    bench.add_argument('--k-values', type=_ints, default=[25, 50, 100])
    bench.add_argument('--thetas', type=_floats, default=[0.5, 0.7, 0.9])
    bench.add_argument('--runs', type=int, default=5)
    bench.add_argument('--warmup', type=int, default=2)
    bench.add_argument('--parallel', action='store_true', help='Leave BLAS multi-threaded while timing')
    bench.add_argument('-o', '--out', default='bench.csv', help='Benchmark CSV; the config goes next to it as .json')

    synth = commands.add_parser('synth', help='Write a synthetic clustered corpus')
    synth.add_argument('--out-dir', required=True)
    synth.add_argument('--n', type=int, default=200000)
    synth.add_argument('--d', type=int, default=256)
    synth.add_argument('--clusters', type=int, default=1000)
    synth.add_argument('--redundancy', type=int, default=20)
    synth.add_argument('--queries', type=int, default=200)
    synth.add_argument('--relevant-clusters', type=int, default=3)
    synth.add_argument('--seed', type=int, help='Random seed, default from settings')
    return parser


def _client(args) -> SelectClient:
    settings = Settings.from_file(args.settings) if args.settings else Settings()
    settings = settings.updated(
        k=getattr(args, 'k', None),
        theta=getattr(args, 'theta', None),
        max_iters=getattr(args, 'max_iters', None),
        seed=getattr(args, 'seed', None),
        restarts=getattr(args, 'restarts', None),
        polish=getattr(args, 'polish', None),
        pool=getattr(args, 'pool', None),
        **{'lambda': getattr(args, 'lam', None)},
    )
    return SelectClient(settings)


def cmd_select(args) -> int:
    client = _client(args)
    queries = client.queries_from_file(args.query, query_pool=args.query_pool)
    if not queries:
        raise InvalidParamsError(f'{args.query}: no queries')
    if args.query_id is None:
        query = queries[0]
    else:
        matches = [q for q in queries if q.query_id == args.query_id]
        if not matches:
            raise InvalidParamsError(f"query '{args.query_id}' not found in {args.query}")
        query = matches[0]

    report = client.select_report(query, method=args.method)
    text = json.dumps(report, indent=4)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
        print(args.out)
    else:
        print(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    client = _client(args)
    queries = client.queries_from_file(args.query, query_pool=args.query_pool)
    records = client.sweep(queries, args.methods, thetas=args.thetas, out=args.out)
    print(args.out)
    if args.summary:
        summarize_sweep(records).to_csv(args.summary, index=False, encoding='utf-8')
        print(args.summary)
    if records and all(r.failed for r in records):
        print(f'dksel: error: all {len(records)} sweep records failed', file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_bench(args) -> int:
    client = _client(args)
    queries = client.queries_from_file(args.query, query_pool=args.query_pool)
    client.bench(queries, k_values=args.k_values, thetas=args.thetas, methods=args.methods,
                 runs=args.runs, warmup=args.warmup, parallel=args.parallel, out=args.out)
    print(args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    client = _client(args)
    paths = client.synth(args.out_dir, n=args.n, d=args.d, clusters=args.clusters, redundancy=args.redundancy,
                         n_queries=args.queries, seed=args.seed, relevant_clusters=args.relevant_clusters)
    for path in paths.values():
        print(path)
    return EXIT_OK


COMMANDS = {
    'select': cmd_select,
    'sweep': cmd_sweep,
    'bench': cmd_bench,
    'synth': cmd_synth,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return COMMANDS[args.command](args)
    except DkselError as e:
        print(f'dksel: error: {e}', file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f'dksel: error: {e}', file=sys.stderr)
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
