import logging
import os
from typing import List, Sequence

import numpy as np

from dksel import bench as bench_mod
from dksel import fileio
from dksel.classes import SolveReport
from dksel.errors import InvalidParamsError
from dksel.metrics import DEFAULT_THETAS, pareto_sweep, recall_at_k
from dksel.models.pool import EmbeddingMatrix, QueryContext
from dksel.pool import make_query, query_from_relevance
from dksel.selectors import run_selector
from dksel.settings import Settings
from dksel.synth import synth_corpus

logger = logging.getLogger(__name__)


class SelectClient(object):
    """ Client class binding run settings to a candidate pool.

    This class shall be initialized with a config dictionary (typically the
    contents of settings.json). Every key is optional::

        {
            "pool": "path to a DKSEL1 embedding file",
            "k": 10,
            "theta": 0.5,
            "lambda": 2.0,
            "threads": 1
        }

    """

    def __init__(self, config: dict = None, pool: EmbeddingMatrix = None):
        """Initialization

        Args:
            config (dict or Settings):
                Run settings; per-call arguments override them
            pool (EmbeddingMatrix, optional):
                Already loaded pool, used instead of the "pool" setting

        Returns:
            SelectClient object
        """
        self.settings = config if isinstance(config, Settings) else Settings(config)
        self._pool = pool

    @property
    def pool(self) -> EmbeddingMatrix:
        if self._pool is None:
            self.load_pool()
        return self._pool

    def load_pool(self, path: str = None) -> EmbeddingMatrix:
        """
        Load the candidate pool, from path or the "pool" setting.

        Returns:
            EmbeddingMatrix: the validated pool, also kept on the client
        """
        path = path or self.settings['pool']
        if not path:
            raise InvalidParamsError('no pool given: set "pool" in the settings or pass a path')
        self._pool = fileio.load_embeddings(path)
        return self._pool

    def queries_from_file(self, path: str, query_pool: str = None) -> List[QueryContext]:
        """
        Read a JSONL gold file into queries against the current pool.

        Args:
            path (str):
                Gold file
            query_pool (str, optional):
                DKSEL1 file that embedding_ref entries point into

        Returns:
            list: QueryContext objects in file order
        """
        records = fileio.read_gold_file(path)
        rows = fileio.load_embeddings(query_pool) if query_pool else None
        return fileio.queries_from_gold(self.pool, records, query_pool=rows, path=path)

    def query(self, embedding=None, relevance=None, query_id: str = 'q0', gold=None) -> QueryContext:
        """
        Build a query from an embedding, or from precomputed relevance scores.
        """
        if (embedding is None) == (relevance is None):
            raise InvalidParamsError('pass exactly one of embedding or relevance')
        if embedding is not None:
            return make_query(self.pool, embedding, query_id=query_id, gold=gold)
        return query_from_relevance(relevance, query_id=query_id, gold=gold, n=self.pool.n)

    def select(self, query, method: str = 'fw', **overrides) -> SolveReport:
        """
        Select k items for one query.

        Args:
            query (QueryContext or array-like):
                A query, or a raw query embedding
            method (str):
                'fw', 'mmr', 'dpp', 'topk' or 'exact'
            **overrides:
                Settings keys (k, theta, lambda, ...) for this call only

        Returns:
            SolveReport
        """
        if not isinstance(query, QueryContext):
            query = self.query(embedding=np.asarray(query))
        params = self.settings.select_params(**overrides)
        report = run_selector(method, self.pool, query.relevance, params)
        logger.info(f'{method} query={query.query_id} k={params.k} theta={params.theta}: '
                    f'{report.iterations} iterations, gap {report.final_gap:.3g}, {report.wall_time * 1e3:.2f} ms')
        return report

    def select_report(self, query: QueryContext, method: str = 'fw', **overrides) -> dict:
        """
        select() plus the effective configuration, as written by the CLI.

        Returns:
            dict: query_id, the report fields, recall when gold is known, and a config echo
        """
        params = self.settings.select_params(**overrides)
        report = self.select(query, method=method, **overrides)
        data = {'query_id': query.query_id}
        data.update(report.as_dict())
        if query.gold:
            data['recall'] = recall_at_k(report.selected, query.gold)
        config = self.settings.as_dict()
        config.update(params.as_dict())
        config['method'] = method
        data['config'] = config
        return data

    def sweep(self, queries: Sequence[QueryContext], methods: Sequence[str], thetas=DEFAULT_THETAS,
              k: int = None, out: str = None):
        """
        Recall/ILAD/latency over every (method, theta, query).

        Args:
            queries (list):
                QueryContext objects with gold sets
            methods (list):
                Method names
            thetas (list):
                Trade-off values, default 0.1 .. 0.9
            k (int, optional):
                Budget, default from settings
            out (str, optional):
                Write the per-query CSV here

        Returns:
            list: EvalRecord objects
        """
        base = self.settings.select_params(k=k)
        records = pareto_sweep(self.pool, queries, methods, thetas=thetas, k=base.k, base_params=base,
                               threads=self.settings.threads)
        if out:
            fileio.write_eval_csv(out, records)
        return records

    def bench(self, queries: Sequence[QueryContext], k_values=bench_mod.DEFAULT_K_VALUES,
              thetas=bench_mod.DEFAULT_BENCH_THETAS, methods=('fw', 'mmr'), runs: int = 5, warmup: int = 2,
              parallel: bool = False, out: str = None):
        """
        Latency grid over (method, k, theta). With out, writes the CSV plus a
        JSON sidecar (same name, .json) holding the configuration.

        BLAS runs single-threaded while timing unless parallel is set.
        """
        base = self.settings.select_params(k=min(k_values))
        results = bench_mod.scaling_suite(self.pool, queries, k_values=k_values, thetas=thetas, methods=methods,
                                          runs=runs, warmup=warmup, base_params=base, parallel=parallel)
        if out:
            fileio.write_bench_csv(out, results)
            config = bench_mod.bench_config(self.pool, k_values, thetas, methods, runs, warmup, base_params=base,
                                            parallel=bool(parallel), seed=self.settings['seed'])
            fileio.write_json_report(os.path.splitext(out)[0] + '.json', config)
        return results

    def synth(self, out_dir: str, n: int, d: int, clusters: int, redundancy: int = 1, n_queries: int = 100,
              seed: int = None, **kwargs) -> dict:
        """
        Generate a synthetic corpus and write it to out_dir: pool.dksel,
        queries.dksel, gold.jsonl and synth.json. The new pool becomes the
        client's pool.

        Returns:
            dict: file kind -> path
        """
        seed = self.settings['seed'] if seed is None else seed
        corpus = synth_corpus(n, d, clusters, redundancy=redundancy, seed=seed, n_queries=n_queries, **kwargs)
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            'pool': os.path.join(out_dir, 'pool.dksel'),
            'queries': os.path.join(out_dir, 'queries.dksel'),
            'gold': os.path.join(out_dir, 'gold.jsonl'),
            'config': os.path.join(out_dir, 'synth.json'),
        }
        fileio.write_embeddings(paths['pool'], corpus.matrix)
        if n_queries:
            fileio.write_embeddings(paths['queries'], corpus.query_vectors)
        gold = [fileio.GoldRecord(query_id=q.query_id, gold=sorted(q.gold), embedding_ref=i)
                for i, q in enumerate(corpus.queries)]
        fileio.write_gold_file(paths['gold'], gold)
        fileio.write_json_report(paths['config'], corpus.config)
        self._pool = corpus.matrix
        if not n_queries:
            del paths['queries']
        return paths
