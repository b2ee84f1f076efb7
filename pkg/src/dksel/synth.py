"""
Synthetic pools: clustered embeddings with controllable near-duplicate
redundancy, queries sitting between several clusters, and gold sets that
need one item from each of those clusters.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import List

import numpy as np

from dksel.errors import InvalidParamsError
from dksel.models.pool import EmbeddingMatrix, QueryContext
from dksel.pool import relevance_from_query, validate_pool

logger = logging.getLogger(__name__)

ANTI_ALIGNED = -0.999
ROW_CHUNK = 16384


@dataclass
class SynthCorpus:
    matrix: EmbeddingMatrix
    queries: List[QueryContext]
    query_vectors: np.ndarray
    cluster_of: np.ndarray = field(metadata={"description": "Topic cluster of each item"})
    group_of: np.ndarray = field(metadata={"description": "Near-duplicate group of each item"})
    config: dict = field(default_factory=dict)


def _normalize(rows: np.ndarray) -> np.ndarray:
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def synth_corpus(n: int, d: int, clusters: int, redundancy: int = 1, seed: int = 0, n_queries: int = 100,
                 relevant_clusters: int = 3, item_spread: float = 0.6, duplicate_spread: float = 0.05,
                 query_spread: float = 0.1) -> SynthCorpus:
    """
    Generate a clustered pool with near duplicates, plus queries and gold sets.

    Items come in groups of ``redundancy`` near-identical copies. Groups are
    spread around ``clusters`` random centroids. Each query points at the
    midpoint of ``relevant_clusters`` centroids; its gold set holds the most
    relevant item of each of those clusters, so top-k spends its budget on
    copies while a diverse selection can reach every gold item.

    Args:
        n (int):
            Number of items
        d (int):
            Embedding dimension
        clusters (int):
            Number of topic centroids
        redundancy (int):
            Copies per item group, 1 means no duplicates
        seed (int):
            Seed for every random draw; the same seed gives a bitwise-identical corpus
        n_queries (int):
            Number of queries
        relevant_clusters (int):
            Clusters each query draws from
        item_spread (float):
            Noise norm of groups around their centroid
        duplicate_spread (float):
            Noise norm of copies around their group
        query_spread (float):
            Noise norm of queries around the cluster midpoint

    Returns:
        SynthCorpus
    """
    if min(n, d, clusters, redundancy) < 1 or n_queries < 0:
        raise InvalidParamsError(f'n, d, clusters and redundancy must be >= 1 and n_queries >= 0, got '
                                 f'n={n}, d={d}, clusters={clusters}, redundancy={redundancy}, n_queries={n_queries}')
    relevant_clusters = min(relevant_clusters, clusters)
    rng = np.random.default_rng(seed)

    centroids = _normalize(rng.standard_normal((clusters, d)))
    n_groups = math.ceil(n / redundancy)
    group_cluster = rng.permutation(np.arange(n_groups) % clusters)
    group_vectors = _normalize(centroids[group_cluster]
                               + item_spread * rng.standard_normal((n_groups, d)) / np.sqrt(d))
    group_of = np.repeat(np.arange(n_groups), redundancy)[:n]
    cluster_of = group_cluster[group_of]

    rows = np.empty((n, d), dtype=np.float32)
    for lo in range(0, n, ROW_CHUNK):
        hi = min(n, lo + ROW_CHUNK)
        noise = duplicate_spread * rng.standard_normal((hi - lo, d)) / np.sqrt(d)
        rows[lo:hi] = _normalize(group_vectors[group_of[lo:hi]] + noise)
    matrix = validate_pool(rows)

    present = np.unique(cluster_of)
    query_vectors = np.empty((n_queries, d), dtype=np.float32)
    queries = []
    for qi in range(n_queries):
        chosen = rng.choice(present, size=min(relevant_clusters, present.size), replace=False)
        q = centroids[chosen].sum(axis=0) + query_spread * rng.standard_normal(d) / np.sqrt(d)
        q = (q / np.linalg.norm(q)).astype(np.float32)
        query_vectors[qi] = q
        relevance = relevance_from_query(matrix, q)
        gold = []
        for cluster in sorted(chosen.tolist()):
            members = np.flatnonzero(cluster_of == cluster)
            gold.append(int(members[np.argmax(relevance[members])]))
        queries.append(QueryContext(query_id=f'q{qi:05d}', relevance=relevance,
                                    query_embedding=q.astype(np.float64), gold=frozenset(gold)))

    config = {'n': n, 'd': d, 'clusters': clusters, 'redundancy': redundancy, 'seed': seed,
              'n_queries': n_queries, 'relevant_clusters': relevant_clusters, 'item_spread': item_spread,
              'duplicate_spread': duplicate_spread, 'query_spread': query_spread}
    logger.info(f'synthesized {n} x {d} pool, {clusters} clusters, redundancy {redundancy}, {n_queries} queries')
    return SynthCorpus(matrix=matrix, queries=queries, query_vectors=query_vectors,
                       cluster_of=cluster_of, group_of=group_of, config=config)


def random_pool(n: int, d: int, rng: np.random.Generator, clusters: int = None,
                spread: float = 0.5) -> EmbeddingMatrix:
    """
    Small random pool with no anti-aligned pair (every w_ij >= -0.999).

    With ``clusters`` the rows are drawn around that many random centroids,
    otherwise uniformly on the sphere. Offending rows are redrawn.
    """
    if clusters:
        centroids = _normalize(rng.standard_normal((clusters, d)))
        labels = rng.integers(clusters, size=n)

        def draw(count, which):
            return centroids[labels[which]] + spread * rng.standard_normal((count, d)) / np.sqrt(d)
    else:
        def draw(count, which):
            return rng.standard_normal((count, d))

    rows = _normalize(draw(n, np.arange(n)))
    for _ in range(100):
        gram = rows @ rows.T
        bad_pairs = np.argwhere(np.triu(gram < ANTI_ALIGNED, 1))
        if bad_pairs.size == 0:
            break
        redo = np.unique(bad_pairs[:, 1])
        rows[redo] = _normalize(draw(redo.size, redo))
    return validate_pool(rows)
