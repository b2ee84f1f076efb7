"""
Readers and writers for the on-disk formats: the DKSEL1 embedding file, the
JSONL gold file, the result CSVs and the JSON reports.
"""
from dataclasses import dataclass
import json
import logging
import os
import struct
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from dksel.classes import BENCH_COLUMNS, EVAL_COLUMNS
from dksel.errors import (BadMagicError, DimensionMismatchError, GoldFileError, TrailingDataError,
                          TruncatedFileError)
from dksel.models.pool import EmbeddingMatrix, QueryContext
from dksel.pool import make_query, validate_pool

logger = logging.getLogger(__name__)

MAGIC = b'DKSEL1'
HEADER = struct.Struct('<6sII')
PAYLOAD_DTYPE = np.dtype('<f4')


def write_embeddings(path, matrix) -> str:
    """
    Write a pool as a DKSEL1 file: 6-byte magic, n and d as little-endian
    uint32, then n*d little-endian float32 values row-major.

    Args:
        path (str):
            Destination file
        matrix (EmbeddingMatrix or array-like):
            n x d embeddings

    Returns:
        str: the path written
    """
    rows = matrix.rows if isinstance(matrix, EmbeddingMatrix) else np.asarray(matrix)
    if rows.ndim != 2:
        raise ValueError(f'expected a 2-D matrix, got shape {rows.shape}')
    n, d = rows.shape
    with open(path, 'wb') as f:
        f.write(HEADER.pack(MAGIC, n, d))
        f.write(np.ascontiguousarray(rows, dtype=PAYLOAD_DTYPE).tobytes())
    logger.debug(f'wrote {n} x {d} embeddings to {path}')
    return str(path)


def read_embeddings(path) -> np.ndarray:
    """
    Read the raw float32 payload of a DKSEL1 file without validating rows.

    Raises:
        BadMagicError: the file does not start with DKSEL1
        TruncatedFileError: header or payload shorter than declared
        TrailingDataError: bytes left after the declared payload
    """
    size = os.path.getsize(path)
    with open(path, 'rb') as f:
        head = f.read(HEADER.size)
        if len(head) >= len(MAGIC) and head[:len(MAGIC)] != MAGIC:
            raise BadMagicError(path, head[:len(MAGIC)])
        if len(head) < HEADER.size:
            if head[:len(MAGIC)] != MAGIC[:len(head)]:
                raise BadMagicError(path, head[:len(MAGIC)])
            raise TruncatedFileError(path, len(head), HEADER.size)
        _, n, d = HEADER.unpack(head)
        expected = HEADER.size + PAYLOAD_DTYPE.itemsize * n * d
        if size < expected:
            raise TruncatedFileError(path, size, expected)
        if size > expected:
            raise TrailingDataError(path, size, expected)
        payload = np.fromfile(f, dtype=PAYLOAD_DTYPE, count=n * d)
    return payload.reshape(n, d).astype(np.float32, copy=False)


def load_embeddings(path) -> EmbeddingMatrix:
    """
    Load and validate a DKSEL1 embedding file.

    Args:
        path (str):
            DKSEL1 file

    Returns:
        EmbeddingMatrix: unit-norm pool; rows already unit norm are kept bit for bit

    Raises:
        BadMagicError, TruncatedFileError, TrailingDataError, ZeroRowError, NonFiniteError
    """
    matrix = validate_pool(read_embeddings(path))
    logger.info(f'loaded {matrix.n} x {matrix.d} pool from {path} ({matrix.renormalized} rows renormalized)')
    return matrix


@dataclass
class GoldRecord:
    query_id: str
    gold: List[int]
    embedding: Optional[List[float]] = None
    embedding_ref: Optional[int] = None

    def as_dict(self):
        record = {'query_id': self.query_id}
        if self.embedding is not None:
            record['embedding'] = [float(value) for value in self.embedding]
        else:
            record['embedding_ref'] = int(self.embedding_ref)
        record['gold'] = [int(i) for i in self.gold]
        return record


def _parse_gold_line(path, lineno: int, text: str) -> GoldRecord:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise GoldFileError(path, lineno, f'invalid JSON ({e.msg})')
    if not isinstance(raw, dict):
        raise GoldFileError(path, lineno, 'record is not a JSON object')
    if 'query_id' not in raw:
        raise GoldFileError(path, lineno, 'missing query_id')
    gold = raw.get('gold', [])
    if not isinstance(gold, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in gold):
        raise GoldFileError(path, lineno, 'gold must be a list of integers')
    embedding = raw.get('embedding')
    ref = raw.get('embedding_ref')
    if (embedding is None) == (ref is None):
        raise GoldFileError(path, lineno, 'exactly one of embedding or embedding_ref is required')
    if embedding is not None and (not isinstance(embedding, list) or not embedding or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in embedding)):
        raise GoldFileError(path, lineno, 'embedding must be a non-empty list of numbers')
    if ref is not None and (not isinstance(ref, int) or isinstance(ref, bool) or ref < 0):
        raise GoldFileError(path, lineno, 'embedding_ref must be a non-negative integer')
    return GoldRecord(query_id=str(raw['query_id']), gold=gold, embedding=embedding, embedding_ref=ref)


def read_gold_file(path) -> List[GoldRecord]:
    """
    Parse a JSONL gold file. Blank lines are skipped; query ids must be unique.

    Raises:
        GoldFileError: a malformed line (the error names the line number)
    """
    records = []
    seen = set()
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            record = _parse_gold_line(path, lineno, line)
            if record.query_id in seen:
                raise GoldFileError(path, lineno, f'duplicate query_id {record.query_id!r}')
            seen.add(record.query_id)
            records.append(record)
    logger.debug(f'read {len(records)} gold records from {path}')
    return records


def write_gold_file(path, records: Sequence[GoldRecord]) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record.as_dict()) + '\n')
    return str(path)


def queries_from_gold(matrix: EmbeddingMatrix, records: Sequence[GoldRecord],
                      query_pool: EmbeddingMatrix = None, path='<gold>') -> List[QueryContext]:
    """
    Turn gold records into QueryContext objects against a pool.

    Args:
        matrix (EmbeddingMatrix):
            Candidate pool the gold indices refer to
        records (list):
            GoldRecord objects
        query_pool (EmbeddingMatrix, optional):
            Rows that embedding_ref points into
        path (str, optional):
            Source file, used in error messages

    Returns:
        list: QueryContext objects in file order
    """
    queries = []
    for lineno, record in enumerate(records, start=1):
        if record.embedding is not None:
            embedding = np.asarray(record.embedding, dtype=np.float64)
        else:
            if query_pool is None:
                raise GoldFileError(path, lineno, 'embedding_ref used but no query pool file given')
            if record.embedding_ref >= query_pool.n:
                raise GoldFileError(path, lineno, f'embedding_ref {record.embedding_ref} out of range '
                                                  f'for a query pool of {query_pool.n} rows')
            embedding = query_pool.values[record.embedding_ref]
        if embedding.shape[0] != matrix.d:
            raise DimensionMismatchError(matrix.d, embedding.shape[0], what=f'query {record.query_id}')
        queries.append(make_query(matrix, embedding, query_id=record.query_id, gold=record.gold))
    return queries


def write_eval_csv(path, records) -> str:
    """Per-query sweep records, columns method,theta,k,query_id,recall,ilad,latency_ms"""
    frame = pd.DataFrame([r.as_dict() for r in records], columns=EVAL_COLUMNS)
    frame.to_csv(path, index=False, encoding='utf-8')
    return str(path)


def write_bench_csv(path, results) -> str:
    """Benchmark rows, columns method,n,d,k,theta,runs,mean_ms,p50_ms,p95_ms,iters_mean"""
    frame = pd.DataFrame([r.as_dict() for r in results], columns=BENCH_COLUMNS)
    frame.to_csv(path, index=False, encoding='utf-8')
    return str(path)


def write_json_report(path, report: dict) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(report, f, indent=4)
        f.write('\n')
    return str(path)
