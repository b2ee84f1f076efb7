import json
import struct

import numpy as np
import pandas as pd
import pytest

from dksel.classes import BENCH_COLUMNS, BenchResult, EvalRecord
from dksel.errors import (BadMagicError, DimensionMismatchError, GoldFileError, TrailingDataError,
                          TruncatedFileError, ZeroRowError)
from dksel.fileio import (GoldRecord, load_embeddings, queries_from_gold, read_gold_file, write_bench_csv,
                          write_embeddings, write_eval_csv, write_gold_file, write_json_report)
from dksel.pool import validate_pool


def test_two_by_two_file_loads_exactly(tmp_path):
    path = tmp_path / 'pool.dksel'
    write_embeddings(path, np.array([[1.0, 0.0], [0.0, 1.0]]))
    raw = path.read_bytes()
    assert raw[:6] == b'DKSEL1'
    assert struct.unpack('<II', raw[6:14]) == (2, 2)
    assert len(raw) == 14 + 4 * 4
    matrix = load_embeddings(path)
    assert matrix.rows.tolist() == [[1.0, 0.0], [0.0, 1.0]]
    assert matrix.renormalized == 0


def test_round_trip_is_bitwise(tmp_path, rng):
    rows = rng.standard_normal((40, 7))
    rows = (rows / np.linalg.norm(rows, axis=1, keepdims=True)).astype(np.float32)
    path = tmp_path / 'pool.dksel'
    write_embeddings(path, rows)
    assert load_embeddings(path).rows.tobytes() == rows.astype('<f4').tobytes()


def test_off_norm_rows_are_renormalized_on_load(tmp_path, caplog):
    path = tmp_path / 'pool.dksel'
    write_embeddings(path, np.array([[3.0, 4.0], [1.0, 0.0]]))
    with caplog.at_level('INFO'):
        matrix = load_embeddings(path)
    assert matrix.renormalized == 1
    assert '1 rows renormalized' in caplog.text


def test_truncated_payload_reports_offset(tmp_path):
    path = tmp_path / 'pool.dksel'
    write_embeddings(path, np.eye(3))
    path.write_bytes(path.read_bytes()[:14 + 4 * 5])
    with pytest.raises(TruncatedFileError) as excinfo:
        load_embeddings(path)
    assert excinfo.value.offset == 34
    assert excinfo.value.expected == 14 + 4 * 9


def test_truncated_header(tmp_path):
    path = tmp_path / 'pool.dksel'
    path.write_bytes(b'DKSEL1\x02\x00')
    with pytest.raises(TruncatedFileError) as excinfo:
        load_embeddings(path)
    assert excinfo.value.offset == 8


def test_bad_magic(tmp_path):
    path = tmp_path / 'pool.npy'
    path.write_bytes(b'\x93NUMPY' + b'\x00' * 30)
    with pytest.raises(BadMagicError):
        load_embeddings(path)


def test_trailing_bytes(tmp_path):
    path = tmp_path / 'pool.dksel'
    write_embeddings(path, np.eye(2))
    path.write_bytes(path.read_bytes() + b'\x00')
    with pytest.raises(TrailingDataError):
        load_embeddings(path)


def test_zero_row_in_file(tmp_path):
    path = tmp_path / 'pool.dksel'
    write_embeddings(path, np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ZeroRowError) as excinfo:
        load_embeddings(path)
    assert excinfo.value.index == 1


def test_gold_file_round_trip(tmp_path):
    path = tmp_path / 'gold.jsonl'
    records = [GoldRecord('q1', [0, 2], embedding=[1.0, 0.0]), GoldRecord('q2', [1], embedding_ref=3)]
    write_gold_file(path, records)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert json.loads(lines[0]) == {'query_id': 'q1', 'embedding': [1.0, 0.0], 'gold': [0, 2]}
    assert json.loads(lines[1]) == {'query_id': 'q2', 'embedding_ref': 3, 'gold': [1]}
    assert read_gold_file(path) == records


@pytest.mark.parametrize('line,reason', [
    ('{"query_id": "a", "gold": [1]', 'invalid JSON'),
    ('{"gold": [1], "embedding": [1.0]}', 'missing query_id'),
    ('{"query_id": "a", "gold": [1]}', 'exactly one'),
    ('{"query_id": "a", "gold": [1], "embedding": [1.0], "embedding_ref": 0}', 'exactly one'),
    ('{"query_id": "a", "gold": ["x"], "embedding": [1.0]}', 'list of integers'),
    ('{"query_id": "a", "gold": [1], "embedding_ref": -1}', 'non-negative'),
    ('{"query_id": "a", "gold": [1], "embedding": ["a", "b"]}', 'list of numbers'),
    ('{"query_id": "a", "gold": [1], "embedding": [true, 0.5]}', 'list of numbers'),
    ('{"query_id": "a", "gold": [1], "embedding": []}', 'list of numbers'),
])
def test_bad_gold_lines_name_the_line(tmp_path, line, reason):
    path = tmp_path / 'gold.jsonl'
    path.write_text('{"query_id": "ok", "gold": [], "embedding": [1.0, 0.0]}\n\n' + line + '\n', encoding='utf-8')
    with pytest.raises(GoldFileError, match=reason) as excinfo:
        read_gold_file(path)
    assert excinfo.value.line == 3


def test_duplicate_query_ids_are_rejected(tmp_path):
    path = tmp_path / 'gold.jsonl'
    write_gold_file(path, [GoldRecord('a', [0], embedding=[1.0]), GoldRecord('a', [1], embedding=[1.0])])
    with pytest.raises(GoldFileError, match='duplicate'):
        read_gold_file(path)


def test_queries_from_gold(three_item_pool):
    records = [GoldRecord('inline', [0], embedding=[1.0, 0.0]), GoldRecord('ref', [2], embedding_ref=1)]
    query_pool = validate_pool(np.eye(2, dtype=np.float32))
    queries = queries_from_gold(three_item_pool, records, query_pool=query_pool)
    assert [q.query_id for q in queries] == ['inline', 'ref']
    np.testing.assert_allclose(queries[0].relevance, [0.9, 0.1, 0.5], atol=1e-6)
    assert queries[1].gold == frozenset({2})
    with pytest.raises(GoldFileError, match='no query pool'):
        queries_from_gold(three_item_pool, records)
    with pytest.raises(DimensionMismatchError):
        queries_from_gold(three_item_pool, [GoldRecord('bad', [0], embedding=[1.0, 0.0, 0.0])])
    with pytest.raises(GoldFileError, match='out of range'):
        queries_from_gold(three_item_pool, [GoldRecord('far', [0], embedding_ref=5)], query_pool=query_pool)


def test_eval_csv_header_is_exact(tmp_path):
    path = tmp_path / 'sweep.csv'
    write_eval_csv(path, [EvalRecord('fw', 0.5, 10, 'q1', recall=1.0, ilad=0.4, latency_ms=2.5),
                          EvalRecord('mmr', 0.5, 10, 'q1', error='boom')])
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'method,theta,k,query_id,recall,ilad,latency_ms'
    assert lines[1] == 'fw,0.5,10,q1,1.0,0.4,2.5'
    assert lines[2] == 'mmr,0.5,10,q1,,,'


def test_bench_csv_columns(tmp_path):
    path = tmp_path / 'bench.csv'
    write_bench_csv(path, [BenchResult('fw', 100, 8, 5, 0.5, 5, 1.0, 0.9, 1.5, iters_mean=3.0)])
    frame = pd.read_csv(path)
    assert list(frame.columns) == BENCH_COLUMNS
    assert frame.loc[0, 'iters_mean'] == 3.0


def test_json_report_keeps_key_order(tmp_path):
    path = tmp_path / 'report.json'
    write_json_report(path, {'b': 1, 'a': [1, 2]})
    assert list(json.loads(path.read_text()).keys()) == ['b', 'a']
