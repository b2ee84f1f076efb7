import json
import argparse
import pandas as pd
from dksel import SelectClient
from dksel.metrics import pareto_frontier, summarize_sweep

parser = argparse.ArgumentParser()
parser.add_argument("-s", "--settings", default="settings.json", help="Settings file")
parser.add_argument("-q", "--query", required=True, help="Gold file (jsonl format)")
parser.add_argument("-p", "--query-pool", help="DKSEL1 file holding the query embeddings")
parser.add_argument("-o", "--outfile", default="sweep.csv", help="Per-query output csv")
args = parser.parse_args()

with open(args.settings, 'r') as f:
    settings = json.loads(f.read())

client = SelectClient(settings)
queries = client.queries_from_file(args.query, query_pool=args.query_pool)

records = client.sweep(queries, methods=['fw', 'mmr', 'dpp', 'topk'], out=args.outfile)
summary = summarize_sweep(records)

# Methods whose mean (recall, ILAD) point is not beaten on both axes
frontier = pareto_frontier(summary)
pd.set_option('display.width', 120)
print(summary.to_string(index=False))
print()
print(frontier[['method', 'theta', 'recall_mean', 'ilad_mean']].to_string(index=False))
