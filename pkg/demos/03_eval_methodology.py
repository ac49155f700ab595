"""The evaluation harness at desk scale.

Reproduces the three measurement procedures offline: repeat-query
determinism, latency summary statistics, and pairwise-preference
aggregation (with synthetic votes, since real votes need human raters):

    python3 demos/03_eval_methodology.py
"""

import random

from fastapi.testclient import TestClient

from bibgateway import evalharness
from bibgateway.config import ServerConfig
from bibgateway.server import create_app

client = TestClient(create_app(ServerConfig.with_bundled_fixture()))

# 1. Determinism: each bundled prompt, five times; identical fixtures and
# deterministic ranking mean the score must be exactly 1.0.
prompts = evalharness.load_eval_prompts()
records, byte_identical = evalharness.run_determinism(client, prompts, runs=5)
print("== repeat-query determinism (5 runs per prompt) ==")
for query_id, score in evalharness.determinism_by_query(records).items():
    stable = "byte-identical" if byte_identical[query_id] else "DRIFTED"
    print(f"  {query_id:<12} score={score:.3f}  {stable}")

# 2. Latency: lower median and population standard deviation per prompt.
grouped = {}
for record in records:
    grouped.setdefault(record.query_id, []).append(record)
stats = evalharness.latency_stats(grouped)
text, _ = evalharness.latency_report(stats)
print("\n== latency (in-process, so effectively zero) ==")
print("\n".join("  " + line for line in text.splitlines()))

# 3. Preference aggregation: synthetic pairwise votes between three systems,
# summarized as per-aspect win percentages.
rng = random.Random(7)
systems = ["gateway", "baseline-search", "baseline-chat"]
votes = []
for i in range(120):
    a, b = rng.sample(systems, 2)
    # bias the coin so "gateway" wins most of its comparisons
    winner = "A" if (a == "gateway" or (b != "gateway" and rng.random() < 0.5)) \
        else ("B" if rng.random() < 0.7 else "A")
    votes.append(evalharness.Vote(
        prompt_id=f"p{i}", system_a=a, system_b=b, winner=winner,
        aspect=rng.choice(evalharness.ASPECTS)))
matrix = evalharness.preference_matrix(votes)
text, _ = evalharness.preference_report(matrix)
print("\n== pairwise-preference win rates (synthetic votes) ==")
print("\n".join("  " + line for line in text.splitlines()))
