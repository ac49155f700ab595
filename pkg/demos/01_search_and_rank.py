"""Federated search, step by step.

Runs entirely offline against the bundled mock fixture: plan the fanout,
merge the per-backend hits, re-rank them, and look at what the wire response
carries. Run with:

    python3 demos/01_search_and_rank.py
"""

from fastapi.testclient import TestClient

from bibgateway.config import ServerConfig
from bibgateway.server import create_app

client = TestClient(create_app(ServerConfig.with_bundled_fixture()))

# A primary query plus one supplementary query. Supplementary hits are
# weighted lower, so they broaden the pool without hijacking the top ranks.
print("== /search q='xlnet' supplementary='autoregressive pretraining' ==")
body = client.get("/search", params=[
    ("q", "xlnet"),
    ("supplementary", "autoregressive pretraining"),
]).json()

for i, entry in enumerate(body["results"], start=1):
    citations = entry["citation_count"]
    print(f"  {i}. {entry['title']}")
    print(f"     handle={entry['handle']}  year={entry['year']}  "
          f"citations={citations}")

print(f"\nestimated_tokens: {body['estimated_tokens']}")
print(f"system_hint: {body['system_hint']}\n")

# The top hit exists on both the scholarly index and the bookmark service;
# the search merged the two records into one result and ranked it with a
# cross-platform boost. Its handle resolves to the full verbose metadata.
handle = body["results"][0]["handle"]
print(f"== /details/{handle} ==")
detail = client.get(f"/details/{handle}").json()["result"]
print(f"  title:    {detail['title']}")
print(f"  venue:    {detail['venue']}")
print(f"  doi:      {detail['doi']}")
print(f"  tldr:     {detail['tldr']}")
print(f"  ids:      {[(e['kind'], e['value']) for e in detail['external_ids']]}")
print(f"  bibtex:   {(detail['bibtex'] or '').splitlines()[0]} ...")

# Identifiers work in every common spelling: DOI, arXiv-ID, ACL-ID, raw URL.
print("\n== the same paper through other identifiers ==")
for identifier in ("arXiv:1906.08237", "10.48550/arxiv.1906.08237"):
    result = client.get(f"/details/{identifier}").json()["result"]
    print(f"  {identifier:<28} -> {result['title'][:50]}")

# A raw URL goes through the scraper; if the scraped page reports a DOI the
# record is enriched from the scholarly index (citation counts, BibTeX).
url = "https://arxiv.org/abs/1706.03762"
result = client.get(f"/details/{url}").json()["result"]
print(f"  {url:<28} -> {result['title']} "
      f"(citations={result['citation_count']})")
