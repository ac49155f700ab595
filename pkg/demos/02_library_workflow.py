"""Curating a personal library: tags, posts, edits, attachments.

The write path mirrors how an assistant should behave: learn the user's tag
vocabulary first, post with explicit confirmation, and let the server stamp
provenance tags. Runs offline against the bundled fixture:

    python3 demos/02_library_workflow.py
"""

from fastapi.testclient import TestClient

from bibgateway.config import ServerConfig
from bibgateway.server import create_app

client = TestClient(create_app(ServerConfig.with_bundled_fixture()))
AUTH = {"X-Username": "demo", "X-Api-Key": "demo-key"}

# Step 0: writes without the confirmation flag are refused outright.
refused = client.post("/posts", json={
    "id": "s2:S2bert2019Cd", "tags": ["lm"]}, headers=AUTH)
print(f"unconfirmed write -> HTTP {refused.status_code} "
      f"({refused.json()['error'][:60]}...)\n")

# Step 1: fetch the user's existing tags so new posts stay consistent.
tags = client.get("/user/tags", headers=AUTH).json()
print("== the user's tag vocabulary ==")
for tag, count in tags["tags"].items():
    print(f"  {tag:<12} used {count}x")
print()

# Step 2: create a post from a search handle, reusing an existing tag.
created = client.post("/posts", json={
    "id": "s2:S2bert2019Cd",
    "tags": ["nlp", "pretraining"],
    "description": "Bidirectional masked-LM pretraining; the usual baseline.",
    "confirmed": True,
}, headers=AUTH).json()["result"]
print("== created post ==")
print(f"  handle:      {created['handle']}")
print(f"  title:       {created['title']}")
print(f"  tags:        {created['tags']}")
print(f"  system tags: {created['system_tags']}   <- stamped by the server\n")

# Step 3: edit the post; the edit provenance tag appears exactly once,
# no matter how often the post is touched.
handle = created["handle"].split(":", 1)[1]
patched = client.patch(f"/posts/{handle}", json={
    "add_tags": ["reviewed"], "remove_tags": ["pretraining"],
}, headers=AUTH).json()["result"]
print("== after retagging ==")
print(f"  tags:        {patched['tags']}")
print(f"  system tags: {patched['system_tags']}\n")

# Step 4: attach the PDF.
uploaded = client.post(f"/posts/{handle}/document",
                       files={"file": ("bert.pdf", b"%PDF-1.7 demo bytes",
                                       "application/pdf")},
                       headers=AUTH).json()["result"]
print("== after attaching a document ==")
print(f"  attachment:  {uploaded['attachment']}\n")

# Step 5: the post kind is fixed at creation; changing it is a conflict.
conflict = client.patch(f"/posts/{handle}", json={"post_kind": "bookmark"},
                        headers=AUTH)
print(f"kind change -> HTTP {conflict.status_code} "
      f"({conflict.json()['error']})\n")

# Step 6: the library is searchable by tag (AND semantics) and keywords.
results = client.get("/search", params=[
    ("library_only", "true"), ("tags", "nlp")], headers=AUTH).json()["results"]
print("== library search, tag 'nlp' ==")
for post in results:
    print(f"  {post['handle']:<16} {post['title'][:55]}")
