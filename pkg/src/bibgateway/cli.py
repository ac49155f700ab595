"""Operator CLI: run the server, issue ad-hoc calls, drive the eval harness.

All search/details/post subcommands are plain HTTP clients of a running
server; the CLI never becomes a second code path into the core. Exit codes:
0 success, 1 runtime failure, 2 usage error.
"""

import json
import sys
from importlib import resources
from typing import Optional

import click
import httpx

from .config import ServerConfig, load_config


def _load(config_path: Optional[str]) -> ServerConfig:
    try:
        return load_config(config_path)
    except FileNotFoundError:
        raise click.exceptions.UsageError(
            f"config file not found: {config_path}")


def _client(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=30.0)


def _print_response(response: httpx.Response, as_json: bool) -> None:
    if response.status_code >= 400:
        click.echo(f"HTTP {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    if as_json:
        click.echo(response.text)
        return
    body = response.json()
    results = body.get("results")
    if results is None and "result" in body:
        results = [body["result"]]
    for entry in results or []:
        handle = entry.get("handle", "")
        title = entry.get("title", "")
        year = entry.get("year") or ""
        citations = entry.get("citation_count")
        citations = "" if citations is None else f"{citations} citations"
        click.echo(f"{handle:<28} {title}  ({year}) {citations}".rstrip())
    if not results:
        click.echo("(no results)")
    if body.get("system_hint"):
        click.echo(f"\nhint: {body['system_hint']}")


@click.group()
def main():
    """Federated scholarly search and publication-management tool server."""


@main.command()
@click.option("--config", "config_path", type=str, default=None,
              help="YAML config file.")
@click.option("--fixture", "fixture_path", type=str, default=None,
              help="Serve from this mock fixture instead of real backends.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def serve(config_path, fixture_path, host, port):
    """Run the HTTP server until interrupted."""
    import uvicorn

    from .server import create_app

    config = _load(config_path)
    if fixture_path:
        config.fixture_path = fixture_path
    app = create_app(config)
    try:
        uvicorn.run(app, host=host or config.host, port=port or config.port)
    except OSError as exc:
        click.echo(f"failed to bind: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.option("-q", "--query", required=True)
@click.option("-s", "--supplementary", multiple=True)
@click.option("--backends", default=None)
@click.option("--count", type=int, default=None)
@click.option("--granularity", type=click.Choice(["basic", "verbose"]),
              default=None)
@click.option("--server", default="http://127.0.0.1:8080", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print raw wire JSON.")
def search(query, supplementary, backends, count, granularity, server, as_json):
    """Search the configured backends."""
    params = [("q", query)] + [("supplementary", s) for s in supplementary]
    for name, value in (("backends", backends), ("count", count),
                        ("granularity", granularity)):
        if value is not None:
            params.append((name, str(value)))
    try:
        response = _client(server).get("/search", params=params)
    except httpx.HTTPError as exc:
        click.echo(f"connection failed: {exc}", err=True)
        sys.exit(1)
    _print_response(response, as_json)


@main.command()
@click.argument("id")
@click.option("--server", default="http://127.0.0.1:8080", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def details(id, server, as_json):
    """Resolve a handle, DOI, arXiv-ID, ACL-ID, or URL to verbose metadata."""
    try:
        response = _client(server).get(f"/details/{id}")
    except httpx.HTTPError as exc:
        click.echo(f"connection failed: {exc}", err=True)
        sys.exit(1)
    _print_response(response, as_json)


@main.command()
@click.option("--id", "source_id", required=True,
              help="Identifier of the publication to post.")
@click.option("--tag", "tags", multiple=True, required=True)
@click.option("--description", default=None)
@click.option("--kind", type=click.Choice(["publication", "bookmark"]),
              default="publication")
@click.option("--confirm", is_flag=True,
              help="Assert the user's explicit permission for the write.")
@click.option("--user", default="demo", show_default=True)
@click.option("--key", default="demo-key", show_default=True)
@click.option("--server", default="http://127.0.0.1:8080", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def post(source_id, tags, description, kind, confirm, user, key, server, as_json):
    """Create a library post from an identifier."""
    body = {"id": source_id, "tags": list(tags), "description": description,
            "post_kind": kind, "confirmed": confirm}
    try:
        response = _client(server).post(
            "/posts", json=body,
            headers={"X-Username": user, "X-Api-Key": key})
    except httpx.HTTPError as exc:
        click.echo(f"connection failed: {exc}", err=True)
        sys.exit(1)
    if response.status_code >= 400:
        click.echo(f"HTTP {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    if as_json:
        click.echo(response.text)
        return
    result = response.json()["result"]
    click.echo(f"created {result['handle']}: {result['title']}")
    click.echo(f"tags: {', '.join(result['tags'])}  "
               f"system tags: {', '.join(result['system_tags'])}")


def _fixture_app(fixture_path: Optional[str]):
    from .server import create_app

    config = ServerConfig()
    if fixture_path:
        config.fixture_path = fixture_path
    else:
        config.fixture_path = str(resources.files("bibgateway.assets")
                                  .joinpath("fixtures/eval_corpus.json"))
    return create_app(config)


def _inprocess_client(fixture_path: Optional[str]):
    from fastapi.testclient import TestClient

    try:
        return TestClient(_fixture_app(fixture_path))
    except FileNotFoundError as exc:
        click.echo(f"fixture not found: {exc}", err=True)
        sys.exit(1)


@main.group()
def eval():
    """Run the evaluation-methodology scenarios against mock fixtures."""


@eval.command("determinism")
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--fixture", "fixture_path", default=None)
@click.option("--prompts", "prompts_path", default=None)
@click.option("--out", "out_path", default=None,
              help="Write run records as JSONL.")
def eval_determinism(runs, fixture_path, prompts_path, out_path):
    """Per-prompt repeat-query determinism scores (1.0 = fully stable)."""
    from . import evalharness

    client = _inprocess_client(fixture_path)
    prompts = evalharness.load_eval_prompts(prompts_path)
    records, byte_identical = evalharness.run_determinism(client, prompts,
                                                          runs=runs)
    scores = evalharness.determinism_by_query(records)
    for query_id, score in scores.items():
        stable = "byte-identical" if byte_identical[query_id] else "DRIFTED"
        click.echo(f"{query_id:<12} determinism={score:.3f}  {stable}")
    if out_path:
        evalharness.write_jsonl(out_path, records)


@eval.command("latency")
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--fixture", "fixture_path", default=None)
@click.option("--prompts", "prompts_path", default=None)
@click.option("--csv", "csv_path", default=None, help="Also write a CSV table.")
def eval_latency(runs, fixture_path, prompts_path, csv_path):
    """Median and standard deviation of per-prompt response times."""
    from . import evalharness

    client = _inprocess_client(fixture_path)
    prompts = evalharness.load_eval_prompts(prompts_path)
    records, _ = evalharness.run_determinism(client, prompts, runs=runs)
    grouped = {}
    for record in records:
        grouped.setdefault(record.query_id, []).append(record)
    stats = evalharness.latency_stats(grouped)
    text, csv_text = evalharness.latency_report(stats)
    click.echo(text)
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(csv_text)


@eval.command("votes")
@click.argument("votes_path")
@click.option("--csv", "csv_path", default=None, help="Also write a CSV table.")
def eval_votes(votes_path, csv_path):
    """Aggregate pairwise-preference votes into a per-system win matrix."""
    from . import evalharness

    try:
        votes = evalharness.read_votes(votes_path)
    except FileNotFoundError:
        click.echo(f"votes file not found: {votes_path}", err=True)
        sys.exit(1)
    matrix = evalharness.preference_matrix(votes)
    text, csv_text = evalharness.preference_report(matrix)
    click.echo(text)
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(csv_text)


if __name__ == "__main__":
    main()
