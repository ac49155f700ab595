"""Desk-scale reproduction of the evaluation methodology: repeat-query
determinism, latency statistics, and pairwise-preference aggregation.

Run records and votes travel as line-delimited JSON; reports are emitted as
plain text and CSV tables.
"""

import csv
import io
import json
import math
import time
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from pydantic import BaseModel, model_validator

from .errors import InsufficientRuns

ASPECTS = ("intuition", "validity", "currency")


class RunRecord(BaseModel):
    query_id: str
    run_index: int
    handles: List[str]
    latency: float  # seconds


class Vote(BaseModel):
    prompt_id: str
    system_a: str
    system_b: str
    winner: str  # "A" | "B"
    aspect: str

    @model_validator(mode="after")
    def _check(self) -> "Vote":
        if self.system_a == self.system_b:
            raise ValueError("a vote must compare two distinct systems")
        if self.winner not in ("A", "B"):
            raise ValueError("winner must be 'A' or 'B'")
        if self.aspect not in ASPECTS:
            raise ValueError(f"aspect must be one of {ASPECTS}")
        return self


def jaccard(a: Set[str], b: Set[str]) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def determinism(records: Sequence[RunRecord]) -> float:
    """Mean pairwise Jaccard similarity of the returned handle sets."""
    if len(records) < 2:
        raise InsufficientRuns("determinism needs at least two runs")
    sets = [set(r.handles) for r in records]
    pairs = list(combinations(sets, 2))
    return sum(jaccard(a, b) for a, b in pairs) / len(pairs)


def latency_stats(records_by_task: Dict[str, Sequence[RunRecord]]) -> Dict[str, Tuple[float, float]]:
    """Per task: (lower median, population standard deviation), unrounded."""
    stats = {}
    for task, records in records_by_task.items():
        if not records:
            continue
        durations = sorted(r.latency for r in records)
        median = durations[(len(durations) - 1) // 2]
        mean = sum(durations) / len(durations)
        variance = sum((d - mean) ** 2 for d in durations) / len(durations)
        stats[task] = (median, math.sqrt(variance))
    return stats


def preference_matrix(votes: Sequence[Vote]) -> Dict[str, Dict[str, float]]:
    """Per system and aspect: percentage of its pairwise comparisons won.

    Systems with zero appearances for an aspect are absent from that row;
    percentages are not normalized across systems, so column totals may
    exceed 100 by construction.
    """
    if not votes:
        raise ValueError("votes must be non-empty")
    wins: Dict[Tuple[str, str], int] = {}
    appearances: Dict[Tuple[str, str], int] = {}
    for vote in votes:
        winner = vote.system_a if vote.winner == "A" else vote.system_b
        for system in (vote.system_a, vote.system_b):
            key = (system, vote.aspect)
            appearances[key] = appearances.get(key, 0) + 1
            if system == winner:
                wins[key] = wins.get(key, 0) + 1
    matrix: Dict[str, Dict[str, float]] = {}
    for (system, aspect), n in appearances.items():
        matrix.setdefault(system, {})[aspect] = 100.0 * wins.get(
            (system, aspect), 0) / n
    return matrix


# -- JSONL I/O -----------------------------------------------------------

def write_jsonl(path, items: Iterable[BaseModel]) -> None:
    with open(path, "w") as fh:
        for item in items:
            fh.write(json.dumps(item.model_dump()) + "\n")


def read_run_records(path) -> List[RunRecord]:
    return [RunRecord.model_validate(json.loads(line))
            for line in Path(path).read_text().splitlines() if line.strip()]


def read_votes(path) -> List[Vote]:
    return [Vote.model_validate(json.loads(line))
            for line in Path(path).read_text().splitlines() if line.strip()]


# -- scenario runner -----------------------------------------------------

def load_eval_prompts(path=None) -> List[dict]:
    """The bundled evaluation prompts (fixture queries with seeded targets)."""
    if path is None:
        from importlib import resources
        text = resources.files("bibgateway.assets").joinpath(
            "fixtures/eval_prompts.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def run_determinism(client, prompts: List[dict], runs: int = 5):
    """Issue each prompt's /search ``runs`` times against ``client``.

    Returns (records, byte_identical) where ``byte_identical`` maps each
    prompt id to whether all response bodies were byte-for-byte equal.
    """
    records: List[RunRecord] = []
    byte_identical: Dict[str, bool] = {}
    for prompt in prompts:
        params = [("q", prompt["query"])]
        params += [("supplementary", s) for s in prompt.get("supplementary", [])]
        if "count" in prompt:
            params.append(("count", str(prompt["count"])))
        bodies = []
        for run_index in range(runs):
            started = time.monotonic()
            response = client.get("/search", params=params)
            elapsed = time.monotonic() - started
            response.raise_for_status()
            bodies.append(response.content)
            handles = [entry["handle"]
                       for entry in response.json()["results"]]
            records.append(RunRecord(query_id=prompt["id"],
                                     run_index=run_index,
                                     handles=handles, latency=elapsed))
        byte_identical[prompt["id"]] = all(b == bodies[0] for b in bodies)
    return records, byte_identical


def determinism_by_query(records: Sequence[RunRecord]) -> Dict[str, float]:
    grouped: Dict[str, List[RunRecord]] = {}
    for record in records:
        grouped.setdefault(record.query_id, []).append(record)
    return {query: determinism(runs) for query, runs in sorted(grouped.items())}


# -- reports -------------------------------------------------------------

def latency_report(stats: Dict[str, Tuple[float, float]]) -> Tuple[str, str]:
    """(plain text, CSV) tables of rounded median and standard deviation."""
    lines = [f"{'Task':<24}{'Median (s)':>12}{'Std. Dev. (s)':>15}"]
    rows = [["task", "median_s", "std_dev_s"]]
    for task in sorted(stats):
        median, std = stats[task]
        lines.append(f"{task:<24}{round(median):>12}{round(std):>15}")
        rows.append([task, str(round(median)), str(round(std))])
    buf = io.StringIO()
    csv.writer(buf).writerows(rows)
    return "\n".join(lines), buf.getvalue()


def preference_report(matrix: Dict[str, Dict[str, float]]) -> Tuple[str, str]:
    """(plain text, CSV) per-system win percentages, one column per aspect."""
    header = f"{'System':<24}" + "".join(
        f"{aspect.capitalize():>12}" for aspect in ASPECTS)
    lines = [header]
    rows = [["system"] + list(ASPECTS)]
    for system in sorted(matrix):
        cells, csv_cells = [], []
        for aspect in ASPECTS:
            value = matrix[system].get(aspect)
            cells.append(f"{'-':>12}" if value is None else f"{value:>11.0f}%")
            csv_cells.append("" if value is None else f"{value:.1f}")
        lines.append(f"{system:<24}" + "".join(cells))
        rows.append([system] + csv_cells)
    buf = io.StringIO()
    csv.writer(buf).writerows(rows)
    return "\n".join(lines), buf.getvalue()
