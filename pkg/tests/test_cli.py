import json

from click.testing import CliRunner

from bibgateway.cli import main
from bibgateway.evalharness import Vote, write_jsonl


class TestEvalCommands:
    def test_determinism_reports_stable_prompts(self):
        result = CliRunner().invoke(main, ["eval", "determinism", "--runs", "3"])
        assert result.exit_code == 0, result.output
        lines = [l for l in result.output.splitlines() if l.strip()]
        assert len(lines) == 7
        assert all("determinism=1.000" in l for l in lines)
        assert all("byte-identical" in l for l in lines)

    def test_determinism_writes_jsonl(self, tmp_path):
        out = tmp_path / "runs.jsonl"
        result = CliRunner().invoke(
            main, ["eval", "determinism", "--runs", "2", "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 14  # 7 prompts x 2 runs
        assert json.loads(lines[0])["run_index"] == 0

    def test_latency_table(self, tmp_path):
        csv_path = tmp_path / "latency.csv"
        result = CliRunner().invoke(
            main, ["eval", "latency", "--runs", "2", "--csv", str(csv_path)])
        assert result.exit_code == 0, result.output
        assert "Median (s)" in result.output
        assert csv_path.read_text().startswith("task,median_s,std_dev_s")

    def test_votes_aggregation(self, tmp_path):
        votes_path = tmp_path / "votes.jsonl"
        write_jsonl(votes_path, [
            Vote(prompt_id="p1", system_a="ours", system_b="baseline",
                 winner="A", aspect="intuition"),
            Vote(prompt_id="p2", system_a="ours", system_b="baseline",
                 winner="B", aspect="intuition"),
        ])
        result = CliRunner().invoke(main, ["eval", "votes", str(votes_path)])
        assert result.exit_code == 0, result.output
        assert "ours" in result.output and "baseline" in result.output

    def test_votes_missing_file_exits_nonzero(self):
        result = CliRunner().invoke(main, ["eval", "votes", "/nope.jsonl"])
        assert result.exit_code == 1


class TestServe:
    def test_missing_config_is_usage_error(self):
        result = CliRunner().invoke(main, ["serve", "--config", "/nope.yaml"])
        assert result.exit_code == 2


class TestHttpCommands:
    def test_search_connection_failure_exits_one(self):
        result = CliRunner().invoke(main, [
            "search", "-q", "x", "--server", "http://127.0.0.1:9"])
        assert result.exit_code == 1
        assert "connection failed" in result.output
