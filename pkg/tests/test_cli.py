"""Tests for the ufls command line."""

import json

import polars as pl
import pytest
import yaml
from typer.testing import CliRunner

from tests.conftest import CONFIGS, GOLDEN, small_scenario_dict
from ufls.cli import app

runner = CliRunner()


@pytest.fixture
def small_file(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(yaml.safe_dump(small_scenario_dict(horizon=2.0)))
    return path


class TestRunCommand:
    """Tests for `ufls run`."""

    def test_empty_matches_golden(self, tmp_path):
        """The quiet summary of the empty scenario should match the stored line."""
        result = runner.invoke(app, ["run", "-s", str(CONFIGS / "empty.yaml"), "--out", str(tmp_path), "--quiet"])
        assert result.exit_code == 0
        assert result.stdout == (GOLDEN / "empty_summary.txt").read_text()
        for name in ("timeseries.csv", "events.json", "summary.json"):
            assert (tmp_path / name).exists()

    def test_bundled_name(self, tmp_path):
        """A bare name should resolve to the bundled scenario."""
        result = runner.invoke(app, ["run", "-s", "empty", "--out", str(tmp_path), "-q"])
        assert result.exit_code == 0
        assert result.stdout.startswith("empty:")

    def test_missing_file(self, tmp_path):
        """A missing scenario file should exit 1."""
        result = runner.invoke(app, ["run", "-s", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_override_breaking_bound(self, small_file, tmp_path):
        """--set pushing tau1_max past the bound should exit 1 and name the key."""
        result = runner.invoke(
            app, ["run", "-s", str(small_file), "--out", str(tmp_path / "out"), "--set", "ufls.tau1_max=1e6"]
        )
        assert result.exit_code == 1
        assert "tau1_max" in result.output
        assert not (tmp_path / "out").exists()

    def test_syntax_error(self, tmp_path):
        """Broken YAML should exit 1."""
        path = tmp_path / "broken.yaml"
        path.write_text("name: x\nseed: [1, 2\n")
        result = runner.invoke(app, ["run", "-s", str(path), "--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_seed_override(self, small_file, tmp_path):
        """--seed should be recorded in the events file."""
        result = runner.invoke(app, ["run", "-s", str(small_file), "--out", str(tmp_path), "--seed", "42", "-q"])
        assert result.exit_code == 0
        doc = json.loads((tmp_path / "events.json").read_text())
        assert doc["seed"] == 42


class TestValidateCommand:
    """Tests for `ufls validate`."""

    def test_valid(self):
        """A bundled scenario should validate."""
        result = runner.invoke(app, ["validate", "-s", "case1_sectionalizer"])
        assert result.exit_code == 0
        assert "valid" in result.output

    def test_dump(self, small_file):
        """--dump should print the resolved scenario as YAML."""
        result = runner.invoke(app, ["validate", "-s", str(small_file), "--dump"])
        assert result.exit_code == 0
        data = yaml.safe_load(result.stdout)
        assert data["name"] == "small"
        assert len(data["devices"]) == 8

    def test_invalid(self, small_file):
        """A scenario with a bad override should exit 1."""
        result = runner.invoke(app, ["validate", "-s", str(small_file), "--set", "topology.groups.1.parent=G9"])
        assert result.exit_code == 1
        assert "G9" in result.output


class TestCompareCommand:
    """Tests for `ufls compare`."""

    def test_topology_mismatch(self, tmp_path):
        """Scenarios on different networks should exit 1."""
        result = runner.invoke(
            app, ["compare", str(CONFIGS / "motor_start.yaml"), str(CONFIGS / "empty.yaml"), "--out", str(tmp_path)]
        )
        assert result.exit_code == 1

    def test_writes_comparison(self, small_file, tmp_path):
        """Two runs on one network should write both result sets and comparison.csv."""
        other = tmp_path / "other.yaml"
        other.write_text(yaml.safe_dump(small_scenario_dict(name="other", horizon=2.0, ufls={"scheme": "none"})))
        out = tmp_path / "cmp"
        result = runner.invoke(app, ["compare", str(small_file), str(other), "--out", str(out)])
        assert result.exit_code == 0
        frame = pl.read_csv(out / "comparison.csv")
        assert "puf_mean_vs_baseline" in frame["metric"].to_list()
        assert (out / "a" / "summary.json").exists()
        assert (out / "b" / "summary.json").exists()


class TestSweepCommand:
    """Tests for `ufls sweep`."""

    def test_writes_rows(self, small_file, tmp_path):
        """Each grid point should become one row of sweep.csv."""
        result = runner.invoke(
            app, ["sweep", "-s", str(small_file), "--grid", "horizon=1.0,2.0", "--out", str(tmp_path)]
        )
        assert result.exit_code == 0
        frame = pl.read_csv(tmp_path / "sweep.csv")
        assert frame.height == 2
        assert frame["status"].to_list() == ["ok", "ok"]

    def test_bad_axis(self, small_file, tmp_path):
        """An axis without '=' should exit 1."""
        result = runner.invoke(app, ["sweep", "-s", str(small_file), "--grid", "horizon", "--out", str(tmp_path)])
        assert result.exit_code == 1


def test_version():
    """version should print something and exit 0."""
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert result.stdout.strip()
