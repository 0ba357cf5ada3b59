"""Command-line interface: all four subcommands end to end."""

import csv
import json

import numpy as np
import pytest

from mapswarm.cli import _parse_config_file, main
from mapswarm.io import read_pgm

DESK_LINES = """\
# small-scale episode profile
size = 128
difficulty = 0.1
n_agents = 2
sensing_radius = 8.0
macro_period = 25
clearing_radius = 20.0
codec = identity
max_steps = 40
coverage_threshold = 1.0
seed = 3
"""


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfigFile:
    def test_parses_types_and_comments(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(DESK_LINES)
        config = _parse_config_file(path)
        assert config.size == 128
        assert config.n_agents == 2
        assert config.sensing_radius == 8.0
        assert config.codec == "identity"
        assert config.coverage_threshold == 1.0

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("no_such_key = 3\n")
        with pytest.raises(ValueError, match="unknown config key"):
            _parse_config_file(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("just a line\n")
        with pytest.raises(ValueError, match="expected 'key = value'"):
            _parse_config_file(path)


class TestGenmap:
    def test_writes_pgm_and_sidecar(self, tmp_path):
        out = tmp_path / "map.pgm"
        rc = main(["genmap", "--size", "64", "--difficulty", "0.2",
                   "--seed", "5", "--out", str(out)])
        assert rc == 0
        grid = read_pgm(out)
        assert grid.shape == (64, 64)
        assert set(np.unique(grid)) <= {0, 1}
        meta = json.loads(out.with_suffix(".pgm.json").read_text())
        assert meta["size"] == 64
        assert meta["difficulty"] == 0.2
        assert meta["seed"] == 5

    def test_deterministic_across_invocations(self, tmp_path):
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        for out in (a, b):
            main(["genmap", "--size", "64", "--seed", "9", "--out", str(out)])
        np.testing.assert_array_equal(read_pgm(a), read_pgm(b))


class TestRun:
    def test_outputs_metrics_coverage_and_metadata(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(DESK_LINES)
        out = tmp_path / "episode"
        rc = main(["run", "--config", str(cfg), "--out", str(out)])
        assert rc == 0

        rows = read_rows(out / "metrics.csv")
        assert len(rows) == 1
        assert rows[0]["cause"] == "timeout"
        assert rows[0]["steps"] == "40"
        assert rows[0]["time_s"] == "4.0"

        curve = read_rows(out / "coverage.csv")
        assert len(curve) == 40
        assert [int(r["step"]) for r in curve] == list(range(1, 41))

        meta = json.loads((out / "run.json").read_text())
        assert meta["config"]["seed"] == 3
        assert meta["result"]["steps"] == 40

    def test_seed_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(DESK_LINES)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg), "--out", str(out_a)])
        main(["run", "--config", str(cfg), "--seed", "99", "--out", str(out_b)])
        row_a = read_rows(out_a / "metrics.csv")[0]
        row_b = read_rows(out_b / "metrics.csv")[0]
        assert row_a["seed"] == "3" and row_b["seed"] == "99"
        assert row_a["total_distance"] != row_b["total_distance"]

    def test_snapshots_written_at_interval(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(DESK_LINES)
        out = tmp_path / "episode"
        main(["run", "--config", str(cfg), "--snapshot-every", "10", "--out", str(out)])
        snaps = sorted((out / "snapshots").iterdir())
        assert [s.name for s in snaps] == [
            "step_000010.pgm", "step_000020.pgm", "step_000030.pgm", "step_000040.pgm",
        ]
        img = read_pgm(snaps[0])
        assert img.shape == (128, 128)


class TestSweep:
    def test_episode_and_summary_tables(self, tmp_path):
        cfg = tmp_path / "base.cfg"
        cfg.write_text(DESK_LINES)
        out = tmp_path / "sweep"
        rc = main([
            "sweep", "--config", str(cfg), "--agents", "1,2",
            "--difficulties", "0.1", "--seeds", "2",
            "--max-steps", "10", "--out", str(out),
        ])
        assert rc == 0
        episodes = read_rows(out / "episodes.csv")
        assert len(episodes) == 4  # 2 team sizes x 1 difficulty x 2 seeds
        summary = read_rows(out / "summary.csv")
        assert len(summary) == 2
        assert {r["n_agents"] for r in summary} == {"1", "2"}
        assert all(r["episodes"] == "2" for r in summary)

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "base.cfg"
        cfg.write_text(DESK_LINES)
        out = tmp_path / "sweep"
        main([
            "sweep", "--config", str(cfg), "--agents", "1",
            "--difficulties", "0.1", "--seeds", "1",
            "--size", "64", "--sensing-radius", "6", "--max-steps", "5",
            "--out", str(out),
        ])
        row = read_rows(out / "episodes.csv")[0]
        assert row["steps"] == "5"


class TestNoiseSweep:
    def test_beta_sigma_grid(self, tmp_path):
        cfg = tmp_path / "base.cfg"
        cfg.write_text(DESK_LINES)
        out = tmp_path / "noise"
        rc = main([
            "noise-sweep", "--config", str(cfg),
            "--betas", "0.1,0.9", "--sigmas", "0,0.004",
            "--difficulty", "0.1", "--seeds", "1",
            "--codec", "downsample", "--max-steps", "5", "--out", str(out),
        ])
        assert rc == 0
        episodes = read_rows(out / "episodes.csv")
        assert len(episodes) == 4  # 2 betas x 2 sigmas x 1 seed
        assert {(r["beta"], r["sigma"]) for r in episodes} == {
            ("0.1", "0.0"), ("0.1", "0.004"), ("0.9", "0.0"), ("0.9", "0.004"),
        }
        summary = read_rows(out / "summary.csv")
        assert len(summary) == 4
