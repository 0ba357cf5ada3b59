"""File formats: PGM rasters, framed grids, message logs, transition logs."""

import numpy as np
import pytest

from mapswarm import IdentityCodec, make_message
from mapswarm.io import (
    GRID_MODE_BINARY,
    GRID_MODE_REAL,
    TransitionRecorder,
    read_grid,
    read_messages,
    read_pgm,
    read_transitions,
    write_csv,
    write_grid,
    write_messages,
    write_pgm,
    write_snapshot_pgm,
)
from test_agent import make_state


class TestPgm:
    def test_roundtrip(self, tmp_path, rng):
        grid = (rng.random((24, 24)) < 0.3).astype(np.uint8)
        path = tmp_path / "map.pgm"
        write_pgm(path, grid)
        np.testing.assert_array_equal(read_pgm(path), grid)

    def test_binary_convention_obstacle_black(self, tmp_path):
        grid = np.array([[0, 1]], dtype=np.uint8)
        path = tmp_path / "two.pgm"
        write_pgm(path, grid)
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n2 1\n255\n")
        assert raw[-2:] == bytes([255, 0])  # free white, obstacle black

    def test_snapshot_three_levels(self, tmp_path):
        ground = np.array([[1, 0, 0]], dtype=np.uint8)
        explored = np.array([[1, 1, 0]], dtype=np.uint8)
        path = tmp_path / "snap.pgm"
        write_snapshot_pgm(path, ground, explored)
        assert path.read_bytes()[-3:] == bytes([0, 128, 255])


class TestGridFile:
    def test_roundtrip_binary_mode(self, tmp_path, rng):
        grid = (rng.random((16, 16)) < 0.4).astype(np.uint8)
        path = tmp_path / "grid.bin"
        write_grid(path, grid, GRID_MODE_BINARY)
        loaded, mode = read_grid(path)
        assert mode == GRID_MODE_BINARY
        np.testing.assert_array_equal(loaded, grid.astype(np.float32))

    def test_roundtrip_real_mode(self, tmp_path, rng):
        values = rng.random((16, 16)).astype(np.float32)
        path = tmp_path / "grid.bin"
        write_grid(path, values, GRID_MODE_REAL)
        loaded, mode = read_grid(path)
        assert mode == GRID_MODE_REAL
        np.testing.assert_array_equal(loaded, values)

    def test_rejects_non_square(self, tmp_path):
        with pytest.raises(ValueError):
            write_grid(tmp_path / "bad.bin", np.zeros((4, 5)), GRID_MODE_BINARY)

    def test_rejects_unknown_mode(self, tmp_path):
        with pytest.raises(ValueError):
            write_grid(tmp_path / "bad.bin", np.zeros((4, 4)), 7)

    def test_rejects_corrupt_magic(self, tmp_path):
        path = tmp_path / "grid.bin"
        write_grid(path, np.zeros((4, 4)), GRID_MODE_BINARY)
        raw = bytearray(path.read_bytes())
        raw[0] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError):
            read_grid(path)


class TestMessageLog:
    def make_messages(self, n=3):
        codec = IdentityCodec(size=8)
        out = []
        for i in range(n):
            state = make_state((float(i), 2.0 * i), velocity=(0.5, -0.5), size=8)
            state.target = np.array([7.0, 7.0])
            state.obstacles_self[i, i] = 1
            state.explored_self[i, i] = 1
            out.append(make_message(state, codec))
        return out

    def test_roundtrip(self, tmp_path):
        messages = self.make_messages()
        path = tmp_path / "log.bin"
        write_messages(path, messages)
        loaded = read_messages(path)
        assert len(loaded) == 3
        for got, want in zip(loaded, messages):
            assert got.sender_id == want.sender_id
            np.testing.assert_allclose(got.position, want.position)
            np.testing.assert_allclose(got.velocity, want.velocity)
            np.testing.assert_allclose(got.target, want.target)
            np.testing.assert_allclose(got.obstacle_latent, want.obstacle_latent)
            np.testing.assert_allclose(got.explored_latent, want.explored_latent)

    def test_empty_log(self, tmp_path):
        path = tmp_path / "empty.bin"
        write_messages(path, [])
        assert read_messages(path) == []

    def test_mixed_latent_sizes_rejected(self, tmp_path):
        messages = self.make_messages(2)
        small = make_message(make_state((0.0, 0.0), size=4), IdentityCodec(size=4))
        with pytest.raises(ValueError):
            write_messages(tmp_path / "bad.bin", messages + [small])


class TestTransitionLog:
    def test_roundtrip_and_count(self, tmp_path, rng):
        path = tmp_path / "transitions.bin"
        with TransitionRecorder(path, obs_len=10) as rec:
            for step in range(5):
                rec.add(
                    agent_id=step % 2,
                    step=step,
                    observation=rng.random(10).astype(np.float32),
                    action=np.array([0.5, -0.5], dtype=np.float32),
                    reward=float(step),
                    done=step == 4,
                )
        rows = read_transitions(path)
        assert len(rows) == 5
        assert [r["step"] for r in rows] == list(range(5))
        assert [r["agent_id"] for r in rows] == [0, 1, 0, 1, 0]
        assert rows[-1]["done"] is True and rows[0]["done"] is False
        assert rows[3]["reward"] == pytest.approx(3.0)
        assert rows[0]["observation"].shape == (10,)
        np.testing.assert_allclose(rows[2]["action"], [0.5, -0.5])

    def test_length_mismatch_rejected(self, tmp_path):
        with TransitionRecorder(tmp_path / "t.bin", obs_len=4) as rec:
            with pytest.raises(ValueError):
                rec.add(0, 0, np.zeros(5), np.zeros(2), 0.0, False)


class TestCsv:
    def test_roundtrip_text(self, tmp_path):
        rows = [
            {"seed": 0, "steps": 12, "cause": "coverage"},
            {"seed": 1, "steps": 34, "cause": "timeout"},
        ]
        path = tmp_path / "rows.csv"
        write_csv(path, rows)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "seed,steps,cause"
        assert lines[1] == "0,12,coverage"
        assert lines[2] == "1,34,timeout"

    def test_empty_rows_writes_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(path, [])
        assert path.read_text() == ""
