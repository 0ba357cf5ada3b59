"""File formats: PGM rasters, raw grid dumps, message and transition frames.

All binary formats are little-endian. Occupancy PGMs are binary P5 with
maxval 255, obstacle cells black (0) and free cells white (255). Grid dumps
are flat float32 with a 16-byte header. Message and transition files are
framed streams with a fixed-size header carrying the frame geometry.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .comms import Message

GRID_MAGIC = b"MSWG"
GRID_MODE_BINARY = 0
GRID_MODE_REAL = 1
_GRID_HEADER = struct.Struct("<4sIII")  # magic, size, mode, reserved

MESSAGE_MAGIC = b"MSWM"
_MESSAGE_HEADER = struct.Struct("<4sIII")  # magic, version, latent_size, count

TRANSITION_MAGIC = b"MSWT"
_TRANSITION_HEADER = struct.Struct("<4sIII")  # magic, version, obs_len, count


# ---------------------------------------------------------------------- PGM


def write_pgm(path: str | Path, grid: np.ndarray) -> None:
    """Binary occupancy grid as P5 PGM: obstacle=0 (black), free=255."""
    pixels = np.where(np.asarray(grid) >= 1, 0, 255).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a P5 PGM back into a binary occupancy grid (dark = obstacle)."""
    raw = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"not a binary PGM: magic {fields[0]!r}")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval > 255:
        raise ValueError("16-bit PGM not supported")
    pixels = np.frombuffer(raw[pos + 1 :], dtype=np.uint8, count=width * height)
    return (pixels.reshape(height, width) <= maxval // 2).astype(np.uint8)


def write_snapshot_pgm(
    path: str | Path, ground: np.ndarray, explored: np.ndarray
) -> None:
    """Three-level progress raster: obstacles black, explored free cells
    mid-gray (128), unexplored free cells white."""
    pixels = np.full(ground.shape, 255, dtype=np.uint8)
    pixels[(ground == 0) & (explored == 1)] = 128
    pixels[ground == 1] = 0
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


# --------------------------------------------------------------- grid dumps


def write_grid(path: str | Path, values: np.ndarray, mode: int) -> None:
    """Square grid as flat little-endian float32 behind a 16-byte header."""
    values = np.asarray(values)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"expected a square grid, got shape {values.shape}")
    if mode not in (GRID_MODE_BINARY, GRID_MODE_REAL):
        raise ValueError(f"unknown grid mode {mode}")
    header = _GRID_HEADER.pack(GRID_MAGIC, values.shape[0], mode, 0)
    payload = values.astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_grid(path: str | Path) -> tuple[np.ndarray, int]:
    raw = Path(path).read_bytes()
    magic, size, mode, _ = _GRID_HEADER.unpack_from(raw)
    if magic != GRID_MAGIC:
        raise ValueError(f"bad grid magic {magic!r}")
    values = np.frombuffer(raw, dtype="<f4", offset=_GRID_HEADER.size, count=size * size)
    return values.reshape(size, size).copy(), mode


# ----------------------------------------------------------------- messages


def write_messages(path: str | Path, messages: Sequence[Message]) -> None:
    """Framed message log. Each frame: sender id (u32), then position,
    velocity, target as 6 float32, then the obstacle and exploration latent
    vectors. All frames in one file share the latent size from the header."""
    if messages:
        latent_size = int(messages[0].obstacle_latent.size)
    else:
        latent_size = 0
    chunks = [_MESSAGE_HEADER.pack(MESSAGE_MAGIC, 1, latent_size, len(messages))]
    for msg in messages:
        if msg.obstacle_latent.size != latent_size or msg.explored_latent.size != latent_size:
            raise ValueError("all messages in a file must share one latent size")
        chunks.append(struct.pack("<I", msg.sender_id))
        pose = np.concatenate([msg.position, msg.velocity, msg.target])
        chunks.append(pose.astype("<f4").tobytes())
        chunks.append(msg.obstacle_latent.astype("<f4").tobytes())
        chunks.append(msg.explored_latent.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_messages(path: str | Path) -> list[Message]:
    raw = Path(path).read_bytes()
    magic, version, latent_size, count = _MESSAGE_HEADER.unpack_from(raw)
    if magic != MESSAGE_MAGIC:
        raise ValueError(f"bad message magic {magic!r}")
    if version != 1:
        raise ValueError(f"unsupported message version {version}")
    offset = _MESSAGE_HEADER.size
    frame_floats = 6 + 2 * latent_size
    out = []
    for _ in range(count):
        (sender_id,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        floats = np.frombuffer(raw, dtype="<f4", offset=offset, count=frame_floats)
        offset += 4 * frame_floats
        out.append(
            Message(
                sender_id=sender_id,
                position=floats[0:2].astype(np.float64),
                velocity=floats[2:4].astype(np.float64),
                target=floats[4:6].astype(np.float64),
                obstacle_latent=floats[6 : 6 + latent_size].copy(),
                explored_latent=floats[6 + latent_size :].copy(),
            )
        )
    return out


# -------------------------------------------------------------- transitions


class TransitionRecorder:
    """Streams (observation, action, reward, done) tuples to a framed file
    so external trainers can consume them offline.

    Frame layout: agent id (u32), step (u32), observation (float32 x
    obs_len), action (float32 x 2), reward (float32), done (u8).
    """

    def __init__(self, path: str | Path, obs_len: int):
        self.obs_len = int(obs_len)
        self.count = 0
        self._fh = open(path, "wb")
        self._fh.write(_TRANSITION_HEADER.pack(TRANSITION_MAGIC, 1, self.obs_len, 0))

    def add(
        self,
        agent_id: int,
        step: int,
        observation: np.ndarray,
        action: np.ndarray,
        reward: float,
        done: bool,
    ) -> None:
        observation = np.asarray(observation, dtype="<f4")
        if observation.size != self.obs_len:
            raise ValueError(
                f"observation length {observation.size} != declared {self.obs_len}"
            )
        self._fh.write(struct.pack("<II", agent_id, step))
        self._fh.write(observation.tobytes())
        self._fh.write(np.asarray(action, dtype="<f4").reshape(2).tobytes())
        self._fh.write(struct.pack("<fB", float(reward), int(bool(done))))
        self.count += 1

    def close(self) -> None:
        self._fh.seek(0)
        self._fh.write(_TRANSITION_HEADER.pack(TRANSITION_MAGIC, 1, self.obs_len, self.count))
        self._fh.close()

    def __enter__(self) -> "TransitionRecorder":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_transitions(path: str | Path) -> list[dict]:
    raw = Path(path).read_bytes()
    magic, version, obs_len, count = _TRANSITION_HEADER.unpack_from(raw)
    if magic != TRANSITION_MAGIC:
        raise ValueError(f"bad transition magic {magic!r}")
    if version != 1:
        raise ValueError(f"unsupported transition version {version}")
    offset = _TRANSITION_HEADER.size
    out = []
    for _ in range(count):
        agent_id, step = struct.unpack_from("<II", raw, offset)
        offset += 8
        obs = np.frombuffer(raw, dtype="<f4", offset=offset, count=obs_len).copy()
        offset += 4 * obs_len
        action = np.frombuffer(raw, dtype="<f4", offset=offset, count=2).copy()
        offset += 8
        reward, done = struct.unpack_from("<fB", raw, offset)
        offset += 5
        out.append(
            {
                "agent_id": agent_id,
                "step": step,
                "observation": obs,
                "action": action,
                "reward": reward,
                "done": bool(done),
            }
        )
    return out


# --------------------------------------------------------------------- CSV


def write_csv(path: str | Path, rows: Sequence[dict]) -> None:
    """Write homogeneous dict rows; column order follows the first row."""
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
