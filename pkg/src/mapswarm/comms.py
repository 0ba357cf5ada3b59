"""Local communication: neighbor selection, map codecs, and channel noise.

Each communication event gathers the M nearest agents within the sensing
radius. When fewer than M are in range, the roster is padded with virtual
neighbors pinned to the corner of the quadrant opposite the agent's own;
virtual neighbors carry zero velocity, the agent's own position as target,
and contribute no maps. Messages carry the sender's *self* maps encoded as
flat latent vectors; independent Gaussian noise is added per transmission.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .agent import AgentState

NEIGHBOR_COUNT = 3  # M, full-scale default


@dataclass(frozen=True)
class NeighborRecord:
    agent_id: int | None  # None for virtual records
    position: np.ndarray
    velocity: np.ndarray
    target: np.ndarray
    virtual: bool


@dataclass(frozen=True)
class Message:
    sender_id: int
    position: np.ndarray
    velocity: np.ndarray
    target: np.ndarray
    obstacle_latent: np.ndarray  # float32, sender's obstacles_self encoded
    explored_latent: np.ndarray  # float32, sender's explored_self encoded


class MapCodec(Protocol):
    """Flat-vector codec standing in for a learned map encoder."""

    latent_size: int

    def encode(self, grid: np.ndarray) -> np.ndarray: ...

    def decode(self, latent: np.ndarray) -> np.ndarray: ...


class IdentityCodec:
    """Lossless codec: the latent is the flattened map itself."""

    def __init__(self, size: int):
        self.size = size
        self.latent_size = size * size

    def encode(self, grid: np.ndarray) -> np.ndarray:
        if grid.shape != (self.size, self.size):
            raise ValueError(f"expected {(self.size, self.size)} grid, got {grid.shape}")
        return grid.astype(np.float32).ravel()

    def decode(self, latent: np.ndarray) -> np.ndarray:
        if latent.size != self.latent_size:
            raise ValueError(f"expected latent of size {self.latent_size}, got {latent.size}")
        out = np.asarray(latent, dtype=np.float32).reshape(self.size, self.size)
        return np.clip(out, 0.0, 1.0)


class DownsampleCodec:
    """Lossy codec: factor x factor block means, nearest-neighbor upsample.

    ``feature_scale`` sets the dynamic range of the latent: encoded values
    are ``0.5 + (mean - 0.5) * feature_scale``, so the default of 1.0 makes
    the latent the plain block means. A learned bottleneck packs the map
    into features whose amplitude is small compared with the occupancy
    range, which is what makes fixed-amplitude channel noise bite; shrinking
    ``feature_scale`` reproduces that sensitivity, because decoding expands
    any noise on the latent by ``1 / feature_scale``.
    """

    def __init__(self, size: int, factor: int, feature_scale: float = 1.0):
        if factor < 1 or size % factor != 0:
            raise ValueError(f"factor {factor} must divide the map size {size}")
        if not 0.0 < feature_scale <= 1.0:
            raise ValueError(f"feature_scale must be in (0, 1], got {feature_scale}")
        self.size = size
        self.factor = factor
        self.feature_scale = float(feature_scale)
        self.blocks = size // factor
        self.latent_size = self.blocks * self.blocks

    def encode(self, grid: np.ndarray) -> np.ndarray:
        if grid.shape != (self.size, self.size):
            raise ValueError(f"expected {(self.size, self.size)} grid, got {grid.shape}")
        f, b = self.factor, self.blocks
        means = grid.astype(np.float32).reshape(b, f, b, f).mean(axis=(1, 3))
        if self.feature_scale != 1.0:
            means = 0.5 + (means - 0.5) * np.float32(self.feature_scale)
        return means.ravel()

    def decode(self, latent: np.ndarray) -> np.ndarray:
        if latent.size != self.latent_size:
            raise ValueError(f"expected latent of size {self.latent_size}, got {latent.size}")
        b, f = self.blocks, self.factor
        blocks = np.asarray(latent, dtype=np.float32).reshape(b, b)
        if self.feature_scale != 1.0:
            blocks = 0.5 + (blocks - 0.5) / np.float32(self.feature_scale)
        out = np.repeat(np.repeat(blocks, f, axis=0), f, axis=1)
        return np.clip(out, 0.0, 1.0)


def make_codec(
    kind: str, size: int, factor: int = 4, feature_scale: float = 1.0
) -> MapCodec:
    if kind == "identity":
        return IdentityCodec(size)
    if kind == "downsample":
        return DownsampleCodec(size, factor, feature_scale)
    raise ValueError(f"unknown codec kind {kind!r}")


def virtual_position(position: np.ndarray, size: int) -> np.ndarray:
    """Corner of the quadrant diagonally opposite the agent's quadrant.

    Quadrants split at x = size/2 and y = size/2; an agent exactly on a
    midline counts as the lower-coordinate side, so the exact center maps to
    (size - 1, size - 1).
    """
    half = size / 2.0
    cx = float(size - 1) if float(position[0]) <= half else 0.0
    cy = float(size - 1) if float(position[1]) <= half else 0.0
    return np.array([cx, cy], dtype=np.float64)


def select_neighbors(
    state: AgentState,
    agents: Sequence[AgentState],
    count: int = NEIGHBOR_COUNT,
    radius: float = 30.0,
    size: int = 512,
) -> list[NeighborRecord]:
    """The M nearest in-range agents, padded to exactly M with virtual
    records. Distance ties resolve toward the lower agent id."""
    in_range: list[tuple[float, int, AgentState]] = []
    for other in agents:
        if other.agent_id == state.agent_id:
            continue
        d = float(np.hypot(*(other.position - state.position)))
        if d <= radius:
            in_range.append((d, other.agent_id, other))
    in_range.sort(key=lambda item: (item[0], item[1]))

    records = [
        NeighborRecord(
            agent_id=other.agent_id,
            position=other.position.copy(),
            velocity=other.velocity.copy(),
            target=other.target.copy(),
            virtual=False,
        )
        for _, _, other in in_range[:count]
    ]
    if len(records) < count:
        corner = virtual_position(state.position, size)
        records.extend(
            NeighborRecord(
                agent_id=None,
                position=corner.copy(),
                velocity=np.zeros(2, dtype=np.float64),
                target=state.position.copy(),
                virtual=True,
            )
            for _ in range(count - len(records))
        )
    return records


def make_message(state: AgentState, codec: MapCodec) -> Message:
    """Encode the sender's self maps; payloads are value copies, detached
    from the live agent state."""
    return Message(
        sender_id=state.agent_id,
        position=state.position.copy(),
        velocity=state.velocity.copy(),
        target=state.target.copy(),
        obstacle_latent=codec.encode(state.obstacles_self),
        explored_latent=codec.encode(state.explored_self),
    )


def inject_noise(
    latent: np.ndarray, sigma: float, rng: np.random.Generator
) -> np.ndarray:
    """Add element-wise N(0, sigma^2) channel noise; sigma = 0 is an exact
    copy with no RNG draw."""
    latent = np.asarray(latent, dtype=np.float32)
    if sigma == 0.0:
        return latent.copy()
    return latent + rng.normal(0.0, sigma, size=latent.shape).astype(np.float32)
