"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from mapswarm import SimConfig


def desk_config(**overrides) -> SimConfig:
    """Small-map profile used throughout the tests: 128x128 map with the
    sensing radius, waypoint period, and spawn clearing scaled to match."""
    base = dict(
        size=128,
        difficulty=0.1,
        seed=0,
        n_agents=5,
        sensing_radius=8.0,
        macro_period=25,
        clearing_radius=20.0,
        codec="identity",
    )
    base.update(overrides)
    return SimConfig(**base)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_ground(rng) -> np.ndarray:
    """A 64x64 binary map with a border and scattered obstacle blobs."""
    g = (rng.random((64, 64)) < 0.08).astype(np.uint8)
    g[0, :] = g[-1, :] = 1
    g[:, 0] = g[:, -1] = 1
    g[28:36, 28:36] = 0  # keep the center clear for agent placement
    return g
