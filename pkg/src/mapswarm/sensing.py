"""Exact disk sensing of the ground map.

Within the sensing radius an agent reads the ground truth perfectly: sensed
cells are marked explored and their obstacle values copied. Self maps only
ever gain information. Optional line-of-sight occlusion hides cells whose
ray from the agent crosses an obstacle.
"""

from __future__ import annotations

import numpy as np

from .agent import AgentState

SENSING_RADIUS = 30.0  # px, full-scale default


def _disk_window(
    shape: tuple[int, int], position: np.ndarray, radius: float
) -> tuple[slice, slice, np.ndarray]:
    """Bounding slices and in-disk mask for a Euclidean disk at a real-valued
    position (x, y). Cell centers within ``radius`` (inclusive) are in."""
    x, y = float(position[0]), float(position[1])
    x0 = max(int(np.ceil(x - radius)), 0)
    x1 = min(int(np.floor(x + radius)), shape[1] - 1)
    y0 = max(int(np.ceil(y - radius)), 0)
    y1 = min(int(np.floor(y + radius)), shape[0] - 1)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)[:, np.newaxis]
    xs = np.arange(x0, x1 + 1, dtype=np.float64)[np.newaxis, :]
    mask = (xs - x) ** 2 + (ys - y) ** 2 <= radius * radius
    return slice(y0, y1 + 1), slice(x0, x1 + 1), mask


def line_of_sight(grid: np.ndarray, start: np.ndarray, end: tuple[int, int]) -> bool:
    """Bresenham walk from the rounded start cell to ``end`` = (x, y); True
    when no strictly intermediate cell is an obstacle."""
    x0, y0 = int(round(float(start[0]))), int(round(float(start[1])))
    x1, y1 = int(end[0]), int(end[1])
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        if (x, y) != (x0, y0) and (x, y) != (x1, y1) and grid[y, x]:
            return False
        if x == x1 and y == y1:
            return True
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def sense(
    state: AgentState,
    ground: np.ndarray,
    radius: float = SENSING_RADIUS,
    occlusion: bool = False,
) -> AgentState:
    """Mark the disk around the agent as explored and copy ground obstacles.

    Monotone: updates are OR-accumulated, so nothing sensed is ever
    forgotten. With ``occlusion`` enabled, only cells with a clear Bresenham
    ray from the agent are sensed.
    """
    rows, cols, mask = _disk_window(ground.shape, state.position, radius)
    if occlusion:
        mask = mask.copy()
        ys, xs = np.nonzero(mask)
        for dy, dx in zip(ys, xs):
            cell = (cols.start + dx, rows.start + dy)
            if not line_of_sight(ground, state.position, cell):
                mask[dy, dx] = False
    view = mask.astype(np.uint8)
    state.explored_self[rows, cols] |= view
    state.obstacles_self[rows, cols] |= ground[rows, cols] & view
    return state
