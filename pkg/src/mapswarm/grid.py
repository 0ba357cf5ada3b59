"""Occupancy-grid algebra shared by sensing, fusion, and metrics.

Grids are plain numpy arrays: binary grids are uint8 with values in {0, 1}
(1 = obstacle for ground/obstacle maps, 1 = explored for exploration maps),
real grids are floats in [0, 1]. Positions are (x, y) pixel coordinates with
cell centers at integer coordinates and ``grid[y, x]`` indexing.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import ndimage

BINARIZE_THRESHOLD = 0.5


def or_combine(stack: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Elementwise logical OR over a stack of same-shaped binary grids."""
    grids = np.stack(stack) if not isinstance(stack, np.ndarray) else stack
    if grids.ndim < 3 or grids.shape[0] == 0:
        raise ValueError("or_combine needs a non-empty stack of 2-D grids")
    if grids.max(initial=0) > 1:
        raise ValueError("or_combine inputs must be binary {0, 1} grids")
    return np.bitwise_or.reduce(grids.astype(np.uint8), axis=0)


def binarize(values: np.ndarray, threshold: float = BINARIZE_THRESHOLD) -> np.ndarray:
    """Threshold a real grid to {0, 1}; ties (value == threshold) map to 1 so
    an exact split of beliefs keeps the obstacle."""
    return (np.asarray(values) >= threshold).astype(np.uint8)


@lru_cache(maxsize=32)
def disk_footprint(radius: float) -> np.ndarray:
    """Boolean disk structuring element: offsets with dx^2 + dy^2 <= radius^2."""
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    r = int(np.floor(radius))
    span = np.arange(-r, r + 1, dtype=np.float64)
    dist2 = span[:, np.newaxis] ** 2 + span[np.newaxis, :] ** 2
    return dist2 <= radius * radius


def dilate(grid: np.ndarray, radius: float) -> np.ndarray:
    """Morphological dilation with a Euclidean disk structuring element."""
    if radius < 1:
        return grid.astype(np.uint8).copy()
    out = ndimage.binary_dilation(grid.astype(bool), structure=disk_footprint(radius))
    return out.astype(np.uint8)


def crop_disk(
    grid: np.ndarray,
    center: tuple[float, float],
    radius: int,
    fill: float = 1,
) -> np.ndarray:
    """Square window of side 2*radius + 1 centered at ``center`` (x, y).

    Cells outside the map are filled with ``fill`` (obstacle by default, so
    map edges read as walls). The window itself is square; the radius only
    sizes it.
    """
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    cx = int(round(float(center[0])))
    cy = int(round(float(center[1])))
    side = 2 * radius + 1
    out = np.full((side, side), fill, dtype=grid.dtype)

    y0, y1 = cy - radius, cy + radius + 1
    x0, x1 = cx - radius, cx + radius + 1
    src_y0, src_x0 = max(y0, 0), max(x0, 0)
    src_y1, src_x1 = min(y1, grid.shape[0]), min(x1, grid.shape[1])
    if src_y0 < src_y1 and src_x0 < src_x1:
        out[src_y0 - y0 : src_y1 - y0, src_x0 - x0 : src_x1 - x0] = grid[
            src_y0:src_y1, src_x0:src_x1
        ]
    return out


def interior_mask(size: int) -> np.ndarray:
    """Boolean mask excluding the one-pixel obstacle border."""
    mask = np.zeros((size, size), dtype=bool)
    mask[1:-1, 1:-1] = True
    return mask


def coverage_fraction(
    explored_stack: Sequence[np.ndarray] | np.ndarray,
    interior: np.ndarray,
) -> float:
    """Fraction of interior cells explored by at least one map in the stack."""
    combined = or_combine(explored_stack)
    return float(combined[interior].mean())


def map_accuracy(
    ground: np.ndarray,
    obstacles: np.ndarray,
    explored: np.ndarray,
) -> float | None:
    """Fraction of explored cells whose obstacle belief matches the ground
    map. Returns None when nothing is explored (no-coverage), never 0.0."""
    explored_cells = explored.astype(bool)
    total = int(explored_cells.sum())
    if total == 0:
        return None
    matches = int((ground[explored_cells] == obstacles[explored_cells]).sum())
    return matches / total
