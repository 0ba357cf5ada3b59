"""Procedural occupancy-map generation from thresholded gradient noise.

A map is built from two obstacle components (coarse blobs and fine grain),
each the AND of a thresholded noise layer with a thresholded mask layer.
A very low-frequency blend mask then selects, per pixel, which component
supplies the obstacle. Finally a central disk is cleared for spawning and
a one-pixel obstacle border is added.

Grid convention: ``grid[row, col]`` with ``row = y`` and ``col = x``;
obstacle cells are 1, free cells are 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Inclusive octave ranges for the two obstacle components and the blend mask.
# "Octaves" is the lattice frequency of a noise layer -- the number of
# gradient-lattice cells spanning the raster -- so higher octaves give finer
# features.
LARGE_OCTAVE_RANGE = (7, 12)
SMALL_OCTAVE_RANGE = (15, 20)
BLEND_OCTAVE_RANGE = (1, 3)

# Mask layers and the blend mask are cut at the same midpoint threshold.
MASK_THRESHOLD = 0.5

# The spawn clearing is 60 px on a 512-px map and scales linearly with size.
CLEARING_FRACTION = 60.0 / 512.0

GENERATOR_CONSTANTS = {
    "noise": "lattice-gradient/smootherstep",
    "rng": "numpy-pcg64",
    "normalization": "min-max per layer",
    "mask_threshold": MASK_THRESHOLD,
    "large_octave_range": LARGE_OCTAVE_RANGE,
    "small_octave_range": SMALL_OCTAVE_RANGE,
    "blend_octave_range": BLEND_OCTAVE_RANGE,
}


@dataclass(frozen=True)
class NoiseLayer:
    """A single noise raster and the lattice frequency it was drawn at."""

    values: np.ndarray  # float64, shape (size, size), all values in [0, 1]
    octaves: int


@dataclass(frozen=True)
class MapGenConfig:
    size: int = 512
    difficulty: float = 0.3
    seed: int = 0
    clearing_radius: float | None = None  # defaults to CLEARING_FRACTION * size
    large_octave_range: tuple[int, int] = LARGE_OCTAVE_RANGE
    small_octave_range: tuple[int, int] = SMALL_OCTAVE_RANGE
    blend_octave_range: tuple[int, int] = BLEND_OCTAVE_RANGE

    def effective_clearing_radius(self) -> float:
        if self.clearing_radius is not None:
            return float(self.clearing_radius)
        return round(CLEARING_FRACTION * self.size)

    def validate(self) -> None:
        if self.size < 8:
            raise ValueError(f"map size must be at least 8 px, got {self.size}")
        if not 0.0 <= self.difficulty < 1.0:
            raise ValueError(f"difficulty must lie in [0, 1), got {self.difficulty}")
        c = self.effective_clearing_radius()
        if not 0 < c < self.size / 2 - 1:
            raise ValueError(f"clearing radius {c} does not fit a {self.size}-px map")


def smootherstep(t: np.ndarray) -> np.ndarray:
    """Quintic interpolant 6t^5 - 15t^4 + 10t^3 with zero first and second
    derivatives at 0 and 1."""
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def perlin_layer(size: int, octaves: int, seed: int) -> NoiseLayer:
    """Lattice gradient noise at a single frequency, min-max normalized.

    The raster is sampled at pixel centers over a lattice of ``octaves`` x
    ``octaves`` cells with one random unit gradient per lattice node. Corner
    dot products are blended with the smootherstep interpolant, then the
    layer is min-max normalized to [0, 1].

    Args:
        size: raster side length in pixels.
        octaves: lattice frequency (cells across the raster); must satisfy
            1 <= octaves <= size so lattice spacing stays >= 1 px.
        seed: seed for the gradient draw (numpy PCG64).

    Returns:
        NoiseLayer with float64 values in [0, 1].
    """
    if octaves < 1:
        raise ValueError(f"octaves must be positive, got {octaves}")
    if octaves > size:
        raise ValueError(
            f"octaves {octaves} exceeds raster size {size}: lattice spacing "
            "would fall below one pixel"
        )
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(octaves + 1, octaves + 1))
    grad_x = np.cos(angles)
    grad_y = np.sin(angles)

    # Pixel-center sample coordinates in lattice units, in (0, octaves).
    u = (np.arange(size) + 0.5) * (octaves / size)
    cell = np.minimum(u.astype(np.int64), octaves - 1)
    frac = u - cell

    ix, iy = cell, cell
    tx = frac[np.newaxis, :]
    ty = frac[:, np.newaxis]

    def corner_dot(dx: int, dy: int) -> np.ndarray:
        gx = grad_x[np.ix_(iy + dy, ix + dx)]
        gy = grad_y[np.ix_(iy + dy, ix + dx)]
        return gx * (tx - dx) + gy * (ty - dy)

    wx = smootherstep(tx)
    wy = smootherstep(ty)
    n0 = corner_dot(0, 0) + wx * (corner_dot(1, 0) - corner_dot(0, 0))
    n1 = corner_dot(0, 1) + wx * (corner_dot(1, 1) - corner_dot(0, 1))
    values = n0 + wy * (n1 - n0)

    lo, hi = values.min(), values.max()
    if hi > lo:
        values = (values - lo) / (hi - lo)
    else:  # pragma: no cover - degenerate constant layer
        values = np.zeros_like(values)
    return NoiseLayer(values=values, octaves=int(octaves))


def threshold_layer(layer: NoiseLayer, threshold: float) -> np.ndarray:
    """Binary grid marking cells whose noise value strictly exceeds the
    threshold."""
    return (layer.values > threshold).astype(np.uint8)


def generate_component(
    size: int,
    difficulty: float,
    octave_range: tuple[int, int],
    rng: np.random.Generator,
) -> np.ndarray:
    """One obstacle component: thresholded base layer AND thresholded mask.

    Draw order from ``rng`` (part of the determinism contract): base octaves,
    base layer seed, mask octaves, mask layer seed. Octave draws are integer
    uniform over the inclusive range. The base layer is cut strictly above
    the empty fraction ``1 - difficulty``; the mask strictly above 0.5.
    """
    lo, hi = octave_range
    empty_fraction = 1.0 - difficulty

    base_octaves = int(rng.integers(lo, hi + 1))
    base_seed = int(rng.integers(0, 2**63))
    base = threshold_layer(perlin_layer(size, base_octaves, base_seed), empty_fraction)

    mask_octaves = int(rng.integers(lo, hi + 1))
    mask_seed = int(rng.integers(0, 2**63))
    mask = threshold_layer(perlin_layer(size, mask_octaves, mask_seed), MASK_THRESHOLD)

    return base & mask


def clear_disk(grid: np.ndarray, center: tuple[float, float], radius: float) -> np.ndarray:
    """Zero all cells whose center lies within ``radius`` of ``center``
    (Euclidean, inclusive). ``center`` is (x, y) in pixel coordinates."""
    size_y, size_x = grid.shape
    cx, cy = center
    yy = np.arange(size_y, dtype=np.float64)[:, np.newaxis]
    xx = np.arange(size_x, dtype=np.float64)[np.newaxis, :]
    inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius
    out = grid.copy()
    out[inside] = 0
    return out


def add_border(grid: np.ndarray) -> np.ndarray:
    """Set the one-pixel outer frame to obstacle."""
    out = grid.copy()
    out[0, :] = 1
    out[-1, :] = 1
    out[:, 0] = 1
    out[:, -1] = 1
    return out


def generate_map(config: MapGenConfig) -> np.ndarray:
    """Full map pipeline: two components, blend mask, clearing, border.

    Layer independence comes from seed-sequence splitting: the config seed
    spawns three child streams (coarse component, fine component, blend
    mask), so each layer's draws never interact.

    Returns:
        uint8 grid of shape (size, size) with values in {0, 1}.
    """
    config.validate()
    root = np.random.SeedSequence(config.seed)
    coarse_ss, fine_ss, blend_ss = root.spawn(3)

    coarse = generate_component(
        config.size, config.difficulty, config.large_octave_range,
        np.random.default_rng(coarse_ss),
    )
    fine = generate_component(
        config.size, config.difficulty, config.small_octave_range,
        np.random.default_rng(fine_ss),
    )

    blend_rng = np.random.default_rng(blend_ss)
    lo, hi = config.blend_octave_range
    blend_octaves = int(blend_rng.integers(lo, hi + 1))
    blend_seed = int(blend_rng.integers(0, 2**63))
    blend = threshold_layer(
        perlin_layer(config.size, blend_octaves, blend_seed), MASK_THRESHOLD
    )

    grid = np.where(blend == 1, coarse, fine).astype(np.uint8)
    half = config.size / 2.0
    grid = clear_disk(grid, (half, half), config.effective_clearing_radius())
    return add_border(grid)


def map_metadata(config: MapGenConfig) -> dict:
    """Constants and configuration recorded alongside generated maps."""
    return {
        "size": config.size,
        "difficulty": config.difficulty,
        "seed": config.seed,
        "clearing_radius": config.effective_clearing_radius(),
        "generator": dict(GENERATOR_CONSTANTS),
        "numpy_version": np.__version__,
    }
