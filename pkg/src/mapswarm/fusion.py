"""Trust-weighted decentralized map fusion.

Each communication event blends the agent's own sensed maps with decoded
neighbor maps, one cell at a time, in four cases depending on who has
explored the cell:

1. nobody            -> 0 (unknown)
2. only self         -> own belief
3. only neighbors    -> mean of the exploring neighbors' beliefs
4. self + neighbors  -> (W * own + sum of neighbor beliefs) / (W + n)

with per-cell trust weight W = (n - 1) * beta + 1 for n exploring
neighbors. beta = 1 weighs self like all neighbors combined; beta = 0
weighs self like a single neighbor. The blended obstacle estimate and the
OR'd exploration estimate are binarized, then merged into the running fused
maps: newly estimated cells are overwritten, all other cells keep their
previous fused value. Fusion never writes the self maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .agent import AgentState
from .grid import BINARIZE_THRESHOLD, binarize

DEFAULT_BETA = 0.8


@dataclass(frozen=True)
class FusionParams:
    beta: float = DEFAULT_BETA
    binarize_threshold: float = BINARIZE_THRESHOLD
    # Treat decoded neighbor obstacle maps as hard {0,1} votes (True) or as
    # soft beliefs in [0, 1] entering the averages unrounded (False).
    # Exploration maps are always binarized: the case structure needs a
    # discrete exploring/not-exploring judgment per neighbor.
    binary_neighbor_beliefs: bool = True

    def validate(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")


def trust_weight(n: int | np.ndarray, beta: float) -> float | np.ndarray:
    """Self-trust weight W = (n - 1) * beta + 1 for n >= 1 exploring
    neighbors."""
    if np.any(np.asarray(n) < 1):
        raise ValueError("trust weight is defined only for n >= 1 exploring neighbors")
    return (np.asarray(n, dtype=np.float64) - 1.0) * beta + 1.0


def intermediate_exploration(
    explored_self: np.ndarray, explored_neighbors: Sequence[np.ndarray]
) -> np.ndarray:
    """OR of the agent's own explored map with all neighbor explored maps."""
    out = explored_self.astype(np.uint8)
    for e in explored_neighbors:
        out = out | e.astype(np.uint8)
    return out


def intermediate_obstacle(
    explored_self: np.ndarray,
    obstacles_self: np.ndarray,
    explored_neighbors: Sequence[np.ndarray],
    obstacle_neighbors: Sequence[np.ndarray],
    params: FusionParams,
) -> np.ndarray:
    """Per-cell blended obstacle estimate (real-valued, cases 1-4).

    ``explored_neighbors`` must already be binary; ``obstacle_neighbors``
    may be real-valued, and only the beliefs of neighbors exploring a cell
    enter its sum."""
    params.validate()
    e_self = explored_self.astype(bool)
    o_self = obstacles_self.astype(np.float64)

    shape = o_self.shape
    n = np.zeros(shape, dtype=np.float64)
    s = np.zeros(shape, dtype=np.float64)
    for e_k, o_k in zip(explored_neighbors, obstacle_neighbors):
        exploring = e_k.astype(bool)
        n += exploring
        s += np.asarray(o_k, dtype=np.float64) * exploring

    out = np.zeros(shape, dtype=np.float64)
    some = n > 0

    case2 = e_self & ~some
    out[case2] = o_self[case2]

    case3 = ~e_self & some
    out[case3] = s[case3] / n[case3]

    case4 = e_self & some
    if case4.any():
        w = (n[case4] - 1.0) * params.beta + 1.0
        out[case4] = (w * o_self[case4] + s[case4]) / (w + n[case4])
    return out


def temporal_fuse(
    explored_fused: np.ndarray,
    obstacles_fused: np.ndarray,
    explored_hat: np.ndarray,
    obstacles_hat: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Merge a binarized event estimate into the running fused maps: cells
    covered by the new estimate are overwritten, the rest are kept."""
    e_new = explored_fused | explored_hat
    o_new = (obstacles_hat & explored_hat) | (obstacles_fused & (1 - explored_hat))
    return e_new.astype(np.uint8), o_new.astype(np.uint8)


def fuse_event(
    state: AgentState,
    neighbor_maps: Sequence[tuple[np.ndarray, np.ndarray]],
    params: FusionParams,
) -> AgentState:
    """One communication event: blend self maps with decoded neighbor maps
    and fold the result into the agent's fused maps (in place).

    ``neighbor_maps`` holds (obstacle, explored) grids as decoded from real
    neighbors' latents; values may be real-valued in [0, 1]. Virtual
    neighbors contribute nothing and must not appear here.
    """
    if not neighbor_maps:
        # No exploring neighbors anywhere: the estimate reduces to the self
        # maps on self-explored cells.
        e_hat = state.explored_self
        o_hat = state.obstacles_self & state.explored_self
    else:
        thr = params.binarize_threshold
        explored_neighbors = [binarize(e, thr) for _, e in neighbor_maps]
        if params.binary_neighbor_beliefs:
            obstacle_neighbors: list[np.ndarray] = [
                binarize(o, thr) for o, _ in neighbor_maps
            ]
        else:
            obstacle_neighbors = [
                np.clip(np.asarray(o, dtype=np.float64), 0.0, 1.0)
                for o, _ in neighbor_maps
            ]
        e_hat = intermediate_exploration(state.explored_self, explored_neighbors)
        o_real = intermediate_obstacle(
            state.explored_self,
            state.obstacles_self,
            explored_neighbors,
            obstacle_neighbors,
            params,
        )
        o_hat = binarize(o_real, thr)
        # binarize() on an already binary e_hat is the identity; kept so the
        # event output is binary by construction.
        e_hat = binarize(e_hat, thr)

    state.explored_fused, state.obstacles_fused = temporal_fuse(
        state.explored_fused, state.obstacles_fused, e_hat, o_hat
    )
    return state
