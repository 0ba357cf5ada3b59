"""Waypoint selection, local navigation, rewards, and observation encoding.

The simulator separates decision-making into a slow exploration layer that
picks a waypoint every ``macro_period`` steps and a fast navigation layer
that outputs an acceleration every step. Both layers are pluggable through
the ``Policy`` protocol; the shipped baseline pairs frontier-based waypoint
selection with a potential-field navigator. Reward evaluators and flat
observation builders expose the same quantities a learned policy would
train on, so external trainers can consume recorded transitions offline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy import ndimage

from .agent import (
    KinematicLimits,
    agent_collision,
    clip_acceleration,
    predict_collision_time,
    static_collision,
)
from .comms import MapCodec, NeighborRecord
from .grid import crop_disk, dilate

MACRO_PERIOD = 50  # steps between waypoint refreshes

# Observation layout versions; any change to ordering or normalization must
# bump these (they are recorded in run metadata).
NAV_OBSERVATION_SCHEMA = "nav-obs/1"
EXP_OBSERVATION_SCHEMA = "exp-obs/1"


@dataclass(frozen=True)
class RewardParams:
    # navigation
    terminal_bonus: float = 1500.0
    reach_radius: float = 15.0
    proximity_gain: float = 4.0
    alignment_gain: float = 2.0
    collision_penalty: float = -100.0
    predicted_collision_scale: float = -10.0
    collision_horizon: int = 15
    # exploration
    terminal_scale: float = 100.0
    progress_base: float = 200.0
    progress_gain: float = 300.0
    near_waypoint_radius: float = 40.0
    near_waypoint_penalty: float = -3.0
    far_waypoint_bonus: float = 1.5


@dataclass(frozen=True)
class NavScene:
    """World context a navigation reward is evaluated against."""

    grid: np.ndarray  # ground obstacle grid
    others_position: np.ndarray  # (k, 2) other agents' positions
    others_velocity: np.ndarray  # (k, 2) other agents' velocities
    limits: KinematicLimits


def navigation_reward(
    prev_state,
    action: np.ndarray,
    next_state,
    scene: NavScene,
    params: RewardParams = RewardParams(),
) -> tuple[float, dict[str, float]]:
    """Shaped navigation reward and its per-term breakdown.

    Terms: arrival bonus within the reach radius; progress proportional to
    the distance shed toward the target; heading alignment as the cubed
    cosine between velocity and the target direction (zero at rest);
    a flat penalty when the one-step projection collides; and a graded
    penalty growing linearly as the predicted collision step approaches.
    """
    target = np.asarray(next_state.target, dtype=np.float64)
    d_prev = float(np.hypot(*(np.asarray(prev_state.position) - target)))
    d_next = float(np.hypot(*(np.asarray(next_state.position) - target)))

    terminal = params.terminal_bonus if d_next <= params.reach_radius else 0.0
    proximity = params.proximity_gain * (d_prev - d_next)

    v = np.asarray(next_state.velocity, dtype=np.float64)
    to_target = target - np.asarray(next_state.position, dtype=np.float64)
    speed = float(np.hypot(*v))
    dist = float(np.hypot(*to_target))
    if speed > 0.0 and dist > 0.0:
        cos = float(np.clip(np.dot(v, to_target) / (speed * dist), -1.0, 1.0))
        alignment = params.alignment_gain * cos**3
    else:
        alignment = 0.0

    collides = static_collision(
        next_state.position, next_state.velocity, scene.grid, scene.limits
    ) or agent_collision(
        next_state.position,
        next_state.velocity,
        scene.others_position,
        scene.others_velocity,
        scene.limits,
    )
    collision = params.collision_penalty if collides else 0.0

    horizon = params.collision_horizon
    k = predict_collision_time(
        next_state.position,
        next_state.velocity,
        scene.others_position,
        scene.others_velocity,
        scene.grid,
        scene.limits,
        horizon=horizon,
    )
    predicted = (
        params.predicted_collision_scale * (horizon - k + 1) / horizon
        if k is not None
        else 0.0
    )

    breakdown = {
        "terminal": terminal,
        "proximity": proximity,
        "alignment": alignment,
        "collision": collision,
        "predicted_collision": predicted,
    }
    return sum(breakdown.values()), breakdown


@dataclass(frozen=True)
class ExpSnapshot:
    """Exploration quantities at one decision point."""

    position: np.ndarray
    waypoint: np.ndarray | None  # waypoint chosen at this point, if any
    explored_fraction: float  # team coverage f in [0, 1]
    self_explored_fraction: float  # own sensed fraction in [0, 1]


def exploration_reward(
    prev: ExpSnapshot,
    next: ExpSnapshot,
    episode_done: bool,
    params: RewardParams = RewardParams(),
) -> tuple[float, dict[str, float]]:
    """Exploration reward: terminal coverage payout, per-step progress
    scaled up as team coverage grows, and a waypoint-spread term that
    penalizes picking a waypoint within the near radius."""
    terminal = (
        params.terminal_scale * (2.0 * next.explored_fraction - 1.0)
        if episode_done
        else 0.0
    )
    progress = (params.progress_base + params.progress_gain * next.explored_fraction) * (
        next.self_explored_fraction - prev.self_explored_fraction
    )
    if next.waypoint is not None:
        d = float(np.hypot(*(np.asarray(next.waypoint) - np.asarray(next.position))))
        waypoint = (
            params.near_waypoint_penalty
            if d <= params.near_waypoint_radius
            else params.far_waypoint_bonus
        )
    else:
        waypoint = 0.0
    breakdown = {"terminal": terminal, "progress": progress, "waypoint": waypoint}
    return sum(breakdown.values()), breakdown


@dataclass(frozen=True)
class ObservationParams:
    size: int
    sensing_radius: float = 30.0
    max_velocity: float = 10.0
    crop_scale: float = 0.6  # nav window radius as a fraction of sensing radius
    dilate_radius: float = 2.0  # safety margin grown around obstacles

    def nav_window_radius(self) -> int:
        return int(round(self.crop_scale * self.sensing_radius))


def _pose_block(
    position: np.ndarray, velocity: np.ndarray, params: ObservationParams
) -> list[float]:
    return [
        float(position[0]) / params.size,
        float(position[1]) / params.size,
        float(velocity[0]) / params.max_velocity,
        float(velocity[1]) / params.max_velocity,
    ]


def build_nav_observation(
    state,
    neighbors: Sequence[NeighborRecord],
    codec: MapCodec,
    params: ObservationParams,
) -> np.ndarray:
    """Flat navigation observation: encoded dilated obstacle window around
    the agent, own normalized pose, normalized target, then one normalized
    pose block per neighbor record (virtuals included as-is).

    Layout (schema ``nav-obs/1``):
    ``[latent | x y vx vy | tx ty | (x y vx vy) * M]`` with positions
    normalized by map size into [0, 1] and velocities by the speed limit
    into [-1, 1]. Length = latent_size + 6 + 4 * M.
    """
    radius = params.nav_window_radius()
    window = crop_disk(state.obstacles_fused, state.position, radius, fill=1)
    window = dilate(window, params.dilate_radius)
    parts = [codec.encode(window).astype(np.float32)]
    pose = _pose_block(state.position, state.velocity, params)
    target = [
        float(state.target[0]) / params.size,
        float(state.target[1]) / params.size,
    ]
    tail: list[float] = pose + target
    for record in neighbors:
        tail.extend(_pose_block(record.position, record.velocity, params))
    parts.append(np.asarray(tail, dtype=np.float32))
    return np.concatenate(parts)


def build_exp_observation(
    state,
    neighbors: Sequence[NeighborRecord],
    codec: MapCodec,
    params: ObservationParams,
) -> np.ndarray:
    """Flat exploration observation: encoded fused exploration map, own
    normalized pose, then one pose block per neighbor record.

    Layout (schema ``exp-obs/1``): ``[latent | x y vx vy | (x y vx vy) * M]``;
    length = latent_size + 4 + 4 * M.
    """
    parts = [codec.encode(state.explored_fused).astype(np.float32)]
    tail = _pose_block(state.position, state.velocity, params)
    for record in neighbors:
        tail.extend(_pose_block(record.position, record.velocity, params))
    parts.append(np.asarray(tail, dtype=np.float32))
    return np.concatenate(parts)


# --------------------------------------------------------------------------
# Baseline policy: frontier waypoints + potential-field navigation.


@dataclass
class ExpContext:
    """What a waypoint decision may look at."""

    explored: np.ndarray  # fused exploration map
    obstacles: np.ndarray  # fused obstacle map
    position: np.ndarray
    rng: np.random.Generator
    agent_id: int = 0


@dataclass
class NavContext:
    """What a per-step navigation decision may look at."""

    position: np.ndarray
    velocity: np.ndarray
    target: np.ndarray
    obstacles: np.ndarray  # fused obstacle map
    neighbors: Sequence[NeighborRecord]
    limits: KinematicLimits
    rng: np.random.Generator
    agent_id: int = 0


class Policy(Protocol):
    macro_period: int

    def select_waypoint(self, ctx: ExpContext) -> np.ndarray: ...

    def navigate(self, ctx: NavContext) -> np.ndarray: ...


_CROSS = ndimage.generate_binary_structure(2, 1)  # 4-connectivity
_BOX = ndimage.generate_binary_structure(2, 2)  # 8-connectivity


def frontier_cells(explored: np.ndarray, obstacles: np.ndarray) -> np.ndarray:
    """Known-free cells bordering (4-neighborhood) unexplored space."""
    unexplored = explored == 0
    known_free = (explored == 1) & (obstacles == 0)
    touches = ndimage.binary_dilation(unexplored, structure=_CROSS)
    return (known_free & touches).astype(np.uint8)


def frontier_waypoint(
    explored: np.ndarray,
    obstacles: np.ndarray,
    position: np.ndarray,
    rng: np.random.Generator,
    near_radius: float = 40.0,
    pick: str = "nearest",
) -> np.ndarray:
    """Representative cell of a frontier cluster.

    Frontier cells are clustered with 8-connectivity; each cluster is
    represented by its member cell closest to the cluster centroid (so the
    returned cell is always a known-free frontier cell, never an obstacle).
    Clusters within ``near_radius`` of the agent are skipped whenever a
    farther one exists. ``pick`` selects the nearest eligible cluster by
    default; ``pick="random"`` draws uniformly among them instead, which
    callers use to break out of unreachable-nearest deadlocks. With no
    frontier left, falls back to a uniformly random believed-free cell.
    """
    frontier = frontier_cells(explored, obstacles)
    ys, xs = np.nonzero(frontier)
    if ys.size == 0:
        free_ys, free_xs = np.nonzero(obstacles == 0)
        if free_ys.size == 0:
            return np.asarray(position, dtype=np.float64).copy()
        pick = int(rng.integers(free_ys.size))
        return np.array([free_xs[pick], free_ys[pick]], dtype=np.float64)

    labels, n_labels = ndimage.label(frontier, structure=_BOX)
    cell_labels = labels[ys, xs]
    counts = np.bincount(cell_labels, minlength=n_labels + 1).astype(np.float64)
    sum_x = np.bincount(cell_labels, weights=xs, minlength=n_labels + 1)
    sum_y = np.bincount(cell_labels, weights=ys, minlength=n_labels + 1)

    px, py = float(position[0]), float(position[1])
    candidates: list[tuple[float, float, float]] = []  # (dist, x, y)
    for lab in range(1, n_labels + 1):
        member = cell_labels == lab
        cx = sum_x[lab] / counts[lab]
        cy = sum_y[lab] / counts[lab]
        mx, my = xs[member], ys[member]
        rep = int(np.argmin((mx - cx) ** 2 + (my - cy) ** 2))
        rx, ry = float(mx[rep]), float(my[rep])
        candidates.append((float(np.hypot(rx - px, ry - py)), rx, ry))

    far = [c for c in candidates if c[0] > near_radius]
    pool = far if far else candidates
    if pick == "random":
        _, bx, by = pool[int(rng.integers(len(pool)))]
    else:
        _, bx, by = min(pool)
    return np.array([bx, by], dtype=np.float64)


@dataclass
class BaselinePolicy:
    """Frontier waypoints plus potential-field navigation.

    The navigator blends a constant-magnitude attraction toward the target
    with short-range repulsion from believed obstacles and from projected
    neighbor positions, and brakes inside the arrival radius. Pure potential
    fields deadlock at equilibria in front of concave obstacles, so the
    policy keeps per-agent scratch state to break them on two time scales:
    a stalled agent commits to one sideways escape direction for a fixed
    number of steps (rather than dithering every step), and an agent that
    made no progress over a whole waypoint period re-targets a random
    frontier cluster instead of the nearest. The scratch state is keyed by
    agent id; construct a fresh instance per episode (or call ``reset``)
    when reusing a policy object.
    """

    macro_period: int = MACRO_PERIOD
    reach_radius: float = 15.0
    near_waypoint_radius: float = 40.0
    obstacle_influence: float = 8.0  # px, repulsion range from obstacle cells
    repulsion_gain: float = 1.2  # px/s^2 per wall cell at zero distance
    tangential_gain: float = 0.6  # wall-following share of the repulsion
    neighbor_margin: float = 6.0  # px added to 2 * collision radius
    neighbor_gain: float = 3.0  # peak neighbor push, in units of max acceleration
    brake_gain: float = 4.0
    stall_speed_fraction: float = 0.12  # of max velocity
    escape_gain: float = 1.0  # of max acceleration
    escape_steps: int = 30  # length of one committed sideways escape run
    stall_progress: float = 3.0  # px per waypoint period that counts as progress
    _progress: dict = field(default_factory=dict, repr=False, compare=False)
    _escape: dict = field(default_factory=dict, repr=False, compare=False)

    def reset(self) -> None:
        """Drop per-agent scratch state (between episodes)."""
        self._progress.clear()
        self._escape.clear()

    def select_waypoint(self, ctx: ExpContext) -> np.ndarray:
        position = np.asarray(ctx.position, dtype=np.float64)
        stuck = 0
        prev = self._progress.get(ctx.agent_id)
        if prev is not None:
            last_position, last_waypoint, count = prev
            moved = float(np.hypot(*(position - last_position)))
            unreached = float(np.hypot(*(position - last_waypoint))) > self.reach_radius
            if moved < self.stall_progress and unreached:
                stuck = count + 1
        waypoint = frontier_waypoint(
            ctx.explored,
            ctx.obstacles,
            position,
            ctx.rng,
            self.near_waypoint_radius,
            pick="nearest" if stuck == 0 else "random",
        )
        self._progress[ctx.agent_id] = (position.copy(), waypoint.copy(), stuck)
        return waypoint

    def navigate(self, ctx: NavContext) -> np.ndarray:
        return reactive_navigate(ctx, self)


def _obstacle_repulsion(
    obstacles: np.ndarray, position: np.ndarray, influence: float
) -> np.ndarray:
    """Repulsion away from believed obstacle cells within the influence
    radius, a linear ramp per cell summed over the local window; map edges
    count as obstacles. A wall face contributes tens of cells, so per-cell
    gains around one already dominate the attraction at close range."""
    r = int(np.ceil(influence))
    window = crop_disk(obstacles, position, r, fill=1)
    ys, xs = np.nonzero(window)
    if ys.size == 0:
        return np.zeros(2)
    x, y = float(position[0]), float(position[1])
    dx = x - (xs + (round(x) - r))
    dy = y - (ys + (round(y) - r))
    d = np.hypot(dx, dy)
    keep = (d <= influence) & (d > 0.3)
    if not keep.any():
        return np.zeros(2)
    d = d[keep]
    weight = (1.0 - d / influence) / d
    return np.array(
        [float(np.sum(weight * dx[keep])), float(np.sum(weight * dy[keep]))]
    )


def reactive_navigate(ctx: NavContext, policy: BaselinePolicy) -> np.ndarray:
    """Potential-field acceleration toward the target on the fused map."""
    limits = ctx.limits
    to_target = np.asarray(ctx.target, dtype=np.float64) - ctx.position
    dist = float(np.hypot(*to_target))
    if dist <= policy.reach_radius:
        policy._escape.pop(ctx.agent_id, None)
        return clip_acceleration(-policy.brake_gain * ctx.velocity, limits)

    push = policy.repulsion_gain * _obstacle_repulsion(
        ctx.obstacles, ctx.position, policy.obstacle_influence
    )
    # Rotating part of the push makes the field circulate around obstacles
    # instead of settling into head-on equilibria in front of them.
    swirl = policy.tangential_gain * np.array([-push[1], push[0]])

    # Stall escape: a stalled agent commits to one sideways direction for
    # ``escape_steps`` steps. The committed direction replaces the target
    # attraction outright, otherwise the same equilibrium that caused the
    # stall would immediately re-trap it; wall repulsion stays active, so
    # the run slides along obstacle faces instead of into them.
    escape = policy._escape.get(ctx.agent_id)
    if escape is not None:
        direction, left = escape
        if left <= 0:
            policy._escape.pop(ctx.agent_id, None)
            escape = None
        else:
            policy._escape[ctx.agent_id] = (direction, left - 1)
    speed = float(np.hypot(*ctx.velocity))
    if escape is None and speed < policy.stall_speed_fraction * limits.max_velocity:
        side = 1.0 if ctx.rng.integers(2) else -1.0
        direction = side * np.array([-to_target[1], to_target[0]]) / dist
        escape = (direction, policy.escape_steps)
        policy._escape[ctx.agent_id] = (direction, policy.escape_steps - 1)

    if escape is not None:
        accel = policy.escape_gain * limits.max_acceleration * escape[0] + push + swirl
    else:
        accel = limits.max_acceleration * to_target / dist + push + swirl

    # Neighbor avoidance: a linear ramp that overpowers the attraction well
    # before the projected distance reaches the collision threshold.
    reach = 2.0 * limits.collision_radius + policy.neighbor_margin
    peak = policy.neighbor_gain * limits.max_acceleration
    ahead = ctx.position + ctx.velocity * limits.dt
    for record in ctx.neighbors:
        other_ahead = record.position + record.velocity * limits.dt
        away = ahead - other_ahead
        d = float(np.hypot(*away))
        if 0.0 < d < reach:
            accel = accel + peak * (1.0 - d / reach) * away / d

    return clip_acceleration(accel, limits)
