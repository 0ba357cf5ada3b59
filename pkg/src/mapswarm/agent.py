"""Agent state and point-mass kinematics.

Agents are points with a collision radius. Integration is semi-implicit
Euler: acceleration updates velocity first, the new velocity moves the
position. Acceleration and speed limits clip vector norms while preserving
direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COLLISION_HORIZON = 15  # steps looked ahead by predict_collision_time


@dataclass(frozen=True)
class KinematicLimits:
    max_velocity: float = 10.0  # px/s
    max_acceleration: float = 5.0  # px/s^2
    dt: float = 0.1  # s
    collision_radius: float = 3.0  # px


@dataclass
class AgentState:
    agent_id: int
    position: np.ndarray  # (x, y) float64
    velocity: np.ndarray  # (vx, vy) float64
    target: np.ndarray  # (x, y) float64 waypoint
    explored_self: np.ndarray  # uint8, cells this agent has sensed
    obstacles_self: np.ndarray  # uint8, obstacles this agent has sensed
    explored_fused: np.ndarray  # uint8, exploration belief after fusion
    obstacles_fused: np.ndarray  # uint8, obstacle belief after fusion
    odometer: float = 0.0
    last_comm_step: int = -1

    @classmethod
    def create(cls, agent_id: int, position: np.ndarray, size: int) -> "AgentState":
        zeros = lambda: np.zeros((size, size), dtype=np.uint8)
        pos = np.asarray(position, dtype=np.float64).copy()
        return cls(
            agent_id=agent_id,
            position=pos,
            velocity=np.zeros(2, dtype=np.float64),
            target=pos.copy(),
            explored_self=zeros(),
            obstacles_self=zeros(),
            explored_fused=zeros(),
            obstacles_fused=zeros(),
        )


def clip_norm(vec: np.ndarray, limit: float) -> np.ndarray:
    """Scale ``vec`` down to norm ``limit`` if it exceeds it; direction is
    preserved and shorter vectors pass through unchanged."""
    v = np.asarray(vec, dtype=np.float64)
    norm = float(np.hypot(v[0], v[1]))
    if norm <= limit or norm == 0.0:
        return v.copy()
    return v * (limit / norm)


def clip_acceleration(accel: np.ndarray, limits: KinematicLimits) -> np.ndarray:
    return clip_norm(accel, limits.max_acceleration)


def clip_speed(velocity: np.ndarray, limits: KinematicLimits) -> np.ndarray:
    return clip_norm(velocity, limits.max_velocity)


def step_kinematics(
    state: AgentState,
    accel: np.ndarray,
    limits: KinematicLimits,
    size: int,
) -> AgentState:
    """Advance one step of semi-implicit Euler in place.

    The commanded acceleration is clipped, velocity is updated and clipped,
    then position moves by the new velocity and is clamped to the map
    bounds [0, size - 1]. The odometer accumulates the realized displacement.
    """
    a = clip_acceleration(accel, limits)
    state.velocity = clip_speed(state.velocity + a * limits.dt, limits)
    new_position = state.position + state.velocity * limits.dt
    np.clip(new_position, 0.0, float(size - 1), out=new_position)
    state.odometer += float(np.hypot(*(new_position - state.position)))
    state.position = new_position
    return state


def obstacle_within(grid: np.ndarray, point: np.ndarray, radius: float) -> bool:
    """True if any obstacle cell center lies within ``radius`` (inclusive)
    of ``point`` = (x, y)."""
    x, y = float(point[0]), float(point[1])
    r = float(radius)
    x0 = max(int(np.ceil(x - r)), 0)
    x1 = min(int(np.floor(x + r)), grid.shape[1] - 1)
    y0 = max(int(np.ceil(y - r)), 0)
    y1 = min(int(np.floor(y + r)), grid.shape[0] - 1)
    if x0 > x1 or y0 > y1:
        return False
    window = grid[y0 : y1 + 1, x0 : x1 + 1]
    if not window.any():
        return False
    ys, xs = np.nonzero(window)
    d2 = (xs + x0 - x) ** 2 + (ys + y0 - y) ** 2
    return bool((d2 <= r * r).any())


def static_collision(
    position: np.ndarray,
    velocity: np.ndarray,
    grid: np.ndarray,
    limits: KinematicLimits,
) -> bool:
    """Does the position projected one step ahead come within the collision
    radius (inclusive) of an obstacle cell center?"""
    ahead = np.asarray(position, dtype=np.float64) + np.asarray(velocity) * limits.dt
    return obstacle_within(grid, ahead, limits.collision_radius)


def agent_collision(
    position: np.ndarray,
    velocity: np.ndarray,
    others_position: np.ndarray,
    others_velocity: np.ndarray,
    limits: KinematicLimits,
) -> bool:
    """Does the one-step projection come strictly within twice the collision
    radius of any other agent's projection?"""
    others_position = np.asarray(others_position, dtype=np.float64).reshape(-1, 2)
    if others_position.shape[0] == 0:
        return False
    others_velocity = np.asarray(others_velocity, dtype=np.float64).reshape(-1, 2)
    ahead = np.asarray(position, dtype=np.float64) + np.asarray(velocity) * limits.dt
    others_ahead = others_position + others_velocity * limits.dt
    delta = others_ahead - ahead
    d2 = np.einsum("ij,ij->i", delta, delta)
    threshold = 2.0 * limits.collision_radius
    return bool((d2 < threshold * threshold).any())


def predict_collision_time(
    position: np.ndarray,
    velocity: np.ndarray,
    others_position: np.ndarray,
    others_velocity: np.ndarray,
    grid: np.ndarray,
    limits: KinematicLimits,
    horizon: int = COLLISION_HORIZON,
) -> int | None:
    """Earliest step k in 1..horizon at which a constant-velocity rollout
    collides (obstacle within the collision radius, or another agent strictly
    within twice it); None when the horizon stays clear."""
    p = np.asarray(position, dtype=np.float64)
    v = np.asarray(velocity, dtype=np.float64)
    others_position = np.asarray(others_position, dtype=np.float64).reshape(-1, 2)
    others_velocity = np.asarray(others_velocity, dtype=np.float64).reshape(-1, 2)
    threshold = 2.0 * limits.collision_radius
    for k in range(1, horizon + 1):
        t = k * limits.dt
        here = p + v * t
        if obstacle_within(grid, here, limits.collision_radius):
            return k
        if others_position.shape[0]:
            delta = others_position + others_velocity * t - here
            d2 = np.einsum("ij,ij->i", delta, delta)
            if (d2 < threshold * threshold).any():
                return k
    return None
