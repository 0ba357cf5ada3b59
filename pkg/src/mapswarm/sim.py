"""Episode orchestration: spawning, the step loop, termination, sweeps.

Each step runs fixed phases: (1) every agent senses; (2) agents due for
communication exchange encoded self maps with their selected neighbors and
fuse; (3) on macro steps every agent refreshes its waypoint; (4) every agent
computes an acceleration from a pre-integration snapshot; (5) all agents
integrate simultaneously; (6) collisions are resolved by rolling offenders
back and zeroing their velocity, and metrics are updated.

Episodes are deterministic functions of their configuration: the config
seed spawns independent child streams for map generation, spawning, channel
noise, and per-agent policy draws.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from . import __version__ as _version
from .agent import AgentState, KinematicLimits, obstacle_within, step_kinematics
from .comms import inject_noise, make_codec, make_message, select_neighbors
from .fusion import FusionParams, fuse_event
from .grid import binarize, interior_mask, map_accuracy, or_combine
from .mapgen import GENERATOR_CONSTANTS, MapGenConfig, generate_map
from .policy import (
    EXP_OBSERVATION_SCHEMA,
    MACRO_PERIOD,
    NAV_OBSERVATION_SCHEMA,
    BaselinePolicy,
    ExpContext,
    NavContext,
    Policy,
)
from .sensing import sense

COVERAGE_THRESHOLD = 0.8
MAX_STEPS = 9000
SPAWN_ATTEMPTS = 10_000


@dataclass(frozen=True)
class SimConfig:
    # map
    size: int = 512
    difficulty: float = 0.3
    clearing_radius: float | None = None
    # team
    n_agents: int = 10
    neighbor_count: int = 3
    sensing_radius: float = 30.0
    occlusion: bool = False
    # kinematics
    max_velocity: float = 10.0
    max_acceleration: float = 5.0
    dt: float = 0.1
    collision_radius: float = 3.0
    # communication and fusion
    beta: float = 0.8
    sigma: float = 0.0
    comm_freq: int = 1
    codec: str = "identity"
    downsample_factor: int = 4
    feature_scale: float = 1.0
    binary_neighbor_beliefs: bool = True
    # schedule
    macro_period: int = MACRO_PERIOD
    coverage_threshold: float = COVERAGE_THRESHOLD
    max_steps: int = MAX_STEPS
    seed: int = 0

    def validate(self) -> None:
        if self.n_agents < 1:
            raise ValueError(f"n_agents must be at least 1, got {self.n_agents}")
        if self.neighbor_count < 1:
            raise ValueError(f"neighbor_count must be at least 1, got {self.neighbor_count}")
        if self.comm_freq < 1:
            raise ValueError(f"comm_freq must be at least 1, got {self.comm_freq}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be at least 1, got {self.max_steps}")
        if self.macro_period < 1:
            raise ValueError(f"macro_period must be at least 1, got {self.macro_period}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if not 0.0 < self.coverage_threshold <= 1.0:
            raise ValueError(
                f"coverage_threshold must lie in (0, 1], got {self.coverage_threshold}"
            )
        self.map_config().validate()
        self.fusion_params().validate()

    def limits(self) -> KinematicLimits:
        return KinematicLimits(
            max_velocity=self.max_velocity,
            max_acceleration=self.max_acceleration,
            dt=self.dt,
            collision_radius=self.collision_radius,
        )

    def map_config(self) -> MapGenConfig:
        return MapGenConfig(
            size=self.size,
            difficulty=self.difficulty,
            seed=_child_seed(self.seed, 0),
            clearing_radius=self.clearing_radius,
        )

    def fusion_params(self) -> FusionParams:
        return FusionParams(
            beta=self.beta, binary_neighbor_beliefs=self.binary_neighbor_beliefs
        )


def _child_seed(seed: int, index: int) -> int:
    """Deterministic child seed: stream ``index`` spawned from ``seed``."""
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return int(np.random.default_rng(child).integers(0, 2**63))


def default_policy(config: SimConfig) -> BaselinePolicy:
    """Baseline policy with radii scaled to the map size."""
    scale = config.size / 512.0
    return BaselinePolicy(
        macro_period=config.macro_period,
        reach_radius=max(4.0, 15.0 * scale),
        near_waypoint_radius=max(10.0, 40.0 * scale),
    )


def spawn_agents(
    ground: np.ndarray, config: SimConfig, rng: np.random.Generator
) -> list[AgentState]:
    """Rejection-sample agent positions inside the central clearing.

    Positions are uniform over a disk that keeps a collision radius of
    margin from the clearing edge, with pairwise separation of at least
    twice the collision radius. Raises if the attempt budget runs out.
    """
    center = config.size / 2.0
    clearing = config.map_config().effective_clearing_radius()
    max_r = clearing - config.collision_radius - 1.0
    if max_r <= 0:
        raise ValueError("clearing radius too small to hold any agent")
    min_sep = 2.0 * config.collision_radius

    positions: list[np.ndarray] = []
    attempts = 0
    while len(positions) < config.n_agents:
        if attempts >= SPAWN_ATTEMPTS:
            raise ValueError(
                f"could not place {config.n_agents} agents with separation "
                f"{min_sep} px inside a {clearing}-px clearing after "
                f"{SPAWN_ATTEMPTS} attempts"
            )
        attempts += 1
        radius = max_r * np.sqrt(rng.uniform())
        angle = rng.uniform(0.0, 2.0 * np.pi)
        candidate = np.array(
            [center + radius * np.cos(angle), center + radius * np.sin(angle)]
        )
        if any(np.hypot(*(candidate - p)) < min_sep for p in positions):
            continue
        positions.append(candidate)

    return [
        AgentState.create(agent_id=i, position=pos, size=config.size)
        for i, pos in enumerate(positions)
    ]


class World:
    """Mutable episode state."""

    def __init__(self, config: SimConfig, policy: Policy | None = None):
        config.validate()
        self.config = config
        self.policy: Policy = policy if policy is not None else default_policy(config)
        self.macro_period = getattr(self.policy, "macro_period", config.macro_period)
        self.limits = config.limits()
        self.fusion_params = config.fusion_params()
        self.codec = make_codec(
            config.codec, config.size, config.downsample_factor, config.feature_scale
        )

        self.ground = generate_map(config.map_config())
        self.interior = interior_mask(config.size)

        root = np.random.SeedSequence(config.seed)
        _, spawn_ss, noise_ss, policy_ss = root.spawn(4)
        self.noise_rng = np.random.default_rng(noise_ss)
        self.agent_rngs = [
            np.random.default_rng(ss) for ss in policy_ss.spawn(config.n_agents)
        ]
        self.agents = spawn_agents(self.ground, config, np.random.default_rng(spawn_ss))

        self.step_count = 0
        self.coverage = 0.0
        self.coverage_curve: list[float] = []
        self.collisions_obstacle = 0
        self.collisions_agent = 0
        self.unresolved_violations = 0

    # convenience views -----------------------------------------------------

    def team_explored(self) -> np.ndarray:
        return or_combine([a.explored_fused for a in self.agents])

    def team_obstacles(self) -> np.ndarray:
        return or_combine([a.obstacles_fused for a in self.agents])

    def team_accuracy(self) -> float | None:
        return map_accuracy(self.ground, self.team_obstacles(), self.team_explored())

    def agent_accuracy(self) -> float | None:
        """Mean over agents of each agent's own fused-map accuracy.

        The collective metric hides what trust weighting does: one agent's
        false obstacle poisons the OR-combined map no matter how well every
        other agent resisted it. This per-agent mean is the metric that
        responds to beta under channel noise."""
        values = [
            map_accuracy(self.ground, binarize(a.obstacles_fused), a.explored_fused)
            for a in self.agents
        ]
        kept = [v for v in values if v is not None]
        return float(np.mean(kept)) if kept else None


def step(world: World) -> None:
    """Advance the world by one step through the six phases."""
    cfg = world.config
    agents = world.agents

    # 1. sensing
    for a in agents:
        sense(a, world.ground, cfg.sensing_radius, cfg.occlusion)

    # neighbor rosters serve both communication and navigation
    rosters = [
        select_neighbors(a, agents, cfg.neighbor_count, cfg.sensing_radius, cfg.size)
        for a in agents
    ]

    # 2. communication and fusion. Messages carry self maps, which this
    # phase never writes, so one encode per sender per step is exact.
    if world.step_count % cfg.comm_freq == 0:
        cache: dict[int, object] = {}
        for a, roster in zip(agents, rosters):
            decoded = []
            for record in roster:
                if record.virtual:
                    continue
                msg = cache.get(record.agent_id)
                if msg is None:
                    msg = make_message(agents[record.agent_id], world.codec)
                    cache[record.agent_id] = msg
                o_latent = inject_noise(msg.obstacle_latent, cfg.sigma, world.noise_rng)
                e_latent = inject_noise(msg.explored_latent, cfg.sigma, world.noise_rng)
                decoded.append((world.codec.decode(o_latent), world.codec.decode(e_latent)))
            fuse_event(a, decoded, world.fusion_params)
            a.last_comm_step = world.step_count

    # 3. waypoint refresh on macro steps
    if world.step_count % world.macro_period == 0:
        for a in agents:
            ctx = ExpContext(
                explored=a.explored_fused,
                obstacles=a.obstacles_fused,
                position=a.position,
                rng=world.agent_rngs[a.agent_id],
                agent_id=a.agent_id,
            )
            a.target = np.asarray(world.policy.select_waypoint(ctx), dtype=np.float64).copy()

    # 4. navigation decisions from a pre-integration snapshot
    accels = []
    for a, roster in zip(agents, rosters):
        ctx = NavContext(
            position=a.position.copy(),
            velocity=a.velocity.copy(),
            target=a.target.copy(),
            obstacles=a.obstacles_fused,
            neighbors=roster,
            limits=world.limits,
            rng=world.agent_rngs[a.agent_id],
            agent_id=a.agent_id,
        )
        accels.append(np.asarray(world.policy.navigate(ctx), dtype=np.float64))

    # 5. simultaneous integration
    previous = [a.position.copy() for a in agents]
    for a, accel in zip(agents, accels):
        step_kinematics(a, accel, world.limits, cfg.size)

    # 6. collision resolution and metrics
    _resolve_collisions(world, previous)
    world.step_count += 1
    world.coverage = float(
        or_combine([a.explored_fused for a in agents])[world.interior].mean()
    )
    world.coverage_curve.append(world.coverage)


def _resolve_collisions(world: World, previous: list[np.ndarray]) -> None:
    """Roll colliding agents back to their pre-step position with zero
    velocity. Rollbacks can expose new overlaps against already-moved
    agents, so resolution iterates; the pre-step layout was valid, which
    bounds the loop by the team size."""
    agents = world.agents
    threshold = 2.0 * world.limits.collision_radius
    first_pass = True
    for _ in range(len(agents) + 1):
        hit_obstacle = {
            a.agent_id
            for a in agents
            if obstacle_within(world.ground, a.position, world.limits.collision_radius)
        }
        hit_agent: set[int] = set()
        pair_count = 0
        for a, b in combinations(agents, 2):
            if float(np.hypot(*(a.position - b.position))) < threshold:
                hit_agent.update((a.agent_id, b.agent_id))
                pair_count += 1
        if first_pass:
            world.collisions_obstacle += len(hit_obstacle)
            world.collisions_agent += pair_count
            first_pass = False
        offenders = hit_obstacle | hit_agent
        if not offenders:
            return
        for idx in offenders:
            agents[idx].position = previous[idx].copy()
            agents[idx].velocity = np.zeros(2, dtype=np.float64)
    world.unresolved_violations += 1  # pragma: no cover - loop bound is a proof


def terminated(world: World) -> tuple[bool, str | None]:
    """Episode end check: the coverage threshold is inclusive and takes
    precedence over the step cap."""
    if world.coverage >= world.config.coverage_threshold:
        return True, "coverage"
    if world.step_count >= world.config.max_steps:
        return True, "timeout"
    return False, None


@dataclass
class EpisodeMetrics:
    steps: int
    duration: float  # seconds, steps * dt
    cause: str
    coverage: float
    accuracy: float | None  # collective map vs ground truth
    agent_accuracy: float | None  # mean of per-agent fused-map accuracies
    per_agent_distance: list[float]
    total_distance: float
    collisions_obstacle: int
    collisions_agent: int
    coverage_curve: np.ndarray
    config: SimConfig

    def to_row(self) -> dict:
        """Flat CSV row; sweep tables aggregate these."""
        return {
            "n_agents": self.config.n_agents,
            "difficulty": self.config.difficulty,
            "beta": self.config.beta,
            "sigma": self.config.sigma,
            "seed": self.config.seed,
            "steps": self.steps,
            "time_s": round(self.duration, 2),
            "coverage": self.coverage,
            "accuracy": "" if self.accuracy is None else self.accuracy,
            "agent_accuracy": "" if self.agent_accuracy is None else self.agent_accuracy,
            "total_distance": self.total_distance,
            "collisions_obstacle": self.collisions_obstacle,
            "collisions_agent": self.collisions_agent,
            "cause": self.cause,
        }


def run_episode(
    config: SimConfig,
    policy: Policy | None = None,
    on_step=None,
) -> EpisodeMetrics:
    """Run one episode to termination and collect its metrics.

    ``on_step`` is an optional callback ``f(world)`` invoked after every
    step (snapshot writers hook in here).
    """
    world = World(config, policy)
    while True:
        done, cause = terminated(world)
        if done:
            break
        step(world)
        if on_step is not None:
            on_step(world)
    return EpisodeMetrics(
        steps=world.step_count,
        duration=world.step_count * config.dt,
        cause=cause if cause is not None else "timeout",
        coverage=world.coverage,
        accuracy=world.team_accuracy(),
        agent_accuracy=world.agent_accuracy(),
        per_agent_distance=[a.odometer for a in world.agents],
        total_distance=float(sum(a.odometer for a in world.agents)),
        collisions_obstacle=world.collisions_obstacle,
        collisions_agent=world.collisions_agent,
        coverage_curve=np.asarray(world.coverage_curve, dtype=np.float64),
        config=config,
    )


logger = logging.getLogger(__name__)


def _episode_row(config: SimConfig) -> dict:
    row = run_episode(config).to_row()
    logger.info(
        "episode n=%d d=%.2f beta=%.2f sigma=%.4f seed=%d: %s after %d steps",
        config.n_agents, config.difficulty, config.beta, config.sigma,
        config.seed, row["cause"], row["steps"],
    )
    return row


def _run_rows(configs: list[SimConfig], workers: int) -> list[dict]:
    if workers <= 1:
        return [_episode_row(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_episode_row, configs))


def run_sweep(
    base: SimConfig,
    n_agents_list: Sequence[int],
    difficulties: Sequence[float],
    seeds: Iterable[int],
    workers: int = 1,
) -> list[dict]:
    """Team-size x difficulty grid, one episode per (N, d, seed) cell."""
    configs = [
        replace(base, n_agents=n, difficulty=d, seed=s)
        for n, d, s in product(n_agents_list, difficulties, list(seeds))
    ]
    return _run_rows(configs, workers)


def run_noise_sweep(
    base: SimConfig,
    betas: Sequence[float],
    sigmas: Sequence[float],
    seeds: Iterable[int],
    workers: int = 1,
) -> list[dict]:
    """Trust x channel-noise grid, one episode per (beta, sigma, seed)."""
    configs = [
        replace(base, beta=b, sigma=s, seed=seed)
        for b, s, seed in product(betas, sigmas, list(seeds))
    ]
    return _run_rows(configs, workers)


def aggregate_rows(rows: Sequence[dict], keys: Sequence[str]) -> list[dict]:
    """Mean per group over the numeric columns of episode rows."""
    numeric = [
        "steps",
        "time_s",
        "coverage",
        "accuracy",
        "agent_accuracy",
        "total_distance",
        "collisions_obstacle",
        "collisions_agent",
    ]
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row)
    out = []
    for group_key in sorted(groups):
        members = groups[group_key]
        agg = dict(zip(keys, group_key))
        agg["episodes"] = len(members)
        for col in numeric:
            values = [r[col] for r in members if r[col] != ""]
            agg[f"mean_{col}"] = sum(values) / len(values) if values else ""
        out.append(agg)
    return out


def run_metadata(config: SimConfig) -> dict:
    """Everything needed to reproduce and interpret a run's outputs."""
    return {
        "config": dataclasses.asdict(config),
        "generator": dict(GENERATOR_CONSTANTS),
        "rng": "numpy-pcg64; config seed spawns child streams "
        "[map, spawn, channel-noise, per-agent policy]",
        "observation_schemas": {
            "navigation": NAV_OBSERVATION_SCHEMA,
            "exploration": EXP_OBSERVATION_SCHEMA,
        },
        "numpy_version": np.__version__,
        "mapswarm_version": _version,
    }
