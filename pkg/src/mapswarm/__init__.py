"""mapswarm: deterministic multi-agent exploration on procedural maps.

The package splits into composable layers: ``mapgen`` builds occupancy maps
from thresholded gradient noise, ``grid`` holds the shared raster algebra,
``agent``/``sensing``/``comms`` model the robots, ``fusion`` merges beliefs
across the team, ``policy`` provides baseline decision-making plus reward
and observation evaluators, and ``sim`` orchestrates episodes and sweeps.
"""

__version__ = "0.1.0"

from .agent import (
    AgentState,
    KinematicLimits,
    clip_acceleration,
    clip_speed,
    predict_collision_time,
    step_kinematics,
)
from .comms import (
    DownsampleCodec,
    IdentityCodec,
    Message,
    NeighborRecord,
    inject_noise,
    make_message,
    select_neighbors,
    virtual_position,
)
from .fusion import (
    FusionParams,
    fuse_event,
    intermediate_exploration,
    intermediate_obstacle,
    temporal_fuse,
    trust_weight,
)
from .grid import (
    binarize,
    coverage_fraction,
    crop_disk,
    dilate,
    interior_mask,
    map_accuracy,
    or_combine,
)
from .mapgen import (
    MapGenConfig,
    NoiseLayer,
    generate_component,
    generate_map,
    perlin_layer,
    threshold_layer,
)
from .policy import (
    BaselinePolicy,
    ExpContext,
    ExpSnapshot,
    NavContext,
    NavScene,
    ObservationParams,
    RewardParams,
    build_exp_observation,
    build_nav_observation,
    exploration_reward,
    frontier_waypoint,
    navigation_reward,
    reactive_navigate,
)
from .sensing import sense
from .sim import (
    EpisodeMetrics,
    SimConfig,
    World,
    aggregate_rows,
    run_episode,
    run_noise_sweep,
    run_sweep,
    spawn_agents,
    step,
    terminated,
)
