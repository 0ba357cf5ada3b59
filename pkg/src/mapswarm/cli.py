"""Command-line front end.

Subcommands:
  genmap       generate one occupancy map as PGM plus a JSON sidecar
  run          run one episode from a key = value config file
  sweep        team-size x difficulty grid of episodes
  noise-sweep  trust x channel-noise grid of episodes
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
from pathlib import Path

import numpy as np

from .io import write_csv, write_pgm, write_snapshot_pgm
from .mapgen import MapGenConfig, generate_map, map_metadata
from .sim import (
    SimConfig,
    aggregate_rows,
    run_episode,
    run_metadata,
    run_noise_sweep,
    run_sweep,
)

logger = logging.getLogger("mapswarm")


def _parse_config_file(path: str) -> SimConfig:
    """Plain ``key = value`` lines (# comments) mapped onto SimConfig."""
    fields = {f.name: f for f in dataclasses.fields(SimConfig)}
    values: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key not in fields:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, text)
    return SimConfig(**values)


def _coerce(key: str, text: str):
    if text.lower() in ("none", ""):
        return None
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    int_keys = {
        "size", "n_agents", "neighbor_count", "comm_freq", "downsample_factor",
        "macro_period", "max_steps", "seed",
    }
    if key in int_keys:
        return int(text)
    if key in ("codec",):
        return text
    return float(text)


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _cmd_genmap(args: argparse.Namespace) -> int:
    config = MapGenConfig(
        size=args.size,
        difficulty=args.difficulty,
        seed=args.seed,
        clearing_radius=args.clearing_radius,
    )
    grid = generate_map(config)
    out = Path(args.out)
    write_pgm(out, grid)
    sidecar = out.with_suffix(out.suffix + ".json")
    sidecar.write_text(json.dumps(map_metadata(config), indent=2) + "\n")
    logger.info("wrote %s and %s", out, sidecar)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _parse_config_file(args.config) if args.config else SimConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    on_step = None
    if args.snapshot_every:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)

        def on_step(world):
            if world.step_count % args.snapshot_every == 0:
                write_snapshot_pgm(
                    snap_dir / f"step_{world.step_count:06d}.pgm",
                    world.ground,
                    world.team_explored(),
                )

    metrics = run_episode(config, on_step=on_step)

    write_csv(out / "metrics.csv", [metrics.to_row()])
    write_csv(
        out / "coverage.csv",
        [
            {"step": i + 1, "coverage": c}
            for i, c in enumerate(metrics.coverage_curve.tolist())
        ],
    )
    meta = run_metadata(config)
    meta["result"] = {k: v for k, v in metrics.to_row().items()}
    (out / "run.json").write_text(json.dumps(meta, indent=2) + "\n")
    logger.info(
        "episode finished: %s after %d steps (%.2f s), coverage %.3f",
        metrics.cause, metrics.steps, metrics.duration, metrics.coverage,
    )
    return 0


def _base_config(args: argparse.Namespace) -> SimConfig:
    if getattr(args, "config", None):
        base = _parse_config_file(args.config)
    else:
        base = SimConfig()
    overrides = {}
    for name in ("size", "sensing_radius", "codec", "downsample_factor", "max_steps"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return dataclasses.replace(base, **overrides)


def _write_sweep_outputs(out_dir: str, rows: list[dict], keys: list[str]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "episodes.csv", rows)
    write_csv(out / "summary.csv", aggregate_rows(rows, keys))
    logger.info("wrote %d episode rows to %s", len(rows), out)


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = _base_config(args)
    rows = run_sweep(
        base,
        n_agents_list=_int_list(args.agents),
        difficulties=_float_list(args.difficulties),
        seeds=range(args.seeds),
        workers=args.workers,
    )
    _write_sweep_outputs(args.out, rows, ["n_agents", "difficulty"])
    return 0


def _cmd_noise_sweep(args: argparse.Namespace) -> int:
    base = dataclasses.replace(
        _base_config(args), difficulty=args.difficulty, codec=args.codec or "downsample"
    )
    rows = run_noise_sweep(
        base,
        betas=_float_list(args.betas),
        sigmas=_float_list(args.sigmas),
        seeds=range(args.seeds),
        workers=args.workers,
    )
    _write_sweep_outputs(args.out, rows, ["beta", "sigma"])
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mapswarm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genmap", help="generate an occupancy map")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--difficulty", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clearing-radius", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_genmap)

    p = sub.add_parser("run", help="run one episode")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--snapshot-every", type=int, default=0, metavar="STEPS")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    def common_sweep_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value base config file")
        p.add_argument("--seeds", type=int, default=10, help="seeds 0..k-1 per cell")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--size", type=int, default=None)
        p.add_argument("--sensing-radius", dest="sensing_radius", type=float, default=None)
        p.add_argument("--max-steps", dest="max_steps", type=int, default=None)
        p.add_argument("--codec", choices=["identity", "downsample"], default=None)
        p.add_argument("--downsample-factor", dest="downsample_factor", type=int, default=None)
        p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="team-size x difficulty grid")
    p.add_argument("--agents", default="1,5,10,15,20")
    p.add_argument("--difficulties", default="0.1,0.2,0.3,0.4")
    common_sweep_args(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("noise-sweep", help="trust x channel-noise grid")
    p.add_argument("--betas", default="0.1,0.3,0.5,0.7,0.9")
    p.add_argument("--sigmas", default="0,0.001,0.002,0.003,0.004")
    p.add_argument("--difficulty", type=float, default=0.35)
    common_sweep_args(p)
    p.set_defaults(func=_cmd_noise_sweep)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
