"""Team-size trade-off in miniature.

Runs a small grid of episodes (team sizes 1/3/5, a few seeds each) and
prints the aggregate table: more agents finish exploration in fewer steps
but spend more combined travel distance doing it.

Run from the repository root:  python3 demos/04_team_size_sweep.py
(takes roughly a minute on one core)
"""

from pathlib import Path

from mapswarm import SimConfig, aggregate_rows, run_sweep
from mapswarm.io import write_csv

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)


def main() -> None:
    base = SimConfig(
        size=128,
        difficulty=0.1,
        sensing_radius=8.0,
        macro_period=25,
        clearing_radius=20.0,
        codec="identity",
    )
    team_sizes = [1, 3, 5]
    seeds = range(3)
    print(f"running {len(team_sizes) * len(seeds)} episodes "
          f"(team sizes {team_sizes}, seeds {list(seeds)})...\n")

    rows = run_sweep(base, n_agents_list=team_sizes, difficulties=[0.1], seeds=seeds)
    summary = aggregate_rows(rows, keys=["n_agents", "difficulty"])

    print(f"{'agents':>6} {'mean steps':>11} {'mean distance':>14} {'mean coverage':>14}")
    for row in summary:
        print(
            f"{row['n_agents']:>6} {row['mean_steps']:>11.0f} "
            f"{row['mean_total_distance']:>14.0f} {row['mean_coverage']:>14.3f}"
        )

    write_csv(OUT / "sweep_episodes.csv", rows)
    write_csv(OUT / "sweep_summary.csv", summary)
    print(f"\nwrote sweep_episodes.csv and sweep_summary.csv to {OUT}/")

    steps = [r["mean_steps"] for r in summary]
    dist = [r["mean_total_distance"] for r in summary]

    def arrows(values):
        out = [f"{values[0]:.0f}"]
        for prev, cur in zip(values, values[1:]):
            out.append((" > " if prev > cur else " < ") + f"{cur:.0f}")
        return "".join(out)

    print(f"\nmean steps over team sizes:    {arrows(steps)}")
    print(f"mean distance over team sizes: {arrows(dist)}")
    print("\nWith only three seeds the distance trend can wobble (a lone agent")
    print("that hits the step cap logs a lot of travel); the full experiment")
    print("in the test suite averages ten seeds, where steps fall and total")
    print("distance rises monotonically with team size.")


if __name__ == "__main__":
    main()
