"""Map fusion walkthrough on a single disputed cell.

Shows how an agent blends its own belief about one cell with neighbor
votes, and how the trust parameter beta shifts the outcome: higher beta
weights the agent's own sensing more heavily against the neighborhood.

Run from the repository root:  python3 demos/02_fusion_walkthrough.py
"""

import numpy as np

from mapswarm import AgentState, FusionParams, fuse_event, trust_weight


def one_cell_state(explored: int, obstacle: int) -> AgentState:
    state = AgentState.create(agent_id=0, position=np.zeros(2), size=1)
    state.explored_self[0, 0] = explored
    state.obstacles_self[0, 0] = obstacle
    return state


def fused_bit(o_self: int, votes: list[int], beta: float) -> int:
    state = one_cell_state(explored=1, obstacle=o_self)
    maps = [
        (np.array([[v]], dtype=np.float64), np.array([[1]], dtype=np.uint8))
        for v in votes
    ]
    fuse_event(state, maps, FusionParams(beta=beta))
    return int(state.obstacles_fused[0, 0])


def main() -> None:
    print("One explored cell, the agent believes it is FREE (0); four")
    print("neighbors have also explored it and vote on its contents.\n")

    print("Self-trust weight W = (n - 1) * beta + 1 for n exploring neighbors:")
    for beta in (0.0, 0.5, 1.0):
        print(f"  n=4, beta={beta:.1f} -> W = {trust_weight(4, beta):.1f}")

    print("\nThe cell estimate is (W * own + sum of votes) / (W + n),")
    print("then rounded at 0.5 (ties count as obstacle).\n")

    votes = [1, 1, 1, 0]  # three neighbors claim an obstacle, one agrees with us
    print(f"own belief 0, votes {votes}:")
    for beta in (0.0, 0.3, 0.6, 1.0):
        w = trust_weight(4, beta)
        blend = (w * 0 + sum(votes)) / (w + 4)
        bit = fused_bit(0, votes, beta)
        label = "obstacle" if bit else "free"
        print(f"  beta={beta:.1f}: blend = {blend:.3f} -> {label}")

    print("\nAt low beta the neighborhood majority wins; raising beta lets")
    print("the agent's own sensing veto the outvote. With three or fewer")
    print("neighbors no interior beta changes any bit — four is the")
    print("smallest roster where trust weighting matters:")
    for n, votes in ((3, [1, 1, 0]), (4, [1, 0, 0, 0])):
        low = fused_bit(1, votes, 0.1)
        high = fused_bit(1, votes, 0.9)
        print(f"  own 1, votes {votes}: beta=0.1 -> {low}, beta=0.9 -> {high}")


if __name__ == "__main__":
    main()
