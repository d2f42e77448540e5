"""
Model basics
============

Two players share a network of two parallel links. We build the instance by
hand, price a few profiles and look at the potential.
"""

# %%
import math

from shapley_ndg import (
    Edge, Instance, Player, Profile, alpha_bound, compute_loads, cost_share,
    player_cost, potential, potential_bounds, social_cost,
)

edges = [Edge("top", "s", "t", 0.5, 0.5), Edge("bottom", "s", "t", 1.0, 0.1)]
players = [Player(1, 1.0, "s", "t"), Player(2, 2.0, "s", "t")]
game = Instance(["s", "t"], edges, players)
print("players", game.n, "edges", game.m, "total weight", game.total_weight)

# %%
# Every assignment of links to players, with per-player cost and the potential.
for p1 in ("top", "bottom"):
    for p2 in ("top", "bottom"):
        prof = Profile({1: [p1], 2: [p2]})
        costs = [player_cost(game, prof, pid) for pid in (1, 2)]
        print(f"{p1:>6} {p2:>6}  costs={costs[0]:.3f},{costs[1]:.3f}"
              f"  social={social_cost(game, prof):.3f}  phi={potential(game, prof):.3f}")

# %%
# Shares on a shared edge add up to the edge cost, split by weight.
both_top = Profile({1: ["top"], 2: ["top"]})
loads = compute_loads(game, both_top)
shares = [cost_share(game, loads, pid, "top") for pid in (1, 2)]
print("shares", shares, "sum", math.fsum(shares), "edge cost", edges[0].cost(loads["top"]))

# %%
lo, hi = potential_bounds(game)
print(f"potential range [{lo:.3f}, {hi:.3f}]  alpha = {alpha_bound(game):.3f}")
