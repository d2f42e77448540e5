"""
Exhaustive oracle
=================

For tiny games every profile can be listed. That gives the exact best
approximation factor, the potential minimizer, and an independent check of
the shortest-path best response.
"""

# %%
from shapley_ndg import (
    DistributionSpec, TopologySpec, alpha_bound, cross_check_best_response,
    exact_min_alpha, gen_instance, initial_profile, path_catalog,
)

game = gen_instance(TopologySpec("grid", {"rows": 3, "cols": 3}, n_players=2, weights=(1.0, 2.0)),
                    DistributionSpec(phi=1.0), rng_seed=0)
catalog = path_catalog(game)
print("paths per player", catalog.counts, "profiles", catalog.profile_count)

# %%
report = exact_min_alpha(game, certify=True)
print(report.to_json())
print("potential minimizer within alpha:", report.phi_minimizer_alpha <= alpha_bound(game))

# %%
prof = initial_profile(game, "random", rng_seed=5)
print("best responses agree:", all(cross_check_best_response(game, prof, p.id) for p in game.players))
