import math
import random

import pytest
from hypothesis import given, settings

from shapley_ndg import (
    Edge,
    Instance,
    Player,
    Profile,
    TooLargeError,
    alpha_bound,
    cross_check_best_response,
    empirical_alpha,
    enumerate_profiles,
    enumerate_simple_paths,
    exact_min_alpha,
    path_catalog,
    potential,
)
from shapley_ndg.smoothed import DistributionSpec, TopologySpec, gen_instance

from conftest import SHAPES, grid_arcs, random_profile, small_games, two_parallel


def grid_instance(rows, cols, n=1):
    vertices, arcs = grid_arcs(rows, cols)
    edges = [Edge(j, u, v, 0.5, 0.5) for j, (u, v) in enumerate(arcs)]
    return Instance(vertices, edges, [Player(i, 1.0, 0, vertices[-1]) for i in range(n)])


def test_path_counts():
    inst = two_parallel()
    assert enumerate_simple_paths(inst, "s", "t") == [("e1",), ("e2",)]
    vertices, arcs = SHAPES["diamond"]
    square = Instance(vertices, [Edge(j, u, v, 1, 1) for j, (u, v) in enumerate(arcs[:4])], [])
    assert enumerate_simple_paths(square, 0, 3) == [(0, 2), (1, 3)]
    assert len(enumerate_simple_paths(grid_instance(3, 3), 0, 8)) == math.comb(4, 2)


def test_paths_are_simple_and_sorted():
    vertices, arcs = SHAPES["diamond"]
    inst = Instance(vertices, [Edge(j, u, v, 1, 1) for j, (u, v) in enumerate(arcs)], [])
    paths = enumerate_simple_paths(inst, 0, 3)
    assert paths == sorted(paths)
    assert len(set(paths)) == len(paths) == 3


def test_path_cap():
    with pytest.raises(TooLargeError):
        enumerate_simple_paths(grid_instance(4, 4), 0, 15, cap=5)


def test_profile_enumeration():
    assert len(list(enumerate_profiles(two_parallel()))) == 4
    three = two_parallel(weights=(1.0, 1.0, 1.0))
    profiles = list(enumerate_profiles(three))
    assert len(profiles) == 8
    assert len({p.key() for p in profiles}) == 8
    vertices, arcs = SHAPES["diamond"]
    square = Instance(vertices, [Edge(j, u, v, 1, 1) for j, (u, v) in enumerate(arcs[:4])],
                      [Player(1, 1.0, 0, 3), Player(2, 1.0, 0, 3)])
    keys = [p.key() for p in enumerate_profiles(square)]
    assert len(keys) == len(set(keys)) == 4
    with pytest.raises(TooLargeError):
        list(enumerate_profiles(three, cap=7))


def test_solo_oracle(solo):
    report = exact_min_alpha(solo)
    assert report.profile_count == 2
    assert report.exists_pne and report.exact_min_alpha == 1.0


def test_tiny1_oracle(tiny1):
    # brute force by hand: sharing one link costs each player (0.5*2+0.5)/2 = 0.75,
    # alone 1.0. Sharing is a PNE; splitting has ratio 1/0.75 and the smaller potential.
    report = exact_min_alpha(tiny1)
    assert report.profile_count == 4
    assert report.exists_pne
    assert report.exact_min_alpha == 1.0
    assert report.phi_min == 2.0
    assert report.phi_minimizer == Profile({1: ["e1"], 2: ["e2"]})
    assert report.phi_minimizer_alpha == pytest.approx(4 / 3, rel=1e-15)
    assert report.phi_minimizer_alpha <= alpha_bound(tiny1)
    shared = potential(tiny1, Profile({1: ["e1"], 2: ["e1"]}))
    assert shared == pytest.approx(1.5 * math.log2(3), rel=1e-15)


def test_certified_mode_matches(tiny1, diamond):
    for inst in (tiny1, diamond):
        fast = exact_min_alpha(inst)
        exact = exact_min_alpha(inst, certify=True)
        assert exact.certified
        assert exact.exists_pne == fast.exists_pne
        assert exact.exact_min_alpha == pytest.approx(fast.exact_min_alpha, rel=1e-12)
        assert exact.phi_minimizer == fast.phi_minimizer
        assert exact.phi_minimizer_alpha == pytest.approx(fast.phi_minimizer_alpha, rel=1e-12)


def test_empirical_alpha_matches_oracle_factor(diamond):
    catalog = path_catalog(diamond)
    from shapley_ndg.oracle import profile_alpha
    for prof in enumerate_profiles(diamond, catalog=catalog):
        assert empirical_alpha(diamond, prof) == pytest.approx(
            profile_alpha(diamond, prof, catalog), rel=1e-12)


def test_cross_check_fixtures(tiny1, diamond):
    assert cross_check_best_response(tiny1, Profile({1: ["e1"], 2: ["e1"]}), 1)
    for prof in enumerate_profiles(diamond):
        for pid in (1, 2):
            assert cross_check_best_response(diamond, prof, pid)


def test_cross_check_random_sweep():
    rng = random.Random(7)
    shapes = [
        TopologySpec("parallel-links", {"k": 5}, n_players=3),
        TopologySpec("layered-dag", {"layers": 2, "width": 3}, n_players=2),
        TopologySpec("grid", {"rows": 3, "cols": 3}, n_players=3, weights=(1.0, 2.0, 3.0)),
        TopologySpec("random-digraph", {"vertices": 5, "edge_prob": 0.4}, n_players=2,
                     placement="random"),
    ]
    checked = 0
    for i in range(200):
        inst = gen_instance(shapes[i % len(shapes)], DistributionSpec(phi=1 + i % 5), i)
        prof = random_profile(inst, rng)
        for p in inst.players:
            assert cross_check_best_response(inst, prof, p.id)
            checked += 1
    assert checked >= 200


def test_oracle_deterministic(diamond):
    assert exact_min_alpha(diamond) == exact_min_alpha(diamond)


@settings(max_examples=60, deadline=None)
@given(small_games())
def test_oracle_invariants(game):
    inst, _ = game
    report = exact_min_alpha(inst)
    assert report.profile_count == math.prod(path_catalog(inst).counts.values())
    assert report.exact_min_alpha <= report.phi_minimizer_alpha
    assert report.exists_pne == (abs(report.exact_min_alpha - 1.0) <= 1e-12)
    # the potential minimizer is an approximate equilibrium at the proven factor
    assert report.phi_minimizer_alpha <= alpha_bound(inst)
