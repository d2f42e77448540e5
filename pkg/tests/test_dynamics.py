import csv
import io
import math

import pytest
from hypothesis import given, settings, strategies as st

from shapley_ndg import (
    DomainError,
    Edge,
    Instance,
    NoPathError,
    Player,
    Profile,
    alpha_bound,
    best_response,
    empirical_alpha,
    enumerate_profiles,
    enumerate_simple_paths,
    epsilon_abrd,
    initial_profile,
    is_improving,
    iteration_bound,
    player_cost,
    potential,
    verify_apne,
)
from shapley_ndg.dynamics import SCHEDULES, TRAJECTORY_COLUMNS
from shapley_ndg.errors import BoundsNotApplicableError
from shapley_ndg.smoothed import DistributionSpec, TopologySpec, gen_instance

from conftest import small_games, two_parallel


def solo_pair(cost1, cost2):
    """Single unit-weight player choosing between two parallel links."""
    (a1, b1), (a2, b2) = cost1, cost2
    return Instance(
        ["s", "t"], [Edge("e1", "s", "t", a1, b1), Edge("e2", "s", "t", a2, b2)],
        [Player(1, 1.0, "s", "t")],
    )


def enumerated_best(instance, profile, pid):
    p = instance.player(pid)
    return min(
        player_cost(instance, profile.with_path(pid, path), pid)
        for path in enumerate_simple_paths(instance, p.source, p.sink)
    )


def test_best_response_picks_cheaper_link(solo):
    path, cost = best_response(solo, Profile({1: ["e1"]}), 1)
    assert path == ("e2",)
    assert cost == pytest.approx(1.2, rel=1e-15)


def test_best_response_joining_share():
    inst = Instance(["s", "t"], [Edge("e", "s", "t", 1.0, 1.0)],
                    [Player(1, 1.0, "s", "t"), Player(2, 2.0, "s", "t")])
    _, cost = best_response(inst, Profile({1: ["e"], 2: ["e"]}), 1)
    assert cost == pytest.approx(4 / 3, rel=1e-15)


def test_best_response_on_layered_dag_matches_enumeration():
    topo = TopologySpec("layered-dag", {"layers": 3, "width": 3}, n_players=3)
    for seed in range(10):
        inst = gen_instance(topo, DistributionSpec(phi=2.0), seed)
        prof = initial_profile(inst, "random", seed)
        for p in inst.players:
            _, cost = best_response(inst, prof, p.id)
            assert cost == pytest.approx(enumerated_best(inst, prof, p.id), rel=1e-12)


def test_best_response_cost_equals_deviated_player_cost(diamond):
    prof = Profile({1: ["su", "ut"], 2: ["su", "ut"]})
    for pid in (1, 2):
        path, cost = best_response(diamond, prof, pid)
        assert cost == pytest.approx(player_cost(diamond, prof.with_path(pid, path), pid), rel=1e-12)


def test_best_response_unreachable():
    inst = Instance(["s", "m", "t"], [Edge(0, "s", "m", 1, 1), Edge(1, "t", "m", 1, 1)],
                    [Player(1, 1.0, "s", "t")])
    with pytest.raises(NoPathError):
        best_response(inst, Profile({1: []}), 1)


@pytest.mark.parametrize("old,new,factor,expected", [
    (10.0, 1.0, 5.0, True),
    (5.0, 1.0, 5.0, False),
    (5.0000000000001, 1.0, 5.0, False),
])
def test_is_improving(old, new, factor, expected):
    assert is_improving(old, new, factor) is expected


def test_solo_player_moves_at_most_once():
    inst = solo_pair((0.1, 10.0), (0.1, 0.1))
    log = epsilon_abrd(inst, Profile({1: ["e1"]}), 0.1)
    assert log.terminated and log.T == 1
    assert log.final_profile[1] == ("e2",)
    # a start that is already within the factor does not move
    near = solo_pair((1.0, 0.5), (1.0, 0.2))
    log = epsilon_abrd(near, Profile({1: ["e1"]}), 0.1)
    assert log.terminated and log.T == 0
    assert verify_apne(near, log.final_profile, log.factor)[0]


def test_tiny1_from_every_start(tiny1):
    eps = 0.1
    factor = (1 + eps) * alpha_bound(tiny1)
    for start in enumerate_profiles(tiny1):
        for schedule in SCHEDULES:
            log = epsilon_abrd(tiny1, start, eps, schedule, rng_seed=3)
            assert log.terminated
            assert log.T <= 4
            assert verify_apne(tiny1, log.final_profile, factor)[0]


def test_verify_apne_and_empirical_alpha():
    inst = solo_pair((1.0, 0.2), (1.0, 0.5))
    ok, (pid, ratio) = verify_apne(inst, Profile({1: ["e1"]}), 1.0)
    assert ok and pid == 1 and ratio == 1.0
    assert empirical_alpha(inst, Profile({1: ["e1"]})) == 1.0

    inst = solo_pair((1.0, 1.0), (0.5, 0.5))
    ok, (pid, ratio) = verify_apne(inst, Profile({1: ["e1"]}), 1.5)
    assert not ok and ratio == 2.0
    assert empirical_alpha(inst, Profile({1: ["e1"]})) == 2.0


def test_iteration_bound_closed_form():
    report = iteration_bound(two_parallel(), 0.5)
    # (1 + 1/eps) W log2(1+W) (m c_max/c_min) ln(m c_max/c_min) with W=2, c_max=1.5, c_min=1, m=2
    expected = 3.0 * 2.0 * math.log2(3.0) * 3.0 * math.log(3.0)
    assert report.c_max == 1.5 and report.c_min == 1.0
    assert report.analytic_bound == pytest.approx(expected, rel=1e-14)
    assert round(report.analytic_bound, 2) == 31.34
    assert report.profile_count_bound == 16
    assert report.effective_bound == 16
    assert report.epsilon_prime == pytest.approx(0.5 / (1.5 * 2 * math.log2(3) * 2 * 1.5), rel=1e-14)
    assert not report.degenerate


def test_iteration_bound_large_epsilon_limit():
    inst = two_parallel()
    W, r = 2.0, 3.0
    limit = W * math.log2(1 + W) * r * math.log(r)
    assert iteration_bound(inst, 1e12).analytic_bound == pytest.approx(limit, rel=1e-11)


def test_iteration_bound_degenerate_ratio():
    # a_e so small that a_e * W + b_e rounds to a_e + b_e on a single edge
    inst = Instance(["s", "t"], [Edge(0, "s", "t", 1e-20, 1.0)],
                    [Player(0, 1.0, "s", "t"), Player(1, 1.0, "s", "t")])
    report = iteration_bound(inst, 0.5)
    assert report.degenerate and report.analytic_bound == 0.0


def test_iteration_bound_preconditions():
    with pytest.raises(BoundsNotApplicableError):
        iteration_bound(two_parallel(weights=(2.0, 3.0)), 0.5)
    with pytest.raises(DomainError):
        iteration_bound(two_parallel(), 0.0)


def test_epsilon_validation(tiny1):
    with pytest.raises(DomainError):
        epsilon_abrd(tiny1, Profile({1: ["e1"], 2: ["e1"]}), 0.0)
    with pytest.raises(DomainError):
        epsilon_abrd(tiny1, Profile({1: ["e1"], 2: ["e1"]}), 0.1, schedule="sideways")


def test_max_iterations_cutoff_is_flagged():
    topo = TopologySpec("parallel-links", {"k": 30}, n_players=4)
    for seed in range(200):
        inst = gen_instance(topo, DistributionSpec(), seed)
        start = initial_profile(inst, "random", seed)
        full = epsilon_abrd(inst, start, 0.1)
        if full.T >= 2:
            break
    else:
        pytest.fail("no multi-step run found")
    cut = epsilon_abrd(inst, start, 0.1, max_iterations=1)
    assert not cut.terminated and cut.T == 1


def test_initial_profiles_are_valid(diamond):
    for method in ("solo", "greedy", "random"):
        prof = initial_profile(diamond, method, 5)
        assert set(prof.paths) == {1, 2}
        potential(diamond, prof)  # validates
    with pytest.raises(DomainError):
        initial_profile(diamond, "bogus")


def test_trajectory_csv_columns():
    topo = TopologySpec("parallel-links", {"k": 20}, n_players=3)
    inst = gen_instance(topo, DistributionSpec(), 4)
    log = epsilon_abrd(inst, initial_profile(inst, "random", 4), 0.1)
    buf = io.StringIO()
    log.write_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    assert len(rows) == log.T + 1
    for row, step in zip(rows[1:], log.steps):
        assert float(row[2]) == step.old_cost and float(row[6]) == step.phi_after


# -- properties ------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(small_games())
def test_best_response_exactness(game):
    inst, prof = game
    for p in inst.players:
        _, cost = best_response(inst, prof, p.id)
        assert cost == pytest.approx(enumerated_best(inst, prof, p.id), rel=1e-12, abs=0)


def check_trajectory(inst, log):
    profiles = log.profiles()
    keys = [p.key() for p in profiles]
    assert len(set(keys)) == len(keys), "profile revisited"
    for k, step in enumerate(log.steps):
        assert step.improvement_ratio > log.factor
        assert step.phi_after < step.phi_before
        assert step.phi_before == pytest.approx(potential(inst, profiles[k]), rel=1e-12)
        assert step.phi_after == pytest.approx(potential(inst, profiles[k + 1]), rel=1e-12)
        d_phi = step.phi_after - step.phi_before
        assert d_phi < log.alpha * step.new_cost - step.old_cost + 1e-9
        assert d_phi < -(log.epsilon / (1 + log.epsilon)) * step.old_cost + 1e-9
    for a, b in zip(log.steps, log.steps[1:]):
        assert a.phi_after == pytest.approx(b.phi_before, rel=1e-12, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(
    st.integers(0, 10**6),
    st.sampled_from([0.1, 0.5, 1.0]),
    st.sampled_from(SCHEDULES),
    st.sampled_from([1.0, 2.0, 5.0]),
    st.integers(2, 5),
)
def test_dynamics_invariants_on_smoothed_instances(seed, eps, schedule, phi, n):
    topo = TopologySpec("parallel-links", {"k": 15}, n_players=n,
                        weights=[1.0] + [float(1 + i % 3) for i in range(1, n)])
    inst = gen_instance(topo, DistributionSpec(phi=phi), seed)
    log = epsilon_abrd(inst, initial_profile(inst, "random", seed), eps, schedule, rng_seed=seed)
    assert log.terminated
    check_trajectory(inst, log)
    assert iteration_bound(inst, eps).admits(log.T)
    ok, _ = verify_apne(inst, log.final_profile, log.factor)
    assert ok
    assert empirical_alpha(inst, log.final_profile) <= log.factor + 1e-9


@settings(max_examples=100, deadline=None)
@given(small_games(), st.sampled_from([0.1, 1.0]))
def test_dynamics_on_small_games(game, eps):
    inst, prof = game
    log = epsilon_abrd(inst, prof, eps)
    assert log.terminated
    check_trajectory(inst, log)
    assert verify_apne(inst, log.final_profile, log.factor)[0]
