"""Best responses and epsilon-approximate best-response dynamics.

A player's best response against fixed opponents is a shortest path: the
share the player would pay on edge ``e`` after joining it,
``(a_e (w_e' + w_i) + b_e) * w_i / (w_e' + w_i)`` with ``w_e'`` the load of
the other players, depends only on ``e``, so Dijkstra on these positive
weights is exact.
"""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import asdict, dataclass, field
from itertools import count

from ._fmt import write_csv
from .errors import DomainError, NoPathError
from .game import (
    Instance,
    LoadMap,
    Profile,
    alpha_bound,
    check_profile,
    compute_loads,
    extremal_edge_costs,
    is_normalized,
    joining_cost,
    player_cost,
    potential,
    require_bounds_applicable,
)

TIE_GUARD = 1e-12
SCHEDULES = ("round-robin", "random", "max-ratio")
INIT_METHODS = ("solo", "greedy", "random")
FALLBACK_MAX_ITERATIONS = 10**7
TRAJECTORY_COLUMNS = (
    "step", "player_id", "old_cost", "new_cost",
    "improvement_ratio", "phi_before", "phi_after",
)


def other_loads(instance: Instance, profile: Profile, player_id) -> dict:
    """Per-edge load of every player except ``player_id``; absent players count as zero."""
    load = {e.id: 0.0 for e in instance.edges}
    for p in instance.players:
        if p.id == player_id or p.id not in profile.paths:
            continue
        for eid in profile.paths[p.id]:
            load[eid] += p.w
    return load


def shortest_path(instance: Instance, source, sink, weight) -> tuple:
    """Dijkstra over the multigraph with ``weight(edge) >= 0``.

    Returns ``(edge ids, length)``. Out-edges are scanned in edge-id order and
    only strict improvements relax, so ties resolve deterministically.
    """
    dist = {source: 0.0}
    pred = {}
    done = set()
    tie = count()
    heap = [(0.0, next(tie), source)]
    while heap:
        d, _, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == sink:
            break
        for e in instance.out_edges.get(v, ()):
            nd = d + weight(e)
            if e.head not in done and nd < dist.get(e.head, math.inf):
                dist[e.head] = nd
                pred[e.head] = e
                heapq.heappush(heap, (nd, next(tie), e.head))
    if sink not in done:
        raise NoPathError(f"{sink!r} is unreachable from {source!r}")
    path = []
    v = sink
    while v != source:
        e = pred[v]
        path.append(e.id)
        v = e.tail
    path.reverse()
    return tuple(path), dist[sink]


def best_response_to_loads(instance: Instance, player_id, loads: dict) -> tuple:
    player = instance.player(player_id)
    w = player.w
    path, _ = shortest_path(
        instance, player.source, player.sink,
        lambda e: joining_cost(e, loads[e.id], w),
    )
    cost = math.fsum(joining_cost(instance.edge_by_id[eid], loads[eid], w) for eid in path)
    return path, cost


def best_response(instance: Instance, profile: Profile, player_id) -> tuple:
    """Cheapest simple path for ``player_id`` with the opponents' paths fixed.

    Returns ``(path, cost)`` where ``cost`` is the player's cost after deviating.
    """
    return best_response_to_loads(instance, player_id, other_loads(instance, profile, player_id))


def is_improving(old_cost: float, new_cost: float, factor: float) -> bool:
    """Strict ``factor * new_cost < old_cost``, guarded against float ties."""
    return factor * new_cost < old_cost * (1.0 - TIE_GUARD)


def verify_apne(instance: Instance, profile: Profile, factor: float) -> tuple:
    """Check that no player can cut its cost by more than ``factor``.

    Returns ``(ok, (worst_player_id, worst_ratio))``.
    """
    if factor < 1:
        raise DomainError(f"factor must be >= 1, got {factor!r}")
    loads = compute_loads(instance, profile)
    ok = True
    worst = (None, -math.inf)
    for p in instance.players:
        c = player_cost(instance, profile, p.id, loads)
        _, br = best_response(instance, profile, p.id)
        if c > factor * br * (1.0 + TIE_GUARD):
            ok = False
        ratio = c / br
        if ratio > worst[1]:
            worst = (p.id, ratio)
    return ok, worst


def empirical_alpha(instance: Instance, profile: Profile) -> float:
    """Smallest factor at which ``profile`` is an approximate equilibrium (1.0 = exact PNE)."""
    _, (_, ratio) = verify_apne(instance, profile, 1.0)
    return max(1.0, ratio)


# ---------------------------------------------------------------------------
# iteration bound


@dataclass(frozen=True)
class BoundReport:
    c_max: float
    c_min: float
    epsilon: float
    epsilon_prime: float
    analytic_bound: float
    profile_count_bound: float
    effective_bound: float
    degenerate: bool

    def admits(self, steps: int) -> bool:
        """Integer comparison ``steps <= effective_bound``."""
        if math.isinf(self.effective_bound):
            return True
        return steps <= math.floor(self.effective_bound)

    def to_dict(self) -> dict:
        return asdict(self)


def iteration_bound(instance: Instance, epsilon: float) -> BoundReport:
    """Worst-case step count of the dynamics, ``min(analytic, 2**(n*m))``."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    require_bounds_applicable(instance)
    W = instance.total_weight
    m = instance.m
    c_max, c_min = extremal_edge_costs(instance)
    log_w = math.log2(1.0 + W)
    ratio = m * c_max / c_min
    degenerate = ratio == 1.0
    analytic = (1.0 + 1.0 / epsilon) * W * log_w * ratio * math.log(ratio)
    nm = instance.n * m
    profile_count = math.ldexp(1.0, nm) if nm < 1024 else math.inf
    return BoundReport(
        c_max=c_max,
        c_min=c_min,
        epsilon=epsilon,
        epsilon_prime=epsilon * c_min / ((1.0 + epsilon) * W * log_w * m * c_max),
        analytic_bound=analytic,
        profile_count_bound=profile_count,
        effective_bound=min(analytic, profile_count),
        degenerate=degenerate,
    )


def default_max_iterations(instance: Instance, epsilon: float) -> float:
    if instance.n >= 2 and is_normalized(instance):
        return 10 * iteration_bound(instance, epsilon).effective_bound
    return FALLBACK_MAX_ITERATIONS


# ---------------------------------------------------------------------------
# dynamics


@dataclass(frozen=True)
class DeviationStep:
    step: int
    player_id: object
    old_path: tuple
    new_path: tuple
    old_cost: float
    new_cost: float
    phi_before: float
    phi_after: float

    @property
    def improvement_ratio(self) -> float:
        return self.old_cost / self.new_cost


@dataclass
class TrajectoryLog:
    initial_profile: Profile
    final_profile: Profile
    epsilon: float
    alpha: float
    schedule: str
    steps: list = field(default_factory=list)
    terminated: bool = False

    @property
    def T(self) -> int:
        return len(self.steps)

    @property
    def factor(self) -> float:
        return (1.0 + self.epsilon) * self.alpha

    def profiles(self) -> list:
        """Replay the trajectory: ``[P^0, P^1, ..., P^T]``."""
        out = [self.initial_profile.copy()]
        for s in self.steps:
            out.append(out[-1].with_path(s.player_id, s.new_path))
        return out

    def rows(self) -> list:
        return [
            {
                "step": s.step,
                "player_id": s.player_id,
                "old_cost": s.old_cost,
                "new_cost": s.new_cost,
                "improvement_ratio": s.improvement_ratio,
                "phi_before": s.phi_before,
                "phi_after": s.phi_after,
            }
            for s in self.steps
        ]

    def write_csv(self, fh) -> None:
        write_csv(fh, TRAJECTORY_COLUMNS, self.rows())


def initial_profile(instance: Instance, method: str = "solo", rng_seed: int = 0) -> Profile:
    """Starting profile for the dynamics.

    ``solo``: every player's shortest path as if alone. ``greedy``: players
    enter in order, each best-responding to those already placed.
    ``random``: a randomized depth-first search path per player.
    """
    if method == "solo":
        empty = {e.id: 0.0 for e in instance.edges}
        return Profile({p.id: best_response_to_loads(instance, p.id, empty)[0] for p in instance.players})
    if method == "greedy":
        profile = Profile()
        for p in instance.players:
            path, _ = best_response_to_loads(instance, p.id, other_loads(instance, profile, p.id))
            profile.paths[p.id] = path
        return profile
    if method == "random":
        rng = random.Random(rng_seed)
        return Profile({p.id: random_simple_path(instance, p.source, p.sink, rng) for p in instance.players})
    raise DomainError(f"unknown init method {method!r}; expected one of {INIT_METHODS}")


def random_simple_path(instance: Instance, source, sink, rng: random.Random) -> tuple:
    # DFS with permanent marking: the tree path to the sink is simple
    pred = {source: None}
    stack = [source]
    while stack:
        v = stack.pop()
        if v == sink:
            break
        out = list(instance.out_edges.get(v, ()))
        rng.shuffle(out)
        for e in out:
            if e.head not in pred:
                pred[e.head] = e
                stack.append(e.head)
    if sink not in pred:
        raise NoPathError(f"{sink!r} is unreachable from {source!r}")
    path = []
    v = sink
    while v != source:
        e = pred[v]
        path.append(e.id)
        v = e.tail
    return tuple(reversed(path))


def _player_costs(instance: Instance, profile: Profile, loads: LoadMap) -> dict:
    return {p.id: player_cost(instance, profile, p.id, loads) for p in instance.players}


def epsilon_abrd(
    instance: Instance,
    initial: Profile,
    epsilon: float,
    schedule: str = "round-robin",
    max_iterations: float | None = None,
    rng_seed: int = 0,
) -> TrajectoryLog:
    """Run epsilon-approximate best-response dynamics from ``initial``.

    A deviation is committed only if the player's best response beats its
    current cost by more than ``(1 + epsilon) * alpha_bound(instance)``.
    The run stops once every player has been checked since the last
    committed deviation (the profile is then certified) or when
    ``max_iterations`` deviations have been committed.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    if schedule not in SCHEDULES:
        raise DomainError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
    check_profile(instance, initial)
    alpha = alpha_bound(instance)
    factor = (1.0 + epsilon) * alpha
    if max_iterations is None:
        max_iterations = default_max_iterations(instance, epsilon)

    profile = initial.copy()
    loads = compute_loads(instance, profile, validate=False)
    phi = potential(instance, profile, loads)
    log = TrajectoryLog(initial.copy(), profile, epsilon, alpha, schedule)
    players = [p.id for p in instance.players]
    rng = random.Random(rng_seed)

    def commit(pid, new_path, old_cost, new_cost):
        nonlocal loads, phi
        old_path = profile.paths[pid]
        profile.paths[pid] = new_path
        loads = compute_loads(instance, profile, validate=False)
        phi_after = potential(instance, profile, loads)
        log.steps.append(DeviationStep(
            len(log.steps) + 1, pid, old_path, new_path, old_cost, new_cost, phi, phi_after,
        ))
        phi = phi_after

    def candidate(pid):
        path, new_cost = best_response(instance, profile, pid)
        return path, player_cost(instance, profile, pid, loads), new_cost

    if schedule == "max-ratio":
        while True:
            best = None
            for pid in players:
                path, old, new = candidate(pid)
                if best is None or old / new > best[2] / best[3]:
                    best = (pid, path, old, new)
            pid, path, old, new = best
            if not is_improving(old, new, factor):
                log.terminated = True
                break
            if len(log.steps) >= max_iterations:
                break
            commit(pid, path, old, new)
    else:
        # players examined since the last committed deviation
        clean = set()
        turn = 0
        while len(clean) < len(players):
            if schedule == "round-robin":
                pid = players[turn % len(players)]
                turn += 1
            else:
                pid = rng.choice(players)
            path, old, new = candidate(pid)
            if not is_improving(old, new, factor):
                clean.add(pid)
                continue
            if len(log.steps) >= max_iterations:
                break
            commit(pid, path, old, new)
            clean = set()
        else:
            log.terminated = True

    log.final_profile = profile
    return log


def run_summary(instance: Instance, log: TrajectoryLog) -> dict:
    """Plain-dict summary of a finished run, suitable for JSON."""
    ok, (worst_pid, worst_ratio) = verify_apne(instance, log.final_profile, log.factor)
    summary = {
        "alpha": log.alpha,
        "epsilon": log.epsilon,
        "schedule": log.schedule,
        "T": log.T,
        "terminated": log.terminated,
        "empirical_alpha": max(1.0, worst_ratio),
        "worst_player": worst_pid,
        "verify_apne": ok,
        "effective_bound": None,
        "bound_report": None,
        "final_profile": log.final_profile.to_dict(),
    }
    if instance.n >= 2 and is_normalized(instance):
        report = iteration_bound(instance, log.epsilon)
        summary["effective_bound"] = report.effective_bound
        summary["bound_report"] = report.to_dict()
    return summary
