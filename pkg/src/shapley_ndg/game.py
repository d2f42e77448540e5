"""Weighted Shapley network design games with affine edge costs.

An :class:`Instance` is a directed multigraph whose edges carry costs
``c_e(w) = a_e * w + b_e`` together with a list of weighted players, each
routing one simple path from its source to its sink. A :class:`Profile`
assigns such a path to every player. Edge costs are split among the users
of an edge in proportion to their weights.
"""
from __future__ import annotations

import json
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Hashable, Mapping

from .errors import (
    BoundsNotApplicableError,
    DomainError,
    InstanceError,
    NormalizationWarning,
    ProfileError,
)

RTOL = 1e-9
NORMALIZATION_TOL = 1e-9


def id_key(x):
    """Sort key that orders ints numerically and strings lexically, ints first."""
    return (isinstance(x, str), x)


@dataclass(frozen=True)
class Edge:
    id: Hashable
    tail: Hashable
    head: Hashable
    a: float
    b: float

    def cost(self, load: float) -> float:
        return self.a * load + self.b


@dataclass(frozen=True)
class Player:
    id: Hashable
    w: float
    source: Hashable
    sink: Hashable


@dataclass(frozen=True)
class Instance:
    """Immutable game instance.

    Construction does not enforce the invariants; call
    :func:`validate_instance` or :func:`check_instance` for that.
    """

    vertices: tuple
    edges: tuple
    players: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "players", tuple(self.players))

    @cached_property
    def edge_by_id(self) -> dict:
        return {e.id: e for e in self.edges}

    @cached_property
    def player_by_id(self) -> dict:
        return {p.id: p for p in self.players}

    @cached_property
    def out_edges(self) -> dict:
        """Vertex -> outgoing edges, sorted by edge id."""
        out = {v: [] for v in self.vertices}
        for e in sorted(self.edges, key=lambda e: id_key(e.id)):
            out.setdefault(e.tail, []).append(e)
        return out

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def total_weight(self) -> float:
        return math.fsum(p.w for p in self.players)

    @cached_property
    def max_weight(self) -> float:
        return max(p.w for p in self.players)

    @cached_property
    def min_weight(self) -> float:
        return min(p.w for p in self.players)

    def edge(self, edge_id) -> Edge:
        try:
            return self.edge_by_id[edge_id]
        except KeyError:
            raise KeyError(f"unknown edge id {edge_id!r}") from None

    def player(self, player_id) -> Player:
        try:
            return self.player_by_id[player_id]
        except KeyError:
            raise KeyError(f"unknown player id {player_id!r}") from None

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "tail": e.tail, "head": e.head, "a": e.a, "b": e.b}
                for e in self.edges
            ],
            "players": [
                {"id": p.id, "w": p.w, "source": p.source, "sink": p.sink}
                for p in self.players
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Instance":
        try:
            return cls(
                vertices=data["vertices"],
                edges=[
                    Edge(e["id"], e["tail"], e["head"], float(e["a"]), float(e["b"]))
                    for e in data["edges"]
                ],
                players=[
                    Player(p["id"], float(p["w"]), p["source"], p["sink"])
                    for p in data["players"]
                ],
            )
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed instance document: {exc!r}") from exc

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "Instance":
        return cls.from_json(Path(path).read_text())


@dataclass
class Profile:
    """One path (a tuple of edge ids) per player id."""

    paths: dict = field(default_factory=dict)

    def __post_init__(self):
        self.paths = {pid: tuple(path) for pid, path in self.paths.items()}

    def __getitem__(self, player_id) -> tuple:
        return self.paths[player_id]

    def copy(self) -> "Profile":
        return Profile(dict(self.paths))

    def with_path(self, player_id, path) -> "Profile":
        paths = dict(self.paths)
        paths[player_id] = tuple(path)
        return Profile(paths)

    def key(self) -> tuple:
        """Hashable canonical form, ordered by player id."""
        return tuple(sorted(self.paths.items(), key=lambda kv: id_key(kv[0])))

    def to_dict(self) -> dict:
        return {"paths": {str(pid): list(path) for pid, path in self.paths.items()}}

    @classmethod
    def from_dict(cls, data: Mapping, instance: Instance | None = None) -> "Profile":
        """Parse ``{"paths": {player_id: [edge ids]}}``.

        JSON object keys are always strings, so when ``instance`` is given the
        keys are mapped back onto the instance's player ids.
        """
        raw = data["paths"]
        if instance is None:
            return cls(dict(raw))
        by_str = {str(p.id): p.id for p in instance.players}
        paths = {}
        for key, path in raw.items():
            if key not in by_str:
                raise ProfileError(f"unknown player id {key!r}", [key])
            paths[by_str[key]] = path
        return cls(paths)


@dataclass(frozen=True)
class LoadMap:
    """Total weight and user set per edge id (every edge of the instance)."""

    weight: Mapping
    users: Mapping

    def __getitem__(self, edge_id) -> float:
        return self.weight[edge_id]


# ---------------------------------------------------------------------------
# validation


def _reachable(instance: Instance, source) -> set:
    seen = {source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for e in instance.out_edges.get(v, ()):
            if e.head not in seen:
                seen.add(e.head)
                queue.append(e.head)
    return seen


def validate_instance(instance: Instance) -> list:
    """Return a list of human-readable invariant violations (empty when valid)."""
    violations = []
    vertex_set = set(instance.vertices)
    if len(vertex_set) != len(instance.vertices):
        violations.append("duplicate vertex identifiers")
    seen_edges = set()
    for e in instance.edges:
        if e.id in seen_edges:
            violations.append(f"edge {e.id!r}: duplicate edge id")
        seen_edges.add(e.id)
        for end in (e.tail, e.head):
            if end not in vertex_set:
                violations.append(f"edge {e.id!r}: undeclared endpoint {end!r}")
        if e.tail == e.head:
            violations.append(f"edge {e.id!r}: self-loop")
        if not (e.a > 0 and math.isfinite(e.a)):
            violations.append(f"edge {e.id!r}: nonpositive cost slope a={e.a!r}")
        if not (e.b > 0 and math.isfinite(e.b)):
            violations.append(f"edge {e.id!r}: nonpositive cost offset b={e.b!r}")
    if not instance.players:
        violations.append("no players")
    seen_players = set()
    for p in instance.players:
        if p.id in seen_players:
            violations.append(f"player {p.id!r}: duplicate player id")
        seen_players.add(p.id)
        if not (p.w > 0 and math.isfinite(p.w)):
            violations.append(f"player {p.id!r}: nonpositive weight w={p.w!r}")
        bad_end = False
        for end in (p.source, p.sink):
            if end not in vertex_set:
                violations.append(f"player {p.id!r}: undeclared vertex {end!r}")
                bad_end = True
        if p.source == p.sink:
            violations.append(f"player {p.id!r}: source equals sink")
        elif not bad_end and p.sink not in _reachable(instance, p.source):
            violations.append(
                f"player {p.id!r}: no path from {p.source!r} to {p.sink!r}"
            )
    return violations


def check_instance(instance: Instance) -> Instance:
    violations = validate_instance(instance)
    if violations:
        raise InstanceError("invalid instance: " + "; ".join(violations), violations)
    return instance


def profile_violations(instance: Instance, profile: Profile) -> list:
    violations = []
    for p in instance.players:
        if p.id not in profile.paths:
            violations.append(f"player {p.id!r}: no path assigned")
            continue
        path = profile.paths[p.id]
        if not path:
            violations.append(f"player {p.id!r}: empty path")
            continue
        at = p.source
        visited = {at}
        for eid in path:
            e = instance.edge_by_id.get(eid)
            if e is None:
                violations.append(f"player {p.id!r}: unknown edge {eid!r}")
                break
            if e.tail != at:
                violations.append(f"player {p.id!r}: edge {eid!r} does not continue the path")
                break
            at = e.head
            if at in visited:
                violations.append(f"player {p.id!r}: vertex {at!r} repeated")
                break
            visited.add(at)
        else:
            if at != p.sink:
                violations.append(f"player {p.id!r}: path ends at {at!r}, not sink {p.sink!r}")
    for pid in profile.paths:
        if pid not in instance.player_by_id:
            violations.append(f"player {pid!r}: not in instance")
    return violations


def check_profile(instance: Instance, profile: Profile) -> Profile:
    violations = profile_violations(instance, profile)
    if violations:
        raise ProfileError("invalid profile: " + "; ".join(violations), violations)
    return profile


# ---------------------------------------------------------------------------
# costs


def edge_cost(instance: Instance, edge_id, load: float) -> float:
    if load < 0:
        raise DomainError(f"negative load {load!r}")
    return instance.edge(edge_id).cost(load)


def compute_loads(instance: Instance, profile: Profile, validate: bool = True) -> LoadMap:
    if validate:
        check_profile(instance, profile)
    weight = {e.id: 0.0 for e in instance.edges}
    users = {e.id: set() for e in instance.edges}
    for p in instance.players:
        for eid in profile.paths[p.id]:
            weight[eid] += p.w
            users[eid].add(p.id)
    return LoadMap(weight, {eid: frozenset(u) for eid, u in users.items()})


def cost_share(instance: Instance, loads: LoadMap, player_id, edge_id) -> float:
    """Share ``c_e(w_e) * w_i / w_e`` paid by ``player_id`` on ``edge_id``."""
    if player_id not in loads.users[edge_id]:
        raise DomainError(f"player {player_id!r} does not use edge {edge_id!r}")
    w_e = loads.weight[edge_id]
    w_i = instance.player(player_id).w
    return instance.edge(edge_id).cost(w_e) * w_i / w_e


def player_cost(instance: Instance, profile: Profile, player_id, loads: LoadMap | None = None) -> float:
    player = instance.player(player_id)
    if loads is None:
        loads = compute_loads(instance, profile)
    return math.fsum(
        cost_share(instance, loads, player.id, eid) for eid in profile.paths[player.id]
    )


def social_cost(instance: Instance, profile: Profile, loads: LoadMap | None = None) -> float:
    if loads is None:
        loads = compute_loads(instance, profile)
    return math.fsum(
        e.cost(loads.weight[e.id]) for e in instance.edges if loads.users[e.id]
    )


def potential(instance: Instance, profile: Profile, loads: LoadMap | None = None) -> float:
    """Approximate potential ``sum_e c_e(w_e) * log2(1 + w_e)``."""
    if loads is None:
        loads = compute_loads(instance, profile)
    return math.fsum(
        e.cost(loads.weight[e.id]) * math.log2(1.0 + loads.weight[e.id])
        for e in instance.edges
    )


def is_normalized(instance: Instance, tol: float = NORMALIZATION_TOL) -> bool:
    return bool(instance.players) and abs(instance.min_weight - 1.0) <= tol


def alpha_bound(instance: Instance) -> float:
    """``2 * log2(1 + W + w_max)``, the factor for which an APNE always exists.

    Warns with :class:`NormalizationWarning` when the smallest weight is not 1.
    """
    if not instance.players:
        raise DomainError("alpha_bound needs at least one player")
    if not is_normalized(instance):
        warnings.warn(
            f"min player weight is {instance.min_weight!r}, not 1",
            NormalizationWarning,
            stacklevel=2,
        )
    return 2.0 * math.log2(1.0 + instance.total_weight + instance.max_weight)


def require_bounds_applicable(instance: Instance) -> None:
    if instance.n < 2:
        raise BoundsNotApplicableError(f"bounds need n >= 2 players, got {instance.n}")
    if not is_normalized(instance):
        raise BoundsNotApplicableError(
            f"bounds need min player weight 1, got {instance.min_weight!r}"
        )


def extremal_edge_costs(instance: Instance) -> tuple:
    """``(c_max, c_min)`` with ``c_max = max_e(a_e W + b_e)``, ``c_min = min_e(a_e + b_e)``."""
    W = instance.total_weight
    c_max = max(e.a * W + e.b for e in instance.edges)
    c_min = min(e.a + e.b for e in instance.edges)
    return c_max, c_min


def potential_bounds(instance: Instance) -> tuple:
    """Profile-independent ``(lower, upper)`` bounds on the potential."""
    require_bounds_applicable(instance)
    c_max, c_min = extremal_edge_costs(instance)
    log_w = math.log2(1.0 + instance.total_weight)
    return c_min * log_w, instance.m * c_max * log_w


def joining_cost(edge: Edge, other_load: float, w: float) -> float:
    """Share paid by a player of weight ``w`` joining ``edge`` already carrying ``other_load``."""
    total = other_load + w
    return edge.cost(total) * w / total
