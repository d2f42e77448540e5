"""Exhaustive ground truth for small instances.

Everything here enumerates: all simple paths per player, all profiles, and
for each profile every alternative path of every player. Inputs beyond the
caps are refused with :class:`TooLargeError` rather than sampled.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .dynamics import best_response
from .errors import OracleDisagreementError, TooLargeError
from .game import Instance, Profile, compute_loads, player_cost, potential

PATH_CAP = 10**4
PROFILE_CAP = 10**6
AGREEMENT_RTOL = 1e-12
PHI_TIE_RTOL = 1e-12


def enumerate_simple_paths(instance: Instance, source, sink, cap: int = PATH_CAP) -> list:
    """All simple directed ``source -> sink`` paths as edge-id tuples.

    Depth-first with out-edges in edge-id order, so the output is sorted
    lexicographically by edge id.
    """
    paths = []
    on_path = {source}
    stack = []

    def visit(v):
        if v == sink:
            paths.append(tuple(stack))
            if len(paths) > cap:
                raise TooLargeError(
                    f"more than {cap} simple paths from {source!r} to {sink!r}",
                    measured=len(paths), cap=cap,
                )
            return
        for e in instance.out_edges.get(v, ()):
            if e.head in on_path:
                continue
            on_path.add(e.head)
            stack.append(e.id)
            visit(e.head)
            stack.pop()
            on_path.discard(e.head)

    visit(source)
    return paths


@dataclass(frozen=True)
class PathCatalog:
    paths: dict  # player id -> tuple of paths

    @property
    def counts(self) -> dict:
        return {pid: len(ps) for pid, ps in self.paths.items()}

    @property
    def profile_count(self) -> int:
        return math.prod(self.counts.values())


def path_catalog(instance: Instance, cap: int = PATH_CAP) -> PathCatalog:
    return PathCatalog({
        p.id: tuple(enumerate_simple_paths(instance, p.source, p.sink, cap))
        for p in instance.players
    })


def enumerate_profiles(instance: Instance, cap: int = PROFILE_CAP, catalog: PathCatalog | None = None):
    """Iterate over the Cartesian product of the players' path catalogs."""
    if catalog is None:
        catalog = path_catalog(instance)
    total = catalog.profile_count
    if total > cap:
        raise TooLargeError(f"{total} profiles exceed the cap of {cap}", measured=total, cap=cap)
    ids = [p.id for p in instance.players]
    for combo in itertools.product(*(catalog.paths[pid] for pid in ids)):
        yield Profile(dict(zip(ids, combo)))


def _exact_ratio(instance: Instance, profile: Profile, catalog: PathCatalog) -> Fraction:
    """max_i c_i(P) / min_{P'_i} c_i(P'_i, P_-i) in rational arithmetic.

    Reals enter as the rationals their shortest decimal representation denotes.
    """
    def q(x):
        return Fraction(repr(float(x)))

    w = {p.id: q(p.w) for p in instance.players}
    a = {e.id: q(e.a) for e in instance.edges}
    b = {e.id: q(e.b) for e in instance.edges}
    load = {e.id: Fraction(0) for e in instance.edges}
    for p in instance.players:
        for eid in profile.paths[p.id]:
            load[eid] += w[p.id]
    worst = Fraction(0)
    for p in instance.players:
        wi = w[p.id]
        current = sum((a[e] * load[e] + b[e]) * wi / load[e] for e in profile.paths[p.id])
        mine = set(profile.paths[p.id])
        best = None
        for path in catalog.paths[p.id]:
            c = Fraction(0)
            for e in path:
                other = load[e] - wi if e in mine else load[e]
                c += (a[e] * (other + wi) + b[e]) * wi / (other + wi)
            if best is None or c < best:
                best = c
        worst = max(worst, current / best)
    return worst


@dataclass(frozen=True)
class OracleReport:
    profile_count: int
    exists_pne: bool
    exact_min_alpha: float
    min_alpha_profile: Profile
    phi_minimizer: Profile
    phi_min: float
    phi_minimizer_alpha: float
    certified: bool = False

    def to_dict(self) -> dict:
        return {
            "profile_count": self.profile_count,
            "exists_pne": self.exists_pne,
            "exact_min_alpha": self.exact_min_alpha,
            "min_alpha_profile": self.min_alpha_profile.to_dict(),
            "phi_minimizer": self.phi_minimizer.to_dict(),
            "phi_min": self.phi_min,
            "phi_minimizer_alpha": self.phi_minimizer_alpha,
            "certified": self.certified,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _deviation_costs(instance: Instance, profile: Profile, player_id, paths) -> list:
    """Cost of ``player_id`` after switching to each of ``paths``, opponents fixed."""
    w = instance.player(player_id).w
    others = {e.id: 0.0 for e in instance.edges}
    for p in instance.players:
        if p.id != player_id:
            for eid in profile.paths[p.id]:
                others[eid] += p.w
    costs = []
    for path in paths:
        shares = []
        for eid in path:
            e = instance.edge_by_id[eid]
            load = others[eid] + w
            shares.append((e.a * load + e.b) * w / load)
        costs.append(math.fsum(shares))
    return costs


def profile_alpha(instance: Instance, profile: Profile, catalog: PathCatalog) -> float:
    """Tightest approximation factor of ``profile``, with every best response
    taken over the full path catalog and checked against the shortest-path
    search."""
    loads = compute_loads(instance, profile, validate=False)
    worst = 1.0
    for p in instance.players:
        current = player_cost(instance, profile, p.id, loads)
        best = min(_deviation_costs(instance, profile, p.id, catalog.paths[p.id]))
        _, searched = best_response(instance, profile, p.id)
        if abs(searched - best) > AGREEMENT_RTOL * best:
            raise OracleDisagreementError(
                f"player {p.id!r}: shortest-path best response {searched!r} "
                f"!= enumeration minimum {best!r}"
            )
        worst = max(worst, current / best)
    return worst


def exact_min_alpha(
    instance: Instance,
    cap: int = PROFILE_CAP,
    path_cap: int = PATH_CAP,
    certify: bool = False,
) -> OracleReport:
    """Enumerate every profile and report the best achievable approximation factor.

    With ``certify=True`` the factors are recomputed in exact rational
    arithmetic, so ``exists_pne`` is decided without rounding.
    """
    catalog = path_catalog(instance, path_cap)
    count = 0
    best_alpha = math.inf
    best_alpha_profile = None
    best_exact = None
    phi_min = math.inf
    phi_profile = None
    for profile in enumerate_profiles(instance, cap, catalog):
        count += 1
        if certify:
            exact = _exact_ratio(instance, profile, catalog)
            alpha = float(exact)
            if best_exact is None or exact < best_exact:
                best_exact = exact
                best_alpha, best_alpha_profile = alpha, profile
        else:
            alpha = profile_alpha(instance, profile, catalog)
            if alpha < best_alpha:
                best_alpha, best_alpha_profile = alpha, profile
        phi = potential(instance, profile)
        if phi < phi_min * (1.0 - PHI_TIE_RTOL):
            phi_min, phi_profile = phi, profile

    if certify:
        exists = best_exact == 1
        phi_alpha = float(_exact_ratio(instance, phi_profile, catalog))
    else:
        exists = best_alpha <= 1.0 + 1e-12
        phi_alpha = profile_alpha(instance, phi_profile, catalog)
    return OracleReport(
        profile_count=count,
        exists_pne=exists,
        exact_min_alpha=best_alpha,
        min_alpha_profile=best_alpha_profile,
        phi_minimizer=phi_profile,
        phi_min=phi_min,
        phi_minimizer_alpha=phi_alpha,
        certified=certify,
    )


def cross_check_best_response(instance: Instance, profile: Profile, player_id, cap: int = PATH_CAP) -> bool:
    """True iff the shortest-path best response cost matches the catalog minimum."""
    player = instance.player(player_id)
    paths = enumerate_simple_paths(instance, player.source, player.sink, cap)
    best = min(_deviation_costs(instance, profile, player_id, paths))
    _, searched = best_response(instance, profile, player_id)
    return abs(searched - best) <= AGREEMENT_RTOL * best
