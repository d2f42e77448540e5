"""phi-smooth coefficient models, random instance generation and Monte Carlo.

A phi-smooth random variable lives on [0, 1] with density at most ``phi``.
Two families are provided: a uniform window of width ``1/phi`` and a
piecewise-constant density table capped at ``phi``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, NoPathError, SpecError
from .game import Edge, Instance, Player, _reachable, check_instance

COEFFICIENT_FLOOR = 1e-9
MASS_TOL = 1e-6
DEFAULT_RETRIES = 100


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for the stream ``(seed, *stream)``.

    Distinct stream tuples give independent streams.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class DistributionSpec:
    kind: str = "uniform-window"
    phi: float = 1.0
    offset: float = 0.0
    density: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "density", tuple(float(d) for d in self.density))
        self.validate()

    def validate(self) -> None:
        if not self.phi >= 1:
            raise SpecError(f"phi must be >= 1, got {self.phi!r}")
        if self.kind == "uniform-window":
            if not -1e-12 <= self.offset <= 1.0 - 1.0 / self.phi + 1e-12:
                raise SpecError(f"window offset {self.offset!r} outside [0, 1 - 1/phi]")
        elif self.kind == "capped-density":
            d = np.asarray(self.density)
            if d.size == 0:
                raise SpecError("capped-density needs a nonempty density table")
            if (d < 0).any():
                raise SpecError("density table has negative entries")
            if d.max() > self.phi * (1 + 1e-12):
                raise SpecError(f"density {d.max()!r} exceeds phi={self.phi!r}")
            mass = d.sum() / d.size
            if abs(mass - 1.0) > MASS_TOL:
                raise SpecError(f"density table integrates to {mass!r}, not 1")
        else:
            raise SpecError(f"unknown distribution kind {self.kind!r}")

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "uniform-window":
            return self.offset + rng.random(size) / self.phi
        return self._rejection(rng, size)

    def _rejection(self, rng, size):
        d = np.asarray(self.density)
        k = d.size
        shape = () if size is None else size
        want = int(np.prod(shape))
        out = np.empty(0)
        # acceptance probability is 1/phi, so each round keeps about that fraction
        while out.size < want:
            batch = max(16, int(1.2 * (want - out.size) * self.phi))
            x = rng.random(batch)
            u = rng.random(batch)
            bins = np.minimum((x * k).astype(int), k - 1)
            out = np.concatenate([out, x[u * self.phi < d[bins]]])
        out = out[:want]
        return float(out[0]) if size is None else out.reshape(shape)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "uniform-window":
            return np.clip((t - self.offset) * self.phi, 0.0, 1.0)
        d = np.asarray(self.density)
        k = d.size
        edges = np.concatenate([[0.0], np.cumsum(d) / k])
        s = np.clip(t, 0.0, 1.0) * k
        i = np.minimum(s.astype(int), k - 1)
        return np.clip(edges[i] + (s - i) * d[i] / k, 0.0, 1.0)

    def mean(self) -> float:
        if self.kind == "uniform-window":
            return self.offset + 0.5 / self.phi
        d = np.asarray(self.density)
        mids = (np.arange(d.size) + 0.5) / d.size
        return float(np.sum(d * mids) / d.size)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "phi": self.phi}
        if self.kind == "uniform-window":
            out["offset"] = self.offset
        else:
            out["density"] = list(self.density)
        return out

    @classmethod
    def from_dict(cls, data) -> "DistributionSpec":
        return cls(
            kind=data.get("kind", "uniform-window"),
            phi=float(data.get("phi", 1.0)),
            offset=float(data.get("offset", 0.0)),
            density=tuple(data.get("density", ())),
        )


def sample_phi_smooth(spec: DistributionSpec, rng: np.random.Generator) -> float:
    return float(spec.sample(rng))


def draw_coefficients(spec: DistributionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Cost coefficients, floored so every ``a_e`` and ``b_e`` is strictly positive."""
    return np.maximum(spec.sample(rng, size), COEFFICIENT_FLOOR)


# ---------------------------------------------------------------------------
# topologies


TOPOLOGY_KINDS = ("parallel-links", "layered-dag", "grid", "random-digraph")
PLACEMENTS = ("common", "random")


@dataclass(frozen=True)
class TopologySpec:
    """Graph family, its size parameters and the player template.

    ``params`` per kind: parallel-links ``k``; layered-dag ``layers``,
    ``width``; grid ``rows``, ``cols``; random-digraph ``vertices``,
    ``edge_prob``. ``weights`` defaults to all ones.
    """

    kind: str
    params: dict = field(default_factory=dict)
    n_players: int = 2
    weights: tuple = ()
    placement: str = "common"

    def __post_init__(self):
        if self.kind not in TOPOLOGY_KINDS:
            raise SpecError(f"unknown topology kind {self.kind!r}")
        if self.placement not in PLACEMENTS:
            raise SpecError(f"unknown placement {self.placement!r}")
        if self.n_players < 1:
            raise SpecError("need at least one player")
        weights = tuple(float(w) for w in self.weights) or (1.0,) * self.n_players
        if len(weights) != self.n_players:
            raise SpecError(f"{len(weights)} weights for {self.n_players} players")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "params", dict(self.params))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weights"] = list(self.weights)
        return d

    @classmethod
    def from_dict(cls, data) -> "TopologySpec":
        return cls(
            kind=data["kind"],
            params=dict(data.get("params", {})),
            n_players=int(data.get("n_players", 2)),
            weights=tuple(data.get("weights", ())),
            placement=data.get("placement", "common"),
        )


def _build_graph(topology: TopologySpec, rng: np.random.Generator) -> tuple:
    """Return ``(vertices, arcs, default_source, default_sink)``."""
    p = topology.params
    kind = topology.kind
    if kind == "parallel-links":
        k = int(p.get("k", 3))
        return [0, 1], [(0, 1)] * k, 0, 1
    if kind == "layered-dag":
        layers, width = int(p.get("layers", 3)), int(p.get("width", 3))
        source, sink = 0, layers * width + 1
        layer = [[1 + L * width + j for j in range(width)] for L in range(layers)]
        arcs = [(source, v) for v in layer[0]]
        for L in range(layers - 1):
            arcs += [(u, v) for u in layer[L] for v in layer[L + 1]]
        arcs += [(u, sink) for u in layer[-1]]
        return list(range(sink + 1)), arcs, source, sink
    if kind == "grid":
        rows, cols = int(p.get("rows", 3)), int(p.get("cols", 3))
        arcs = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    arcs.append((v, v + 1))
                if r + 1 < rows:
                    arcs.append((v, v + cols))
        return list(range(rows * cols)), arcs, 0, rows * cols - 1
    nv = int(p.get("vertices", 6))
    prob = float(p.get("edge_prob", 0.3))
    arcs = [(u, v) for u in range(nv) for v in range(nv) if u != v and rng.random() < prob]
    return list(range(nv)), arcs, 0, nv - 1


def _place_players(topology, vertices, source, sink, instance_stub, rng) -> list:
    players = []
    for i, w in enumerate(topology.weights):
        if topology.placement == "common":
            s, t = source, sink
        else:
            reach = {v: sorted(_reachable(instance_stub, v) - {v}) for v in vertices}
            starts = [v for v in vertices if reach[v]]
            if not starts:
                raise NoPathError("no vertex pair is connected")
            s = starts[int(rng.integers(len(starts)))]
            t = reach[s][int(rng.integers(len(reach[s])))]
        players.append(Player(i, float(w), s, t))
    return players


def gen_instance(
    topology: TopologySpec,
    dist: DistributionSpec,
    rng_seed: int,
    stream: tuple = (),
    retries: int = DEFAULT_RETRIES,
) -> Instance:
    """Random instance with every ``a_e`` and ``b_e`` drawn independently from ``dist``.

    Deterministic in ``(rng_seed, stream)``. Random digraphs whose player
    sinks are unreachable are redrawn up to ``retries`` times.
    """
    rng = make_rng(rng_seed, *stream)
    for _ in range(retries):
        vertices, arcs, source, sink = _build_graph(topology, rng)
        a = draw_coefficients(dist, rng, len(arcs))
        b = draw_coefficients(dist, rng, len(arcs))
        edges = [Edge(j, u, v, float(a[j]), float(b[j])) for j, (u, v) in enumerate(arcs)]
        stub = Instance(vertices, edges, ())
        try:
            players = _place_players(topology, vertices, source, sink, stub, rng)
        except NoPathError:
            continue
        instance = Instance(vertices, edges, players)
        if all(p.sink in _reachable(instance, p.source) for p in players):
            return check_instance(instance)
    raise NoPathError(f"no connected {topology.kind} instance after {retries} attempts")


# ---------------------------------------------------------------------------
# sums of uniforms and the smoothed expectation bound


def uniform_sum_cdf(t, A: float):
    """CDF of ``X + Y`` for independent ``X, Y ~ U[0, A]`` (triangular law)."""
    if not A > 0:
        raise DomainError(f"A must be positive, got {A!r}")
    t = np.clip(np.asarray(t, dtype=float), 0.0, 2.0 * A)
    low = t * t / (2.0 * A * A)
    high = 2.0 * t / A - t * t / (2.0 * A * A) - 1.0
    out = np.where(t < A, low, high)
    return float(out) if out.ndim == 0 else out


def expectation_bound(n: int, phi: float, alpha: float) -> float:
    """Right-hand side ``alpha * phi * (n^2 + 1) * ln(alpha * phi * n)``."""
    return alpha * phi * (n * n + 1) * math.log(alpha * phi * n)


def capped_g(x, alpha: float, n: int, lam: int):
    """``min((alpha/x) ln(alpha/x), n**lam)`` with the first branch clamped at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = alpha / x
        first = np.where(r > 1.0, r * np.log(r), 0.0)
    first = np.where(x > 0, first, np.inf)
    return np.minimum(first, float(n) ** lam)


@dataclass(frozen=True)
class McReport:
    n: int
    phi: float
    alpha: float
    lam: int
    trials: int
    estimate: float
    stderr: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.estimate / self.bound

    def within_bound(self, sigmas: float = 3.0) -> bool:
        return self.estimate <= self.bound + sigmas * self.stderr

    def row(self) -> dict:
        return {
            "n": self.n, "phi": self.phi, "alpha": self.alpha, "lambda": self.lam,
            "trials": self.trials, "estimate": self.estimate, "stderr": self.stderr,
            "bound": self.bound, "ratio": self.ratio,
        }

    def to_json(self) -> str:
        return json.dumps(self.row(), indent=2)


MC_COLUMNS = ("n", "phi", "alpha", "lambda", "trials", "estimate", "stderr", "bound", "ratio")


def lemma2_mc(
    n: int,
    phi: float,
    alpha: float,
    lam: int,
    trials: int = 10**5,
    rng_seed: int = 0,
    spec: DistributionSpec | None = None,
    block: int = 10**5,
) -> McReport:
    """Monte Carlo estimate of ``E[g(min_i (X_i + Y_i))]`` for phi-smooth ``X_i, Y_i``.

    ``spec`` defaults to the uniform window ``[0, 1/phi]``. Trials are drawn in
    blocks; sums and sums of squares are reduced across blocks.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if phi < 1 or alpha < 1:
        raise DomainError("phi and alpha must be >= 1")
    if int(lam) != lam or lam < 1:
        raise DomainError("lambda must be a positive integer")
    if trials < 10**4:
        raise DomainError("need at least 10^4 trials")
    if spec is None:
        spec = DistributionSpec("uniform-window", phi=phi)
    rng = make_rng(rng_seed, n, int(round(phi * 1000)), int(round(alpha * 1000)), int(lam))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        size = min(block, trials - done)
        x = spec.sample(rng, (size, n))
        y = spec.sample(rng, (size, n))
        g = capped_g((x + y).min(axis=1), alpha, n, int(lam))
        total += float(g.sum())
        total_sq += float(np.square(g).sum())
        done += size
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0) * trials / (trials - 1)
    return McReport(
        n=n, phi=float(phi), alpha=float(alpha), lam=int(lam), trials=trials,
        estimate=mean, stderr=math.sqrt(var / trials), bound=expectation_bound(n, phi, alpha),
    )
