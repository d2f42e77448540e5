"""Sweeps comparing observed dynamics lengths with the theoretical bounds."""
from __future__ import annotations

import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from ._fmt import write_csv
from .dynamics import (
    INIT_METHODS,
    SCHEDULES,
    empirical_alpha,
    epsilon_abrd,
    initial_profile,
    iteration_bound,
    verify_apne,
)
from .errors import GameError, SpecError
from .game import is_normalized
from .smoothed import DistributionSpec, TopologySpec, gen_instance

EXPERIMENT_COLUMNS = (
    "n", "m", "phi", "epsilon", "W", "seed", "T_observed",
    "analytic_bound", "profile_count_bound", "effective_bound", "terminated",
)

DEFAULT_TOPOLOGIES = (
    {"kind": "parallel-links", "params": {"k": 6}},
    {"kind": "layered-dag", "params": {"layers": 3, "width": 3}},
    {"kind": "grid", "params": {"rows": 4, "cols": 5}},
)


def scheme_weights(scheme: str, n: int) -> list:
    """``"ones"`` or ``"range:K"`` (weights cycle through 1..K)."""
    if scheme == "ones":
        return [1.0] * n
    if scheme.startswith("range:"):
        top = int(scheme.split(":", 1)[1])
        if top < 1:
            raise SpecError(f"bad weight scheme {scheme!r}")
        return [float(1 + i % top) for i in range(n)]
    raise SpecError(f"unknown weight scheme {scheme!r}")


@dataclass
class ExperimentConfig:
    topologies: list = field(default_factory=lambda: [dict(t) for t in DEFAULT_TOPOLOGIES])
    distribution: dict = field(default_factory=lambda: {"kind": "uniform-window"})
    phis: list = field(default_factory=lambda: [1.0, 2.0, 5.0])
    player_counts: list = field(default_factory=lambda: [2, 4, 6])
    weight_schemes: list = field(default_factory=lambda: ["ones"])
    epsilons: list = field(default_factory=lambda: [0.1, 0.5, 1.0])
    instances_per_cell: int = 100
    base_seed: int = 0
    schedule: str = "round-robin"
    init: str = "random"
    placement: str = "common"
    output_dir: str = "."

    def __post_init__(self):
        if self.instances_per_cell < 1:
            raise SpecError("instances_per_cell must be >= 1")
        if self.schedule not in SCHEDULES:
            raise SpecError(f"unknown schedule {self.schedule!r}")
        if self.init not in INIT_METHODS:
            raise SpecError(f"unknown init {self.init!r}")
        for name in ("topologies", "phis", "player_counts", "weight_schemes", "epsilons"):
            if not getattr(self, name):
                raise SpecError(f"empty grid axis {name!r}")

    @classmethod
    def from_dict(cls, data) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def cells(self) -> list:
        """Fully specified grid cells in deterministic order."""
        out = []
        for topo, n, scheme, phi, eps in product(
            self.topologies, self.player_counts, self.weight_schemes, self.phis, self.epsilons
        ):
            out.append({
                "topology": topo, "n": int(n), "weights": scheme,
                "phi": float(phi), "epsilon": float(eps),
            })
        return out


def run_seed(base_seed: int, cell: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, cell, index]).generate_state(1)[0])


def run_one(config: ExperimentConfig, cell: dict, cell_index: int, index: int) -> dict:
    seed = run_seed(config.base_seed, cell_index, index)
    topo = dict(cell["topology"])
    topo.setdefault("placement", config.placement)
    topo["n_players"] = cell["n"]
    topo["weights"] = scheme_weights(cell["weights"], cell["n"])
    dist = dict(config.distribution)
    dist["phi"] = cell["phi"]
    instance = gen_instance(TopologySpec.from_dict(topo), DistributionSpec.from_dict(dist), seed)
    start = initial_profile(instance, config.init, seed)
    log = epsilon_abrd(instance, start, cell["epsilon"], config.schedule, rng_seed=seed)
    record = {
        "n": instance.n, "m": instance.m, "phi": cell["phi"], "epsilon": cell["epsilon"],
        "W": instance.total_weight, "seed": seed, "T_observed": log.T,
        "analytic_bound": None, "profile_count_bound": None, "effective_bound": None,
        "terminated": log.terminated,
    }
    normalized = instance.n >= 2 and is_normalized(instance)
    if normalized:
        bound = iteration_bound(instance, cell["epsilon"])
        record.update(
            analytic_bound=bound.analytic_bound,
            profile_count_bound=bound.profile_count_bound,
            effective_bound=bound.effective_bound,
        )
        record["within_bound"] = bound.admits(log.T)
    ok, _ = verify_apne(instance, log.final_profile, log.factor)
    record["certified"] = ok
    record["empirical_alpha"] = empirical_alpha(instance, log.final_profile)
    record["factor"] = log.factor
    return record


def run_cell(config: ExperimentConfig, cell: dict, cell_index: int) -> dict:
    try:
        runs = [run_one(config, cell, cell_index, i) for i in range(config.instances_per_cell)]
    except GameError as exc:
        return {"cell": cell, "error": f"{type(exc).__name__}: {exc}", "runs": []}
    ts = [r["T_observed"] for r in runs]
    bounds = [r["effective_bound"] for r in runs if r["effective_bound"] is not None]
    return {
        "cell": cell,
        "error": None,
        "T_mean": statistics.fmean(ts),
        "T_median": statistics.median(ts),
        "T_max": max(ts),
        "bound_min": min(bounds) if bounds else None,
        "bound_median": statistics.median(bounds) if bounds else None,
        "terminated_fraction": sum(r["terminated"] for r in runs) / len(runs),
        "bound_violations": sum(1 for r in runs if r.get("within_bound") is False),
        "certification_failures": sum(1 for r in runs if r["terminated"] and not r["certified"]),
        "runs": runs,
    }


def _cell_job(args):
    return run_cell(*args)


@dataclass
class ExperimentReport:
    cells: list

    @property
    def runs(self) -> list:
        return [r for c in self.cells for r in c["runs"]]

    @property
    def failed_cells(self) -> list:
        return [c for c in self.cells if c["error"]]

    @property
    def violations(self) -> int:
        return sum(c.get("bound_violations", 0) + c.get("certification_failures", 0) for c in self.cells)

    def to_dict(self) -> dict:
        return {"cells": self.cells, "violations": self.violations}

    def write(self, out_dir) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "csv": out / "experiment.csv",
            "json": out / "experiment_report.json",
            "gnuplot": out / "experiment.gp",
        }
        with open(paths["csv"], "w", newline="") as fh:
            write_csv(fh, EXPERIMENT_COLUMNS, self.runs)
        paths["json"].write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        paths["gnuplot"].write_text(GNUPLOT_SCRIPT)
        return paths


GNUPLOT_SCRIPT = """\
# observed steps against the per-run effective bound
# columns: n,m,phi,epsilon,W,seed,T_observed,analytic_bound,profile_count_bound,effective_bound,terminated
set datafile separator ","
set key autotitle columnhead
set logscale y
set xlabel "effective bound"
set ylabel "observed steps"
set logscale x
plot "experiment.csv" using 10:($7+1) with points title "T+1", x title "T = bound"
"""


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run every cell; a failing cell is recorded with its error and the sweep continues."""
    jobs = [(config, cell, i) for i, cell in enumerate(config.cells())]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            cells = list(pool.map(_cell_job, jobs))
    else:
        cells = [_cell_job(j) for j in jobs]
    return ExperimentReport(cells)
