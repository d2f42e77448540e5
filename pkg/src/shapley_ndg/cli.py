"""Command-line front end: ``gen``, ``run``, ``exact``, ``experiment``, ``mc``.

Exit codes: 0 success, 3 validation error, 4 enumeration too large,
5 a checked property failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._fmt import write_csv
from .dynamics import INIT_METHODS, SCHEDULES, epsilon_abrd, initial_profile, run_summary
from .errors import (
    BoundsNotApplicableError,
    DomainError,
    NoPathError,
    TooLargeError,
    ValidationError,
)
from .experiment import ExperimentConfig, run_experiment
from .game import Instance, check_instance
from .oracle import PATH_CAP, PROFILE_CAP, exact_min_alpha
from .smoothed import (
    MC_COLUMNS,
    PLACEMENTS,
    TOPOLOGY_KINDS,
    DistributionSpec,
    TopologySpec,
    gen_instance,
    lemma2_mc,
)

EXIT_OK = 0
EXIT_VALIDATION = 3
EXIT_TOO_LARGE = 4
EXIT_ASSERTION = 5


class CheckFailed(Exception):
    pass


def _dump(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def cmd_gen(args) -> int:
    params = {}
    for key in ("k", "layers", "width", "rows", "cols", "vertices", "edge_prob"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    topology = TopologySpec(
        kind=args.kind, params=params, n_players=args.n,
        weights=tuple(args.weights or ()), placement=args.placement,
    )
    dist = DistributionSpec(kind="uniform-window", phi=args.phi, offset=args.offset)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"seed {args.seed}")
    for i in range(args.count):
        stream = (i,) if args.count > 1 else ()
        instance = gen_instance(topology, dist, args.seed, stream)
        suffix = f"_{i}" if args.count > 1 else ""
        path = out / f"instance_{args.kind}_s{args.seed}{suffix}.json"
        instance.save(path)
        print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    instance = check_instance(Instance.load(args.instance))
    start = initial_profile(instance, args.init, args.seed)
    log = epsilon_abrd(instance, start, args.epsilon, args.schedule, rng_seed=args.seed)
    summary = run_summary(instance, log)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.instance).stem
    with open(out / f"{stem}_trajectory.csv", "w", newline="") as fh:
        log.write_csv(fh)
    _dump(out / f"{stem}_summary.json", summary)
    if summary["bound_report"] is not None:
        _dump(out / f"{stem}_bound.json", summary["bound_report"])
    print(json.dumps({k: summary[k] for k in ("alpha", "epsilon", "T", "terminated", "empirical_alpha", "verify_apne", "effective_bound")}))
    if log.terminated:
        if not summary["verify_apne"]:
            raise CheckFailed("final profile failed verification")
        if summary["empirical_alpha"] > log.factor + args.tolerance:
            raise CheckFailed("empirical alpha exceeds (1+eps)*alpha")
    if summary["effective_bound"] is not None and log.T > summary["effective_bound"]:
        raise CheckFailed("step count exceeds the iteration bound")
    return EXIT_OK


def cmd_exact(args) -> int:
    instance = check_instance(Instance.load(args.instance))
    report = exact_min_alpha(instance, cap=args.cap, path_cap=args.path_cap, certify=args.certify)
    text = report.to_json()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{Path(args.instance).stem}_oracle.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = ExperimentConfig.load(args.config)
    out_dir = args.out_dir if args.out_dir is not None else config.output_dir
    report = run_experiment(config, workers=args.workers)
    paths = report.write(out_dir)
    for p in paths.values():
        print(p)
    for cell in report.failed_cells:
        print(f"cell failed: {cell['cell']}: {cell['error']}", file=sys.stderr)
    if report.violations:
        raise CheckFailed(f"{report.violations} bound or certification violations")
    return EXIT_OK


def cmd_mc(args) -> int:
    reports = [
        lemma2_mc(n, phi, alpha, lam, args.trials, args.seed)
        for n in args.n for phi in args.phi for alpha in args.alpha for lam in args.lam
    ]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "mc.csv", "w", newline="") as fh:
        write_csv(fh, MC_COLUMNS, [r.row() for r in reports])
    _dump(out / "mc.json", [r.row() for r in reports])
    write_csv(sys.stdout, MC_COLUMNS, [r.row() for r in reports])
    bad = [r for r in reports if not r.within_bound(3.0)]
    if bad:
        raise CheckFailed(f"{len(bad)} grid points exceed the bound")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapley-ndg", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=None)
    parser.add_argument("--tolerance", type=float, default=1e-9)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate random instance files")
    g.add_argument("kind", choices=TOPOLOGY_KINDS)
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--weights", type=float, nargs="+")
    g.add_argument("--placement", choices=PLACEMENTS, default="common")
    g.add_argument("--phi", type=float, default=1.0)
    g.add_argument("--offset", type=float, default=0.0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--k", type=int)
    g.add_argument("--layers", type=int)
    g.add_argument("--width", type=int)
    g.add_argument("--rows", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--vertices", type=int)
    g.add_argument("--edge-prob", dest="edge_prob", type=float)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run epsilon-approximate best-response dynamics")
    r.add_argument("instance")
    r.add_argument("--epsilon", type=float, default=0.1)
    r.add_argument("--schedule", choices=SCHEDULES, default="round-robin")
    r.add_argument("--init", choices=INIT_METHODS, default="solo")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("exact", help="exhaustive oracle report")
    e.add_argument("instance")
    e.add_argument("--cap", type=int, default=PROFILE_CAP)
    e.add_argument("--path-cap", dest="path_cap", type=int, default=PATH_CAP)
    e.add_argument("--certify", action="store_true", help="exact rational arithmetic")
    e.set_defaults(func=cmd_exact)

    x = sub.add_parser("experiment", help="sweep a config grid")
    x.add_argument("config")
    x.add_argument("--workers", type=int, default=1)
    x.set_defaults(func=cmd_experiment)

    m = sub.add_parser("mc", help="Monte Carlo check of the smoothed expectation bound")
    m.add_argument("--n", type=int, nargs="+", default=[2, 5, 10])
    m.add_argument("--phi", type=float, nargs="+", default=[1.0, 2.0, 5.0])
    m.add_argument("--alpha", type=float, nargs="+", default=[1.0, 2.0])
    m.add_argument("--lam", type=int, nargs="+", default=[2, 3])
    m.add_argument("--trials", type=int, default=10**5)
    m.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out_dir is None and args.command != "experiment":
        args.out_dir = "."
    try:
        return args.func(args)
    except TooLargeError as exc:
        print(f"error: {exc} (measured {exc.measured}, cap {exc.cap})", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (ValidationError, DomainError, NoPathError, BoundsNotApplicableError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
