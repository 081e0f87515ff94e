"""Command-line front door: gen, check, sample, fit, experiment.

Exit codes: ``check`` returns 0 (strongly compatible), 1 (compatible only),
2 (incompatible), 3 (parse error).  Other commands return 0 on success and
nonzero on failure.  MGM_SEED provides a fallback seed when --seed is not
given.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import combine, fit, harness, modelio
from .compat import Verdict, check_compatibility
from .core import DomainError, NodeType
from .gibbs import GibbsConfig, run_chain
from .simgen import GenerationError, SimGraphConfig, generate_model


def _default_seed(value) -> int:
    if value is not None:
        return int(value)
    return int(os.environ.get("MGM_SEED", "0"))


def _type_pair(tags: str) -> tuple[NodeType, NodeType]:
    if len(tags) != 2:
        raise argparse.ArgumentTypeError("--types expects two characters, e.g. gb or pb")
    return NodeType.from_tag(tags[0]), NodeType.from_tag(tags[1])


def cmd_gen(args) -> int:
    try:
        config = SimGraphConfig(
            p=args.p,
            type_pair=args.types,
            a=args.a,
            b=args.b,
            seed=_default_seed(args.seed),
            alpha1_first_half=args.alpha1_first,
            alpha1_second_half=args.alpha1_second,
            alpha1_second_type=args.alpha1_second_type,
        )
        model = generate_model(config)
    except (ValueError, GenerationError) as exc:
        print(f"gen failed: {exc}", file=sys.stderr)
        return 1
    modelio.write_model(model, args.out)
    print(f"wrote {args.out}: p={model.p}, edges={len(combine.EdgeSet.from_theta(model.theta))}")
    return 0


def cmd_check(args) -> int:
    try:
        model = modelio.read_model(args.model)
    except (OSError, modelio.ParseError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    report = check_compatibility(model)
    print(f"verdict: {report.verdict.value}")
    for v in report.violations:
        marker = "blocks compatibility" if v.blocks_compatibility else "blocks strong compatibility"
        print(f"  [{v.rule}] nodes {v.nodes}: {v.message} ({marker})")
    return {
        Verdict.STRONGLY_COMPATIBLE: 0,
        Verdict.COMPATIBLE_ONLY: 1,
        Verdict.INCOMPATIBLE: 2,
    }[report.verdict]


def cmd_sample(args) -> int:
    try:
        model = modelio.read_model(args.model)
    except (OSError, modelio.ParseError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    try:
        config = GibbsConfig(
            n_samples=args.n,
            seed=_default_seed(args.seed),
            burn_in=args.burn_in,
            thin=args.thin,
        )
        data = run_chain(model, config, require_strong_compat=not args.force)
    except (ValueError, DomainError) as exc:
        print(f"sample failed: {exc}", file=sys.stderr)
        return 1
    modelio.write_dataset(data, args.out)
    print(f"wrote {args.out}: n={data.n}, p={data.p}")
    return 0


def cmd_fit(args) -> int:
    try:
        data = modelio.read_dataset(args.data)
    except (OSError, modelio.ParseError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    if (args.lam is None) == (not args.bic):
        print("fit needs exactly one of --lambda or --bic", file=sys.stderr)
        return 2
    fit_cfg = fit.FitConfig(
        weighted=args.weighted,
        n_lambdas=args.n_lambdas,
        lambda_min_ratio=args.lambda_min_ratio,
        tol=args.tol,
        max_iter=args.max_iter,
    )
    types = data.types
    failures = 0
    fits: dict[int, fit.NeighborhoodFit] = {}
    selected: dict[NodeType, float] = {}
    try:
        if args.bic:
            path = fit.fit_path(data, fit_cfg)
            selected = fit.select_lambda_by_type(path, types)
            for s in range(data.p):
                lam = args.bic_scale * selected[types[s]]
                grid = path.grids[types[s]]
                nearest = int(np.argmin(np.abs(grid - lam)))
                if math.isclose(lam, float(grid[nearest]), rel_tol=1e-12):
                    fits[s] = path.fits[s][nearest]
                else:
                    fits[s] = fit.fit_node(data, s, lam, fit_cfg, warm_start=path.fits[s][nearest])
        else:
            for s in range(data.p):
                fits[s] = fit.fit_node(data, s, args.lam, fit_cfg)
    except DomainError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return 1
    failures = sum(not f.converged for f in fits.values())

    bounds = combine.estimate_bounds(fits, types)
    if args.combine == "and":
        edges = combine.combine_and([fit.estimated_neighborhood(fits[s]) for s in range(data.p)])
    elif args.combine == "or":
        edges = combine.combine_or([fit.estimated_neighborhood(fits[s]) for s in range(data.p)])
    else:
        edges = combine.combine_with_selection_rules(fits, types, fallback=args.fallback, bounds=bounds)

    modelio.write_edge_csv(edges.sorted_edges, args.out)
    report = {
        "combine": args.combine,
        "selected_lambda": {ty.tag: selected[ty] for ty in selected},
        "nodes": [
            {
                "s": s,
                "type": types[s].tag,
                "lambda": fits[s].lam,
                "alpha1": fits[s].alpha1_hat,
                "support_size": int(np.count_nonzero(fits[s].theta_hat)),
                "iterations": fits[s].iterations,
                "converged": fits[s].converged,
            }
            for s in range(data.p)
        ],
        "bounds": {
            "poisson": {str(k): v for k, v in bounds.poisson.items()},
            "exponential": {str(k): v for k, v in bounds.exponential.items()},
        },
    }
    report_path = args.report or args.out + ".report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out} ({len(edges)} edges) and {report_path}")
    if failures:
        print(f"{failures} node fit(s) did not converge", file=sys.stderr)
        return 1
    return 0


def cmd_experiment(args) -> int:
    settings: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                settings = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    name = args.experiment or settings.pop("experiment", None)
    if name not in harness.EXPERIMENTS:
        print(f"config error: unknown experiment {name!r}", file=sys.stderr)
        return 2
    for key, value in vars(args).items():
        if key in ("command", "config", "experiment", "func") or value is None:
            continue
        settings[key] = value
    if "type_pair" in settings and isinstance(settings["type_pair"], str):
        settings["type_pair"] = _type_pair(settings["type_pair"])
    for grid_key in ("n_grid", "c_grid"):
        if grid_key in settings and settings[grid_key] is not None:
            settings[grid_key] = tuple(settings[grid_key])
    settings["seed"] = _default_seed(settings.get("seed"))
    try:
        config = harness.make_config(name, **settings)
    except (TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    result = harness.run_experiment(config)
    if config.experiment == "bic-point":
        precision, recall = result
        print(f"bic-point: precision={precision:.4f} recall={recall:.4f}")
    else:
        where = config.output_path or "(no output_path: results not written)"
        print(f"{config.experiment}: {len(result)} result rows -> {where}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedgm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a benchmark model file")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--types", type=_type_pair, required=True, help="two type tags, e.g. gb")
    g.add_argument("--a", type=float, required=True)
    g.add_argument("--b", type=float, required=True)
    g.add_argument("--alpha1-first", type=float, default=0.0, dest="alpha1_first")
    g.add_argument("--alpha1-second", type=float, default=0.0, dest="alpha1_second")
    g.add_argument("--alpha1-second-type", type=float, default=0.0, dest="alpha1_second_type")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="check a model file's compatibility")
    c.add_argument("model")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("sample", help="draw a dataset from a model file")
    s.add_argument("model")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--burn-in", type=int, default=3000, dest="burn_in")
    s.add_argument("--thin", type=int, default=500)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--force", action="store_true", help="sample even if not strongly compatible")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    f = sub.add_parser("fit", help="fit neighbourhoods and combine an edge set")
    f.add_argument("data")
    f.add_argument("--lambda", type=float, default=None, dest="lam")
    f.add_argument("--bic", action="store_true", help="tune lambda per node type by BIC")
    f.add_argument("--bic-scale", type=float, default=1.0, dest="bic_scale")
    f.add_argument("--weighted", action=argparse.BooleanOptionalAction, default=True)
    f.add_argument("--combine", choices=("and", "or", "rules"), default="rules")
    f.add_argument("--fallback", choices=("and", "or"), default="or")
    f.add_argument("--n-lambdas", type=int, default=50, dest="n_lambdas")
    f.add_argument("--lambda-min-ratio", type=float, default=0.01, dest="lambda_min_ratio")
    f.add_argument("--tol", type=float, default=1e-6)
    f.add_argument("--max-iter", type=int, default=10000, dest="max_iter")
    f.add_argument("--out", required=True)
    f.add_argument("--report", default=None)
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("experiment", help="run a simulation study")
    e.add_argument("--config", default=None, help="JSON file of ExperimentConfig fields")
    e.add_argument("--experiment", choices=harness.EXPERIMENTS, default=None)
    e.add_argument("--p", type=int, default=None)
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--n-grid", type=int, nargs="+", default=None, dest="n_grid")
    e.add_argument("--c-grid", type=float, nargs="+", default=None, dest="c_grid")
    e.add_argument("--replicates", type=int, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--a", type=float, default=None)
    e.add_argument("--b", type=float, default=None)
    e.add_argument("--burn-in", type=int, default=None, dest="burn_in")
    e.add_argument("--thin", type=int, default=None)
    e.add_argument("--bic-scale", type=float, default=None, dest="bic_scale")
    e.add_argument("--jobs", type=int, default=None)
    e.add_argument("--output-path", default=None, dest="output_path")
    e.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
