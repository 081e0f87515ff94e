"""Desk-scale simulation studies and their CSV outputs.

Three experiments:

* ``recovery-curve``: one fixed Gaussian-Bernoulli graph; over a grid of
  sample sizes, the probability that each sub-graph (same-type and
  cross-type, from each side's regressions) is recovered exactly at
  lambda = c * sqrt(log(p) / n).
* ``gb-comparison``: Gaussian-Bernoulli graphs; correct-vs-estimated edge
  counts along a coupled lambda path for the AND/OR/selection-rule
  combiners, with the per-type lambda ratio anchored at the BIC selections.
* ``pb-rules``: Poisson-Bernoulli graphs with a split Poisson intercept, the
  same curves plus selection rules driven by true and by plug-in bounds
  (plug-ins fitted at ``bic_scale`` times the BIC-selected lambda).

Replicate jobs draw their RNG streams deterministically from (seed, indices)
and are independent, so they can run in worker processes (``jobs`` > 1).
"""

from __future__ import annotations

import csv
import math
from concurrent import futures
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .combine import (
    BoundEstimates,
    EdgeSet,
    combine_and,
    combine_or,
    combine_with_selection_rules,
    estimate_bounds,
    true_bounds,
)
from .core import Dataset, ModelSpec, NodeType, conditional_neg_hessian
from .fit import (
    FitConfig,
    NeighborhoodFit,
    estimated_neighborhood,
    fit_node,
    fit_node_path,
    fit_path,
    select_lambda_by_type,
)
from .gibbs import GibbsConfig, run_chain
from .simgen import SimGraphConfig, generate_model

EXPERIMENTS = ("recovery-curve", "gb-comparison", "pb-rules", "bic-point")

SUBGRAPHS = (
    "same-type-first",
    "same-type-second",
    "cross-from-first",
    "cross-from-second",
    "whole",
)

DEFAULT_SCALED_GRID = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0)

_EXPERIMENT_DEFAULTS: dict[str, dict] = {
    "recovery-curve": dict(
        p=60, replicates=20, a=0.3, b=0.3,
        type_pair=(NodeType.GAUSSIAN, NodeType.BERNOULLI),
    ),
    "gb-comparison": dict(
        p=40, n=200, replicates=25, a=0.3, b=0.6,
        type_pair=(NodeType.GAUSSIAN, NodeType.BERNOULLI),
    ),
    "pb-rules": dict(
        p=80, n=200, replicates=25, a=0.8, b=1.0,
        type_pair=(NodeType.POISSON, NodeType.BERNOULLI),
        alpha1_first_half=-3.0, bic_scale=0.5, thin=100,
    ),
    "bic-point": dict(
        p=40, n=200, replicates=25, a=0.3, b=0.6,
        type_pair=(NodeType.GAUSSIAN, NodeType.BERNOULLI),
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    p: int = 60
    n: int | None = None
    n_grid: tuple[int, ...] | None = None
    replicates: int = 20
    c_grid: tuple[float, ...] = (2.6,)
    seed: int = 0
    output_path: str | None = None
    type_pair: tuple[NodeType, NodeType] = (NodeType.GAUSSIAN, NodeType.BERNOULLI)
    a: float = 0.3
    b: float = 0.3
    alpha1_first_half: float = 0.0
    alpha1_second_half: float = 0.0
    alpha1_second_type: float = 0.0
    burn_in: int = 3000
    thin: int = 20
    n_lambdas: int = 50
    lambda_min_ratio: float = 0.01
    bic_scale: float = 1.0
    fallback: str = "or"
    weighted: bool = True
    tol: float = 1e-6
    max_iter: int = 10000
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; options: {EXPERIMENTS}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.c_grid:
            raise ValueError("c_grid must be non-empty")
        if self.n_grid is not None and not self.n_grid:
            raise ValueError("n_grid must be non-empty when given")


def make_config(experiment: str, **overrides) -> ExperimentConfig:
    """Experiment defaults merged with explicit overrides."""
    if experiment not in _EXPERIMENT_DEFAULTS:
        raise ValueError(f"unknown experiment {experiment!r}; options: {EXPERIMENTS}")
    settings = dict(_EXPERIMENT_DEFAULTS[experiment])
    settings.update(overrides)
    return ExperimentConfig(experiment=experiment, **settings)


def job_seed(seed: int, *key: int) -> int:
    """Deterministic per-job RNG seed derived from an experiment seed and indices."""
    ss = np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def scaled_sample_grid(p: int, scaled_values: Sequence[float] = DEFAULT_SCALED_GRID) -> tuple[int, ...]:
    """Sample sizes n such that n / (3 log p) hits the requested values."""
    base = 3.0 * math.log(p)
    seen: dict[int, None] = {}
    for s in scaled_values:
        seen[max(4, round(s * base))] = None
    return tuple(seen)


@dataclass(frozen=True)
class RecoveryRecord:
    subgraph: str
    n: int
    p: int
    c: float
    success_rate: float
    replicates: int


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fit_config(config: ExperimentConfig, **overrides) -> FitConfig:
    settings = dict(
        weighted=config.weighted,
        tol=config.tol,
        max_iter=config.max_iter,
        n_lambdas=config.n_lambdas,
        lambda_min_ratio=config.lambda_min_ratio,
    )
    settings.update(overrides)
    return FitConfig(**settings)


def _sim_config(config: ExperimentConfig, seed: int) -> SimGraphConfig:
    return SimGraphConfig(
        p=config.p,
        type_pair=config.type_pair,
        a=config.a,
        b=config.b,
        seed=seed,
        alpha1_first_half=config.alpha1_first_half,
        alpha1_second_half=config.alpha1_second_half,
        alpha1_second_type=config.alpha1_second_type,
    )


def _sample(config: ExperimentConfig, model: ModelSpec, n: int, seed: int) -> Dataset:
    return run_chain(
        model, GibbsConfig(n_samples=n, seed=seed, burn_in=config.burn_in, thin=config.thin)
    )


def _map_jobs(worker, items: Sequence, jobs: int) -> list:
    if jobs <= 1:
        return [worker(item) for item in items]
    with futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))


# ---------------------------------------------------------------------------
# Recovery curve
# ---------------------------------------------------------------------------


def _subgraph_estimates(
    fits: Mapping[int, NeighborhoodFit], types: Sequence[NodeType], m: int, fallback: str
) -> dict[str, EdgeSet]:
    p = len(types)
    nbhd = [estimated_neighborhood(fits[s]) for s in range(p)]
    whole = combine_with_selection_rules(fits, types, fallback=fallback)
    return {
        "same-type-first": combine_or(nbhd).restrict(lambda s, t: s < m and t < m),
        "same-type-second": combine_or(nbhd).restrict(lambda s, t: s >= m and t >= m),
        "cross-from-first": EdgeSet.from_pairs(
            p, ((s, t) for s in range(m) for t in nbhd[s] if t >= m)
        ),
        "cross-from-second": EdgeSet.from_pairs(
            p, ((s, t) for s in range(m, p) for t in nbhd[s] if t < m)
        ),
        "whole": whole,
    }


def _true_subgraphs(model: ModelSpec) -> dict[str, EdgeSet]:
    m = model.p // 2
    truth = EdgeSet.from_theta(model.theta)
    cross = truth.restrict(lambda s, t: (s < m) != (t < m))
    return {
        "same-type-first": truth.restrict(lambda s, t: s < m and t < m),
        "same-type-second": truth.restrict(lambda s, t: s >= m and t >= m),
        "cross-from-first": cross,
        "cross-from-second": cross,
        "whole": truth,
    }


def _recovery_job(args) -> dict[tuple[float, str], bool]:
    config, model, n, data_seed = args
    data = _sample(config, model, n, data_seed)
    fit_cfg = _fit_config(config)
    truth = _true_subgraphs(model)
    out: dict[tuple[float, str], bool] = {}
    for c in config.c_grid:
        lam = c * math.sqrt(math.log(config.p) / n)
        fits = {s: fit_node(data, s, lam, fit_cfg) for s in range(config.p)}
        estimates = _subgraph_estimates(fits, data.types, config.p // 2, config.fallback)
        for name in SUBGRAPHS:
            out[(c, name)] = estimates[name].edges == truth[name].edges
    return out


def run_recovery_curve(config: ExperimentConfig) -> list[RecoveryRecord]:
    """Exact-recovery probabilities per sub-graph over the n grid."""
    n_grid = config.n_grid or scaled_sample_grid(config.p)
    model = generate_model(_sim_config(config, job_seed(config.seed, 0)))
    items = [
        (config, model, n, job_seed(config.seed, 1, i, rep))
        for i, n in enumerate(n_grid)
        for rep in range(config.replicates)
    ]
    results = _map_jobs(_recovery_job, items, config.jobs)

    records = []
    for i, n in enumerate(n_grid):
        chunk = results[i * config.replicates : (i + 1) * config.replicates]
        for c in config.c_grid:
            for name in SUBGRAPHS:
                wins = sum(r[(c, name)] for r in chunk)
                records.append(
                    RecoveryRecord(
                        subgraph=name,
                        n=n,
                        p=config.p,
                        c=c,
                        success_rate=wins / config.replicates,
                        replicates=config.replicates,
                    )
                )
    if config.output_path:
        base = 3.0 * math.log(config.p)
        _write_csv(
            config.output_path,
            ["subgraph", "p", "c", "n", "scaled_n", "replicates", "success_rate"],
            [
                [r.subgraph, r.p, r.c, r.n, r.n / base, r.replicates, r.success_rate]
                for r in records
            ],
        )
    return records


# ---------------------------------------------------------------------------
# Edge-count comparison (GB and PB variants)
# ---------------------------------------------------------------------------

COMPARISON_METHODS = ("and", "or", "rules-true", "rules-est")


def _edge_counts(est: EdgeSet, truth: EdgeSet, m: int) -> tuple[int, int, int, int]:
    """(est_same, correct_same, est_cross, correct_cross)."""
    cross = lambda s, t: (s < m) != (t < m)  # noqa: E731
    est_cross = {e for e in est.edges if cross(*e)}
    true_cross = {e for e in truth.edges if cross(*e)}
    est_same = est.edges - est_cross
    true_same = truth.edges - true_cross
    return (
        len(est_same),
        len(est_same & true_same),
        len(est_cross),
        len(est_cross & true_cross),
    )


def _comparison_job(args) -> dict[str, np.ndarray]:
    config, rep = args
    model = generate_model(_sim_config(config, job_seed(config.seed, 0, rep)))
    data = _sample(config, model, config.n, job_seed(config.seed, 1, rep))
    fit_cfg = _fit_config(config)
    types = data.types
    first_ty, second_ty = config.type_pair
    first_nodes = [s for s, ty in enumerate(types) if ty is first_ty]
    second_nodes = [s for s, ty in enumerate(types) if ty is second_ty]

    path = fit_path(data, fit_cfg)
    selected = select_lambda_by_type(path, types)
    ratio = selected[second_ty] / selected[first_ty]
    grid_first = path.grids[first_ty]
    coupled = ratio * grid_first
    second_fits = {s: fit_node_path(data, s, coupled, fit_cfg) for s in second_nodes}

    bounds_true = true_bounds(model)
    anchor_fits: dict[int, NeighborhoodFit] = {}
    for s in first_nodes + second_nodes:
        ty = types[s]
        lam_anchor = config.bic_scale * selected[ty]
        grid = path.grids[ty]
        nearest = int(np.argmin(np.abs(grid - lam_anchor)))
        anchor_fits[s] = fit_node(data, s, lam_anchor, fit_cfg, warm_start=path.fits[s][nearest])
    bounds_est = estimate_bounds(anchor_fits, types)

    truth = EdgeSet.from_theta(model.theta)
    m = config.p // 2
    counts = {method: np.zeros((len(grid_first), 4)) for method in COMPARISON_METHODS}
    for k in range(len(grid_first)):
        fits_k = {s: path.fits[s][k] for s in first_nodes}
        fits_k.update({s: second_fits[s][k] for s in second_nodes})
        nbhd = [estimated_neighborhood(fits_k[s]) for s in range(config.p)]
        per_method = {
            "and": combine_and(nbhd),
            "or": combine_or(nbhd),
            "rules-true": combine_with_selection_rules(
                fits_k, types, fallback=config.fallback, bounds=bounds_true
            ),
            "rules-est": combine_with_selection_rules(
                fits_k, types, fallback=config.fallback, bounds=bounds_est
            ),
        }
        for method, est in per_method.items():
            counts[method][k] = _edge_counts(est, truth, m)
    counts["lambda_first"] = grid_first
    counts["lambda_second"] = coupled
    return counts


def run_edge_count_comparison(config: ExperimentConfig) -> list[dict]:
    """Average (estimated, correct) edge counts per combiner along the path."""
    results = _map_jobs(_comparison_job, [(config, rep) for rep in range(config.replicates)], config.jobs)
    n_points = len(results[0]["lambda_first"])
    rows = []
    for method in COMPARISON_METHODS:
        stacked = np.stack([r[method] for r in results])  # (reps, k, 4)
        mean_counts = stacked.mean(axis=0)
        lam1 = np.stack([r["lambda_first"] for r in results]).mean(axis=0)
        lam2 = np.stack([r["lambda_second"] for r in results]).mean(axis=0)
        for k in range(n_points):
            rows.append(
                dict(
                    method=method,
                    lambda_index=k,
                    lambda_first=float(lam1[k]),
                    lambda_second=float(lam2[k]),
                    est_same=float(mean_counts[k, 0]),
                    correct_same=float(mean_counts[k, 1]),
                    est_cross=float(mean_counts[k, 2]),
                    correct_cross=float(mean_counts[k, 3]),
                    replicates=config.replicates,
                )
            )
    if config.output_path:
        header = list(rows[0].keys())
        _write_csv(config.output_path, header, [[row[h] for h in header] for row in rows])
    return rows


# ---------------------------------------------------------------------------
# BIC operating point
# ---------------------------------------------------------------------------


def precision_recall(est: EdgeSet, truth: EdgeSet) -> tuple[float, float]:
    """Edge precision and recall; an empty estimate has precision 0 by convention."""
    correct = len(est.edges & truth.edges)
    precision = correct / len(est.edges) if est.edges else 0.0
    recall = correct / len(truth.edges) if truth.edges else 1.0
    return precision, recall


def _bic_point_job(args) -> tuple[float, float, int, int, int]:
    config, rep = args
    model = generate_model(_sim_config(config, job_seed(config.seed, 0, rep)))
    data = _sample(config, model, config.n, job_seed(config.seed, 1, rep))
    fit_cfg = _fit_config(config)
    types = data.types

    path = fit_path(data, fit_cfg)
    selected = select_lambda_by_type(path, types)
    fits: dict[int, NeighborhoodFit] = {}
    for s in range(config.p):
        ty = types[s]
        lam = config.bic_scale * selected[ty]
        grid = path.grids[ty]
        nearest = int(np.argmin(np.abs(grid - lam)))
        if math.isclose(lam, grid[nearest], rel_tol=1e-12):
            fits[s] = path.fits[s][nearest]
        else:
            fits[s] = fit_node(data, s, lam, fit_cfg, warm_start=path.fits[s][nearest])

    est = combine_with_selection_rules(fits, types, fallback=config.fallback)
    truth = EdgeSet.from_theta(model.theta)
    precision, recall = precision_recall(est, truth)
    return precision, recall, len(est.edges), len(est.edges & truth.edges), len(truth.edges)


def run_bic_point(config: ExperimentConfig) -> tuple[float, float]:
    """Mean (precision, recall) of the BIC-tuned estimate over replicates."""
    results = _map_jobs(_bic_point_job, [(config, rep) for rep in range(config.replicates)], config.jobs)
    if config.output_path:
        _write_csv(
            config.output_path,
            ["replicate", "precision", "recall", "est_edges", "correct_edges", "true_edges"],
            [[rep, *vals] for rep, vals in enumerate(results)],
        )
    precision = float(np.mean([r[0] for r in results]))
    recall = float(np.mean([r[1] for r in results]))
    return precision, recall


# ---------------------------------------------------------------------------
# Irrepresentability diagnostic
# ---------------------------------------------------------------------------


def irrepresentability_diagnostic(model: ModelSpec, data: Dataset, s: int) -> float:
    """Worst association between non-neighbours and neighbours of node s.

    From the sample negative Hessian Q at the true parameters, returns
    max over non-neighbour coordinates l of || Q[l, Dc] Q[Dc, Dc]^-1 ||_1,
    where Dc collects the true-neighbour coordinates plus the intercept.
    Values near or above 1 signal that support recovery for node s is hard.
    """
    others = np.concatenate((np.arange(s), np.arange(s + 1, model.p)))
    theta_col = model.theta[others, s]
    alpha2 = model.params[s].alpha2 if model.types[s] is NodeType.GAUSSIAN else -1.0
    q = conditional_neg_hessian(
        model.types[s], theta_col, model.params[s].alpha1, data, s, alpha2
    )
    nonzero = theta_col != 0.0
    delta = np.where(~nonzero)[0]
    delta_c = np.concatenate((np.where(nonzero)[0], [len(others)]))  # + intercept
    if delta.size == 0:
        return 0.0
    cross = q[np.ix_(delta, delta_c)]
    inner = q[np.ix_(delta_c, delta_c)]
    solved = np.linalg.solve(inner, cross.T)  # (|Dc|, |D|)
    return float(np.abs(solved).sum(axis=0).max())


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def run_experiment(config: ExperimentConfig):
    """Run the configured experiment; returns its records, rows, or summary pair."""
    if config.experiment == "recovery-curve":
        return run_recovery_curve(config)
    if config.experiment in ("gb-comparison", "pb-rules"):
        return run_edge_count_comparison(config)
    return run_bic_point(config)
