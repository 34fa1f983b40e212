"""Batch orchestration: multi-restart runs, ablations, and lambda sweeps.

Every entry point is deterministic given its config: restart r uses seed
base_seed + r for both the solver initialization and the k-means inside
spectral clustering, result rows are emitted in restart order regardless
of worker completion order, and no timestamps or environment details
leak into the artifacts, so re-running a command overwrites its outputs
byte-identically.
"""

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import graphs as _graphs
from .data import generate_synthetic, load_dataset, load_synthetic_spec, normalize_views
from .errors import NumericalError, ValidationError
from .metrics import METRIC_FIELDS, aggregate, evaluate, format_mean_std
from .solver import HyperParams, fit, variant_label
from .spectral import affinity_from_representation, spectral_cluster

LAMBDA_GRID = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)

ABLATION_ORDER = ("lrr-bsv", "msc-naive", "grmsc-naive", "grmsc")


def resolve_threads():
    """Worker-pool width: MVSC_THREADS if set, else the CPU count."""
    raw = os.environ.get("MVSC_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"MVSC_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise ValidationError(f"MVSC_THREADS must be positive, got {value}")
    return value


@dataclass
class RunConfig:
    """Everything one batch command needs."""

    params: HyperParams
    out_dir: Path
    manifest: Path | None = None
    synthetic: Path | None = None
    normalize: str = "unit_column"
    restarts: int = 30
    # False = off, True = dump under out_dir/graphs, str/Path = dump there
    dump_graphs: object = False
    trace_residuals: bool = False

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError(f"restarts must be at least 1, got {self.restarts}")
        if (self.manifest is None) == (self.synthetic is None):
            raise ValidationError(
                "exactly one of manifest and synthetic spec must be given"
            )


def resolve_dataset(config):
    if config.manifest is not None:
        ds = load_dataset(config.manifest)
    else:
        ds = generate_synthetic(load_synthetic_spec(config.synthetic))
    return normalize_views(ds, config.normalize)


@dataclass
class RestartResult:
    index: int
    seed: int
    report: object = None
    labels: np.ndarray | None = None
    converged: bool = False
    iterations: int = 0
    error: str | None = None
    exception: Exception | None = None
    state: object = None


def build_shared_graphs(dataset, params):
    """Graphs depend only on (views, knn, alpha, variant), not on the
    restart seed or the lambdas, so one build serves a whole batch."""
    if params.effective_lambda2 <= 0 or params.variant == "lrr-bsv":
        return None
    knn = params.resolve_knn(dataset.n_samples, dataset.n_clusters)
    mode = "first_order" if params.variant == "grmsc-naive" else "fused"
    return _graphs.build_graph_set(dataset.views, knn, params.alpha, mode=mode)


def run_one_restart(dataset, params, index, graphs=None, trace=False):
    """One seeded end-to-end run: fit, spectral clustering, metrics."""
    seed = params.seed + index
    p = replace(params, seed=seed)
    try:
        Z, state = fit(dataset, p, graphs=graphs, trace_objective=trace)
        A = affinity_from_representation(Z)
        labels = spectral_cluster(A, dataset.n_clusters, seed)
        report = evaluate(labels, dataset.labels)
        return RestartResult(
            index=index,
            seed=seed,
            report=report,
            labels=labels,
            converged=state.converged,
            iterations=state.iteration,
            state=state,
        )
    except (ValidationError, NumericalError) as exc:
        return RestartResult(index=index, seed=seed, error=str(exc), exception=exc)


def run_restarts(dataset, params, restarts, graphs=None, trace=False, threads=None):
    """All restarts of one configuration, in a worker pool.

    Failures are captured per restart; if nothing succeeds the first
    failure is re-raised.
    """
    if dataset.labels is None:
        raise ValidationError(
            "evaluation needs ground-truth labels; the manifest declares none"
        )
    if graphs is None:
        graphs = build_shared_graphs(dataset, params)
    width = threads if threads is not None else resolve_threads()

    def worker(index):
        return run_one_restart(dataset, params, index, graphs=graphs, trace=trace)

    if width == 1 or restarts == 1:
        results = [worker(i) for i in range(restarts)]
    else:
        with ThreadPoolExecutor(max_workers=width) as pool:
            results = list(pool.map(worker, range(restarts)))
    if all(r.report is None for r in results):
        raise results[0].exception
    return results


def summarize(results):
    """(mean, std, run count) over the successful restarts."""
    reports = [r.report for r in results if r.report is not None]
    mean, std = aggregate(reports)
    return mean, std, len(reports)


def _fmt(x):
    return f"{x:.17g}"


def report_rows(dataset, params, results):
    knn = params.resolve_knn(dataset.n_samples, dataset.n_clusters)
    rows = []
    for r in results:
        row = {
            "dataset": dataset.name,
            "variant": variant_label(params.variant),
            "lambda1": _fmt(params.lambda1),
            "lambda2": _fmt(params.effective_lambda2),
            "alpha": _fmt(params.alpha),
            "knn": knn,
            "seed": r.seed,
            "restart": r.index,
        }
        for name in METRIC_FIELDS:
            row[name] = _fmt(getattr(r.report, name)) if r.report else ""
        row["converged"] = int(r.converged)
        row["iterations"] = r.iterations
        row["error"] = r.error or ""
        rows.append(row)
    return rows


def summary_row(dataset, params, results):
    """One summary line: display cells in the mean(std) table style plus
    full-precision mean/std columns so the stats can be re-derived from
    report.csv to working precision."""
    mean, std, n_runs = summarize(results)
    row = {
        "dataset": dataset.name,
        "variant": variant_label(params.variant),
        "n_runs": n_runs,
    }
    for name in METRIC_FIELDS:
        row[name] = format_mean_std(getattr(mean, name), getattr(std, name))
    for name in METRIC_FIELDS:
        row[name + "_mean"] = _fmt(getattr(mean, name))
        row[name + "_std"] = _fmt(getattr(std, name))
    return row


def write_csv(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_labels(path, labels):
    np.savetxt(path, np.asarray(labels, dtype=int)[:, None], fmt="%d")


def write_traces(out_dir, results):
    """Per-restart residual traces: iteration, per-view reconstruction
    residuals, the Z-Q residual, the objective, and mu (all inf-norms)."""
    for r in results:
        if r.state is None:
            continue
        st = r.state
        n_views = len(st.view_residual_history[0]) if st.view_residual_history else 0
        rows = []
        for it in range(st.iteration):
            row = {"iteration": it + 1}
            for k in range(n_views):
                row[f"residual_view{k}"] = _fmt(st.view_residual_history[it][k])
            row["residual_zq"] = _fmt(st.residual_history[it][1])
            if st.objective_history:
                row["objective"] = _fmt(st.objective_history[it])
            row["mu"] = _fmt(st.mu_history[it])
            rows.append(row)
        if rows:
            write_csv(Path(out_dir) / f"residuals_restart{r.index}.csv", rows)


def _maybe_dump_graphs(config, dataset, params, graphs):
    if not config.dump_graphs:
        return
    if graphs is None:
        # the run itself used no graphs; build the set it would have used
        probe = params
        if probe.variant in ("msc-naive", "lrr-bsv"):
            probe = replace(probe, variant="grmsc")
        probe = replace(probe, lambda2=max(probe.lambda2, 1.0))
        graphs = build_shared_graphs(dataset, probe)
    if config.dump_graphs is True:
        target = Path(config.out_dir) / "graphs"
    else:
        target = Path(config.dump_graphs)
    _graphs.dump_graphs(graphs, target)


def cmd_run(config):
    """Multi-restart evaluation of one variant; writes report.csv,
    summary.csv, labels.csv, and optional graph dumps and traces."""
    dataset = resolve_dataset(config)
    params = config.params
    out = Path(config.out_dir)
    graphs = build_shared_graphs(dataset, params)
    results = run_restarts(
        dataset, params, config.restarts, graphs=graphs,
        trace=config.trace_residuals,
    )
    write_csv(out / "report.csv", report_rows(dataset, params, results))
    write_csv(out / "summary.csv", [summary_row(dataset, params, results)])
    first = results[0]
    if first.labels is not None:
        write_labels(out / "labels.csv", first.labels)
    if config.trace_residuals:
        write_traces(out, results)
    _maybe_dump_graphs(config, dataset, params, graphs)
    return 0


def cmd_ablate(config):
    """All four variants under identical restart seeds; one combined table."""
    dataset = resolve_dataset(config)
    out = Path(config.out_dir)
    summary = []
    for variant in ABLATION_ORDER:
        params = replace(config.params, variant=variant)
        results = run_restarts(dataset, params, config.restarts)
        write_csv(
            out / f"report_{variant_label(variant)}.csv",
            report_rows(dataset, params, results),
        )
        summary.append(summary_row(dataset, params, results))
    write_csv(out / "ablation.csv", summary)
    return 0


def cmd_sweep(config, grid1=LAMBDA_GRID, grid2=LAMBDA_GRID):
    """Full pipeline per (lambda1, lambda2) grid point; one sweep.csv row
    each, suitable for a heatmap."""
    if not grid1 or not grid2:
        raise ValidationError("sweep grids must be non-empty")
    dataset = resolve_dataset(config)
    out = Path(config.out_dir)
    # graphs do not depend on the lambdas; build once for the whole grid
    graphs = build_shared_graphs(
        dataset, replace(config.params, lambda2=max(config.params.lambda2, 1.0))
    )
    rows = []
    for l1 in grid1:
        for l2 in grid2:
            params = replace(config.params, lambda1=float(l1), lambda2=float(l2))
            results = run_restarts(dataset, params, config.restarts, graphs=graphs)
            mean, std, n_runs = summarize(results)
            row = {
                "lambda1": _fmt(l1),
                "lambda2": _fmt(l2),
                "n_runs": n_runs,
            }
            for name in METRIC_FIELDS:
                row[name + "_mean"] = _fmt(getattr(mean, name))
                row[name + "_std"] = _fmt(getattr(std, name))
            rows.append(row)
    write_csv(out / "sweep.csv", rows)
    return 0
