"""Command-line pipeline.

Verbs: simulate | extract | cluster | fit | predict | evaluate. Each
command reads CSV/JSON artifacts, validates that they belong to the same
graph (by recorded hash), and writes its own artifacts atomically. Exit
codes: 0 success, 1 validation error, 2 computation error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import io as artio
from .active_components import extract_active_components, filter_min_size
from .clustering import (cluster_active_components, finalize_partition,
                         shift_matrix, subgraph_gamma)
from .config import (MODEL_TAR, PipelineConfig, parse_config, split_indices,
                     with_overrides)
from .forecast import (causal_tti_selector, evaluate, fit_cluster_model,
                       forecast_cluster, transform_series)
from .graph import induced_subgraph
from .simulate import nested_subgraph_gammas
from .spectral import eigendecompose
from .stationarity import impute_moving_average, sample_covariance, seasonal_means
from .validation import ComputationError, ValidationError


def _config_from(args) -> PipelineConfig:
    cfg = parse_config(args.config) if args.config else PipelineConfig()
    return with_overrides(cfg, seed=getattr(args, "seed", None))


def _load_series(path, graph, cfg):
    x, _ = artio.read_series_csv(path, graph)
    if np.isnan(x).any():
        x = impute_moving_average(x, width=cfg.impute_width)
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{path}: series contains non-finite values")
    return x


def cmd_simulate(args) -> int:
    cfg = _config_from(args)
    result = nested_subgraph_gammas(n=args.n, p=args.p, seed=cfg.seed,
                                    depth=args.depth)
    g = result.graph
    os.makedirs(args.out, exist_ok=True)
    artio.write_graph_csv(os.path.join(args.out, "graph.csv"), g)
    artio.write_vertex_map_csv(os.path.join(args.out, "vertices.csv"), g)
    ghash = artio.graph_hash(g)

    rows = [["step", "size", "gamma_stationary", "gamma_superstationary"]]
    for st in result.steps:
        rows.append([str(st.step), str(len(st.vertices)),
                     repr(st.gamma_stationary),
                     repr(st.gamma_superstationary)])
    artio.atomic_write_text(
        os.path.join(args.out, "gamma_curves.csv"),
        f"# graph_hash={ghash}\n" + artio.csv_text(rows))

    rows = [["index", "eigenvalue", "stationary_spectrum",
             "superstationary_spectrum"]]
    for i in range(g.n):
        rows.append([str(i + 1), repr(float(result.eigenvalues[i])),
                     repr(float(result.stationary_spectrum[i])),
                     repr(float(result.superstationary_spectrum[i]))])
    artio.atomic_write_text(
        os.path.join(args.out, "spectra.csv"),
        f"# graph_hash={ghash}\n" + artio.csv_text(rows))

    min_gs = min(st.gamma_stationary for st in result.steps)
    print(f"simulate: n={g.n} p={args.p} seed={cfg.seed} "
          f"steps={len(result.steps)} start={result.start} "
          f"min_gamma_stationary={min_gs:.6f}")
    return 0


def cmd_extract(args) -> int:
    cfg = _config_from(args)
    g = artio.read_graph_csv(args.graph, directed=cfg.directed)
    x = _load_series(args.series, g, cfg)
    acs = extract_active_components(g, x, cfg.alpha)
    kept = filter_min_size(acs, cfg.min_ac_size)
    artio.write_active_components_json(args.out, g, kept, cfg.alpha,
                                       cfg.min_ac_size)
    print(f"extract: {len(acs)} active components, "
          f"{len(acs) - len(kept)} filtered below size {cfg.min_ac_size}, "
          f"{len(kept)} written")
    return 0


def cmd_cluster(args) -> int:
    cfg = _config_from(args)
    g = artio.read_graph_csv(args.graph, directed=cfg.directed)
    x = _load_series(args.series, g, cfg)
    acs = artio.read_active_components_json(args.components, g)
    t1, _ = split_indices(x.shape[1], cfg)
    work, _ = transform_series(x[:, :t1], period=cfg.seasonal_period,
                               differenced=cfg.difference)
    if work.shape[1] <= cfg.max_lag + 1:
        raise ValidationError("training window too short for the lag count")
    covs = [sample_covariance(work, lag=l) for l in range(cfg.max_lag + 1)]

    cs = cluster_active_components(g, covs, acs, gamma_th=cfg.gamma_th,
                                   theta=cfg.theta, max_lag=cfg.max_lag,
                                   shift=cfg.shift)
    part = finalize_partition(g, cs)
    final = []
    for c in part.clusters:
        gamma, _ = subgraph_gamma(g, covs, c.vertices, shift=cfg.shift)
        final.append(replace(c, gamma=gamma, lags_checked=cfg.max_lag + 1))

    artio.write_clusters_json(args.out, g, final, part.unassigned,
                              cfg.gamma_th, cfg.theta, cfg.max_lag, cfg.shift)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    artio.write_merge_log_csv(os.path.join(out_dir, "merge_log.csv"), g, cs.log)
    artio.write_gamma_hist_csv(os.path.join(out_dir, "gamma_hist.csv"), g,
                               [c.gamma for c in final])
    artio.write_covariance_csv(os.path.join(out_dir, "covariance_lag0.csv"),
                               g, covs[0].matrix, lag=0)
    merges = sum(1 for ev in cs.log if ev.action == "merge")
    print(f"cluster: {len(acs)} components in, {merges} merges, "
          f"{len(final)} clusters out, {len(part.unassigned)} unassigned")
    return 0


def _cluster_series(x, vertices):
    return x[np.ix_(list(vertices), range(x.shape[1]))]


def _fit_one(raw_train, basis, cfg, order, means, vertices, cluster_id):
    """Fit one cluster on its training window at a fixed AR order."""
    work, _ = transform_series(raw_train, period=cfg.seasonal_period,
                               differenced=cfg.difference, means=means)
    kind = "tar" if cfg.model == MODEL_TAR else "ar"
    z = causal_tti_selector(raw_train, cfg.difference) if kind == "tar" else None
    try:
        model = fit_cluster_model(work, basis, kind=kind, order=order,
                                  regimes=cfg.regimes, grid=cfg.tar_grid,
                                  z=z, cluster_id=cluster_id, vertices=vertices)
    except ValidationError:
        if kind != "tar" or cfg.regimes == 1:
            raise
        # selector too coarse for the regime grid: degrade to one regime
        model = fit_cluster_model(work, basis, kind=kind, order=order,
                                  regimes=1, grid=cfg.tar_grid, z=z,
                                  cluster_id=cluster_id, vertices=vertices)
    return replace(model, seasonal_period=cfg.seasonal_period,
                   seasonal_means=means, differenced=cfg.difference)


def _validation_score(model, raw, t1, t2):
    """One-step rolling MAPE over the validation window (RMSE fallback)."""
    preds = np.empty((raw.shape[0], t2 - t1))
    for v in range(t1, t2):
        preds[:, v - t1] = forecast_cluster(model, raw[:, :v], 1)[:, 0]
    truth = raw[:, t1:t2]
    try:
        return evaluate(preds, truth).mape
    except ValidationError:
        return evaluate(preds, truth, mask=np.ones_like(truth, dtype=bool)).rmse


def cmd_fit(args) -> int:
    cfg = _config_from(args)
    g = artio.read_graph_csv(args.graph, directed=cfg.directed)
    x = _load_series(args.series, g, cfg)
    clusters, _, cmeta = artio.read_clusters_json(args.clusters, g)
    if not clusters:
        raise ValidationError("no clusters to fit")
    if cmeta["shift"] != cfg.shift:
        raise ValidationError(
            f"clusters were built with shift {cmeta['shift']!r}, "
            f"config says {cfg.shift!r}")
    t1, t2 = split_indices(x.shape[1], cfg)
    models = []
    chosen = []
    for c in sorted(clusters, key=lambda c: c.id):
        raw = _cluster_series(x, c.vertices)
        sub, _ = induced_subgraph(g, c.vertices)
        basis = eigendecompose(shift_matrix(sub, cfg.shift),
                               shift_kind=cfg.shift)
        means = None
        if cfg.seasonal_period:
            means = seasonal_means(raw[:, :t1], cfg.seasonal_period)
        orders = range(1, cfg.ar_order + 1) if t2 > t1 else [cfg.ar_order]
        best = None
        for order in orders:
            model = _fit_one(raw[:, :t1], basis, cfg, order, means,
                             c.vertices, c.id)
            if t2 > t1:
                score = _validation_score(model, raw, t1, t2)
            else:
                score = 0.0
            if best is None or score < best[0]:
                best = (score, order, model)
        models.append(best[2])
        chosen.append(best[1])
    artio.write_models_json(args.out, g, models, cfg.model, cfg.shift,
                            cfg.seasonal_period, cfg.difference, t1, t2)
    print(f"fit: {len(models)} cluster models ({cfg.model}), "
          f"orders {sorted(set(chosen))}, train={t1} val={t2 - t1}")
    return 0


def cmd_predict(args) -> int:
    cfg = _config_from(args)
    g = artio.read_graph_csv(args.graph, directed=cfg.directed)
    x = _load_series(args.series, g, cfg)
    models, meta = artio.read_models_json(args.models, g)
    t2 = meta["validation_end"]
    width = x.shape[1] - t2
    if width < 1:
        raise ValidationError("no test window after the validation split")
    union = sorted({v for m in models for v in m.vertices})
    pos = {v: k for k, v in enumerate(union)}
    os.makedirs(args.out, exist_ok=True)
    ghash = artio.graph_hash(g)
    for h in cfg.horizons:
        if t2 - h < 1:
            raise ValidationError(
                f"horizon {h} reaches before the start of the series")
        preds = np.zeros((len(union), width))
        for m in models:
            raw = _cluster_series(x, m.vertices)
            rows = [pos[v] for v in m.vertices]
            for j in range(width):
                origin = t2 + j - h
                fc = forecast_cluster(m, raw[:, : origin + 1], h)
                preds[rows, j] = fc[:, h - 1]
        labels = [g.labels[v] for v in union]
        artio.write_series_csv(
            os.path.join(args.out, f"forecast_h{h}.csv"), preds, labels,
            comments={"graph_hash": ghash, "model": meta["model"],
                      "horizon": h}, t0=t2)
    print(f"predict: horizons {list(cfg.horizons)}, {len(union)} vertices, "
          f"{width} test steps")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config_from(args)
    g = artio.read_graph_csv(args.graph, directed=cfg.directed)
    x = _load_series(args.series, g, cfg)
    _, meta = artio.read_models_json(args.models, g)
    t2 = meta["validation_end"]
    ghash = artio.graph_hash(g)
    table = {}
    for h in cfg.horizons:
        path = os.path.join(args.forecasts, f"forecast_h{h}.csv")
        if not os.path.exists(path):
            raise ValidationError(f"missing forecast file {path}")
        fields = artio.read_comment_fields(path)
        if fields.get("graph_hash") not in (None, ghash):
            raise ValidationError(f"{path}: graph hash mismatch")
        preds, labels = artio.read_series_csv(path)
        rows = [g.id_of(lab) for lab in labels]
        truth = x[np.ix_(rows, range(t2, t2 + preds.shape[1]))]
        table[h] = evaluate(preds, truth)
    artio.write_metrics_json(args.out, g, meta["model"], table)
    for h in sorted(table):
        m = table[h]
        print(f"evaluate: h={h} mae={m.mae:.6f} rmse={m.rmse:.6f} "
              f"mape={m.mape:.4f}%")
    return 0


def _add_common(sp, *names):
    if "config" in names:
        sp.add_argument("--config", help="pipeline config file")
    if "seed" in names:
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    if "graph" in names:
        sp.add_argument("--graph", required=True, help="graph CSV")
    if "series" in names:
        sp.add_argument("--series", required=True, help="time-series CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psgraph",
        description="Piecewise-stationary modeling of processes on graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate",
                        help="nested-subgraph stationarity experiment")
    _add_common(sp, "config", "seed")
    sp.add_argument("--n", type=int, default=64, help="vertex count")
    sp.add_argument("--p", type=float, default=0.06, help="edge probability")
    sp.add_argument("--depth", type=int, default=None,
                    help="cap on expansion steps")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("extract", help="extract active components")
    _add_common(sp, "config", "seed", "graph", "series")
    sp.add_argument("--out", required=True, help="output JSON path")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("cluster", help="merge components into "
                        "stationary connected clusters")
    _add_common(sp, "config", "seed", "graph", "series")
    sp.add_argument("--components", required=True,
                    help="active-components JSON from extract")
    sp.add_argument("--out", required=True, help="output JSON path")
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("fit", help="fit per-cluster forecast models")
    _add_common(sp, "config", "seed", "graph", "series")
    sp.add_argument("--clusters", required=True,
                    help="clusters JSON from cluster")
    sp.add_argument("--out", required=True, help="output JSON path")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("predict", help="rolling test-window forecasts")
    _add_common(sp, "config", "seed", "graph", "series")
    sp.add_argument("--models", required=True, help="models JSON from fit")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("evaluate", help="score forecasts against truth")
    _add_common(sp, "config", "seed", "graph", "series")
    sp.add_argument("--models", required=True, help="models JSON from fit")
    sp.add_argument("--forecasts", required=True,
                    help="directory with forecast_h*.csv")
    sp.add_argument("--out", required=True, help="output metrics JSON path")
    sp.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"unexpected error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
