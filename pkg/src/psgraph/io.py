"""Artifact files: graph and series CSVs, JSON records, plot data.

Every artifact records the hash of the graph it was computed on; readers
check it and refuse mismatched inputs. All writes are atomic (temp file
plus rename) and byte-deterministic: fixed key order in JSON, shortest
round-trip float formatting in CSVs, "\\n" newlines everywhere.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
import os
import tempfile

import numpy as np

from .active_components import ActiveComponent
from .clustering import Cluster, shift_matrix
from .forecast import ARModel, ClusterModel, TARModel
from .graph import Graph, build_graph, induced_subgraph
from .spectral import SpectralBasis, eigendecompose
from .validation import ValidationError


def graph_hash(g: Graph) -> str:
    """Stable hex digest of a graph's full structure, labels included."""
    h = hashlib.sha256()
    h.update(b"graph-v1\n")
    h.update(f"directed={int(g.directed)}\n".encode())
    h.update(f"n={g.n}\n".encode())
    for lab in g.labels:
        h.update(f"label:{lab}\n".encode())
    for i, j, w in g.edges:
        h.update(f"edge:{i},{j},{w!r}\n".encode())
    return h.hexdigest()


def atomic_write_text(path, text: str) -> None:
    """Write text to path via a temp file in the same directory."""
    path = os.fspath(path)
    parent = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    return repr(float(value))


def csv_text(rows) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# graph files


def write_graph_csv(path, g: Graph) -> None:
    """Edge list with src,dst,weight header.

    Every vertex is declared first on its own row (empty dst and weight),
    in id order, so isolated vertices survive and a reload reproduces the
    identical id assignment.
    """
    rows = [["src", "dst", "weight"]]
    for lab in g.labels:
        rows.append([lab, "", ""])
    for i, j, w in g.edges:
        rows.append([g.labels[i], g.labels[j], _fmt(w)])
    atomic_write_text(path, csv_text(rows))


def read_graph_csv(path, directed: bool = False) -> Graph:
    """Parse an edge-list CSV; labels get dense ids in first-seen order."""
    labels: list[str] = []
    index: dict[str, int] = {}
    edges = []

    def vid(lab: str) -> int:
        if lab not in index:
            index[lab] = len(labels)
            labels.append(lab)
        return index[lab]

    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)
                if r and not (r[0].startswith("#"))]
    if not rows:
        raise ValidationError(f"{path}: empty graph file")
    header = [c.strip().lower() for c in rows[0]]
    if header[:3] != ["src", "dst", "weight"]:
        raise ValidationError(f"{path}: expected header src,dst,weight")
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 1 or not row[0].strip():
            raise ValidationError(f"{path}:{lineno}: missing src label")
        src = row[0].strip()
        dst = row[1].strip() if len(row) > 1 else ""
        if not dst:
            vid(src)
            continue
        wtxt = row[2].strip() if len(row) > 2 else ""
        try:
            w = float(wtxt) if wtxt else 1.0
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: bad weight {wtxt!r}")
        edges.append((vid(src), vid(dst), w))
    if not labels:
        raise ValidationError(f"{path}: no vertices")
    return build_graph(len(labels), edges, directed=directed, labels=tuple(labels))


def write_vertex_map_csv(path, g: Graph) -> None:
    """The label-to-id mapping, persisted for audit."""
    rows = [["id", "label"]]
    rows += [[str(i), lab] for i, lab in enumerate(g.labels)]
    atomic_write_text(path, csv_text(rows))


# ---------------------------------------------------------------------------
# time-series files


def write_series_csv(path, x, labels, comments=None, t0: int = 0) -> None:
    """Vertex-per-row series CSV; NaN cells are written empty.

    ``comments`` is an ordered mapping written as leading ``# key=value``
    lines (the graph hash travels this way on derived outputs).
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != len(labels):
        raise ValidationError("series shape does not match the label count")
    lines = []
    for key, value in (comments or {}).items():
        lines.append(f"# {key}={value}\n")
    rows = [["vertex"] + [f"t{t0 + j}" for j in range(arr.shape[1])]]
    for i, lab in enumerate(labels):
        row = [lab]
        for v in arr[i]:
            row.append("" if math.isnan(v) else _fmt(v))
        rows.append(row)
    atomic_write_text(path, "".join(lines) + csv_text(rows))


def read_comment_fields(path) -> dict[str, str]:
    """Leading ``# key=value`` lines of a CSV artifact."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                out[key.strip()] = value.strip()
    return out


def read_series_csv(path, graph: Graph | None = None):
    """Read a series CSV; returns (values, labels).

    With a graph, the vertex label set must match exactly and rows are
    reordered to the graph's id order. Empty cells become NaN.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)
                if r and not r[0].startswith("#")]
    if not rows:
        raise ValidationError(f"{path}: empty series file")
    header = rows[0]
    if not header or header[0].strip().lower() != "vertex":
        raise ValidationError(f"{path}: first column must be 'vertex'")
    width = len(header) - 1
    labels = []
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width + 1:
            raise ValidationError(
                f"{path}:{lineno}: expected {width + 1} fields, got {len(row)}")
        labels.append(row[0].strip())
        vals = []
        for cell in row[1:]:
            cell = cell.strip()
            if not cell:
                vals.append(math.nan)
            else:
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValidationError(f"{path}:{lineno}: bad value {cell!r}")
        data.append(vals)
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{path}: duplicate vertex labels")
    arr = np.asarray(data, dtype=float)
    if graph is None:
        return arr, tuple(labels)
    if set(labels) != set(graph.labels):
        raise ValidationError(
            f"{path}: vertex labels do not match the graph")
    order = [labels.index(lab) for lab in graph.labels]
    return arr[order], tuple(graph.labels)


# ---------------------------------------------------------------------------
# JSON artifacts


def _dump_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _load_json(path, kind: str, graph: Graph | None):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})")
    if not isinstance(doc, dict) or doc.get("kind") != kind:
        raise ValidationError(f"{path}: not a {kind!r} artifact")
    if graph is not None:
        want = graph_hash(graph)
        got = doc.get("graph_hash")
        if got != want:
            raise ValidationError(
                f"{path}: graph hash mismatch (artifact {got}, graph {want})")
    return doc


def _labels_of(g: Graph, vertices) -> list[str]:
    return [g.labels[v] for v in vertices]


def _ids_of(g: Graph, labels, where: str) -> tuple[int, ...]:
    try:
        return tuple(g.id_of(lab) for lab in labels)
    except ValidationError:
        raise ValidationError(f"{where}: unknown vertex label")


def write_active_components_json(path, g: Graph, acs, alpha: float,
                                 min_size: int) -> None:
    comps = [{"id": idx, "vertices": _labels_of(g, ac.vertices),
              "birth": ac.birth, "death": ac.death}
             for idx, ac in enumerate(acs)]
    doc = {"kind": "active-components", "graph_hash": graph_hash(g),
           "alpha": float(alpha), "min_size": int(min_size),
           "components": comps}
    atomic_write_text(path, _dump_json(doc))


def read_active_components_json(path, g: Graph) -> list[ActiveComponent]:
    doc = _load_json(path, "active-components", g)
    out = []
    for rec in doc["components"]:
        ids = _ids_of(g, rec["vertices"], where=str(path))
        out.append(ActiveComponent(vertices=tuple(sorted(ids)),
                                   birth=int(rec["birth"]),
                                   death=int(rec["death"])))
    return out


def write_clusters_json(path, g: Graph, clusters, unassigned,
                        gamma_th: float, theta: int, max_lag: int,
                        shift: str) -> None:
    recs = [{"cluster_id": c.id, "vertices": _labels_of(g, c.vertices),
             "gamma": float(c.gamma), "lags_checked": int(c.lags_checked)}
            for c in clusters]
    doc = {"kind": "clusters", "graph_hash": graph_hash(g),
           "gamma_th": float(gamma_th), "theta": int(theta),
           "max_lag": int(max_lag), "shift": shift,
           "clusters": recs,
           "unassigned": _labels_of(g, sorted(unassigned))}
    atomic_write_text(path, _dump_json(doc))


def read_clusters_json(path, g: Graph):
    """Returns (clusters, unassigned ids, meta dict)."""
    doc = _load_json(path, "clusters", g)
    clusters = []
    for rec in doc["clusters"]:
        ids = _ids_of(g, rec["vertices"], where=str(path))
        clusters.append(Cluster(id=int(rec["cluster_id"]),
                                vertices=tuple(sorted(ids)),
                                gamma=float(rec["gamma"]),
                                lags_checked=int(rec["lags_checked"])))
    unassigned = _ids_of(g, doc.get("unassigned", ()), where=str(path))
    meta = {"gamma_th": doc["gamma_th"], "theta": doc["theta"],
            "max_lag": doc["max_lag"], "shift": doc["shift"]}
    return clusters, tuple(sorted(unassigned)), meta


def _encode_ar(m: ARModel) -> dict:
    return {"kind": "ar", "order": m.order,
            "intercept": m.intercept,
            "coefficients": list(m.coefficients),
            "noise_scale": m.noise_scale}


def _decode_ar(rec) -> ARModel:
    return ARModel(order=int(rec["order"]),
                   coefficients=tuple(float(c) for c in rec["coefficients"]),
                   intercept=float(rec["intercept"]),
                   noise_scale=float(rec["noise_scale"]))


def _encode_frequency(m) -> dict:
    if isinstance(m, TARModel):
        return {"kind": "tar",
                "exogenous": m.exogenous_kind,
                "thresholds": [float(b) for b in m.thresholds[1:-1]],
                "regimes": [_encode_ar(r) for r in m.regimes]}
    return _encode_ar(m)


def _decode_frequency(rec):
    if rec["kind"] == "tar":
        interior = tuple(float(b) for b in rec["thresholds"])
        return TARModel(thresholds=(-math.inf, *interior, math.inf),
                        regimes=tuple(_decode_ar(r) for r in rec["regimes"]),
                        exogenous_kind=rec.get("exogenous", "exogenous"))
    if rec["kind"] == "ar":
        return _decode_ar(rec)
    raise ValidationError(f"unknown frequency model kind {rec['kind']!r}")


def write_models_json(path, g: Graph, models, model_kind: str, shift: str,
                      seasonal_period: int, differenced: bool,
                      train_end: int, validation_end: int) -> None:
    recs = []
    for m in models:
        means = None
        if m.seasonal_means is not None:
            means = [[float(v) for v in row] for row in m.seasonal_means]
        recs.append({"cluster_id": m.cluster_id,
                     "vertices": _labels_of(g, m.vertices),
                     "order": m.order,
                     "seasonal_means": means,
                     "frequencies": [_encode_frequency(fm)
                                     for fm in m.frequency_models]})
    doc = {"kind": "models", "graph_hash": graph_hash(g),
           "model": model_kind, "shift": shift,
           "seasonal_period": int(seasonal_period),
           "differenced": bool(differenced),
           "train_end": int(train_end),
           "validation_end": int(validation_end),
           "clusters": recs}
    atomic_write_text(path, _dump_json(doc))


def read_models_json(path, g: Graph):
    """Returns (cluster models, meta dict); bases are recomputed."""
    doc = _load_json(path, "models", g)
    shift = doc["shift"]
    period = int(doc["seasonal_period"])
    differenced = bool(doc["differenced"])
    models = []
    for rec in doc["clusters"]:
        ids = _ids_of(g, rec["vertices"], where=str(path))
        ids = tuple(sorted(ids))
        sub, _ = induced_subgraph(g, ids)
        basis = eigendecompose(shift_matrix(sub, shift), shift_kind=shift)
        freqs = tuple(_decode_frequency(f) for f in rec["frequencies"])
        if len(freqs) != len(ids):
            raise ValidationError(
                f"{path}: cluster {rec['cluster_id']} has {len(freqs)} "
                f"frequency models for {len(ids)} vertices")
        means = rec.get("seasonal_means")
        means_arr = None if means is None else np.asarray(means, dtype=float)
        kind = "tar" if any(isinstance(f, TARModel) for f in freqs) else "ar"
        models.append(ClusterModel(cluster_id=int(rec["cluster_id"]),
                                   vertices=ids, basis=basis, kind=kind,
                                   frequency_models=freqs,
                                   seasonal_period=period,
                                   seasonal_means=means_arr,
                                   differenced=differenced))
    meta = {"model": doc["model"], "shift": shift,
            "seasonal_period": period, "differenced": differenced,
            "train_end": int(doc["train_end"]),
            "validation_end": int(doc["validation_end"])}
    return models, meta


def write_metrics_json(path, g: Graph, model_kind: str, horizons) -> None:
    """``horizons`` maps horizon -> ForecastMetrics."""
    table = {str(int(h)): {"mae": m.mae, "rmse": m.rmse, "mape": m.mape}
             for h, m in horizons.items()}
    doc = {"kind": "metrics", "graph_hash": graph_hash(g),
           "model": model_kind, "horizons": table}
    atomic_write_text(path, _dump_json(doc))


def read_metrics_json(path, g: Graph | None = None):
    doc = _load_json(path, "metrics", g)
    return doc


# ---------------------------------------------------------------------------
# plot data and audit CSVs


def write_merge_log_csv(path, g: Graph, log) -> None:
    rows = [["event", "left", "right", "distance", "gamma", "new_id"]]
    for ev in log:
        rows.append([
            ev.action,
            "" if ev.left is None else str(ev.left),
            "" if ev.right is None else str(ev.right),
            "" if ev.distance is None else _fmt(ev.distance),
            _fmt(ev.gamma),
            "" if ev.new_id is None else str(ev.new_id),
        ])
    text = f"# graph_hash={graph_hash(g)}\n" + csv_text(rows)
    atomic_write_text(path, text)


def write_gamma_hist_csv(path, g: Graph, gammas, bins: int = 20) -> None:
    """Histogram of stationarity ratios over [0, 1]."""
    counts, edges = np.histogram(np.asarray(gammas, dtype=float),
                                 bins=bins, range=(0.0, 1.0))
    rows = [["bin_start", "bin_end", "count"]]
    for k in range(bins):
        rows.append([_fmt(edges[k]), _fmt(edges[k + 1]), str(int(counts[k]))])
    text = f"# graph_hash={graph_hash(g)}\n" + csv_text(rows)
    atomic_write_text(path, text)


def write_covariance_csv(path, g: Graph, matrix, lag: int = 0) -> None:
    arr = np.asarray(matrix, dtype=float)
    if arr.shape != (g.n, g.n):
        raise ValidationError("covariance shape does not match the graph")
    rows = [["vertex"] + list(g.labels)]
    for i, lab in enumerate(g.labels):
        rows.append([lab] + [_fmt(v) for v in arr[i]])
    text = (f"# graph_hash={graph_hash(g)}\n# lag={int(lag)}\n"
            + csv_text(rows))
    atomic_write_text(path, text)


def export_basis(prefix, basis: SpectralBasis) -> tuple[str, str]:
    """Write eigenvalues and eigenvector columns as two CSVs.

    Returns the two paths ({prefix}_eigenvalues.csv, {prefix}_vectors.csv).
    """
    prefix = os.fspath(prefix)
    val_path = prefix + "_eigenvalues.csv"
    vec_path = prefix + "_vectors.csv"
    rows = [["index", "eigenvalue"]]
    rows += [[str(i), _fmt(v)] for i, v in enumerate(basis.eigenvalues)]
    atomic_write_text(val_path, f"# shift={basis.shift_kind}\n" + csv_text(rows))
    n = basis.n
    rows = [["vertex"] + [f"u{k}" for k in range(n)]]
    for i in range(n):
        rows.append([str(i)] + [_fmt(v) for v in basis.eigenvectors[i]])
    atomic_write_text(vec_path, f"# shift={basis.shift_kind}\n" + csv_text(rows))
    return val_path, vec_path


def import_basis(prefix) -> SpectralBasis:
    prefix = os.fspath(prefix)
    val_path = prefix + "_eigenvalues.csv"
    vec_path = prefix + "_vectors.csv"
    kind = read_comment_fields(val_path).get("shift", "custom")
    with open(val_path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    vals = np.asarray([float(r[1]) for r in rows[1:]])
    with open(vec_path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    vecs = np.asarray([[float(c) for c in r[1:]] for r in rows[1:]])
    if vecs.shape != (vals.shape[0], vals.shape[0]):
        raise ValidationError("basis files disagree on dimension")
    return SpectralBasis(eigenvalues=vals, eigenvectors=vecs, shift_kind=kind)
