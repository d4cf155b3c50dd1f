"""Per-cluster forecasting along graph frequencies.

A cluster's signals are projected onto the eigenbasis of its own shift
operator; each graph frequency gets an independent scalar model, either an
ordinary autoregression or a threshold autoregression whose regime is
selected by an exogenous congestion indicator (the per-step sum of the
cluster's values). Forecasts are produced by iterated one-step substitution
in the spectral domain, transformed back, and undifferenced/re-seasonalized
to the raw scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .spectral import SHIFT_DIRECTED_LAPLACIAN, SpectralBasis, eigendecompose, gft, igft
from .stationarity import seasonal_means
from .validation import ValidationError, as_finite_array, check_time_series, check_vector

EXOG_CLUSTER_TTI_SUM = "cluster-tti-sum"


def tti(travel_time, free_flow_time):
    """Travel time index: observed travel time over free-flow travel time."""
    t = as_finite_array(travel_time, name="travel time")
    f = as_finite_array(free_flow_time, name="free-flow time")
    if np.any(f <= 0):
        raise ValidationError("free-flow time must be positive")
    if np.any(t < 0):
        raise ValidationError("travel time must be nonnegative")
    ratio = t / f
    return float(ratio) if np.isscalar(travel_time) else ratio


@dataclass(frozen=True)
class ARModel:
    """Autoregression y_t = intercept + sum_i a_i y_{t-i} + noise."""

    order: int
    coefficients: tuple[float, ...]
    intercept: float
    noise_scale: float


@dataclass(frozen=True)
class TARModel:
    """Threshold autoregression: the regime of y_t is picked by z_t.

    ``thresholds`` carries the sentinels: beta_0 = -inf and beta_l = +inf
    around the fitted interior thresholds. Regime j applies when
    beta_j < z <= beta_{j+1} (0-indexed).
    """

    thresholds: tuple[float, ...]
    regimes: tuple[ARModel, ...]
    exogenous_kind: str = "exogenous"

    def regime_of(self, z: float) -> int:
        interior = np.asarray(self.thresholds[1:-1])
        return int(np.searchsorted(interior, z, side="left"))


@dataclass(frozen=True)
class ForecastMetrics:
    mae: float
    rmse: float
    mape: float


def _lag_design(y: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    t = y.shape[0]
    cols = [np.ones(t - m)]
    cols += [y[m - i: t - i] for i in range(1, m + 1)]
    return np.column_stack(cols), y[m:]


def _ols(design: np.ndarray, targets: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    coef, _, rank, _ = np.linalg.lstsq(design, targets, rcond=None)
    if rank < m + 1:
        # collinear design (e.g. constant series): intercept-only fallback
        coef = np.zeros(m + 1)
        coef[0] = float(targets.mean()) if targets.size else 0.0
    residuals = targets - design @ coef
    return coef, residuals


def fit_ar(y, m: int = 5) -> ARModel:
    """Least-squares autoregression of order m with intercept."""
    y = check_vector(y, name="series")
    m = int(m)
    if m < 1:
        raise ValidationError("order must be at least 1")
    if y.shape[0] <= 3 * m + 2:
        raise ValidationError(
            f"series of length {y.shape[0]} too short for order {m}")
    design, targets = _lag_design(y, m)
    coef, residuals = _ols(design, targets, m)
    noise = float(np.sqrt(np.mean(residuals ** 2))) if residuals.size else 0.0
    return ARModel(order=m, coefficients=tuple(float(c) for c in coef[1:]),
                   intercept=float(coef[0]), noise_scale=noise)


def fit_tar(y, z, regimes: int = 3, m: int = 5, grid: int = 20,
            exogenous_kind: str = "exogenous") -> TARModel:
    """Threshold autoregression with quantile grid search over thresholds.

    Candidate interior thresholds are empirical quantiles of z (interior
    grid levels); every layout leaving some regime under m+2 samples is
    skipped; the layout minimizing the pooled sum of squared residuals wins.
    """
    y = check_vector(y, name="series")
    z = check_vector(z, name="selector")
    if y.shape[0] != z.shape[0]:
        raise ValidationError("series and selector lengths differ")
    regimes = int(regimes)
    m = int(m)
    if regimes < 1:
        raise ValidationError("regime count must be at least 1")
    if regimes == 1:
        base = fit_ar(y, m)
        return TARModel(thresholds=(-math.inf, math.inf), regimes=(base,),
                        exogenous_kind=exogenous_kind)
    if m < 1:
        raise ValidationError("order must be at least 1")
    if y.shape[0] <= 3 * m + 2:
        raise ValidationError(
            f"series of length {y.shape[0]} too short for order {m}")
    if int(grid) < regimes - 1:
        raise ValidationError("grid too coarse for the regime count")
    design, targets = _lag_design(y, m)
    zt = z[m:]
    levels = np.linspace(0.0, 1.0, int(grid) + 2)[1:-1]
    candidates = np.unique(np.quantile(zt, levels))
    if candidates.shape[0] < regimes - 1:
        raise ValidationError("selector has too few distinct values")
    floor = m + 2
    best_ssr = math.inf
    best_betas = None
    for combo in itertools.combinations(candidates, regimes - 1):
        betas = np.asarray(combo)
        assign = np.searchsorted(betas, zt, side="left")
        counts = np.bincount(assign, minlength=regimes)
        if np.any(counts < floor):
            continue
        ssr = 0.0
        for r in range(regimes):
            idx = assign == r
            _, residuals = _ols(design[idx], targets[idx], m)
            ssr += float(residuals @ residuals)
        if ssr < best_ssr:
            best_ssr = ssr
            best_betas = betas
    if best_betas is None:
        raise ValidationError(
            f"no threshold layout leaves every regime at least {floor} samples")
    assign = np.searchsorted(best_betas, zt, side="left")
    fitted = []
    for r in range(regimes):
        idx = assign == r
        coef, residuals = _ols(design[idx], targets[idx], m)
        noise = float(np.sqrt(np.mean(residuals ** 2))) if residuals.size else 0.0
        fitted.append(ARModel(order=m,
                              coefficients=tuple(float(c) for c in coef[1:]),
                              intercept=float(coef[0]), noise_scale=noise))
    thresholds = (-math.inf, *(float(b) for b in best_betas), math.inf)
    return TARModel(thresholds=thresholds, regimes=tuple(fitted),
                    exogenous_kind=exogenous_kind)


def _step_ar(model: ARModel, lags: np.ndarray) -> float:
    return model.intercept + float(np.dot(model.coefficients, lags[: model.order]))


def ar_forecast(model: ARModel, history, horizon: int) -> np.ndarray:
    """Iterated multi-step forecast of a scalar autoregression."""
    h = check_vector(history, name="history")
    if h.shape[0] < model.order:
        raise ValidationError("history shorter than the model order")
    lags = h[::-1][: model.order].copy()
    out = np.empty(int(horizon))
    for k in range(int(horizon)):
        val = _step_ar(model, lags)
        out[k] = val
        lags = np.concatenate(([val], lags[:-1]))
    return out


def tar_forecast(model: TARModel, history, z, horizon: int) -> np.ndarray:
    """Iterated forecast of a threshold autoregression.

    ``z`` is the selector value used for every step, or one value per step.
    """
    h = check_vector(history, name="history")
    order = max(reg.order for reg in model.regimes)
    if h.shape[0] < order:
        raise ValidationError("history shorter than the model order")
    horizon = int(horizon)
    zs = np.broadcast_to(np.asarray(z, dtype=float), (horizon,))
    lags = h[::-1][:order].copy()
    out = np.empty(horizon)
    for k in range(horizon):
        reg = model.regimes[model.regime_of(float(zs[k]))]
        val = _step_ar(reg, lags)
        out[k] = val
        lags = np.concatenate(([val], lags[:-1]))
    return out


@dataclass(frozen=True)
class ClusterModel:
    """Per-frequency models for one cluster plus reconstruction metadata.

    ``frequency_models`` holds one ARModel or TARModel per eigenvector of
    ``basis``. ``seasonal_means``/``seasonal_period`` and ``differenced``
    describe the preprocessing applied before fitting, so forecasts can be
    mapped back to the raw scale; ``vertices`` are original graph ids.
    """

    cluster_id: int
    vertices: tuple[int, ...]
    basis: SpectralBasis
    kind: str
    frequency_models: tuple
    seasonal_period: int = 0
    seasonal_means: np.ndarray | None = None
    differenced: bool = False

    @property
    def order(self) -> int:
        orders = []
        for fm in self.frequency_models:
            if isinstance(fm, TARModel):
                orders.extend(reg.order for reg in fm.regimes)
            else:
                orders.append(fm.order)
        return max(orders)


def transform_series(x, period: int = 0, differenced: bool = False,
                     means: np.ndarray | None = None, t0: int = 0):
    """Deseasonalize and difference a raw series.

    Returns the transformed matrix and the per-phase means used (computed
    from ``x`` itself when not supplied). ``t0`` is the absolute time index
    of the first column, fixing the phase alignment.
    """
    arr = check_time_series(x, name="series")
    period = int(period)
    if period:
        if means is None:
            means = seasonal_means(arr, period)
        phases = (int(t0) + np.arange(arr.shape[1])) % period
        arr = arr - means[:, phases]
    else:
        means = None
    if differenced:
        if arr.shape[1] < 2:
            raise ValidationError("differencing needs at least 2 samples")
        arr = np.diff(arr, axis=1)
    return arr, means


def causal_tti_selector(raw, differenced: bool) -> np.ndarray:
    """Regime selector aligned with the transformed series columns.

    The selector for the model target at transformed column k is the
    cluster-wide sum one raw step before that target, so regimes stay
    decidable at prediction time.
    """
    arr = check_time_series(raw, name="series")
    sums = arr.sum(axis=0)
    if differenced:
        return sums[:-1]
    return np.concatenate((sums[:1], sums[:-1]))


def fit_cluster_model(x, basis: SpectralBasis, kind: str = "ar", order: int = 5,
                      regimes: int = 3, grid: int = 20, z=None,
                      cluster_id: int = 0, vertices=None,
                      exogenous_kind: str = EXOG_CLUSTER_TTI_SUM) -> ClusterModel:
    """Fit one scalar model per graph frequency of a preprocessed series.

    ``x`` must already be deseasonalized/differenced as desired; ``z`` is
    the exogenous regime selector aligned with the columns of ``x`` and is
    required for ``kind="tar"``.
    """
    arr = check_time_series(x, n_vertices=basis.n, name="series")
    if kind not in ("ar", "tar"):
        raise ValidationError(f"unknown model kind {kind!r}")
    spectral = gft(basis, arr)
    if kind == "tar":
        if z is None:
            raise ValidationError("tar fitting needs an exogenous selector series")
        z = check_vector(z, n=arr.shape[1], name="selector")
    models = []
    for f in range(basis.n):
        row = spectral[f]
        if kind == "ar":
            models.append(fit_ar(row, order))
        else:
            models.append(fit_tar(row, z, regimes=regimes, m=order, grid=grid,
                                  exogenous_kind=exogenous_kind))
    if vertices is None:
        vertices = tuple(range(basis.n))
    return ClusterModel(cluster_id=int(cluster_id),
                        vertices=tuple(int(v) for v in vertices),
                        basis=basis, kind=kind, frequency_models=tuple(models))


def forecast_cluster(model: ClusterModel, history, horizon: int,
                     t0: int = 0) -> np.ndarray:
    """Multi-step forecast on the raw scale.

    One-step forecasts are iterated per frequency in the spectral domain
    (noise at its zero mean), transformed back, then undifferenced and
    re-seasonalized. Threshold models select each step's regime from the
    cluster sum of the previous step, observed or reconstructed. Output is
    cluster size x horizon, aligned after the end of ``history``.
    """
    arr = check_time_series(history, n_vertices=model.basis.n, name="history")
    horizon = int(horizon)
    if horizon < 1:
        raise ValidationError("horizon must be at least 1")
    n, t_hist = arr.shape
    period = int(model.seasonal_period)
    if period and model.seasonal_means is None:
        raise ValidationError("model has a seasonal period but no stored means")
    work, _ = transform_series(arr, period=period, differenced=model.differenced,
                               means=model.seasonal_means, t0=t0)
    order = model.order
    if work.shape[1] < order:
        raise ValidationError(
            f"history leaves {work.shape[1]} transformed samples, "
            f"need at least {order}")
    spectral = gft(model.basis, work)
    lag_buffers = [spectral[f, ::-1][:order].copy() for f in range(n)]
    level = None
    if model.differenced:
        deseason = arr.copy()
        if period:
            phases = (int(t0) + np.arange(t_hist)) % period
            deseason = arr - model.seasonal_means[:, phases]
        level = deseason[:, -1].copy()
    selector = float(arr[:, -1].sum())
    out = np.empty((n, horizon))
    for h in range(1, horizon + 1):
        shat = np.empty(n)
        for f, fm in enumerate(model.frequency_models):
            lags = lag_buffers[f]
            if isinstance(fm, TARModel):
                reg = fm.regimes[fm.regime_of(selector)]
                val = _step_ar(reg, lags)
            else:
                val = _step_ar(fm, lags)
            shat[f] = val
            lag_buffers[f] = np.concatenate(([val], lags[:-1]))
        delta = igft(model.basis, shat)
        if model.differenced:
            level = level + delta
            deseason_h = level
        else:
            deseason_h = delta
        if period:
            phase = (int(t0) + t_hist + h - 1) % period
            raw = deseason_h + model.seasonal_means[:, phase]
        else:
            raw = deseason_h
        out[:, h - 1] = raw
        selector = float(raw.sum())
    return out


def evaluate(pred, truth, mask=None) -> ForecastMetrics:
    """MAE, RMSE, and MAPE between forecasts and ground truth.

    MAPE averages |error/truth| over unmasked entries only; without an
    explicit mask, entries with |truth| < 1e-6 are excluded. MAE and RMSE
    always cover every entry.
    """
    p = as_finite_array(pred, name="prediction")
    t = as_finite_array(truth, name="truth")
    if p.shape != t.shape:
        raise ValidationError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValidationError("nothing to evaluate")
    err = p - t
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err ** 2)))
    if mask is None:
        mask = np.abs(t) >= 1e-6
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != t.shape:
            raise ValidationError("mask shape mismatch")
    if not mask.any():
        raise ValidationError("every entry is masked; MAPE undefined")
    mape = float(100.0 * np.mean(np.abs(err[mask] / t[mask])))
    return ForecastMetrics(mae=mae, rmse=rmse, mape=mape)


class ClusterForecaster(BaseEstimator):
    """Forecast a cluster's signals with per-frequency AR or TAR models.

    Parameters
    ----------
    graph : Graph
        The cluster's own (sub)graph; X rows index its vertices.
    kind : {"ar", "tar"}, default="ar"
    order : int, default=5
        Autoregressive order.
    regimes : int, default=3
        Regime count for threshold models.
    grid : int, default=20
        Quantile grid size for threshold search.
    seasonal_period : int, default=0
        Per-phase mean removal period; 0 disables.
    difference : bool, default=True
        First-difference the (deseasonalized) series before fitting.
    shift : str, default="directed-laplacian"
        Shift operator whose eigenbasis defines the graph frequencies.

    Attributes
    ----------
    model_ : ClusterModel
    basis_ : SpectralBasis
    """

    def __init__(self, graph=None, kind="ar", order=5, regimes=3, grid=20,
                 seasonal_period=0, difference=True,
                 shift=SHIFT_DIRECTED_LAPLACIAN):
        self.graph = graph
        self.kind = kind
        self.order = order
        self.regimes = regimes
        self.grid = grid
        self.seasonal_period = seasonal_period
        self.difference = difference
        self.shift = shift

    def _shift_operator(self):
        from .clustering import shift_matrix

        return shift_matrix(self.graph, self.shift)

    def fit(self, X, y=None):
        if self.graph is None:
            raise ValidationError("a graph is required")
        X = check_time_series(X, n_vertices=self.graph.n, name="X")
        basis = eigendecompose(self._shift_operator(), shift_kind=self.shift)
        work, means = transform_series(X, period=self.seasonal_period,
                                       differenced=self.difference)
        z = causal_tti_selector(X, self.difference) if self.kind == "tar" else None
        model = fit_cluster_model(work, basis, kind=self.kind, order=self.order,
                                  regimes=self.regimes, grid=self.grid, z=z)
        self.model_ = replace(model, seasonal_period=int(self.seasonal_period),
                              seasonal_means=means,
                              differenced=bool(self.difference))
        self.basis_ = basis
        self.history_ = X
        return self

    def predict(self, horizon, X=None, t0=0):
        """Forecast ``horizon`` steps past the end of the history.

        ``X`` replaces the training series as history when given; ``t0`` is
        the absolute time index of its first column (phase alignment).
        """
        check_is_fitted(self)
        history = self.history_ if X is None else X
        return forecast_cluster(self.model_, history, horizon, t0=t0)

    def __sklearn_is_fitted__(self):
        return hasattr(self, "model_")
