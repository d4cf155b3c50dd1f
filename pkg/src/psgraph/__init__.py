"""Piecewise-stationary modeling of random processes on graphs.

Graph primitives and spectral tooling, stationarity measures on graphs and
their induced subgraphs, extraction of threshold-exceeding active
components, stationarity-gated hierarchical clustering, and per-frequency
autoregressive forecasting, with a file-based pipeline CLI on top.
"""

from .active_components import (ActiveComponent, ActiveComponentExtractor,
                                active_mask, extract_active_components,
                                filter_min_size, strong_product_components,
                                strong_product_oracle)
from .clustering import (Cluster, ClusterSet, MergeEvent, Partition,
                         StationarySubgraphClustering, ac_distance_matrix,
                         cluster_active_components, finalize_partition,
                         shift_matrix, subgraph_gamma)
from .config import PipelineConfig, parse_config, split_indices
from .forecast import (ARModel, ClusterForecaster, ClusterModel,
                       ForecastMetrics, TARModel, ar_forecast,
                       causal_tti_selector, evaluate, fit_ar,
                       fit_cluster_model, fit_tar, forecast_cluster,
                       tar_forecast, transform_series, tti)
from .graph import (Graph, adjacency, build_graph, directed_laplacian,
                    erdos_renyi, induced_subgraph, set_distance,
                    undirected_neighbors, weakly_connected_components)
from .simulate import (ExpansionExperiment, ExpansionStep, nested_expansion,
                       nested_subgraph_gammas, quadratic_spectrum)
from .spectral import (SHIFT_ADJACENCY, SHIFT_DIRECTED_LAPLACIAN,
                       SpectralBasis, apply_filter, eigendecompose, gft,
                       igft, spectral_kernel)
from .stationarity import (CovarianceEstimate, SuperstationarityCheck,
                           check_superstationary, commutator_gap,
                           covariance_from_spectrum, deseasonalize,
                           difference, impute_moving_average,
                           sample_covariance, sample_gwss_process,
                           seasonal_means, spectral_projection,
                           stationarity_ratio, supercommute_bruteforce,
                           supercommutes, superstationary_covariance)
from .validation import ComputationError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "ARModel", "ActiveComponent", "ActiveComponentExtractor", "Cluster",
    "ClusterForecaster", "ClusterModel", "ClusterSet", "ComputationError",
    "CovarianceEstimate", "ExpansionExperiment", "ExpansionStep",
    "ForecastMetrics", "Graph", "MergeEvent", "Partition", "PipelineConfig",
    "SHIFT_ADJACENCY", "SHIFT_DIRECTED_LAPLACIAN", "SpectralBasis",
    "StationarySubgraphClustering", "SuperstationarityCheck", "TARModel",
    "ValidationError", "ac_distance_matrix", "active_mask", "adjacency",
    "apply_filter", "ar_forecast", "build_graph", "causal_tti_selector",
    "check_superstationary", "cluster_active_components", "commutator_gap",
    "covariance_from_spectrum", "deseasonalize", "difference",
    "directed_laplacian", "eigendecompose", "erdos_renyi", "evaluate",
    "extract_active_components", "filter_min_size", "finalize_partition",
    "fit_ar", "fit_cluster_model", "fit_tar", "forecast_cluster", "gft",
    "igft", "impute_moving_average", "induced_subgraph", "nested_expansion",
    "nested_subgraph_gammas", "parse_config", "quadratic_spectrum",
    "sample_covariance", "sample_gwss_process", "seasonal_means",
    "set_distance", "shift_matrix", "spectral_kernel", "spectral_projection",
    "split_indices", "stationarity_ratio", "strong_product_components", "strong_product_oracle",
    "subgraph_gamma", "supercommute_bruteforce", "supercommutes", "superstationary_covariance",
    "tar_forecast", "transform_series", "tti", "undirected_neighbors",
    "weakly_connected_components",
]
