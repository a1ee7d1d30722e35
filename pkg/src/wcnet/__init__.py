"""Wavelet-coherence networks for panels of financial time series."""

__version__ = "0.1.0"

from .cwt import CwtField, MorletParams, ScaleGrid, cone_of_influence, cwt, make_scale_grid
from .coherence import (BandMatrix, CoherenceField, FrequencyBand, SmoothingParams, band_average,
                        band_matrices, coherence_pair, cross_wavelet, orient, smooth)
from .clustering import (ClusterAssignment, DissimMatrix, dissimilarity_matrix, gap_select_k,
                         gap_statistic, pam)
from .netgraph import Network, ThresholdEstimate, build_network, export_graph, noise_threshold
from .ingest import (PriceTable, ReturnPanel, StatsTable, align_and_clean, descriptive_stats,
                     load_price_table, log_returns, pearson_matrix, slice_period)

__all__ = [
    "BandMatrix", "ClusterAssignment", "CoherenceField", "CwtField", "DissimMatrix",
    "FrequencyBand", "MorletParams", "Network", "PriceTable", "ReturnPanel", "ScaleGrid",
    "SmoothingParams", "StatsTable", "ThresholdEstimate", "align_and_clean", "band_average",
    "band_matrices", "build_network", "coherence_pair", "cone_of_influence", "cross_wavelet",
    "cwt", "descriptive_stats", "dissimilarity_matrix", "export_graph", "gap_select_k",
    "gap_statistic", "load_price_table", "log_returns", "make_scale_grid", "noise_threshold", "orient",
    "pam", "pearson_matrix", "slice_period", "smooth",
]
