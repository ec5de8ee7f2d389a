"""Voronoi residual diagnostics for spatial and spatial-temporal point processes.

Tessellates observed point patterns, integrates modeled intensities over the
cells, scores the residuals against a gamma reference law, and drives
PIT/K-S goodness-of-fit and power experiments.  Includes simulation and
maximum-likelihood fitting of the ETAS aftershock model.
"""

from vorres.geometry import Window, ConvexCell, VoronoiDiagram, PixelGrid, tessellate
from vorres.catalog import Catalog
from vorres.intensity import IntensityModel, EtasParams, integrate_cell, integrate_cells, integrate_pixels
from vorres.simulate import sample_poisson, sample_etas, buffered_sample
from vorres.residuals import (
    GammaReference,
    ResidualRecord,
    voronoi_residuals,
    pixel_residuals,
    randomized_pit,
    residual_color_scale,
)
from vorres.inference import (
    KsResult,
    PowerResult,
    VoronoiPartition,
    PixelPartition,
    ks_statistic,
    simulated_critical_value,
    power_study,
    pit_histogram,
)
from vorres.etas_fit import FitResult, log_likelihood, fit_mle

__version__ = "0.1.0"

__all__ = [
    "Window",
    "ConvexCell",
    "VoronoiDiagram",
    "PixelGrid",
    "tessellate",
    "Catalog",
    "IntensityModel",
    "EtasParams",
    "integrate_cell",
    "integrate_cells",
    "integrate_pixels",
    "sample_poisson",
    "sample_etas",
    "buffered_sample",
    "GammaReference",
    "ResidualRecord",
    "voronoi_residuals",
    "pixel_residuals",
    "randomized_pit",
    "residual_color_scale",
    "KsResult",
    "PowerResult",
    "VoronoiPartition",
    "PixelPartition",
    "ks_statistic",
    "simulated_critical_value",
    "power_study",
    "pit_histogram",
    "FitResult",
    "log_likelihood",
    "fit_mle",
]
