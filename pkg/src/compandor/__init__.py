"""Companding scalar quantizers for a Gaussian source.

The optimal compressor is approximated by first-degree and quadratic
splines on two equal segments per half-axis; distortion and SQNR are
computed analytically and checked by exact integration and simulation.
"""

from .compressor import (
    Compressor,
    LinearSplineCompressor,
    OptimalCompressor,
    QuadraticSplineCompressor,
    SegmentGrid,
    fit_linear_spline,
    fit_quadratic_spline,
)
from .design import (
    Codebook,
    DesignConfig,
    ModelKind,
    Overload,
    Placement,
    build_codebook,
    build_segment_grid,
    design_quantizer,
    paper_table_config,
    support_threshold,
)
from .distortion import (
    DistortionReport,
    MonteCarloReport,
    evaluate_design,
    monte_carlo_sqnr,
    quantize,
    quantize_sample,
)

__all__ = [
    "Codebook",
    "Compressor",
    "DesignConfig",
    "DistortionReport",
    "LinearSplineCompressor",
    "ModelKind",
    "MonteCarloReport",
    "OptimalCompressor",
    "Overload",
    "Placement",
    "QuadraticSplineCompressor",
    "SegmentGrid",
    "build_codebook",
    "build_segment_grid",
    "design_quantizer",
    "evaluate_design",
    "fit_linear_spline",
    "fit_quadratic_spline",
    "monte_carlo_sqnr",
    "paper_table_config",
    "quantize",
    "quantize_sample",
    "support_threshold",
]
