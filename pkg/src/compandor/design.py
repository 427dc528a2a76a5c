"""Companding quantizer construction.

The support ``[-x_max, x_max]`` is split into ``2L`` equal segments. A
compressor (optimal or spline) maps it onto itself, and a uniform grid with
step ``2 x_max / (N - 2)`` in the compressed domain defines ``N - 2`` inner
cells. Inputs beyond the support map to the overload level ``±y_max``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .compressor import (
    Compressor,
    OptimalCompressor,
    SegmentGrid,
    fit_linear_spline,
    fit_quadratic_spline,
)
from .errors import ConfigError, DesignError, NumericError
from .special_math import GaussianParams, gaussian_tail_moment


class ModelKind(str, enum.Enum):
    OPTIMAL = "optimal"
    LINEAR = "linear"
    QUADRATIC = "quadratic"

    @classmethod
    def _missing_(cls, value):
        aliases = {"linear_spline": cls.LINEAR, "quadratic_spline": cls.QUADRATIC}
        if isinstance(value, str):
            return aliases.get(value.lower())
        return None


class Placement(str, enum.Enum):
    """Where the inner reproduction levels sit in the compressed domain.

    ``GLOBAL``: one grid ``(2k - 1) step / 2`` across the whole support; a
    level belongs to the segment whose compressed range contains it.

    ``SEGMENT``: each segment restarts the grid at its own left compressed
    edge, ``c(x_{i-1}) + (2j - 1) step / 2`` for ``j = 1..n_i``. Decision
    thresholds then sit halfway between neighbouring compressed levels.
    """

    GLOBAL = "global"
    SEGMENT = "segment"


class Overload(str, enum.Enum):
    EXACT = "exact"  # centroid level, tail integral evaluated exactly
    CLOSED = "closed"  # large-x_max asymptotic expression


@dataclass(frozen=True)
class DesignConfig:
    levels: int
    model: ModelKind = ModelKind.QUADRATIC
    segments: int = 2
    sigma: float = 1.0
    placement: Placement = Placement.GLOBAL
    overload: Overload = Overload.EXACT

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "model", ModelKind(self.model))
            object.__setattr__(self, "placement", Placement(self.placement))
            object.__setattr__(self, "overload", Overload(self.overload))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if isinstance(self.levels, bool) or int(self.levels) != self.levels:
            raise ConfigError(f"number of levels must be an integer, got {self.levels!r}")
        object.__setattr__(self, "levels", int(self.levels))
        if self.levels < 8 or self.levels % 2:
            raise ConfigError(f"number of levels must be even and at least 8, got {self.levels}")
        if self.segments < 1:
            raise ConfigError(f"segments per half-axis must be at least 1, got {self.segments}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError(f"sigma must be positive, got {self.sigma}")

    @property
    def inner_per_side(self) -> int:
        return (self.levels - 2) // 2

    @property
    def params(self) -> GaussianParams:
        return GaussianParams(self.sigma)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("model", "placement", "overload"):
            d[key] = d[key].value
        return d


# Choices that reproduce each computed column of the published SQNR table.
PAPER_TABLE_SETTINGS: dict[ModelKind, tuple[Placement, Overload]] = {
    ModelKind.LINEAR: (Placement.SEGMENT, Overload.CLOSED),
    ModelKind.QUADRATIC: (Placement.GLOBAL, Overload.CLOSED),
    ModelKind.OPTIMAL: (Placement.GLOBAL, Overload.EXACT),
}


def paper_table_config(levels: int, model: ModelKind | str, sigma: float = 1.0) -> DesignConfig:
    """Config with the level placement and overload formula used for the published table."""
    kind = ModelKind(model)
    placement, overload = PAPER_TABLE_SETTINGS[kind]
    return DesignConfig(levels, kind, 2, sigma, placement, overload)


def support_threshold(levels: int, sigma: float = 1.0) -> float:
    """Asymptotically optimal support threshold for N levels."""
    if levels < 4:
        raise ConfigError(f"support threshold needs N >= 4, got {levels}")
    ln = math.log(levels)
    return sigma * math.sqrt(6.0 * ln) * (
        1.0 - math.log(ln) / (4.0 * ln) - math.log(3.0 * math.sqrt(math.pi)) / (2.0 * ln)
    )


def build_segment_grid(config: DesignConfig) -> SegmentGrid:
    x_max = support_threshold(config.levels, config.sigma)
    optimal = OptimalCompressor(x_max, config.sigma)
    knots = [i * x_max / config.segments for i in range(config.segments + 1)]
    knots[-1] = x_max
    values = [float(optimal.evaluate(k)) for k in knots]
    values[0], values[-1] = 0.0, x_max
    return SegmentGrid(tuple(knots), tuple(values), config.sigma)


def build_model(config: DesignConfig, grid: SegmentGrid | None = None) -> Compressor:
    grid = grid or build_segment_grid(config)
    if config.model is ModelKind.OPTIMAL:
        return OptimalCompressor(grid.x_max, config.sigma)
    if config.model is ModelKind.LINEAR:
        return fit_linear_spline(grid)
    return fit_quadratic_spline(grid)


def allocate_levels(grid: SegmentGrid, levels: int) -> tuple[tuple[float, ...], tuple[int, ...]]:
    """Share of the ``(N - 2) / 2`` positive inner levels owned by each segment.

    The exact share is proportional to the compressed width of the segment.
    Integer counts are the number of midpoints ``(2k - 1) step / 2`` whose
    value lies in ``(c(x_{i-1}), c(x_i)]``; this rounds the cumulative shares
    to nearest, so counts always add up.
    """
    per_side = (levels - 2) // 2
    v = grid.values
    x_max = grid.x_max
    shares = tuple(per_side * (v[i] - v[i - 1]) / x_max for i in range(1, len(v)))
    step = 2.0 * x_max / (levels - 2)
    # number of midpoints at or below each compressed knot value
    cumulative = [0] + [min(per_side, max(0, math.floor(val / step + 0.5))) for val in v[1:]]
    cumulative[-1] = per_side
    counts = tuple(cumulative[i] - cumulative[i - 1] for i in range(1, len(cumulative)))
    return shares, counts


@dataclass(frozen=True)
class Codebook:
    """Positive half of a symmetric companding codebook.

    ``levels[k]`` represents the cell ``(edges[k], edges[k + 1]]``; the
    corresponding compressed-domain values are ``compressed_levels`` and
    ``compressed_edges``. ``cell_lengths`` is the first-order estimate
    ``step / c'(level)``.
    """

    levels_total: int
    step: float
    x_max: float
    levels: tuple[float, ...]
    compressed_levels: tuple[float, ...]
    segment_tags: tuple[tuple[int, int], ...]
    edges: tuple[float, ...]
    compressed_edges: tuple[float, ...]
    cell_lengths: tuple[float, ...]
    y_max: float
    counts: tuple[int, ...]
    shares: tuple[float, ...]
    placement: Placement = Placement.GLOBAL
    sigma: float = 1.0

    @property
    def inner_per_side(self) -> int:
        return len(self.levels)

    def reproduction_levels(self) -> np.ndarray:
        """All N output levels in increasing order."""
        pos = np.array(self.levels + (self.y_max,))
        return np.concatenate([-pos[::-1], pos])

    def to_dict(self) -> dict:
        return {
            "levels_total": self.levels_total,
            "sigma": self.sigma,
            "placement": self.placement.value,
            "step": self.step,
            "x_max": self.x_max,
            "y_max": self.y_max,
            "counts": list(self.counts),
            "shares": list(self.shares),
            "levels": list(self.levels),
            "segment_tags": [list(t) for t in self.segment_tags],
            "edges": list(self.edges),
            "cell_lengths": list(self.cell_lengths),
            "compressed_levels": list(self.compressed_levels),
            "compressed_edges": list(self.compressed_edges),
        }


def centroid_overload_level(x_max: float, params: GaussianParams = GaussianParams()) -> float:
    """Conditional mean of the source beyond ``x_max``."""
    m0 = gaussian_tail_moment(0, x_max, params)
    if m0 <= 0.0:
        raise NumericError(f"tail probability beyond {x_max} underflows")
    return gaussian_tail_moment(1, x_max, params) / m0


def _segment_of(value: float, knot_values: tuple[float, ...]) -> int:
    # (c_{i-1}, c_i] -> i, with 1-based segments
    i = int(np.searchsorted(knot_values, value, side="left"))
    return min(max(i, 1), len(knot_values) - 1)


def build_codebook(config: DesignConfig, model: Compressor | None = None) -> Codebook:
    grid = build_segment_grid(config)
    model = model or build_model(config, grid)
    x_max = grid.x_max
    n = config.inner_per_side
    step = 2.0 * x_max / (config.levels - 2)
    shares, counts = allocate_levels(grid, config.levels)

    if config.placement is Placement.GLOBAL:
        u = [(2 * k - 1) * step / 2.0 for k in range(1, n + 1)]
        ue = [k * step for k in range(n + 1)]
    else:
        u = []
        for i, count in enumerate(counts):
            u.extend(grid.values[i] + (2 * j - 1) * step / 2.0 for j in range(1, count + 1))
        if u[-1] >= x_max:
            raise DesignError(
                f"segment placement puts a level at {u[-1]:.6g}, beyond the compressed support {x_max:.6g}"
            )
        ue = [0.0] + [0.5 * (u[k] + u[k + 1]) for k in range(n - 1)] + [x_max]
    ue[-1] = x_max

    tags = []
    seen = [0] * grid.segments
    for value in u:
        i = _segment_of(value, grid.values)
        seen[i - 1] += 1
        tags.append((i, seen[i - 1]))

    levels = tuple(model.inverse(v) for v in u)
    edges = [model.inverse(v) for v in ue]
    edges[0], edges[-1] = 0.0, x_max
    slopes = np.asarray(model.derivative(np.array(levels)))
    if np.any(slopes <= 0):
        raise DesignError("compressor slope vanishes at a reproduction level")
    cell_lengths = tuple(float(step / s) for s in slopes)

    ordered = all(edges[k] < levels[k] < edges[k + 1] for k in range(n))
    if not ordered:
        raise DesignError("reproduction levels are not nested inside their cells")

    return Codebook(
        levels_total=config.levels,
        step=step,
        x_max=x_max,
        levels=levels,
        compressed_levels=tuple(u),
        segment_tags=tuple(tags),
        edges=tuple(edges),
        compressed_edges=tuple(ue),
        cell_lengths=cell_lengths,
        y_max=centroid_overload_level(x_max, config.params),
        counts=counts if config.placement is Placement.SEGMENT else tuple(seen),
        shares=shares,
        placement=config.placement,
        sigma=config.sigma,
    )


@dataclass(frozen=True)
class Quantizer:
    """A fitted compressor with its codebook."""

    config: DesignConfig
    grid: SegmentGrid
    model: Compressor
    codebook: Codebook = field(repr=False)


def design_quantizer(config: DesignConfig) -> Quantizer:
    grid = build_segment_grid(config)
    model = build_model(config, grid)
    return Quantizer(config, grid, model, build_codebook(config, model))
