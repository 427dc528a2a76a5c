"""Compressor functions: the optimal Gaussian compressor and its spline fits.

All compressors are odd, monotone maps of ``[-x_max, x_max]`` onto itself.
They are defined on the positive half-axis and extended by symmetry.

Piece selection convention: a point lying exactly on an interior knot
belongs to the piece on its left. The same rule picks the derivative at a
knot.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, NumericError
from .special_math import erf, find_root_monotone

SQRT6 = math.sqrt(6.0)
# Rounding slack when a caller hands in x_max computed along another path.
_EDGE_SLACK = 1e-12


@dataclass(frozen=True)
class SegmentGrid:
    """Knots ``0 = x_0 < ... < x_L = x_max`` and compressor values there."""

    knots: tuple[float, ...]
    values: tuple[float, ...]
    sigma: float = 1.0

    def __post_init__(self) -> None:
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.size < 2 or k.size != v.size:
            raise FitError("grid needs matching knot/value lists with at least two entries")
        if k[0] != 0.0 or v[0] != 0.0:
            raise FitError("grid must start at the origin with value 0")
        if np.any(np.diff(k) <= 0):
            raise FitError("knots must be strictly increasing")
        if np.any(np.diff(v) <= 0):
            raise FitError("compressor values must be strictly increasing")
        if abs(v[-1] - k[-1]) > _EDGE_SLACK * k[-1]:
            raise FitError("compressor must map x_max onto itself")
        object.__setattr__(self, "knots", tuple(float(x) for x in k))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @property
    def x_max(self) -> float:
        return self.knots[-1]

    @property
    def segments(self) -> int:
        return len(self.knots) - 1


class Compressor(ABC):
    """Odd monotone compressor on ``[-x_max, x_max]``.

    Subclasses implement the positive half-axis; ``evaluate`` and
    ``derivative`` accept scalars or numpy arrays, ``inverse`` a scalar.
    """

    kind: str
    x_max: float
    sigma: float

    @abstractmethod
    def _evaluate_positive(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _derivative_positive(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _inverse_positive(self, u: float) -> float: ...

    @abstractmethod
    def to_dict(self) -> dict: ...

    def _magnitude(self, x) -> np.ndarray:
        a = np.abs(np.asarray(x, dtype=float))
        if not np.all(np.isfinite(a)):
            raise DomainError("compressor input must be finite")
        limit = self.x_max * (1.0 + _EDGE_SLACK)
        if np.any(a > limit):
            raise DomainError(f"|x| exceeds the support threshold {self.x_max}")
        return np.minimum(a, self.x_max)

    def evaluate(self, x):
        a = self._magnitude(x)
        out = np.copysign(self._evaluate_positive(a), x)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        out = self._derivative_positive(self._magnitude(x))
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, u: float) -> float:
        u = float(u)
        if not math.isfinite(u):
            raise DomainError("compressed value must be finite")
        a = abs(u)
        if a > self.x_max * (1.0 + _EDGE_SLACK):
            raise DomainError(f"|u| = {a} exceeds x_max = {self.x_max}")
        a = min(a, self.x_max)
        if a == 0.0:
            return math.copysign(0.0, u)
        if a == self.x_max:
            return math.copysign(self.x_max, u)
        return math.copysign(self._inverse_positive(a), u)

    __call__ = evaluate


class OptimalCompressor(Compressor):
    """Optimal compressor of a Gaussian source, scaled to map x_max to x_max.

    ``c(x) = x_max * erf(|x| / (sqrt(6) sigma)) / erf(x_max / (sqrt(6) sigma)) * sgn(x)``

    Inputs beyond the support are clamped to ``±x_max``. The inverse has no
    closed form in terms of the forward map's own primitives and is obtained
    by bracketed root finding.
    """

    kind = "optimal"

    def __init__(self, x_max: float, sigma: float = 1.0) -> None:
        if not (x_max > 0 and sigma > 0):
            raise DomainError("x_max and sigma must be positive")
        self.x_max = float(x_max)
        self.sigma = float(sigma)
        self._scale = SQRT6 * self.sigma
        self.normalizer = erf(self.x_max / self._scale)

    def _magnitude(self, x) -> np.ndarray:
        a = np.abs(np.asarray(x, dtype=float))
        if not np.all(np.isfinite(a)):
            raise DomainError("compressor input must be finite")
        return np.minimum(a, self.x_max)

    def _evaluate_positive(self, x):
        return self.x_max * erf(x / self._scale) / self.normalizer

    def _derivative_positive(self, x):
        z = x / self._scale
        return self.x_max * (2.0 / math.sqrt(math.pi)) * np.exp(-z * z) / (self._scale * self.normalizer)

    def _inverse_positive(self, u: float) -> float:
        return find_root_monotone(lambda x: float(self._evaluate_positive(x)) - u, 0.0, self.x_max, 1e-15)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "x_max": self.x_max}


class _SplineCompressor(Compressor):
    grid: SegmentGrid

    @property
    def knots(self) -> np.ndarray:
        return np.asarray(self.grid.knots)

    def _piece(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.knots, x, side="left") - 1
        return np.clip(idx, 0, self.grid.segments - 1)

    def _piece_of_value(self, u: float) -> int:
        idx = int(np.searchsorted(self.grid.values, u, side="left")) - 1
        return min(max(idx, 0), self.grid.segments - 1)


@dataclass(frozen=True, eq=False)
class LinearSplineCompressor(_SplineCompressor):
    """First-degree spline through the grid points (slopes ``m_i``)."""

    grid: SegmentGrid
    slopes: tuple[float, ...] = field(default=())
    kind = "linear"

    def __post_init__(self) -> None:
        if len(self.slopes) != self.grid.segments:
            raise FitError("need one slope per segment")
        if any(not m > 0 for m in self.slopes):
            raise FitError("linear spline slopes must be positive")

    @property
    def x_max(self) -> float:
        return self.grid.x_max

    @property
    def sigma(self) -> float:
        return self.grid.sigma

    def _evaluate_positive(self, x):
        i = self._piece(x)
        v = np.asarray(self.grid.values)
        return v[i] + np.asarray(self.slopes)[i] * (x - self.knots[i])

    def _derivative_positive(self, x):
        return np.asarray(self.slopes)[self._piece(x)]

    def _inverse_positive(self, u: float) -> float:
        i = self._piece_of_value(u)
        return self.grid.knots[i] + (u - self.grid.values[i]) / self.slopes[i]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "x_max": self.x_max,
            "knots": list(self.grid.knots),
            "values": list(self.grid.values),
            "slopes": list(self.slopes),
        }


@dataclass(frozen=True, eq=False)
class QuadraticSplineCompressor(_SplineCompressor):
    """C1 quadratic spline with pieces ``a_i + b_i x + d_i x**2``."""

    grid: SegmentGrid
    pieces: tuple[tuple[float, float, float], ...] = field(default=())
    kind = "quadratic"

    def __post_init__(self) -> None:
        if len(self.pieces) != self.grid.segments:
            raise FitError("need one coefficient triple per segment")
        # the derivative is linear on each piece, so checking piece ends suffices
        for i, (_, b, d) in enumerate(self.pieces):
            left, right = self.grid.knots[i], self.grid.knots[i + 1]
            slopes = [b + 2 * d * left]
            if i < self.grid.segments - 1:
                slopes.append(b + 2 * d * right)
            if min(slopes) <= 0:
                raise FitError(f"quadratic piece {i + 1} is not increasing on its interval")

    @property
    def x_max(self) -> float:
        return self.grid.x_max

    @property
    def sigma(self) -> float:
        return self.grid.sigma

    def _coefficients(self, x):
        c = np.asarray(self.pieces)[self._piece(x)]
        return c[..., 0], c[..., 1], c[..., 2]

    def _evaluate_positive(self, x):
        a, b, d = self._coefficients(x)
        return a + x * (b + d * x)

    def _derivative_positive(self, x):
        _, b, d = self._coefficients(x)
        return b + 2.0 * d * x

    def _inverse_positive(self, u: float) -> float:
        i = self._piece_of_value(u)
        a, b, d = self.pieces[i]
        lo, hi = self.grid.knots[i], self.grid.knots[i + 1]
        c0 = a - u
        if abs(d) < 1e-12:
            roots = [-c0 / b]
        else:
            disc = b * b - 4.0 * d * c0
            if disc < 0:
                # tangent at the terminal knot: the two roots merge
                if disc > -1e-12 * b * b:
                    disc = 0.0
                else:
                    raise NumericError(f"no real preimage of {u} on piece {i + 1}")
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            roots = [q / d]
            if q != 0.0:
                roots.append(c0 / q)
        width = hi - lo
        tol = 1e-9 * width
        inside = [r for r in roots if lo - tol <= r <= hi + tol]
        if not inside:
            raise NumericError(f"no preimage of {u} inside piece {i + 1} [{lo}, {hi}]")
        # two roots can only both qualify at the merging point; take the nearer
        r = min(inside, key=lambda r: abs(self._evaluate_positive(np.clip(r, lo, hi)) - u))
        return float(min(max(r, lo), hi))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "x_max": self.x_max,
            "knots": list(self.grid.knots),
            "values": list(self.grid.values),
            "pieces": [list(p) for p in self.pieces],
        }


def fit_linear_spline(grid: SegmentGrid) -> LinearSplineCompressor:
    k, v = grid.knots, grid.values
    slopes = tuple((v[i] - v[i - 1]) / (k[i] - k[i - 1]) for i in range(1, len(k)))
    return LinearSplineCompressor(grid=grid, slopes=slopes)


def fit_quadratic_spline(grid: SegmentGrid) -> QuadraticSplineCompressor:
    """Two-piece C1 quadratic spline through the grid, flat at x_max.

    Conditions: passes through the origin and both knots, has a continuous
    first derivative at the inner knot, and zero slope at x_max. These are
    solved in closed form, starting from the outer piece.
    """
    if grid.segments != 2:
        raise FitError(f"quadratic spline fit is defined for 2 segments, got {grid.segments}")
    _, x1, x2 = grid.knots
    _, c1, c2 = grid.values
    d2 = (c1 - c2) / (x2 - x1) ** 2
    b2 = -2.0 * d2 * x2
    a2 = c2 + d2 * x2 * x2
    s = b2 + 2.0 * d2 * x1
    d1 = (s * x1 - c1) / (x1 * x1)
    b1 = s - 2.0 * d1 * x1
    return QuadraticSplineCompressor(grid=grid, pieces=((0.0, b1, d1), (a2, b2, d2)))


def quadratic_system(grid: SegmentGrid) -> tuple[np.ndarray, np.ndarray]:
    """Linear system ``A @ (a1, b1, d1, a2, b2, d2) = rhs`` for the quadratic fit."""
    if grid.segments != 2:
        raise FitError(f"quadratic spline fit is defined for 2 segments, got {grid.segments}")
    _, x1, x2 = grid.knots
    _, c1, c2 = grid.values
    A = np.array([
        [1, 0, 0, 0, 0, 0],
        [1, x1, x1**2, 0, 0, 0],
        [0, 0, 0, 1, x1, x1**2],
        [0, 0, 0, 1, x2, x2**2],
        [0, 1, 2 * x1, 0, -1, -2 * x1],
        [0, 0, 0, 0, 1, 2 * x2],
    ], dtype=float)
    rhs = np.array([0.0, c1, c1, c2, 0.0, 0.0])
    return A, rhs


def solve_quadratic_system(grid: SegmentGrid) -> np.ndarray:
    A, rhs = quadratic_system(grid)
    try:
        return np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"singular quadratic spline system: {exc}") from exc


def quadratic_residuals(model: QuadraticSplineCompressor) -> np.ndarray:
    """Residuals of the six defining conditions at the fitted coefficients."""
    A, rhs = quadratic_system(model.grid)
    coeffs = np.array([c for piece in model.pieces for c in piece])
    return A @ coeffs - rhs


def model_from_dict(data: dict) -> Compressor:
    """Rebuild a compressor from the JSON form produced by ``to_dict``."""
    kind = data["kind"]
    sigma = float(data.get("sigma", 1.0))
    if kind == "optimal":
        return OptimalCompressor(data["x_max"], sigma)
    grid = SegmentGrid(tuple(data["knots"]), tuple(data["values"]), sigma)
    if kind == "linear":
        return LinearSplineCompressor(grid, tuple(data["slopes"]))
    if kind == "quadratic":
        return QuadraticSplineCompressor(grid, tuple(tuple(p) for p in data["pieces"]))
    raise DomainError(f"unknown compressor kind {kind!r}")
