"""Table and figure data, CSV/JSON writers and run manifests."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .compressor import OptimalCompressor, fit_linear_spline, fit_quadratic_spline
from .design import DesignConfig, ModelKind, build_segment_grid, paper_table_config
from .distortion import evaluate_design

TABLE_LEVELS = (16, 32, 64, 128)

# SQNR [dB] of the piecewise uniform reference quantizer, published values;
# that design is not implemented here.
REFERENCE_RS_SQNR = {16: 19.36, 32: 25.33, 64: 31.08, 128: 36.82}

QUADRATIC_COEFFS = ("a1", "b1", "d1", "a2", "b2", "d2")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def fmt6(value) -> str:
    """Six significant digits, used for table CSVs."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".6g")


def fmt_full(value) -> str:
    """Shortest round-trip representation."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    return repr(float(value))


def render_csv(header: Sequence[str], rows: Iterable[Sequence], fmt=fmt6) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[list[str], list[list]]:
    """Inverse of ``render_csv``: numeric-looking cells become int/float."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for raw in reader:
        row = []
        for cell in raw:
            try:
                row.append(int(cell))
            except ValueError:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
        rows.append(row)
    return header, rows


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def table1_rows(levels: Sequence[int] = TABLE_LEVELS) -> tuple[list[str], list[list]]:
    header = ["N", "x1", "x_max", "c_x1", "c_x_max", "m1", "m2"]
    rows = []
    for n in levels:
        grid = build_segment_grid(DesignConfig(n, ModelKind.LINEAR))
        lin = fit_linear_spline(grid)
        rows.append([n, grid.knots[1], grid.x_max, grid.values[1], grid.values[2], *lin.slopes])
    return header, rows


def _sign(v: float) -> str:
    return "-" if v < 0 else "+"


def table2_rows(levels: Sequence[int] = TABLE_LEVELS) -> tuple[list[str], list[list]]:
    """Signed quadratic-spline coefficients plus magnitude and sign columns.

    The published table lists magnitudes only; the sign columns make the
    difference visible.
    """
    header = ["N", "x1", "x_max", *QUADRATIC_COEFFS]
    header += [f"abs_{c}" for c in QUADRATIC_COEFFS] + [f"sign_{c}" for c in QUADRATIC_COEFFS]
    rows = []
    for n in levels:
        grid = build_segment_grid(DesignConfig(n, ModelKind.QUADRATIC))
        coeffs = [c for piece in fit_quadratic_spline(grid).pieces for c in piece]
        rows.append([n, grid.knots[1], grid.x_max, *coeffs, *(abs(c) for c in coeffs), *(_sign(c) for c in coeffs)])
    return header, rows


def table3_rows(levels: Sequence[int] = TABLE_LEVELS) -> tuple[list[str], list[list]]:
    header = ["N", "sqnr_rs_published", "sqnr_fds", "sqnr_qs", "sqnr_oc"]
    rows = []
    for n in levels:
        kinds = (ModelKind.LINEAR, ModelKind.QUADRATIC, ModelKind.OPTIMAL)
        vals = [evaluate_design(paper_table_config(n, k)).sqnr_db for k in kinds]
        rows.append([n, REFERENCE_RS_SQNR.get(n, math.nan), *vals])
    return header, rows


def figure1_rows(samples: int = 201, levels: int = 128) -> tuple[list[str], list[list]]:
    """Optimal compressor and both spline approximations on ``[0, x_max]``."""
    grid = build_segment_grid(DesignConfig(levels))
    opt = OptimalCompressor(grid.x_max, grid.sigma)
    lin, quad = fit_linear_spline(grid), fit_quadratic_spline(grid)
    x = np.linspace(0.0, grid.x_max, samples)
    x[-1] = grid.x_max
    cols = [opt.evaluate(x), lin.evaluate(x), quad.evaluate(x)]
    header = ["x", "c", "g_s1", "g_s2"]
    return header, [[float(x[i])] + [float(c[i]) for c in cols] for i in range(samples)]


def figure2_rows(levels: Sequence[int] = TABLE_LEVELS) -> tuple[list[str], list[list]]:
    header = ["bits", "sqnr_fds", "sqnr_qs", "sqnr_oc"]
    _, t3 = table3_rows(levels)
    return header, [[math.log2(r[0]), *r[2:]] for r in t3]


@dataclass
class RunManifest:
    command: str
    config: dict
    tool_version: str = field(default_factory=tool_version)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: list[str] = field(default_factory=list)

    def write(self, path: Path) -> None:
        missing = [p for p in self.outputs if not Path(p).exists()]
        if missing:
            raise FileNotFoundError(f"manifest lists missing outputs: {missing}")
        Path(path).write_text(dumps_json(asdict(self)), encoding="utf-8")
