"""
Command-line interface.

Usage:
    compandor design -n 128 --model quadratic --format json
    compandor tables --which 3 --out table3.csv
    compandor figure --which 1 --samples 401 --out fig1.csv
    compandor montecarlo -n 128 --model quadratic --samples 10000000 --seed 7
    compandor sweep --levels 16,32,64,128 --models linear,quadratic,optimal

Exit codes: 0 success, 1 partial sweep failure, 2 usage or configuration
error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import click
from click.core import ParameterSource

from . import reporting
from .design import DesignConfig, ModelKind, Overload, Placement, design_quantizer, paper_table_config
from .distortion import evaluate_design, monte_carlo_sqnr
from .errors import ConfigError, DomainError, NumericError

EXIT_PARTIAL, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 1, 2, 3, 4

PLACEMENT_NOTE = (
    "inner levels sit at compressed values (2k-1)*step/2 on one global grid; "
    "segment membership is by containment, and segment-local offsets start at "
    "the segment's left compressed edge"
)

MODEL_CHOICE = click.Choice([m.value for m in ModelKind])


def _read_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _resolve(ctx: click.Context, params: dict) -> dict:
    """Fill parameters left at their defaults from the optional config file."""
    file_values = _read_config_file(params.get("config"))
    by_name = {p.name: p for p in ctx.command.params}
    for key, raw in file_values.items():
        if key not in by_name:
            raise ConfigError(f"unknown config key {key!r}")
        if ctx.get_parameter_source(key) is ParameterSource.DEFAULT:
            try:
                params[key] = by_name[key].type_cast_value(ctx, raw)
            except click.BadParameter as exc:
                raise ConfigError(f"config key {key!r}: {exc.format_message()}") from exc
    return params


def _emit(text: str, out: str | None) -> list[str]:
    if out is None:
        click.echo(text, nl=False)
        return []
    Path(out).write_text(text, encoding="utf-8")
    return [out]


def _write_manifest(command: str, config: dict, outputs: list[str], out: str | None) -> None:
    if out is None:
        return
    manifest = reporting.RunManifest(command=command, config=config, outputs=outputs)
    manifest.write(Path(f"{out}.manifest.json"))


def _config_from(params: dict, levels: int, model: str) -> DesignConfig:
    if params.get("paper_settings"):
        return paper_table_config(levels, model, params["sigma"])
    return DesignConfig(
        levels=levels,
        model=model,
        segments=params["segments"],
        sigma=params["sigma"],
        placement=params["placement"],
        overload=params["overload"],
    )


def design_options(f):
    options = [
        click.option("--sigma", type=float, default=1.0, show_default=True, help="Source standard deviation."),
        click.option("--segments", type=int, default=2, show_default=True, help="Segments per half-axis."),
        click.option("--placement", type=click.Choice([p.value for p in Placement]), default="global",
                     show_default=True, help="Level placement in the compressed domain."),
        click.option("--overload", type=click.Choice([o.value for o in Overload]), default="exact",
                     show_default=True, help="Overload distortion used in the total."),
        click.option("--paper-settings", is_flag=True,
                     help="Use the per-model placement/overload that reproduce the published SQNR table."),
        click.option("--config", type=click.Path(dir_okay=False), default=None,
                     help="key=value file; explicit flags take precedence."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


@click.group()
@click.version_option(reporting.tool_version(), prog_name="compandor")
def cli() -> None:
    """Spline-approximated companding quantizers for a Gaussian source."""


@cli.command()
@click.option("-n", "--levels", type=int, default=128, show_default=True, help="Number of levels N.")
@click.option("--model", type=MODEL_CHOICE, default="quadratic", show_default=True)
@design_options
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--dump-model", type=click.Path(dir_okay=False), default=None)
@click.option("--dump-codebook", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def design(ctx, **params) -> int:
    """Design one quantizer and report its distortion and SQNR."""
    p = _resolve(ctx, params)
    config = _config_from(p, p["levels"], p["model"])
    q = design_quantizer(config)
    report = evaluate_design(config)
    if p["fmt"] == "json":
        text = reporting.dumps_json({
            "command": "design",
            "config": config.to_dict(),
            "report": report.to_dict(),
            "counts": list(q.codebook.counts),
            "shares": list(q.codebook.shares),
            "placement_note": PLACEMENT_NOTE,
        })
    else:
        cfg, rep = config.to_dict(), report.to_dict()
        text = reporting.render_csv(list(cfg) + list(rep), [list(cfg.values()) + list(rep.values())],
                                    fmt=reporting.fmt_full)
    outputs = _emit(text, p["out"])
    if p["dump_model"]:
        outputs += _emit(reporting.dumps_json(q.model.to_dict()), p["dump_model"])
    if p["dump_codebook"]:
        outputs += _emit(reporting.dumps_json(q.codebook.to_dict()), p["dump_codebook"])
    _write_manifest("design", config.to_dict(), outputs, p["out"])
    return 0


@cli.command()
@click.option("--which", type=click.IntRange(1, 3), required=True, help="Table number (1, 2 or 3).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def tables(which: int, out: str | None) -> int:
    """Recompute table 1 (linear spline), 2 (quadratic spline) or 3 (SQNR)."""
    builder = {1: reporting.table1_rows, 2: reporting.table2_rows, 3: reporting.table3_rows}[which]
    header, rows = builder()
    outputs = _emit(reporting.render_csv(header, rows), out)
    _write_manifest("tables", {"which": which, "levels": list(reporting.TABLE_LEVELS)}, outputs, out)
    return 0


@cli.command()
@click.option("--which", type=click.IntRange(1, 2), required=True, help="1: compressor curves, 2: SQNR vs bits.")
@click.option("--samples", type=click.IntRange(min=2), default=201, show_default=True,
              help="Points on [0, x_max] for figure 1.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def figure(which: int, samples: int, out: str | None) -> int:
    """Write the data behind a figure as CSV."""
    header, rows = reporting.figure1_rows(samples) if which == 1 else reporting.figure2_rows()
    outputs = _emit(reporting.render_csv(header, rows, fmt=reporting.fmt_full), out)
    _write_manifest("figure", {"which": which, "samples": samples}, outputs, out)
    return 0


@cli.command()
@click.option("-n", "--levels", type=int, default=128, show_default=True)
@click.option("--model", type=MODEL_CHOICE, default="quadratic", show_default=True)
@design_options
@click.option("--samples", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--shards", type=int, default=1, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True, help="Threads used across shards.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def montecarlo(ctx, **params) -> int:
    """Compare simulated SQNR with the analytic value."""
    p = _resolve(ctx, params)
    if p["samples"] < 1:
        raise ConfigError(f"--samples must be at least 1, got {p['samples']}")
    if p["shards"] < 1:
        raise ConfigError(f"--shards must be at least 1, got {p['shards']}")
    config = _config_from(p, p["levels"], p["model"])
    analytic = evaluate_design(config)
    mc = monte_carlo_sqnr(config, p["samples"], p["seed"], p["shards"], workers=p["workers"])
    text = reporting.dumps_json({
        "command": "montecarlo",
        "config": config.to_dict(),
        "analytic": analytic.to_dict(),
        "monte_carlo": mc.to_dict(),
        "difference_db": mc.empirical_sqnr_db - analytic.sqnr_db,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    })
    outputs = _emit(text, p["out"])
    _write_manifest("montecarlo", config.to_dict(), outputs, p["out"])
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


@cli.command()
@click.option("-n", "--levels", "levels_list", default="16,32,64,128", show_default=True,
              help="Comma-separated N values.")
@click.option("--models", default="linear,quadratic,optimal", show_default=True)
@design_options
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def sweep(ctx, **params) -> int:
    """Evaluate every (N, model) pair; one CSV row each."""
    p = _resolve(ctx, params)
    levels = _int_list(p["levels_list"])
    models = [m.strip() for m in p["models"].split(",") if m.strip()]
    if not levels or not models:
        raise ConfigError("sweep needs at least one level count and one model")
    for m in models:
        try:
            ModelKind(m)
        except ValueError as exc:
            raise ConfigError(f"unknown model {m!r}") from exc
    if len(set(levels)) != len(levels):
        click.echo("warning: duplicate level counts removed", err=True)
    header = ["N", "model", "status", "D_g", "D_o_exact", "D_o_closed", "D_total", "sqnr_db", "error"]
    rows, failed = [], False
    for n in sorted(set(levels)):
        for m in sorted({ModelKind(m).value for m in models}):
            try:
                r = evaluate_design(_config_from(p, n, m))
                rows.append([n, m, "ok", r.D_g, r.D_o_exact, r.D_o_closed, r.D_total, r.sqnr_db, ""])
            except (NumericError, ConfigError, DomainError) as exc:
                failed = True
                rows.append([n, m, "failed", "", "", "", "", "", str(exc)])
    outputs = _emit(reporting.render_csv(header, rows, fmt=reporting.fmt_full), p["out"])
    _write_manifest("sweep", {"levels": sorted(set(levels)), "models": models}, outputs, p["out"])
    return EXIT_PARTIAL if failed else 0


def main(argv: list[str] | None = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="compandor", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_PARTIAL
    except (ConfigError, DomainError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except NumericError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERIC
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
