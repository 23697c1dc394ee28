"""Command line entry point: ``cdcroadm <command> [options]``.

Exit codes: 0 success, 3 configuration error, 4 simulation error. Blocked
provisioning requests are reported in the output, not treated as failures.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .config import load_config
from .errors import ConfigError, RoadmError
from .report import cmd_adddrop, cmd_budget, cmd_plan, cmd_route, cmd_scenario, cmd_sweep, dumps_records

EXIT_CONFIG = 3
EXIT_SIMULATION = 4


class _Ctx:
    def __init__(self, config_path, seed, out, fmt):
        self.config_path = config_path
        self.seed = seed
        self.out = Path(out) if out else None
        self.fmt = fmt
        self._config = None

    @property
    def config(self):
        if self._config is None:
            try:
                self._config = load_config(self.config_path, self.seed)
            except RoadmError as exc:
                click.echo(f"config error: {exc}", err=True)
                sys.exit(EXIT_CONFIG)
        return self._config

    def emit(self, tables, traces=None, stem="report"):
        if self.fmt == "csv":
            text = "\n".join(t.to_csv() for t in tables)
        else:
            text = dumps_records({"table": t.name, **r} for t in tables for r in t.to_records())
        if self.out is None:
            click.echo(text, nl=False)
            if traces:
                click.echo()
                click.echo(dumps_records(traces), nl=False)
            return
        self.out.mkdir(parents=True, exist_ok=True)
        ext = "csv" if self.fmt == "csv" else "jsonl"
        for t in tables:
            (self.out / f"{t.name}.{ext}").write_text(t.to_csv() if self.fmt == "csv" else dumps_records(t.to_records()))
        if traces:
            (self.out / f"{stem}-traces.jsonl").write_text(dumps_records(traces))
        click.echo(text, nl=False)


def _run(ctx, fn):
    try:
        return fn()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except RoadmError as exc:
        click.echo(f"simulation error: {exc}", err=True)
        sys.exit(EXIT_SIMULATION)


def _floats(text):
    """Parse '0,1,2' or 'start:stop:step' (inclusive) into a tuple of floats."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        n = int(round((stop - start) / step))
        return tuple(round(start + k * step, 9) for k in range(n + 1))
    return tuple(float(x) for x in text.split(",") if x.strip())


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="YAML run configuration (default: bundled defaults).")
@click.option("--seed", type=int, default=None, help="Override the configuration seed.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Also write tables and traces into this directory.")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv")
@click.pass_context
def cli(ctx, config_path, seed, out, fmt):
    """Planning and simulation toolkit for C+L band CDC-ROADM nodes."""
    ctx.obj = _Ctx(config_path, seed, out, fmt)


@cli.command()
@click.pass_obj
def plan(obj):
    """Channel counts per band and signal class."""
    table = _run(obj, lambda: cmd_plan(obj.config))
    obj.emit([table], stem="plan")


@cli.command()
@click.option("--clients", default=None, help="Comma-separated MCS client-port counts.")
@click.option("--nodes", "network_nodes", type=int, default=None,
              help="Network size for the required-ratio reference row (0 to omit).")
@click.pass_obj
def adddrop(obj, clients, network_nodes):
    """Add/drop ratio grid vs MCS client ports."""
    cl = tuple(int(c) for c in _floats(clients)) if clients else None
    table = _run(obj, lambda: cmd_adddrop(obj.config, cl, network_nodes))
    obj.emit([table], stem="adddrop")


@cli.command()
@click.option("--input-power", type=float, default=None, help="Node input power at point A, dBm/subchannel.")
@click.option("--inline-gain", type=float, default=None, help="Hypothetical drop-side amplifier gain, dB.")
@click.pass_obj
def budget(obj, input_power, inline_gain):
    """Drop-path power budget of the amplifier-less node."""
    tables, traces = _run(obj, lambda: cmd_budget(obj.config, input_power, inline_gain))
    obj.emit(list(tables), traces, stem="budget")


@cli.command()
@click.option("--src", default="N1", show_default=True)
@click.option("--dst", default="N2", show_default=True)
@click.option("--signal", default="800G", show_default=True)
@click.option("--band", default="C", show_default=True)
@click.option("--count", type=int, default=1, show_default=True, help="Number of identical requests.")
@click.option("--via", default=None, help="Comma-separated link names forming an explicit route.")
@click.pass_obj
def route(obj, src, dst, signal, band, count, via):
    """Provision lightpaths on the two-link testbed."""
    links = tuple(v.strip() for v in via.split(",")) if via else None
    table, traces = _run(obj, lambda: cmd_route(obj.config, src, dst, signal, band, count, links))
    obj.emit([table], traces, stem="route")


@cli.command()
@click.argument("which", default="all")
@click.pass_obj
def scenario(obj, which):
    """Run scenario 1, 2, 3 or all and report Q margins."""
    table, traces = _run(obj, lambda: cmd_scenario(obj.config, which))
    obj.emit([table], traces, stem="scenario")


@cli.command()
@click.option("--point", default=None, help="Power-control point to sweep (default A).")
@click.option("--range", "power_range", default=None,
              help="Powers in dBm: '0,1,2' or 'start:stop:step'.")
@click.pass_obj
def sweep(obj, point, power_range):
    """Q margin vs node input power."""
    powers = _floats(power_range) if power_range else None
    table = _run(obj, lambda: cmd_sweep(obj.config, point, powers))
    obj.emit([table], stem="sweep")


def main():
    cli()


if __name__ == "__main__":
    main()
