"""CLI entrypoint for the UFLS microgrid simulator."""

import logging
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from ufls.config import Settings, bundled_scenario
from ufls.errors import (
    ProfileError,
    ScenarioError,
    ScenarioSyntaxError,
    ScenarioValidationError,
    SimulationError,
    TopologyError,
)

app = typer.Typer(
    name="ufls",
    help="Islanded microgrid simulator for BESS-driven under-frequency load shedding",
    no_args_is_help=True,
)
console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

ScenarioOption = Annotated[Path, typer.Option("--scenario", "-s", help="Scenario YAML file or bundled scenario name")]
OutOption = Annotated[
    Path | None, typer.Option("--out", "-o", help="Output directory (default: $UFLS_OUT_DIR/<scenario name>)")
]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Override the scenario seed")]
SetOption = Annotated[
    list[str] | None,
    typer.Option("--set", help="Dotted override key=value, applied before validation (repeatable)"),
]


@app.callback()
def main(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log at INFO level")] = False,
):
    """Configure logging from UFLS_LOG_LEVEL (or --verbose)."""
    level = "INFO" if verbose else Settings().log_level
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _fail(exc: BaseException) -> typer.Exit:
    """Print a diagnostic for ``exc`` and return the matching exit."""
    if isinstance(exc, ScenarioValidationError):
        err_console.print(f"[red]Invalid scenario: {len(exc.errors)} problem(s)[/red]")
        for problem in exc.errors:
            err_console.print(f"  [red]-[/red] {problem}")
        return typer.Exit(EXIT_INVALID)
    if isinstance(exc, ScenarioSyntaxError):
        err_console.print(f"[red]Scenario syntax error at {exc}[/red]")
        return typer.Exit(EXIT_INVALID)
    if isinstance(exc, FileNotFoundError):
        err_console.print(f"[red]Error: File not found: {exc.filename or exc}[/red]")
        return typer.Exit(EXIT_INVALID)
    if isinstance(exc, ScenarioError | ProfileError | TopologyError):
        err_console.print(f"[red]Error: {exc}[/red]")
        return typer.Exit(EXIT_INVALID)
    err_console.print(f"[red]Run failed: {exc}[/red]")
    return typer.Exit(EXIT_RUNTIME)


def _resolve(path: Path) -> Path:
    if path.exists():
        return path
    if path.parent != Path(".") or path.suffix:
        raise FileNotFoundError(2, "No such file", str(path))
    # bare names refer to bundled scenarios
    return bundled_scenario(path.name, Settings().scenario_dir)


def _load(path: Path, overrides: list[str] | None, seed: int | None):
    from ufls.io.scenario import load_scenario

    return load_scenario(_resolve(path), overrides=overrides or (), seed=seed)


def _out_dir(out: Path | None, name: str) -> Path:
    return out if out is not None else Settings().out_dir / name


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.6g}"


def _metrics_table(result) -> Table:
    m = result.metrics
    table = Table(show_header=False)
    table.add_column("Metric", style="bold")
    table.add_column("Value", justify="right")
    table.add_row("Load served (MWh)", f"{m.energy_served_mwh:.4f}")
    table.add_row("Max frequency deviation (Hz)", f"{m.max_freq_deviation:.4f}")
    table.add_row("Max PCC voltage deviation (p.u.)", f"{m.max_pcc_voltage_deviation:.4f}")
    table.add_row("PUF mean / max", f"{_fmt(m.puf_mean)} / {_fmt(m.puf_max)}")
    table.add_row("VUF mean / max (%)", f"{_fmt(m.vuf_mean)} / {_fmt(m.vuf_max)}")
    table.add_row("UFLS events", str(m.ufls_event_count))
    table.add_row("Devices tripped / UFLS devices", f"{m.device_count_participating} / {m.ufls_device_count}")
    return table


@app.command()
def run(
    scenario: ScenarioOption,
    out: OutOption = None,
    seed: SeedOption = None,
    overrides: SetOption = None,
    quiet: Annotated[bool, typer.Option("--quiet", "-q", help="Only print the summary line")] = False,
):
    """Run one scenario and write timeseries.csv, events.json and summary.json."""
    from ufls.engine import run as run_scenario
    from ufls.io.writers import write_outputs

    try:
        config = _load(scenario, overrides, seed)
        result = run_scenario(config, progress=not quiet)
        out_dir = _out_dir(out, config.name)
        write_outputs(result, out_dir)
    except (ScenarioError, ProfileError, TopologyError, FileNotFoundError, SimulationError, OSError) as exc:
        raise _fail(exc) from None

    if not quiet:
        console.print(Panel(f"[bold]{config.name}[/bold]", style="blue"))
        console.print(_metrics_table(result))
        console.print(f"[green]Outputs written to {out_dir}[/green]")
    typer.echo(result.summary_line())


@app.command()
def compare(
    scenario_a: Annotated[Path, typer.Argument(help="First scenario (e.g. sectionalizer scheme)")],
    scenario_b: Annotated[Path, typer.Argument(help="Second scenario (e.g. per-phase scheme)")],
    out: OutOption = None,
    seed: SeedOption = None,
    overrides: SetOption = None,
    baseline: Annotated[
        bool, typer.Option("--baseline/--no-baseline", help="Also run A without UFLS for PUF/VUF baseline rows")
    ] = True,
):
    """Run two scenarios on the same topology and write comparison.csv."""
    from ufls.engine import compare_runs
    from ufls.engine import run as run_scenario
    from ufls.io.writers import write_comparison, write_outputs

    try:
        config_a = _load(scenario_a, overrides, seed)
        config_b = _load(scenario_b, overrides, seed)
        if config_a.topology_fingerprint() != config_b.topology_fingerprint():
            raise TopologyError(
                f"{scenario_a.name} and {scenario_b.name} do not share a topology "
                f"({config_a.topology_fingerprint()} vs {config_b.topology_fingerprint()})"
            )
        out_dir = _out_dir(out, f"{config_a.name}_vs_{config_b.name}")
        result_a = run_scenario(config_a)
        result_b = run_scenario(config_b)
        result_z = None
        if baseline:
            config_z = _load(scenario_a, [*(overrides or []), "ufls.scheme=none"], seed)
            result_z = run_scenario(config_z)
        frame = compare_runs(result_a, result_b, baseline=result_z)
        write_outputs(result_a, out_dir / "a")
        write_outputs(result_b, out_dir / "b")
        path = write_comparison(frame, out_dir / "comparison.csv")
    except (ScenarioError, ProfileError, TopologyError, FileNotFoundError, SimulationError, OSError) as exc:
        raise _fail(exc) from None

    table = Table(show_header=True, header_style="bold")
    table.add_column("Metric")
    table.add_column(config_a.name, justify="right")
    table.add_column(config_b.name, justify="right")
    table.add_column("Delta", justify="right")
    for row in frame.iter_rows(named=True):
        table.add_row(row["label"], _fmt(row["a"]), _fmt(row["b"]), _fmt(row["delta"]))
    console.print(table)
    console.print(f"[green]Comparison saved to {path}[/green]")
    typer.echo(result_a.summary_line())
    typer.echo(result_b.summary_line())


@app.command()
def validate(
    scenario: ScenarioOption,
    seed: SeedOption = None,
    overrides: SetOption = None,
    dump: Annotated[bool, typer.Option("--dump", help="Print the resolved scenario as YAML")] = False,
):
    """Validate a scenario and show its resolved UFLS and reserve parameters."""
    from ufls.io.scenario import dump_scenario
    from ufls.shedder import max_tripping_delay_bound

    try:
        config = _load(scenario, overrides, seed)
    except (ScenarioError, ProfileError, TopologyError, FileNotFoundError) as exc:
        raise _fail(exc) from None

    if dump:
        typer.echo(dump_scenario(config), nl=False)
        return

    reserve = config.reserve_params()
    table = Table(title=f"{config.name} ({config.ufls.scheme})", show_header=True, header_style="bold")
    table.add_column("Parameter")
    table.add_column("Value", justify="right")
    table.add_row("Horizon / dt (s)", f"{config.horizon:g} / {config.dt:g}")
    table.add_row("Load groups / devices", f"{len(config.topology.groups)} / {len(config.devices)}")
    table.add_row("UFLS devices", str(len(config.ufls_devices())))
    table.add_row("s_pr / s_th_up / s_th_low (p.u.)", f"{reserve.s_pr:g} / {reserve.s_th_up:g} / {reserve.s_th_low:g}")
    table.add_row("ΔS_th (p.u.)", f"{reserve.ds_th:g}")
    table.add_row("τ_trigger normal / motor (s)", f"{reserve.tau_trigger_normal:g} / {reserve.tau_trigger_motor:g}")
    table.add_row("τ_th_rec / τ_th_f (s)", f"{reserve.tau_th_rec:g} / {reserve.tau_th_f:g}")
    table.add_row("Ramp (Hz/s)", f"{reserve.f_ramp:g}")
    setpoints = config.configured_setpoints()
    if setpoints:
        table.add_row("Setpoints (Hz)", ", ".join(f"{f:g}" for f in setpoints))
        lowest = min(setpoints)
        table.add_row(f"Tripping-delay bound at {lowest:g} Hz (s)", f"{max_tripping_delay_bound(lowest):.3f}")
    if config.ufls.scheme == "per_phase":
        table.add_row("τ1_max / τ2 / τ_rand_max (s)", f"{config.ufls.tau1_max:g} / {config.ufls.tau2:g} / {config.ufls.tau_rand_max:g}")
    elif config.ufls.scheme == "sectionalizer":
        sect = config.ufls.sectionalizer
        table.add_row("τ1 / τ2 / τ_rand_max (s)", f"{sect.tau1:g} / {sect.tau2:g} / {sect.tau_rand_max:g}")
    console.print(table)
    console.print(f"[green]{scenario} is valid[/green] (fingerprint {config.fingerprint()})")


@app.command()
def sweep(
    scenario: ScenarioOption,
    grid: Annotated[
        list[str] | None, typer.Option("--grid", "-g", help="Swept key and values, key=v1,v2,... (repeatable)")
    ] = None,
    out: OutOption = None,
    seed: SeedOption = None,
    overrides: SetOption = None,
    jobs: Annotated[int | None, typer.Option("--jobs", "-j", help="Parallel runs (default: $UFLS_JOBS)")] = None,
):
    """Run the Cartesian product of --grid values and write sweep.csv."""
    from ufls.engine.sweep import parse_grid_axis, run_sweep
    from ufls.io.writers import write_sweep

    settings = Settings()
    try:
        config = _load(scenario, overrides, seed)
        axes = dict(parse_grid_axis(item) for item in grid or [])
        frame = run_sweep(
            _resolve(scenario),
            axes,
            overrides=overrides or [],
            seed=config.seed,
            jobs=jobs or settings.jobs,
            progress=True,
        )
        path = write_sweep(frame, _out_dir(out, f"{config.name}_sweep") / "sweep.csv")
    except (ScenarioError, ProfileError, TopologyError, FileNotFoundError, OSError) as exc:
        raise _fail(exc) from None

    counts = frame["status"].value_counts() if frame.height else None
    console.print(f"[bold]{frame.height} run(s)[/bold]")
    if counts is not None:
        for status, n in counts.sort("status").iter_rows():
            console.print(f"  {status}: {n}")
    console.print(f"[green]Sweep saved to {path}[/green]")


@app.command()
def version():
    """Print the package version."""
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version as pkg_version

    try:
        typer.echo(pkg_version("ufls-sim"))
    except PackageNotFoundError:
        from ufls import __version__

        typer.echo(__version__)


if __name__ == "__main__":
    app()
