# app/commands/sweep.py

from pathlib import Path
from typing import Optional

import typer

from ..services.ensemble import SweepParameter, sweep_parameter
from ..services.output_writer import output_directory, write_manifest, write_sweep
from .common import (
    ConfigOption,
    OutOption,
    SeedOption,
    ThreadsOption,
    cli_errors,
    console,
    load_experiment,
    parse_float_list,
)


def sweep(
    parameter: SweepParameter = typer.Option(..., "--parameter", case_sensitive=False, help="PHI, GAMMA ou TAU."),
    values: str = typer.Option(..., "--values", help="Valores separados por vírgula, ex: 0.02,0.05,0.08"),
    config: Path = ConfigOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
    out: Optional[Path] = OutOption,
) -> None:
    """Um ensemble por valor do parâmetro; compara Monte Carlo e fórmula fechada em sweep.csv."""
    grid = parse_float_list(values, "--values")

    with cli_errors():
        experiment = load_experiment(config, seed)
        rows = sweep_parameter(experiment.to_run_spec(), parameter, grid, threads=threads)

        directory = output_directory(out or experiment.output.prefix)
        write_sweep(rows, parameter, directory)
        write_manifest(
            "sweep",
            experiment.model_dump(),
            experiment.noise.seed,
            directory,
            options={"parameter": parameter.value, "values": grid},
        )

    for row in rows:
        console.print(f"{parameter.value}={row.value:g}: MC {row.mc:.6g} ± {row.se:.2g} | analítico {row.analytic:.6g}")
    console.print(f"Resultados em {directory}")
