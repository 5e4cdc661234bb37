# app/commands/fit.py

from pathlib import Path
from typing import Optional

import typer

from ..services.ensemble import SweepParameter, sweep_parameter
from ..services.fitting import decay_curve_from_sweep, fit_coherence_time
from ..services.output_writer import output_directory, write_fit, write_manifest, write_sweep
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

NO_DECAY_MESSAGE = "no decoherence detected"


def fit(
    taus: str = typer.Option(..., "--taus", help="Atrasos τ separados por vírgula, ex: 2,3,4,5,6,7,8"),
    config: Path = ConfigOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
    out: Optional[Path] = OutOption,
) -> None:
    """Varre τ medindo o sinal no revival T = τ e ajusta o tempo de coerência τc."""
    tau_values = parse_float_list(taus, "--taus")

    with cli_errors():
        experiment = load_experiment(config, seed)
        rows = sweep_parameter(experiment.to_run_spec(), SweepParameter.TAU, tau_values, threads=threads)
        result = fit_coherence_time(decay_curve_from_sweep(rows))

        directory = output_directory(out or experiment.output.prefix)
        write_sweep(rows, SweepParameter.TAU, directory)
        write_fit(result, directory)
        write_manifest(
            "fit", experiment.model_dump(), experiment.noise.seed, directory, options={"taus": tau_values}
        )

    if result.no_decay:
        console.print(NO_DECAY_MESSAGE)
    else:
        console.print(f"τc = {result.tau_c:.6g} ± {result.tau_c_se:.2g} (1σ)")
    console.print(f"Resultados em {directory}")
