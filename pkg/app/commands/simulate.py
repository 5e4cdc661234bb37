# app/commands/simulate.py

from pathlib import Path
from typing import Optional

from ..services.ensemble import run_ensemble, signal_distribution
from ..services.output_writer import (
    output_directory,
    write_f_histogram,
    write_manifest,
    write_signal,
    write_signal_distribution,
)
from .common import ConfigOption, OutOption, SeedOption, ThreadsOption, cli_errors, console, load_experiment


def simulate(
    config: Path = ConfigOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
    out: Optional[Path] = OutOption,
) -> None:
    """
    Ensemble de Monte Carlo do eco: grava signal.csv, f_hist.csv,
    signal_distribution.csv e manifest.json.
    """
    with cli_errors():
        experiment = load_experiment(config, seed)
        spec = experiment.to_run_spec()

        stats = run_ensemble(spec, threads=threads)
        distribution = signal_distribution(
            spec, spec.echo.t_grid, experiment.ensemble.distribution_bins, stats=stats
        )

        directory = output_directory(out or experiment.output.prefix)
        write_signal(stats, directory)
        write_f_histogram(stats, directory)
        write_signal_distribution(distribution, directory)
        write_manifest("simulate", experiment.model_dump(), experiment.noise.seed, directory)

    console.print(
        f"<F> = {stats.mean_f:.6g} ± {stats.se_f:.2g} | moda = {stats.mode_f:.6g} | "
        f"F ideal = {stats.ideal_f:.6g} | assimetria = {stats.skewness:.3g}"
    )
    if stats.n_skipped:
        console.print(f"AVISO: {stats.n_skipped} repetições descartadas por singularidade.")
    console.print(f"Resultados em {directory}")
