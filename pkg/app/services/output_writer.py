# app/services/output_writer.py
"""
Serialização dos resultados: CSVs prontos para gráfico e o manifest.json da execução.

Todos os números saem com 17 dígitos significativos (ida e volta exata em
double) e quebras de linha "\n", para que duas execuções iguais produzam
arquivos idênticos byte a byte.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from .. import __version__
from .ensemble import EnsembleStats, SignalDistribution, SweepParameter, SweepRow
from .fitting import FitResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

SIGNAL_COLUMNS = ["T", "mean_amplitude", "mode_amplitude", "ideal_amplitude"]
HISTOGRAM_COLUMNS = ["bin_center", "probability"]
DISTRIBUTION_COLUMNS = ["T", "amplitude_bin_center", "probability"]
SWEEP_COLUMNS = ["value", "mc_delta_f", "se", "analytic_delta_f"]
TAU_SWEEP_COLUMNS = ["value", "mc_amplitude", "se", "analytic_amplitude"]
FIT_COLUMNS = ["tau_c", "tau_c_se", "amplitude", "slope", "slope_se", "residual", "no_decay"]


# ----------------------------------------------------------------------
# 1. ESCRITA BÁSICA
# ----------------------------------------------------------------------

def output_directory(prefix: str | Path) -> Path:
    """O prefixo de saída é um diretório; é criado se não existir."""
    directory = Path(prefix)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"-> Gravado {path}")
    return path


# ----------------------------------------------------------------------
# 2. ARQUIVOS DE CADA COMANDO
# ----------------------------------------------------------------------

def write_signal(stats: EnsembleStats, directory: Path) -> Path:
    frame = pd.DataFrame(
        {
            "T": stats.t_grid,
            "mean_amplitude": stats.signal_mean,
            "mode_amplitude": stats.signal_mode,
            "ideal_amplitude": stats.signal_ideal,
        },
        columns=SIGNAL_COLUMNS,
    )
    return write_csv(frame, directory / "signal.csv")


def write_f_histogram(stats: EnsembleStats, directory: Path) -> Path:
    frame = pd.DataFrame(
        {"bin_center": stats.histogram_centers, "probability": stats.histogram_probabilities},
        columns=HISTOGRAM_COLUMNS,
    )
    return write_csv(frame, directory / "f_hist.csv")


def write_signal_distribution(distribution: SignalDistribution, directory: Path) -> Path:
    """Formato longo (T, centro da caixa, probabilidade), uma linha por célula do mapa."""
    n_t, n_bins = distribution.probabilities.shape
    frame = pd.DataFrame(
        {
            "T": np.repeat(distribution.t_values, n_bins),
            "amplitude_bin_center": np.tile(distribution.bin_centers, n_t),
            "probability": distribution.probabilities.ravel(),
        },
        columns=DISTRIBUTION_COLUMNS,
    )
    return write_csv(frame, directory / "signal_distribution.csv")


def write_sweep(rows: Sequence[SweepRow], parameter: SweepParameter, directory: Path) -> Path:
    columns = TAU_SWEEP_COLUMNS if parameter is SweepParameter.TAU else SWEEP_COLUMNS
    frame = pd.DataFrame([(r.value, r.mc, r.se, r.analytic) for r in rows], columns=columns)
    return write_csv(frame, directory / "sweep.csv")


def write_fit(fit: FitResult, directory: Path) -> Path:
    frame = pd.DataFrame(
        [(fit.tau_c, fit.tau_c_se, fit.amplitude, fit.slope, fit.slope_se, fit.residual, int(fit.no_decay))],
        columns=FIT_COLUMNS,
    )
    return write_csv(frame, directory / "fit.csv")


def write_manifest(
    command: str,
    config: Dict[str, Any],
    seed: int,
    directory: Path,
    options: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Manifesto da execução: comando, versão do código, configuração completa e semente.
    O número de threads não entra (não altera nenhum resultado).
    """
    manifest = {"command": command, "code_version": __version__, "config": config, "seed": seed}
    if options:
        manifest["options"] = options

    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")
    logger.info(f"-> Gravado {path}")
    return path
