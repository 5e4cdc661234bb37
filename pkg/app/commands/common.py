# app/commands/common.py
"""Utilidades compartilhadas pelos comandos: leitura da configuração e códigos de saída."""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console

from ..core.errors import ConfigurationError, DomainError, SingularityError
from ..core.schemas import ExperimentConfig, load_experiment_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

console = Console()

# --- Opções comuns a todos os comandos de simulação ---
ConfigOption = typer.Option(..., "--config", help="Arquivo de experimento (YAML ou JSON, ou um manifest.json).")
SeedOption = typer.Option(None, "--seed", min=0, help="Sobrescreve noise.seed do arquivo.")
ThreadsOption = typer.Option(None, "--threads", min=1, help="Threads do ensemble (não altera os resultados).")
OutOption = typer.Option(None, "--out", help="Diretório de saída (padrão: output.prefix do arquivo).")


@contextmanager
def cli_errors() -> Iterator[None]:
    """Converte as exceções dos services em diagnóstico + código de saída."""
    try:
        yield
    except ValidationError as e:
        typer.echo(f"ERRO: configuração inválida ({e.error_count()} problema(s)):\n{e}", err=True)
        raise typer.Exit(code=EXIT_CONFIG)
    except (ConfigurationError, DomainError) as e:
        typer.echo(f"ERRO: {e}", err=True)
        raise typer.Exit(code=EXIT_CONFIG)
    except SingularityError as e:
        typer.echo(f"ERRO: execução numérica abortada: {e}", err=True)
        raise typer.Exit(code=EXIT_NUMERICAL)


def load_experiment(path: Path, seed: Optional[int]) -> ExperimentConfig:
    experiment = load_experiment_config(path).with_seed(seed)
    logger.info(f"-> Configuração {path} carregada (seed={experiment.noise.seed})")
    return experiment


def parse_float_list(text: str, option_name: str) -> List[float]:
    """Lista separada por vírgulas ("2,3,4.5"); vazia ou malformada é erro de uso."""
    items = [item.strip() for item in text.split(",")]
    if not text.strip() or any(not item for item in items):
        raise typer.BadParameter("informe ao menos um valor, separados por vírgula", param_hint=option_name)
    try:
        return [float(item) for item in items]
    except ValueError:
        raise typer.BadParameter(f"valor não numérico em '{text}'", param_hint=option_name)
