# app/commands/validate.py

import typer
from rich.table import Table

from ..core.config import settings
from ..services.oracles import run_oracle_suite
from .common import EXIT_FAILED, console


def validate(
    quick: bool = typer.Option(False, "--quick", help="Reduz o tamanho dos testes de Monte Carlo."),
) -> None:
    """Executa os oráculos independentes; código de saída 0 só se todos passarem."""
    results = run_oracle_suite(settings, quick=quick)

    table = Table(title="Validação")
    table.add_column("Oráculo")
    table.add_column("Valor", justify="right")
    table.add_column("Limite", justify="right")
    table.add_column("Resultado")
    for r in results:
        status = "[green]OK[/green]" if r.passed else "[red]FALHA[/red]"
        table.add_row(r.name, f"{r.value:.3g} {r.unit}", f"{r.threshold:.3g}", status)
    console.print(table)

    failed = [r for r in results if not r.passed]
    if failed:
        console.print(f"{len(failed)} de {len(results)} oráculos falharam.")
        raise typer.Exit(code=EXIT_FAILED)
    console.print(f"Todos os {len(results)} oráculos passaram.")
