# app/main.py
from typing import Optional

import typer

from .commands import fit, simulate, sweep, validate
from .core.logging_config import configure_logging

app = typer.Typer(
    name="echo-sim",
    help="Simulador de eco de fótons com ruído de fase de Ornstein-Uhlenbeck.",
    no_args_is_help=True,
    add_completion=False,
)


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING..."),
) -> None:
    configure_logging(log_level)


# 1. Ensemble e distribuições do sinal
app.command("simulate")(simulate.simulate)

# 2. Varreduras PHI / GAMMA / TAU
app.command("sweep")(sweep.sweep)

# 3. Ajuste do tempo de coerência
app.command("fit")(fit.fit)

# 4. Suite de oráculos
app.command("validate")(validate.validate)


if __name__ == "__main__":
    app()
