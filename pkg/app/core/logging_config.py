# app/core/logging_config.py
import logging

from rich.console import Console
from rich.logging import RichHandler

from .config import settings

# Logs vão para stderr: stdout fica livre para tabelas e relatórios do CLI
_console = Console(stderr=True)


def configure_logging(level: str | None = None) -> None:
    """Configura o logger raiz uma única vez (chamado pelo CLI)."""
    root = logging.getLogger()
    if any(isinstance(h, RichHandler) for h in root.handlers):
        root.setLevel(level or settings.LOG_LEVEL)
        return

    handler = RichHandler(console=_console, show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(level or settings.LOG_LEVEL)
