# app/core/errors.py
from typing import Optional


class EchoSimError(Exception):
    """Erro base de todo o simulador."""


class ConfigurationError(EchoSimError, ValueError):
    """Parâmetros inconsistentes (ex: duração fora da grade de tempo)."""


class DomainError(EchoSimError, ValueError):
    """Entrada fora do domínio matemático da operação (ex: log de sinal <= 0)."""


class SingularityError(EchoSimError, ArithmeticError):
    """
    A integração de Wei-Norman chegou perto da singularidade de coordenadas
    |2·chi2·Omega| -> pi/2, onde tan/sec divergem.
    """

    def __init__(self, message: str, step: Optional[int] = None, repeat_index: Optional[int] = None):
        super().__init__(message)
        self.step = step
        self.repeat_index = repeat_index

    def __str__(self) -> str:
        base = super().__str__()
        if self.repeat_index is not None:
            return f"{base} (repetição {self.repeat_index})"
        return base
