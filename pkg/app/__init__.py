# app/__init__.py
"""Simulador de eco de fótons com ruído de fase estocástico em pulsos de raios X."""

__version__ = "1.0.0"
