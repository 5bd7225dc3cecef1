"""Exceptions shared across the package.

ConfigError maps to CLI exit code 1, SimulationDiagnosticError to exit code 2.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration/parameters."""


class SimulationDiagnosticError(RuntimeError):
    """A simulation left its validity envelope (e.g. integrator blow-up)."""
