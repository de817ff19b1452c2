"""Exception hierarchy. Each class maps onto one CLI exit code."""


class HydrothermError(Exception):
    exit_code = 1


class ConfigurationError(HydrothermError, ValueError):
    exit_code = 1


class MeshError(ConfigurationError):
    """Invalid geometry, e.g. an inverted element."""


class SolverError(HydrothermError):
    exit_code = 2

    def __init__(self, message, report=None, step=None):
        super().__init__(message)
        self.report = report
        self.step = step


class OutputError(HydrothermError, OSError):
    exit_code = 3
