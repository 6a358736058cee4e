"""
Pipeline exceptions and their command line exit codes
"""
from __future__ import annotations


class MtflError(Exception):
    """
    Base class for errors surfaced by the pipeline

    :param message: Human readable description
    :type message: str
    :param stage: Name of the pipeline stage that failed, set by
        :py:class:`mtfl.pipeline.Pipeline` while propagating
    :type stage: str or None
    """
    exit_code: int = 1

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage: str | None = stage

    def __str__(self) -> str:
        message = super().__str__()
        if self.stage:
            return f"stage '{self.stage}' failed: {message}"
        return message


class ConfigError(MtflError):
    exit_code = 2


class DataError(MtflError, ValueError):
    exit_code = 3


class ConvergenceError(MtflError):
    exit_code = 4
