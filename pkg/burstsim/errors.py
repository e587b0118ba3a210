r"""Exception types raised across burstsim.

Errors about malformed input subclass :class:`ValueError`, errors about an illegal
state change subclass :class:`RuntimeError`, and all of them share
:class:`BurstSimError` so callers (the cli in particular) can catch them in one place.
"""
from typing import Optional


class BurstSimError(Exception):
    pass


# input errors

class ConfigError(BurstSimError, ValueError):
    pass


class ParseError(BurstSimError, ValueError):
    r"""A trace or log line could not be parsed.

    Args:
        message (:obj:`str`): what went wrong.
        line (:obj:`int`, optional): 1-based line number in the offending file.
    """
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = "line {}: {}".format(line, message)
        super().__init__(message)


class DuplicateId(ParseError):
    pass


class NonPositiveField(ParseError):
    pass


class InvalidDistribution(BurstSimError, ValueError):
    pass


class UnknownApp(BurstSimError, KeyError):
    def __str__(self):
        return "unknown application {!r}".format(self.args[0] if self.args else None)


class JobTooLarge(BurstSimError, ValueError):
    pass


class CorruptLog(BurstSimError, ValueError):
    pass


# state errors

class SchedulingInPast(BurstSimError, RuntimeError):
    pass


class IllegalTransition(BurstSimError, RuntimeError):
    pass


class PoolExhausted(BurstSimError, RuntimeError):
    pass


class AboveMax(BurstSimError, RuntimeError):
    pass


class UnroutableJob(BurstSimError, RuntimeError):
    pass


class InvariantViolation(BurstSimError, RuntimeError):
    pass
