"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class ModelError(Exception):
    """Base class for all errors raised by hpcpricing."""


class InvalidParameter(ModelError, ValueError):
    """A parameter is outside its admissible range.

    ``field`` names the offending parameter and ``bound`` the violated
    constraint, so callers can print a one-line diagnostic.
    """

    def __init__(self, field: str, bound: str, value: object = None):
        self.field = field
        self.bound = bound
        self.value = value
        if value is None:
            msg = f"{field}: must satisfy {bound}"
        else:
            msg = f"{field} = {value!r} violates bound {bound}"
        super().__init__(msg)


class DegenerateBoundary(ModelError):
    """The requested boundary does not exist; ``value`` holds the clamp."""

    def __init__(self, message: str, value: float):
        self.value = value
        super().__init__(message)


class NormalizationUndefined(ModelError, ArithmeticError):
    """The baseline gain (or price) is zero, so ratios against it are undefined."""


class ZeroIncome(ModelError, ArithmeticError):
    pass


class InvalidAxis(InvalidParameter):
    pass


class NonMonotone(ModelError):
    """A function handed to the monotone isosurface extractor is not monotone."""


class ScenarioError(ModelError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(InvalidParameter, ScenarioError):
    pass


class UnknownField(ScenarioError, KeyError):
    def __init__(self, field: str, section: str):
        self.field = field
        self.section = section
        super().__init__(f"unknown field {field!r} in {section}")

    def __str__(self) -> str:
        return self.args[0]
