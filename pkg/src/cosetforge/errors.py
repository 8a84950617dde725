"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end, so
each failure class maps to a distinct, documented process status.
"""

from __future__ import annotations


class CosetForgeError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": type(self).__name__, "message": str(self)}
        for key, value in self.details.items():
            out[key] = _jsonable(value)
        return out


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    try:
        return int(value)
    except (TypeError, ValueError):
        return str(value)


# group_core
class InvalidTable(CosetForgeError, ValueError):
    exit_code = 10


class NonBijectiveRow(InvalidTable):
    exit_code = 11


class NonBijectiveColumn(InvalidTable):
    exit_code = 12


class NoIdentity(InvalidTable):
    exit_code = 13


class MissingInverse(InvalidTable):
    exit_code = 14


class NonAssociative(InvalidTable):
    exit_code = 15


class SizeLimitExceeded(CosetForgeError):
    exit_code = 16


# gfunc
class GroupMismatch(CosetForgeError, ValueError):
    exit_code = 20


class NotAlmostInteger(CosetForgeError, ValueError):
    exit_code = 21


class AmbiguousEpsilon(CosetForgeError, ValueError):
    exit_code = 22


# spectral
class NumericalFailure(CosetForgeError, ArithmeticError):
    exit_code = 30


class NotExplicitlyAbelian(CosetForgeError, TypeError):
    exit_code = 31


class AdditivityViolation(CosetForgeError, ArithmeticError):
    exit_code = 32


# coset_tree
class MalformedTree(CosetForgeError, ValueError):
    exit_code = 40


class EmptyDecomposition(CosetForgeError, ValueError):
    exit_code = 41


# decompose
class IterationCap(CosetForgeError, RuntimeError):
    exit_code = 50


class BudgetExhausted(CosetForgeError, RuntimeError):
    exit_code = 51

    def __init__(self, message: str = "", incumbent=None, **details):
        super().__init__(message, **details)
        self.incumbent = incumbent


class Mismatch(CosetForgeError, ValueError):
    exit_code = 52


# addcomb
class EmptySet(CosetForgeError, ValueError):
    exit_code = 60


class InclusionViolation(CosetForgeError, ValueError):
    exit_code = 61


class NotSymmetric(CosetForgeError, ValueError):
    exit_code = 62


class EnumerationTooLarge(CosetForgeError, ValueError):
    exit_code = 63


class ThresholdUnmet(CosetForgeError, ValueError):
    exit_code = 64


class DegenerateMeasure(CosetForgeError, ValueError):
    exit_code = 65


class NoPopularPattern(CosetForgeError, ValueError):
    exit_code = 66


# cli
class SuiteUnknown(CosetForgeError, ValueError):
    exit_code = 70


class NotPrime(CosetForgeError, ValueError):
    exit_code = 71


class InputError(CosetForgeError):
    """File could not be read or parsed."""

    exit_code = 72
