"""Exception hierarchy. Library code raises these; the CLI and the verify suite collect them."""

from __future__ import annotations


class EquiszegoError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(EquiszegoError):
    """Malformed or schema-invalid run configuration (CLI exit code 2)."""


# --- jets ---

class MismatchedVariables(EquiszegoError):
    pass


class InsufficientOrder(EquiszegoError):
    """A jet is truncated below the degree an operation needs."""


# --- stationary phase ---

class NonStationary(EquiszegoError):
    pass


class DegenerateHessian(EquiszegoError):
    pass


class BadImaginaryPart(EquiszegoError):
    """Im F(0) != 0 or Im F''(0) not positive semidefinite."""


class QuadratureNotConverged(EquiszegoError):
    pass


# --- geometry ---

class NotPositiveDefinite(EquiszegoError):
    pass


class NormalizationViolated(EquiszegoError):
    pass


class NonOrthonormalDirections(EquiszegoError):
    pass


# --- models ---

class InvalidModel(EquiszegoError, ValueError):
    """Weights or base point do not define a sphere model (CLI exit code 2)."""


class Infeasible(EquiszegoError):
    """The moment map has no interior zero on the sphere."""


class NonFreeOrbit(EquiszegoError):
    """G x S^1 has a positive-dimensional stabilizer at the point."""


class ChartSingular(EquiszegoError):
    pass


# --- fit ---

class IllConditioned(EquiszegoError):
    pass


class InsufficientSamples(EquiszegoError):
    pass
