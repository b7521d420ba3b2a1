"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CritmetError(Exception):
    """Base class for all library errors."""


class DomainError(CritmetError, ValueError):
    """An argument lies outside the admissible domain."""


class PhaseError(DomainError):
    """The coupling is at or beyond the critical value (superradiant side)."""


class ResonanceError(DomainError):
    """A renormalised cavity frequency coincides with the atomic frequency."""


class TrajectoryError(DomainError):
    """A trajectory slope would leave the normal phase."""


class ConfigError(CritmetError, ValueError):
    """Invalid or inconsistent configuration."""


class NumericError(CritmetError, ArithmeticError):
    """A numerical procedure failed to reach the requested accuracy."""


class InstabilityError(NumericError):
    """The drift matrix is not Hurwitz, so no unique steady state exists."""


class PurityError(NumericError):
    """The mixed-state QFIM kernel is singular (state numerically pure)."""


class ExtrapolationError(NumericError):
    """A limit extrapolation did not converge."""


class DegenerateExpansionError(NumericError):
    """The projected correction matrix vanishes on the kernel of the leading term."""


class StiffnessError(NumericError):
    """The time integrator could not make progress."""


class NoDissipationError(DomainError):
    """A dissipative quantity was requested with zero loss rate."""


class DivergenceError(NumericError):
    """A closed-form expression has a vanishing denominator."""


class OracleError(NumericError):
    """A validation oracle broke down numerically."""


class SloppinessError(NumericError):
    """The QFIM is too close to singular to invert.

    Attributes
    ----------
    report : SloppinessReport
        Diagnostics of the offending matrix.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
