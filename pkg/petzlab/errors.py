"""
Exception hierarchy for petzlab.

Every failure raised by the numerics carries a structured context dict so the
observability layer can log it as fields, and an exit code the CLI maps to.
"""

from typing import Any

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INVARIANT = 3


class PetzlabError(Exception):
    """Base class for all petzlab errors."""

    exit_code = EXIT_USAGE

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "error_type": type(self).__name__,
            "message": self.message,
            **{k: _plain(v) for k, v in self.context.items()},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


class NonHermitian(PetzlabError):
    """Operator deviates from its adjoint by more than the hermiticity tolerance."""


class ConvergenceFailure(PetzlabError):
    """Eigensolver did not converge."""


class NegativeEigenvalue(PetzlabError):
    """Eigenvalue below -psd_tol; never clipped silently."""


class ShapeMismatch(PetzlabError):
    """Operator dimensions disagree with each other or with a SpaceShape."""


class TraceNotOne(PetzlabError):
    pass


class NegativeParameter(PetzlabError):
    pass


class CompletenessViolation(PetzlabError):
    """Kraus operators do not resolve the identity (or the declared support)."""

    def __init__(self, message: str, residual: float, **context: Any):
        super().__init__(message, residual=residual, **context)
        self.residual = residual


class UnknownLabel(PetzlabError):
    pass


class SingularMarginal(PetzlabError):
    """A marginal required to be positive definite has an eigenvalue at or below support_tol."""


class SupportViolation(PetzlabError):
    """supp(rho) is not contained in supp(sigma), or a positive-definiteness hypothesis fails."""


class DimensionCap(PetzlabError):
    """Dense tensor-power object would exceed the configured total dimension."""


class SingularState(PetzlabError):
    pass


class FamilyNotResolution(PetzlabError):
    """Operator family handed to the fidelity-decomposition lemma does not sum to the identity."""


class InvalidConfig(PetzlabError):
    pass


class IoFailure(PetzlabError):
    exit_code = EXIT_IO


class InvariantViolation(PetzlabError):
    """A proved statement produced a violated verdict: this is a bug, not a finding."""

    exit_code = EXIT_INVARIANT
