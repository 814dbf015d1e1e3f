"""Exception types shared across the package.

The CLI maps these onto process exit codes, so keep the hierarchy flat:
anything wrong with user-supplied files or shapes is an InputError,
anything that makes a requested computation impossible is InfeasibleError.
"""


class RepurposeError(Exception):
    """Base class for all package errors."""


class InputError(RepurposeError):
    """Malformed model files, manifests, partition specs or shapes."""


class DimensionMismatch(InputError):
    """Operand shapes do not chain; message names the offending layer."""


class InfeasibleError(RepurposeError):
    """No parameter value can satisfy the requested constraint."""


class EnumerationCapExceeded(RepurposeError):
    """Brute-force search space exceeds the configured cap."""


class CertificateError(RepurposeError):
    """Output-error certificate refused or violated."""


class VerificationError(RepurposeError):
    """A self-check oracle disagreed with the implementation under test."""
