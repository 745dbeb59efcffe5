"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit 1,
unreadable or undecodable files exit 2, numerical degeneracies exit 3.
"""


class PanoqaError(Exception):
    """Base class for every error this package raises on purpose."""


class ValidationError(PanoqaError):
    """An input violates a documented precondition."""


class ImageFormatError(PanoqaError):
    """A file decoded to something this library cannot consume."""


class DegenerateDataError(PanoqaError):
    """Data too degenerate for a numeric procedure (all zeros, no variance)."""


class ModelFormatError(ValidationError):
    """A persisted model file is malformed or internally inconsistent."""


class ManifestError(ValidationError):
    """A dataset manifest file is malformed."""
