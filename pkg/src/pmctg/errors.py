"""Exception hierarchy shared across the package.

CLI exit-code mapping: InputContractError subclasses exit with 2,
everything else (I/O, backend failures) with 1.
"""


class PmctgError(Exception):
    """Base class for all package errors."""


class InputContractError(PmctgError):
    """Caller violated an input contract (CLI exit code 2)."""


class EmptyInputError(InputContractError):
    """No tokens remained after trimming/tokenizing."""


class EmptyCorpusError(InputContractError):
    """Corpus file contained no usable sentences."""


class ConstraintViolationError(InputContractError):
    """Edit would alter or remove a protected keyword token."""


class OovKeywordError(InputContractError):
    """A requested keyword is not in the vocabulary."""


class LineCountMismatchError(InputContractError):
    """Aligned evaluation files differ in line count."""


class BackendUnavailableError(PmctgError):
    """Remote model server unreachable or returned a server error."""


class DimensionMismatchError(PmctgError):
    """Remote encoder returned vectors of an unexpected dimension."""


class ModelFormatError(PmctgError):
    """Serialized model file is malformed or inconsistent."""
