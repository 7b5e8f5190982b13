"""Exception types shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2, any
NumericalFailureError -> 3.
"""


class InvalidInputError(ValueError):
    """An argument violates an operation's precondition."""


class NormalizationImpossibleError(InvalidInputError):
    """Flip-angle normalization is undefined (zero mean amplitude, a0 == 0)."""


class ConfigError(ValueError):
    """A config file is missing, unparseable, or violates an invariant."""

    def __init__(self, message: str, *, path: str | None = None, field: str | None = None):
        self.path = path
        self.field = field
        where = "".join(
            f" [{k}={v}]" for k, v in (("path", path), ("field", field)) if v is not None
        )
        super().__init__(message + where)


class NumericalFailureError(RuntimeError):
    """A numerical routine failed to converge or produced unusable output."""


class DegenerateFieldError(NumericalFailureError):
    """Eigenvectors cannot be classified by dominant electron-spin projection."""
