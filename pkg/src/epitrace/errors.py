"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, PrerequisiteError -> 3,
everything else -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration value or malformed config file."""


class PrerequisiteError(RuntimeError):
    """A required upstream artifact is missing."""

    def __init__(self, artifact: str, produced_by: str):
        self.artifact = artifact
        self.produced_by = produced_by
        super().__init__(
            f"missing {artifact}; run `epitrace {produced_by}` with the same config first"
        )


class ParseError(ValueError):
    """Malformed row in an input file; carries the 1-based line number."""

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ValidationError(ValueError):
    """Structurally parsable input that violates a dataset invariant."""


class IntegrityError(RuntimeError):
    """Internal inconsistency between simulation artifacts."""


class TrainingError(RuntimeError):
    """The training set cannot support fitting a classifier."""
