"""Exception and warning types shared by every stage."""


class EdmnetError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class PreconditionError(EdmnetError, ValueError):
    exit_code = 2


class ParseError(PreconditionError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message)


class AlignmentError(PreconditionError):
    pass


class InsufficientTailError(EdmnetError):
    pass


class DegenerateSeriesError(EdmnetError):
    pass


class InsufficientSupportError(EdmnetError):
    pass


class UndefinedMetricError(EdmnetError):
    pass


class MembershipError(EdmnetError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ShortSeriesError(PreconditionError):
    pass


class InfeasibleError(EdmnetError):
    exit_code = 3


class DependencyError(EdmnetError):
    """A stage was asked to run before the stage producing its input."""

    exit_code = 4

    def __init__(self, artifact, producer):
        self.artifact = artifact
        self.producer = producer
        super().__init__(
            f"missing upstream artifact {artifact!r}; run the {producer!r} subcommand first"
        )


class EdmnetWarning(UserWarning):
    """Non-fatal condition worth recording in the run manifest."""
