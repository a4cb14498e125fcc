"""Exception hierarchy shared by the parsers, solvers and the CLI."""


class CompgameError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CompgameError, ValueError):
    """Malformed input: bad file, bad parameter, violated precondition.

    The CLI maps this to exit status 2.
    """

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        prefix = ""
        if source is not None:
            prefix += f"{source}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class MalformedMapError(InputError):
    """A map table refers to an element outside the poset."""


class StrategyError(InputError):
    """A strategy is not a member of the declared strategy set."""


class MalformedWitnessError(InputError):
    """A witness lies outside the instance's strategy space."""
