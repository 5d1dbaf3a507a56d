"""Exception hierarchy shared by every eqkit module."""


class EqkitError(Exception):
    """Base class for all errors raised by eqkit."""


class DimensionMismatch(EqkitError, ValueError):
    pass


class OutsidePositivityWindow(EqkitError, ValueError):
    """The requested time lies where the temperature coefficient is not positive."""


class ExponentOverflow(EqkitError, OverflowError):
    pass


class ParseError(EqkitError, ValueError):
    """Base class of the surface expression parser errors.

    ``offset`` is a byte offset into the source string, or ``None`` when the
    error is not tied to a position.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class ExprSyntaxError(ParseError):
    pass


class UnknownIdentifier(ParseError):
    pass


class WrongArity(ParseError):
    pass


class VariableNotAllowedInDim(ParseError):
    pass


class DomainError(EqkitError, ArithmeticError):
    """Evaluation left the domain of a function; ``subexpr`` is the culprit."""

    def __init__(self, message, subexpr=None):
        self.subexpr = subexpr
        if subexpr is not None:
            message = f"{message} in '{subexpr}'"
        super().__init__(message)


class DegenerateGradient(EqkitError, ArithmeticError):
    pass


class ProjectionFailed(EqkitError, RuntimeError):
    pass


class SingularFieldDecomposition(EqkitError, ArithmeticError):
    pass


class CoeffLengthMismatch(EqkitError, ValueError):
    pass


class UnboundedDomain(EqkitError, ValueError):
    pass


class StuckParticle(EqkitError, RuntimeError):
    pass


class EscapedParticle(EqkitError, RuntimeError):
    pass


class ConfigError(EqkitError, ValueError):
    pass
