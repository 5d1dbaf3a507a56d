"""Expression corpus shared by the parser tests and the acceptance run.

Each valid case carries an independent Python transcription of the
expression; each error case names the exception and, where it is fixed by
the input, the byte offset the error must report.
"""
import math

from eqkit.errors import (DomainError, ExprSyntaxError, UnknownIdentifier,
                          VariableNotAllowedInDim, WrongArity)

# (source, dim, point, oracle)
VALID = [
    ("x", 2, (0.3, -1.2), lambda x, y: x),
    ("x + y", 2, (0.3, -1.2), lambda x, y: x + y),
    ("x - y - 1", 2, (0.3, -1.2), lambda x, y: x - y - 1),
    ("x * y / 2", 2, (0.3, -1.2), lambda x, y: x * y / 2),
    ("x / y / 2", 2, (0.3, -1.2), lambda x, y: x / y / 2),
    ("x^2 + y^2 - 1", 2, (0.3, -1.2), lambda x, y: x ** 2 + y ** 2 - 1),
    ("-x^2", 2, (0.3, -1.2), lambda x, y: -(x ** 2)),
    ("(-x)^2", 2, (0.3, -1.2), lambda x, y: (-x) ** 2),
    ("x^-2", 2, (0.3, -1.2), lambda x, y: x ** -2),
    ("x^0", 2, (0.3, -1.2), lambda x, y: 1.0),
    ("2^3 * x", 2, (0.3, -1.2), lambda x, y: 8 * x),
    ("--x", 2, (0.3, -1.2), lambda x, y: x),
    ("sin(x) * cos(y)", 2, (0.3, -1.2), lambda x, y: math.sin(x) * math.cos(y)),
    ("exp(x - y)", 2, (0.3, -1.2), lambda x, y: math.exp(x - y)),
    ("sqrt(x^2 + y^2) - 1", 2, (0.3, -1.2), lambda x, y: math.hypot(x, y) - 1),
    ("abs(y) - 0.5", 2, (0.3, -1.2), lambda x, y: abs(y) - 0.5),
    ("x^2/4 + y^2 - 1", 2, (0.3, -1.2), lambda x, y: x * x / 4 + y * y - 1),
    ("1.5e-1 * x + 2E1 * y", 2, (0.3, -1.2), lambda x, y: 0.15 * x + 20 * y),
    ("((x))", 2, (0.3, -1.2), lambda x, y: x),
    ("  x   *y  ", 2, (0.3, -1.2), lambda x, y: x * y),
    ("x^2 + y^2 + z^2 - 1", 3, (0.3, -1.2, 0.7), lambda x, y, z: x * x + y * y + z * z - 1),
    ("(sqrt(x^2 + y^2) - 2)^2 + z^2 - 0.25", 3, (0.3, -1.2, 0.7),
     lambda x, y, z: (math.hypot(x, y) - 2) ** 2 + z * z - 0.25),
    ("x*y*z", 3, (0.3, -1.2, 0.7), lambda x, y, z: x * y * z),
    ("exp(-(x^2 + y^2)) - z", 3, (0.3, -1.2, 0.7), lambda x, y, z: math.exp(-(x * x + y * y)) - z),
    ("cos(x + sin(y * z))", 3, (0.3, -1.2, 0.7), lambda x, y, z: math.cos(x + math.sin(y * z))),
    ("x / (y - z)", 3, (0.3, -1.2, 0.7), lambda x, y, z: x / (y - z)),
]

# (source, dim, point or None, exception, offset or None)
ERRORS = [
    ("x +* y", 2, None, ExprSyntaxError, 3),
    ("", 2, None, ExprSyntaxError, 0),
    ("   ", 2, None, ExprSyntaxError, 0),
    ("x +", 2, None, ExprSyntaxError, 3),
    ("(x + y", 2, None, ExprSyntaxError, 6),
    ("x + y)", 2, None, ExprSyntaxError, 5),
    ("x $ y", 2, None, ExprSyntaxError, 2),
    ("x^2^3", 2, None, ExprSyntaxError, 3),
    ("x^y", 2, None, ExprSyntaxError, 2),
    ("x^1.5", 2, None, ExprSyntaxError, 2),
    ("sin x", 2, None, ExprSyntaxError, 4),
    ("foo(x)", 2, None, UnknownIdentifier, 0),
    ("x + pi", 2, None, UnknownIdentifier, 4),
    ("z + 1", 2, None, VariableNotAllowedInDim, 0),
    ("sin()", 2, None, WrongArity, 0),
    ("cos(x, y)", 2, None, WrongArity, 0),
    ("(" * 70 + "x" + ")" * 70, 2, None, ExprSyntaxError, None),
    ("-" * 70 + "x", 2, None, ExprSyntaxError, None),
    ("1 / (x - 1)", 2, (1.0, 0.0), DomainError, None),
    ("x^-1", 2, (0.0, 2.0), DomainError, None),
    ("sqrt(x)", 2, (-1.0, 0.0), DomainError, None),
    ("sqrt(x^2 + y^2)", 2, (0.0, 0.0), DomainError, None),
]
