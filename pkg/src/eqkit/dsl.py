"""Implicit-surface expressions: parsing, printing and gradient evaluation.

Grammar (no implicit multiplication, integer exponents only)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' ['-' | '+'] INT)?
    atom  := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  Chained
powers such as ``x^2^3`` are rejected instead of guessing an associativity.

Gradients are exact, propagated by forward-mode dual numbers batched over
points: values have shape ``(N,)`` and partials ``(N, d)``.
"""
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (DomainError, ExprSyntaxError, UnknownIdentifier,
                     VariableNotAllowedInDim, WrongArity)

MAX_DEPTH = 64
VARIABLES = ("x", "y", "z")
FUNCTIONS = ("sin", "cos", "sqrt", "exp", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class SurfaceExpr:
    """A parsed expression together with the dimension it was checked against."""
    root: Node
    dim: int
    source: str = field(default="", compare=False)

    def __str__(self):
        return to_source(self.root)

    def eval_grad(self, x, errors="raise"):
        return eval_grad(self, x, errors=errors)

    def value(self, x, errors="raise"):
        return evaluate(self, x, errors=errors)


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str     # 'num', 'name', 'op', 'end'
    text: str
    offset: int   # byte offset


def _tokenize(src):
    toks = []
    pos = 0
    byte = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", byte)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), byte))
        byte += len(m.group().encode())
        pos = m.end()
    toks.append(_Tok("end", "", byte))
    return toks


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, src, dim):
        self.toks = _tokenize(src)
        self.i = 0
        self.dim = dim
        self.depth = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def _unexpected(self):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        return ExprSyntaxError(f"unexpected {what}", t.offset)

    def _expect(self, text):
        if self.tok.text != text or self.tok.kind != "op":
            raise ExprSyntaxError(f"expected {text!r}", self.tok.offset)
        self.i += 1

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExprSyntaxError(f"expression nested deeper than {MAX_DEPTH}", self.tok.offset)

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise self._unexpected()
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            self._enter()
            node = Neg(self.unary())
            self.depth -= 1
            return node
        return self.power()

    def power(self):
        base = self.atom()
        if not (self.tok.kind == "op" and self.tok.text == "^"):
            return base
        self.i += 1
        sign = 1
        if self.tok.kind == "op" and self.tok.text in "+-":
            sign = -1 if self.tok.text == "-" else 1
            self.i += 1
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            raise ExprSyntaxError("exponent must be an integer literal", t.offset)
        self.i += 1
        if self.tok.kind == "op" and self.tok.text == "^":
            raise ExprSyntaxError("chained '^' is ambiguous; add parentheses", self.tok.offset)
        return Pow(base, sign * int(t.text))

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "name":
            self.i += 1
            if t.text in VARIABLES:
                if VARIABLES.index(t.text) >= self.dim:
                    raise VariableNotAllowedInDim(
                        f"variable {t.text!r} is not available in dimension {self.dim}", t.offset)
                return Var(t.text)
            if t.text in FUNCTIONS:
                return self._call(t)
            raise UnknownIdentifier(f"unknown identifier {t.text!r}", t.offset)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            self._enter()
            node = self.expr()
            self.depth -= 1
            self._expect(")")
            return node
        raise self._unexpected()

    def _call(self, name_tok):
        if not (self.tok.kind == "op" and self.tok.text == "("):
            raise ExprSyntaxError(f"expected '(' after {name_tok.text}", self.tok.offset)
        self.i += 1
        if self.tok.kind == "op" and self.tok.text == ")":
            raise WrongArity(f"{name_tok.text} takes exactly one argument, got 0", name_tok.offset)
        self._enter()
        arg = self.expr()
        self.depth -= 1
        if self.tok.kind == "op" and self.tok.text == ",":
            raise WrongArity(f"{name_tok.text} takes exactly one argument", name_tok.offset)
        self._expect(")")
        return Call(name_tok.text, arg)


def tree_depth(node):
    if isinstance(node, (Num, Var)):
        return 1
    if isinstance(node, BinOp):
        return 1 + max(tree_depth(node.left), tree_depth(node.right))
    if isinstance(node, Neg):
        return 1 + tree_depth(node.operand)
    if isinstance(node, Pow):
        return 1 + tree_depth(node.base)
    return 1 + tree_depth(node.arg)


def parse(src, dim):
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    root = _Parser(src, dim).parse()
    if tree_depth(root) > MAX_DEPTH:
        raise ExprSyntaxError(f"expression tree deeper than {MAX_DEPTH}", 0)
    return SurfaceExpr(root, dim, src)


def variables(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    return variables(node.operand if isinstance(node, Neg)
                     else node.base if isinstance(node, Pow) else node.arg)


# -- printer -----------------------------------------------------------------

_ADD, _MUL, _NEG, _POW, _ATOM = range(1, 6)


def _prec(node):
    if isinstance(node, BinOp):
        return _ADD if node.op in "+-" else _MUL
    if isinstance(node, Neg):
        return _NEG
    if isinstance(node, Pow):
        return _POW
    if isinstance(node, Num) and (node.value < 0 or np.signbit(node.value)):
        return _NEG
    return _ATOM


def _wrap(node, need):
    s = to_source(node)
    return f"({s})" if _prec(node) < need else s


def _num(v):
    if not np.isfinite(v):
        raise ValueError(f"cannot print non-finite literal {v}")
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def to_source(node):
    """Print ``node`` with the fewest parentheses that reparse to the same tree."""
    if isinstance(node, Num):
        return _num(node.value) if node.value >= 0 and not np.signbit(node.value) \
            else f"-{_num(-node.value)}"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Pow):
        return f"{_wrap(node.base, _ATOM)}^{node.exponent}"
    if isinstance(node, Neg):
        return f"-{_wrap(node.operand, _NEG)}"
    level = _prec(node)
    # left-associative: the right operand must bind strictly tighter
    return f"{_wrap(node.left, level)} {node.op} {_wrap(node.right, level + 1)}"


# -- dual numbers ------------------------------------------------------------

class Dual:
    """Batched forward-mode dual number: ``value`` (N,), ``partials`` (N, d)."""

    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        self.value = value
        self.partials = partials

    def __repr__(self):
        return f"Dual({self.value!r}, {self.partials!r})"


class _Evaluator:
    def __init__(self, x, dim, errors):
        self.x = x
        self.dim = dim
        self.nan_mode = errors == "nan"
        self.n = x.shape[0]

    def _bad(self, mask, message, node):
        if not np.any(mask):
            return
        if not self.nan_mode:
            raise DomainError(message, to_source(node))

    def run(self, node):
        if isinstance(node, Num):
            return Dual(np.full(self.n, node.value), np.zeros((self.n, self.dim)))
        if isinstance(node, Var):
            k = VARIABLES.index(node.name)
            p = np.zeros((self.n, self.dim))
            p[:, k] = 1.0
            return Dual(self.x[:, k].copy(), p)
        if isinstance(node, Neg):
            a = self.run(node.operand)
            return Dual(-a.value, -a.partials)
        if isinstance(node, BinOp):
            return self._binop(node)
        if isinstance(node, Pow):
            return self._pow(node)
        return self._call(node)

    def _binop(self, node):
        a, b = self.run(node.left), self.run(node.right)
        if node.op == "+":
            return Dual(a.value + b.value, a.partials + b.partials)
        if node.op == "-":
            return Dual(a.value - b.value, a.partials - b.partials)
        if node.op == "*":
            return Dual(a.value * b.value,
                        a.partials * b.value[:, None] + b.partials * a.value[:, None])
        zero = b.value == 0
        self._bad(zero, "division by zero", node)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = a.value / b.value
            dq = (a.partials - b.partials * q[:, None]) / b.value[:, None]
        return Dual(q, dq)

    def _pow(self, node):
        a = self.run(node.base)
        n = node.exponent
        if n == 0:
            return Dual(np.ones(self.n), np.zeros((self.n, self.dim)))
        if n < 0:
            self._bad(a.value == 0, "zero raised to a negative power", node)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = a.value ** n
            d = n * a.value ** (n - 1)
        return Dual(v, a.partials * d[:, None])

    def _call(self, node):
        a = self.run(node.arg)
        f = node.func
        if f == "sin":
            return Dual(np.sin(a.value), a.partials * np.cos(a.value)[:, None])
        if f == "cos":
            return Dual(np.cos(a.value), -a.partials * np.sin(a.value)[:, None])
        if f == "exp":
            e = np.exp(a.value)
            return Dual(e, a.partials * e[:, None])
        if f == "abs":
            return Dual(np.abs(a.value), a.partials * np.sign(a.value)[:, None])
        # sqrt is not differentiable at 0, so 0 is outside its domain here
        self._bad(a.value < 0, "sqrt of a negative number", node)
        self._bad(a.value == 0, "sqrt at zero (gradient undefined)", node)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.sqrt(a.value)
            return Dual(r, a.partials * (0.5 / r)[:, None])


def _points(expr, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.shape[-1] != expr.dim:
        raise ValueError(f"expression is {expr.dim}-dimensional, got points of size {x2.shape[-1]}")
    return x2, single


def eval_grad(expr, x, errors="raise"):
    """Value and exact gradient of ``expr`` at ``x`` of shape (d,) or (N, d).

    ``errors="nan"`` leaves out-of-domain points as NaN instead of raising.
    """
    x2, single = _points(expr, x)
    with np.errstate(over="ignore", invalid="ignore"):
        out = _Evaluator(x2, expr.dim, errors).run(expr.root)
    bad = ~(np.isfinite(out.value) & np.all(np.isfinite(out.partials), axis=-1))
    if np.any(bad & np.all(np.isfinite(x2), axis=-1)):
        if errors != "nan":
            raise DomainError("overflow: value or gradient is not finite", to_source(expr.root))
        out = Dual(np.where(bad, np.nan, out.value), np.where(bad[:, None], np.nan, out.partials))
    if single:
        return float(out.value[0]), out.partials[0]
    return out.value, out.partials


def evaluate(expr, x, errors="raise"):
    return eval_grad(expr, x, errors=errors)[0]
