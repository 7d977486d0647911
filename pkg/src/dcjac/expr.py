"""Scalar expression language: parsing, evaluation, and exact gradients.

Expressions are C1 functions of the variables ``x1 .. xn`` built from
``+ - * / ^``, the functions ``sin cos exp log sqrt``, and decimal
constants.  Gradients are computed by forward-mode automatic
differentiation with dual numbers, one sweep per coordinate, so they are
exact up to rounding (never finite differences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Expr",
    "SmoothFn",
    "ParseError",
    "DomainError",
    "parse",
    "unparse",
]

UNARY_FUNCS = ("neg", "sin", "cos", "exp", "log", "sqrt")
BINARY_OPS = ("+", "-", "*", "/", "^")
FUNC_NAMES = ("sin", "cos", "exp", "log", "sqrt")


class ParseError(ValueError):
    """Raised on malformed input; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(ArithmeticError):
    """Evaluation left the admissible domain (log/sqrt/div/pow violation)."""

    def __init__(self, message: str, subexpr: "Expr | None" = None):
        if subexpr is not None:
            message = f"{message} in subexpression '{unparse(subexpr)}'"
        super().__init__(message)
        self.subexpr = subexpr


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 0-based; rendered as x{index+1}


@dataclass(frozen=True)
class Unary:
    op: str  # one of UNARY_FUNCS
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # one of BINARY_OPS; for "^" the right child is always Const
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]


class _Dual:
    """Dual number (value, derivative) for forward-mode differentiation."""

    __slots__ = ("val", "dot")

    def __init__(self, val: float, dot: float):
        self.val = val
        self.dot = dot

    def __add__(self, o):
        return _Dual(self.val + o.val, self.dot + o.dot)

    def __sub__(self, o):
        return _Dual(self.val - o.val, self.dot - o.dot)

    def __mul__(self, o):
        return _Dual(self.val * o.val, self.dot * o.val + self.val * o.dot)

    def __truediv__(self, o):
        inv = 1.0 / o.val
        return _Dual(self.val * inv, (self.dot - self.val * o.dot * inv) * inv)

    def __neg__(self):
        return _Dual(-self.val, -self.dot)

    def sin(self):
        return _Dual(math.sin(self.val), math.cos(self.val) * self.dot)

    def cos(self):
        return _Dual(math.cos(self.val), -math.sin(self.val) * self.dot)

    def exp(self):
        e = math.exp(self.val)
        return _Dual(e, e * self.dot)

    def log(self):
        return _Dual(math.log(self.val), self.dot / self.val)

    def sqrt(self):
        r = math.sqrt(self.val)
        return _Dual(r, 0.5 * self.dot / r)

    def powc(self, c: float):
        if c == 0.0:
            return _Dual(1.0, 0.0)
        return _Dual(self.val**c, c * self.val ** (c - 1.0) * self.dot)


# ---------------------------------------------------------------------------
# Tokenizer


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind  # "num" | "ident" | "op" | "lparen" | "rparen" | "eof"
        self.text = text
        self.offset = offset


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c in "+-*/^":
            tokens.append(_Token("op", c, i))
            i += 1
        elif c == "(":
            tokens.append(_Token("lparen", c, i))
            i += 1
        elif c == ")":
            tokens.append(_Token("rparen", c, i))
            i += 1
        elif c.isdigit() or c == ".":
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            lexeme = text[start:i]
            try:
                float(lexeme)
            except ValueError:
                raise ParseError(f"malformed number '{lexeme}'", start) from None
            tokens.append(_Token("num", lexeme, start))
        elif c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("ident", text[start:i], start))
        else:
            raise ParseError(f"unexpected character '{c}'", i)
    tokens.append(_Token("eof", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Recursive-descent parser
#
# expr   := term (('+'|'-') term)*          left-assoc
# term   := factor (('*'|'/') factor)*      left-assoc
# factor := '-' factor | power
# power  := atom ('^' factor)?              right-assoc, binds above unary '-'
# atom   := number | ident | ident '(' expr ')' | '(' expr ')'
#
# The exponent of '^' must contain no variables; it is folded to a single
# constant at parse time so every power node has a Const right child.


class _Parser:
    def __init__(self, tokens: list[_Token], dim: int):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {what}, found '{tok.text or 'end of input'}'", tok.offset)
        return self.advance()

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Unary("neg", self.parse_factor())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exponent = self.parse_factor()
            if _has_variable(exponent):
                raise ParseError("exponent of '^' must be a constant", tok.offset)
            return Binary("^", base, Const(_eval_float(exponent, ())))
        return base

    def parse_atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Const(float(tok.text))
        if tok.kind == "lparen":
            node = self.parse_expr()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "ident":
            name = tok.text
            if name in FUNC_NAMES:
                if self.peek().kind != "lparen":
                    raise ParseError(f"expected '(' after function '{name}'", self.peek().offset)
                self.advance()
                arg = self.parse_expr()
                self.expect("rparen", "')'")
                return Unary(name, arg)
            if name.startswith("x") and name[1:].isdigit():
                index = int(name[1:]) - 1
                if index < 0 or index >= self.dim:
                    raise ParseError(
                        f"variable '{name}' out of range for dimension {self.dim}", tok.offset
                    )
                return Var(index)
            raise ParseError(f"unknown identifier '{name}'", tok.offset)
        raise ParseError(f"expected a value, found '{tok.text or 'end of input'}'", tok.offset)


def _has_variable(node: Expr) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Unary):
        return _has_variable(node.operand)
    if isinstance(node, Binary):
        return _has_variable(node.left) or _has_variable(node.right)
    return False


def parse(text: str, dim: int) -> Expr:
    """Parse ``text`` into an AST over variables x1..x{dim}.

    Raises ParseError (with byte offset) on syntax errors, unknown
    identifiers, variable indices outside 1..dim, and non-constant
    exponents.
    """
    if dim < 0:
        raise ValueError("dimension must be nonnegative")
    parser = _Parser(_tokenize(text), dim)
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input '{tok.text}'", tok.offset)
    return node


# ---------------------------------------------------------------------------
# Printing (inverse of parse up to structural equality)

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Expr) -> int:
    if isinstance(node, Binary):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Unary):
        return _PREC_NEG if node.op == "neg" else _PREC_ATOM
    return _PREC_ATOM


def unparse(node: Expr) -> str:
    """Render an AST as text that reparses to a structurally equal AST."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = unparse(node.operand)
            # '-' binds below '^', '*', '/'; parenthesize weaker operands
            if _prec(node.operand) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({unparse(node.operand)})"
    left, right = unparse(node.left), unparse(node.right)
    if node.op in "+-":
        if _prec(node.left) < _PREC_ADD:
            left = f"({left})"
        # left-assoc: a right operand at the same level must be parenthesized
        if _prec(node.right) <= _PREC_ADD:
            right = f"({right})"
    elif node.op in "*/":
        if _prec(node.left) < _PREC_MUL:
            left = f"({left})"
        if _prec(node.right) <= _PREC_MUL:
            right = f"({right})"
    else:  # '^': base must be an atom, exponent parses at factor level
        if _prec(node.left) < _PREC_ATOM or left.startswith("-"):
            left = f"({left})"
    return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"


# ---------------------------------------------------------------------------
# Evaluation

_MATH_UNARY = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}


def _eval_float(node: Expr, x) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(x[node.index])
    if isinstance(node, Unary):
        v = _eval_float(node.operand, x)
        if node.op == "neg":
            return -v
        if node.op == "log" and v <= 0.0:
            raise DomainError(f"log of non-positive value {v!r}", node)
        if node.op == "sqrt" and v < 0.0:
            raise DomainError(f"sqrt of negative value {v!r}", node)
        return _MATH_UNARY[node.op](v)
    lv = _eval_float(node.left, x)
    if node.op == "^":
        c = node.right.value
        return _pow_value(lv, c, node)
    rv = _eval_float(node.right, x)
    if node.op == "+":
        return lv + rv
    if node.op == "-":
        return lv - rv
    if node.op == "*":
        return lv * rv
    if rv == 0.0:
        raise DomainError("division by zero", node)
    return lv / rv


def _pow_value(base: float, c: float, node: Expr) -> float:
    if float(c).is_integer():
        if base == 0.0 and c < 0.0:
            raise DomainError("zero raised to a negative power", node)
        return base**c
    if base <= 0.0:
        raise DomainError(
            f"non-integer power of non-positive base {base!r}", node
        )
    return base**c


def _eval_dual(node: Expr, x, coord: int) -> _Dual:
    if isinstance(node, Const):
        return _Dual(node.value, 0.0)
    if isinstance(node, Var):
        return _Dual(float(x[node.index]), 1.0 if node.index == coord else 0.0)
    if isinstance(node, Unary):
        d = _eval_dual(node.operand, x, coord)
        if node.op == "neg":
            return -d
        if node.op == "log" and d.val <= 0.0:
            raise DomainError(f"log of non-positive value {d.val!r}", node)
        if node.op == "sqrt":
            if d.val < 0.0:
                raise DomainError(f"sqrt of negative value {d.val!r}", node)
            if d.val == 0.0:
                raise DomainError("sqrt not differentiable at 0", node)
        return getattr(d, node.op)()
    ld = _eval_dual(node.left, x, coord)
    if node.op == "^":
        c = node.right.value
        _pow_value(ld.val, c, node)  # domain check
        return ld.powc(c)
    rd = _eval_dual(node.right, x, coord)
    if node.op == "+":
        return ld + rd
    if node.op == "-":
        return ld - rd
    if node.op == "*":
        return ld * rd
    if rd.val == 0.0:
        raise DomainError("division by zero", node)
    return ld / rd


@dataclass(frozen=True)
class SmoothFn:
    """A parsed C1 function of ``dim`` real variables with exact gradient."""

    expr: Expr
    dim: int

    @classmethod
    def from_text(cls, text: str, dim: int) -> "SmoothFn":
        return cls(parse(text, dim), dim)

    def eval(self, x) -> float:
        """Value at x (sequence of length dim)."""
        if len(x) != self.dim:
            raise ValueError(f"point has length {len(x)}, expected {self.dim}")
        return _eval_float(self.expr, x)

    def grad(self, x) -> np.ndarray:
        """Exact gradient at x via one dual-number sweep per coordinate."""
        if len(x) != self.dim:
            raise ValueError(f"point has length {len(x)}, expected {self.dim}")
        out = np.empty(self.dim)
        for l in range(self.dim):
            out[l] = _eval_dual(self.expr, x, l).dot
        return out

    def __str__(self) -> str:
        return unparse(self.expr)
