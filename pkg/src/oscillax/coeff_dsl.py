"""Tiny expression language for radial coefficient functions.

Coefficients are functions of a single variable ``s``.  The grammar covers
arithmetic (+, -, *, /, ^), the functions sin, cos, exp, log, abs, the
constant ``pi`` and numeric literals.  There are no conditionals: piecewise
coefficients are assembled programmatically from a breakpoint table, one
sub-expression per interval.

Expressions are immutable.  Evaluation is vectorised over numpy arrays and
refuses to return non-finite values: division by zero, log of a non-positive
argument, overflow and the like raise :class:`DomainError` pointing at the
offending abscissa instead of leaking NaN into downstream quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "CoefficientExpr",
    "DomainError",
    "ParseError",
    "parse",
    "evaluate",
    "eval_grid",
    "to_source",
]


class ParseError(ValueError):
    """Raised for malformed source text, with a character position."""


class DomainError(ValueError):
    """Raised when evaluation would produce a non-finite value."""


# ---------------------------------------------------------------------------
# AST nodes

@dataclass(frozen=True, slots=True)
class Num:
    value: float


@dataclass(frozen=True, slots=True)
class Var:
    pass


@dataclass(frozen=True, slots=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True, slots=True)
class Call:
    func: str  # one of sin cos exp log abs
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
}

_CONSTANTS = {"pi": math.pi}


# ---------------------------------------------------------------------------
# Tokenizer / parser.  Recursive descent with the usual precedence ladder:
# sum < product < unary minus < power (right associative) < atoms.

_OPS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    tokens: list[tuple[str, object, int]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_exp = False
            while j < n:
                c = text[j]
                if c.isdigit() or c == ".":
                    j += 1
                elif c in "eE" and not seen_exp:
                    # exponent must be followed by digits, optionally signed
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        seen_exp = True
                        j = k
                    else:
                        break
                else:
                    break
            lexeme = text[i:j]
            try:
                value = float(lexeme)
            except ValueError:
                raise ParseError(f"bad numeric literal {lexeme!r} at position {i}") from None
            tokens.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r} at position {i}")
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, object, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, object, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, where = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} at position {where}")
        self.advance()

    def parse(self) -> Node:
        node = self.sum()
        kind, val, where = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r} at position {where}")
        return node

    def sum(self) -> Node:
        node = self.product()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(str(val), node, self.product())
            else:
                return node

    def product(self) -> Node:
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(str(val), node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            # right associative, exponent may carry its own sign
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, where = self.advance()
        if kind == "num":
            return Num(float(val))  # type: ignore[arg-type]
        if kind == "name":
            name = str(val)
            if name == "s":
                return Var()
            if name in _CONSTANTS:
                return Num(_CONSTANTS[name])
            if name in _FUNCTIONS:
                self.expect_op("(")
                arg = self.sum()
                self.expect_op(")")
                return Call(name, arg)
            raise ParseError(f"unknown identifier {name!r} at position {where}")
        if kind == "op" and val == "(":
            node = self.sum()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected {'end of input' if kind == 'end' else repr(val)} at position {where}")


# ---------------------------------------------------------------------------
# Evaluation

def _eval_node(node: Node, s: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full_like(s, node.value)
    if isinstance(node, Var):
        return s
    if isinstance(node, Neg):
        return -_eval_node(node.operand, s)
    if isinstance(node, Call):
        return _FUNCTIONS[node.func](_eval_node(node.arg, s))
    if isinstance(node, BinOp):
        a = _eval_node(node.left, s)
        b = _eval_node(node.right, s)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        if node.op == "^":
            return np.power(a, b)
    raise TypeError(f"not an expression node: {node!r}")


def _check_finite(values: np.ndarray, s: np.ndarray, source: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise DomainError(
            f"expression {source!r} is not finite at s = {float(s.flat[i])!r}"
        )


# ---------------------------------------------------------------------------
# Printing.  Minimal parentheses, ASCII operators, literals via repr so the
# printed form parses back to the identical tree.

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt_number(x: float) -> str:
    if abs(x) < 1e16 and x == math.floor(x) and not (x == 0 and math.copysign(1, x) < 0):
        return str(int(x))
    return repr(x)


def _print_node(node: Node, parent_prec: int, right_side: bool) -> str:
    if isinstance(node, Num):
        text = _fmt_number(node.value)
        if node.value < 0 or text.startswith("-"):
            # negative literal behaves like a unary minus for precedence
            return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
        return text
    if isinstance(node, Var):
        return "s"
    if isinstance(node, Call):
        return f"{node.func}({_print_node(node.arg, 0, False)})"
    if isinstance(node, Neg):
        inner = _print_node(node.operand, _PRECEDENCE["neg"], False)
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] or (parent_prec == _PRECEDENCE["neg"] and right_side) else text
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        if node.op == "^":
            # right associative; left operand needs parens at equal precedence
            left = _print_node(node.left, prec + 1, False)
            right = _print_node(node.right, prec, True)
        else:
            left = _print_node(node.left, prec, False)
            right = _print_node(node.right, prec + 1, True)
        text = f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"
        # the operand-side bumps above already force parens where
        # associativity demands them, so only lower precedence wraps
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Public wrapper

@dataclass(frozen=True)
class CoefficientExpr:
    """An immutable coefficient function of ``s``.

    A plain expression holds an AST; a piecewise expression instead holds a
    breakpoint table ``nodes`` with one sub-expression per interval.  Pieces
    live on half-open intervals [a_i, a_{i+1}) except the last, which is
    closed at both ends so the table covers [nodes[0], nodes[-1]] exactly.
    """

    source: str
    ast: Node | None = None
    nodes: tuple[float, ...] | None = None
    pieces: tuple["CoefficientExpr", ...] | None = None

    # -- constructors -----------------------------------------------------

    @staticmethod
    def parse(text: str) -> "CoefficientExpr":
        node = _Parser(text).parse()
        return CoefficientExpr(source=_print_node(node, 0, False), ast=node)

    @staticmethod
    def piecewise(
        nodes: Sequence[float],
        pieces: Sequence[Union["CoefficientExpr", str]],
    ) -> "CoefficientExpr":
        node_arr = tuple(float(a) for a in nodes)
        if len(node_arr) < 2:
            raise ValueError("piecewise table needs at least two breakpoints")
        if any(b <= a for a, b in zip(node_arr, node_arr[1:])):
            raise ValueError("piecewise breakpoints must be strictly increasing")
        if len(pieces) != len(node_arr) - 1:
            raise ValueError(
                f"piecewise table with {len(node_arr)} breakpoints needs "
                f"{len(node_arr) - 1} pieces, got {len(pieces)}"
            )
        compiled = tuple(
            p if isinstance(p, CoefficientExpr) else CoefficientExpr.parse(p)
            for p in pieces
        )
        if any(p.nodes is not None for p in compiled):
            raise ValueError("piecewise pieces must be plain expressions")
        source = "piecewise on [%r, %r] with %d pieces" % (
            node_arr[0],
            node_arr[-1],
            len(compiled),
        )
        return CoefficientExpr(source=source, nodes=node_arr, pieces=compiled)

    # -- evaluation --------------------------------------------------------

    def evaluate_grid(self, grid: np.ndarray) -> np.ndarray:
        """Evaluate on an array of abscissae (need not be sorted)."""
        s = np.asarray(grid, dtype=float)
        if self.nodes is None:
            assert self.ast is not None
            with np.errstate(all="ignore"):
                out = _eval_node(self.ast, s)
            out = np.asarray(out, dtype=float)
            _check_finite(out, s, self.source)
            return out
        nodes = np.asarray(self.nodes)
        below = s < nodes[0]
        above = s > nodes[-1]
        if below.any() or above.any():
            bad = below | above
            i = int(np.argmax(bad))
            raise DomainError(
                f"abscissa s = {s.flat[i]!r} outside piecewise table "
                f"[{nodes[0]!r}, {nodes[-1]!r}]"
            )
        # searchsorted('right') - 1 gives the half-open convention; clip
        # folds the closed right endpoint into the final piece.
        idx = np.clip(np.searchsorted(nodes, s, side="right") - 1, 0, len(nodes) - 2)
        out = np.empty_like(s, dtype=float)
        assert self.pieces is not None
        for k, piece in enumerate(self.pieces):
            mask = idx == k
            if mask.any():
                out[mask] = piece.evaluate_grid(s[mask])
        return out

    def evaluate(self, s: float) -> float:
        return float(self.evaluate_grid(np.asarray([s], dtype=float))[0])

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        if arr.ndim == 0:
            return self.evaluate(float(arr))
        return self.evaluate_grid(arr)

    # -- printing ----------------------------------------------------------

    def to_source(self) -> str:
        if self.nodes is not None:
            raise ValueError(
                "piecewise expressions have no single-expression source; "
                "serialise the breakpoint table and pieces instead"
            )
        assert self.ast is not None
        return _print_node(self.ast, 0, False)

    def piece_sources(self) -> list[str]:
        """Sources of the pieces of a piecewise expression."""
        if self.pieces is None:
            raise ValueError("not a piecewise expression")
        return [p.to_source() for p in self.pieces]


# Module-level conveniences mirroring the method API.

def parse(text: str) -> CoefficientExpr:
    return CoefficientExpr.parse(text)


def evaluate(expr: CoefficientExpr, s: float) -> float:
    return expr.evaluate(s)


def eval_grid(expr: CoefficientExpr, grid: np.ndarray) -> np.ndarray:
    return expr.evaluate_grid(grid)


def to_source(expr: CoefficientExpr) -> str:
    return expr.to_source()


def as_callable(f: Union[CoefficientExpr, Callable[[np.ndarray], np.ndarray]]):
    """Normalise an expression or plain callable to a vectorised callable."""
    if isinstance(f, CoefficientExpr):
        return f.evaluate_grid
    if callable(f):
        return f
    raise TypeError(f"expected CoefficientExpr or callable, got {type(f).__name__}")
