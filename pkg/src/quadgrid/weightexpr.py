"""Tiny analytic expression language for adaptive weight functions s(x, y).

Grammar (whitespace insignificant):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?          # '^' is right-associative
    unary  := '-'? atom                    # unary minus binds tighter than '^'s base
    atom   := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | tan | exp | log | sqrt | abs

Evaluation is strict about domains: division by zero, log/sqrt of
out-of-range arguments and overflow raise EvalError instead of propagating
NaN or infinity into an optimization run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadGridError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")

_PRESETS = {
    "uniform": "1.0",
    "paper_abs_sine": "5.0+200.0*abs(sin(2*pi*x)*sin(2*pi*y))",
    "paper_sine": "5.0+200.0*(sin(2*pi*x)*sin(2*pi*y))",
}

PRESET_NAMES = tuple(_PRESETS)


class ParseError(QuadGridError):
    """Syntax error, with the byte offset of the offending token."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
        self.message = message


class EvalError(QuadGridError):
    """Domain violation (division by zero, log/sqrt range, overflow)."""


# AST nodes are plain tuples:
#   ("num", value) ("x",) ("y",) ("pi",)
#   ("neg", a) ("add"|"sub"|"mul"|"div"|"pow", a, b) ("call", name, a)

_BINOPS = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


class _Tokenizer:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        if self.pos >= len(self.src):
            return None
        return self.src[self.pos]

    def take_number(self):
        s = self.src
        start = self.pos
        n = len(s)
        p = start
        while p < n and s[p].isdigit():
            p += 1
        if p < n and s[p] == ".":
            p += 1
            while p < n and s[p].isdigit():
                p += 1
        if p < n and s[p] in "eE":
            q = p + 1
            if q < n and s[q] in "+-":
                q += 1
            if q < n and s[q].isdigit():
                p = q
                while p < n and s[p].isdigit():
                    p += 1
        text = s[start:p]
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"invalid number {text!r}", start) from None
        self.pos = p
        return value

    def take_ident(self):
        s = self.src
        start = self.pos
        p = start
        while p < len(s) and (s[p].isalnum() or s[p] == "_"):
            p += 1
        self.pos = p
        return s[start:p]


class _Parser:
    def __init__(self, src: str):
        self.tok = _Tokenizer(src)

    def parse(self):
        node = self.expr()
        ch = self.tok.peek()
        if ch is not None:
            raise ParseError(f"unexpected {ch!r}", self.tok.pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            ch = self.tok.peek()
            if ch in ("+", "-"):
                self.tok.pos += 1
                node = (_BINOPS[ch], node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            ch = self.tok.peek()
            if ch in ("*", "/"):
                self.tok.pos += 1
                node = (_BINOPS[ch], node, self.factor())
            else:
                return node

    def factor(self):
        node = self.unary()
        if self.tok.peek() == "^":
            self.tok.pos += 1
            node = ("pow", node, self.factor())
        return node

    def unary(self):
        if self.tok.peek() == "-":
            self.tok.pos += 1
            return ("neg", self.atom())
        return self.atom()

    def atom(self):
        ch = self.tok.peek()
        pos = self.tok.pos
        if ch is None:
            raise ParseError("unexpected end of input", pos)
        if ch == "(":
            self.tok.pos += 1
            node = self.expr()
            if self.tok.peek() != ")":
                raise ParseError("expected ')'", self.tok.pos)
            self.tok.pos += 1
            return node
        if ch.isdigit() or ch == ".":
            return ("num", self.tok.take_number())
        if ch.isalpha() or ch == "_":
            name = self.tok.take_ident()
            if name == "x":
                return ("x",)
            if name == "y":
                return ("y",)
            if name == "pi":
                return ("pi",)
            if name in FUNCTIONS:
                if self.tok.peek() != "(":
                    raise ParseError(f"expected '(' after {name!r}", self.tok.pos)
                self.tok.pos += 1
                node = self.expr()
                if self.tok.peek() != ")":
                    raise ParseError("expected ')'", self.tok.pos)
                self.tok.pos += 1
                return ("call", name, node)
            raise ParseError(f"unknown identifier {name!r}", pos)
        raise ParseError(f"unexpected {ch!r}", pos)


_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


def _eval_node(node, x, y):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "x":
        return x
    if tag == "y":
        return y
    if tag == "pi":
        return np.pi
    if tag == "neg":
        return -_eval_node(node[1], x, y)
    if tag == "call":
        name = node[1]
        arg = _eval_node(node[2], x, y)
        if name == "log" and np.any(np.asarray(arg) <= 0.0):
            raise EvalError(f"log of non-positive argument in '{to_source(node)}'")
        if name == "sqrt" and np.any(np.asarray(arg) < 0.0):
            raise EvalError(f"sqrt of negative argument in '{to_source(node)}'")
        out = _FUNCS[name](arg)
        if not np.all(np.isfinite(out)):
            raise EvalError(f"non-finite result in '{to_source(node)}'")
        return out
    a = _eval_node(node[1], x, y)
    b = _eval_node(node[2], x, y)
    if tag == "add":
        out = a + b
    elif tag == "sub":
        out = a - b
    elif tag == "mul":
        out = a * b
    elif tag == "div":
        if np.any(np.asarray(b) == 0.0):
            raise EvalError(f"division by zero in '{to_source(node)}'")
        out = a / b
    elif tag == "pow":
        with np.errstate(all="ignore"):
            out = np.power(a, b)
    else:  # pragma: no cover - parser emits no other tags
        raise AssertionError(f"unknown node {tag!r}")
    if not np.all(np.isfinite(out)):
        raise EvalError(f"non-finite result in '{to_source(node)}'")
    return out


# precedence levels for the printer: add/sub 1, mul/div 2, pow 3, unary 4
_LEVEL = {"add": 1, "sub": 1, "mul": 2, "div": 2, "pow": 3, "neg": 4}


def to_source(node) -> str:
    """Render an AST back to parseable text.

    Parenthesization preserves structure exactly: reparsing the output yields
    a structurally identical tree.
    """
    tag = node[0]
    if tag == "num":
        return repr(node[1])
    if tag in ("x", "y", "pi"):
        return tag
    if tag == "call":
        return f"{node[1]}({to_source(node[2])})"
    if tag == "neg":
        child = node[1]
        text = to_source(child)
        if child[0] in _LEVEL:  # anything below atom level needs parens
            text = f"({text})"
        return f"-{text}"
    left, right = node[1], node[2]
    ltext = to_source(left)
    rtext = to_source(right)
    lvl = _LEVEL[tag]
    if tag == "pow":
        # base must be a unary; exponent is a factor (right-associative)
        if left[0] in ("add", "sub", "mul", "div", "pow"):
            ltext = f"({ltext})"
        if right[0] in ("add", "sub", "mul", "div"):
            rtext = f"({rtext})"
        return f"{ltext}^{rtext}"
    if _LEVEL.get(left[0], 5) < lvl:
        ltext = f"({ltext})"
    # left-associative: an equal-level right child came from explicit parens
    if _LEVEL.get(right[0], 5) <= lvl:
        rtext = f"({rtext})"
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[tag]
    return f"{ltext}{op}{rtext}"


@dataclass(frozen=True)
class WeightExpr:
    """A parsed adaptive weight function s(x, y)."""

    ast: tuple

    def eval(self, x, y):
        """Evaluate at scalar or array coordinates.

        Scalars in, float out; arrays broadcast elementwise.
        """
        scalar = np.isscalar(x) and np.isscalar(y)
        out = _eval_node(self.ast, x, y)
        if scalar:
            return float(out)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), np.broadcast(np.asarray(x), np.asarray(y)).shape).copy()

    def __call__(self, x, y):
        return self.eval(x, y)

    def source(self) -> str:
        return to_source(self.ast)

    def __str__(self) -> str:
        return self.source()


def parse(src: str) -> WeightExpr:
    """Parse expression text; raises ParseError with the offending offset."""
    return WeightExpr(_Parser(src).parse())


def preset(name: str) -> WeightExpr:
    """Built-in weight functions: uniform, paper_abs_sine, paper_sine."""
    try:
        src = _PRESETS[name]
    except KeyError:
        available = ", ".join(PRESET_NAMES)
        raise QuadGridError(f"unknown weight preset {name!r} (available: {available})") from None
    return parse(src)
