"""One-variable arithmetic expressions used to define f, g, h, D, rho.

Grammar (LL(1), no implicit multiplication):

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative, binds above unary -
    atom   := NUMBER | 'u' | NAME '(' expr (',' expr)? ')' | '(' expr ')'

NUMBER is a decimal literal with optional exponent. The only variable is u;
the only function names are sqrt, exp, log, abs, sin, cos and two-argument
pow. Anything else is an UnknownIdentifierError.

Parsed expressions are immutable and evaluation is pure, so they are safe
for unrestricted concurrent use.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownIdentifierError

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call",
    "parse", "evaluate", "to_source", "compile_scalar", "compile_vector",
    "FUNCTIONS",
]

UNARY_FUNCTIONS = ("sqrt", "exp", "log", "abs", "sin", "cos")
FUNCTIONS = UNARY_FUNCTIONS + ("pow",)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]


# ------------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            # skip over trailing whitespace gracefully
            if src[pos:].strip() == "":
                break
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", src, pos)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {text or 'end of input'!r}",
                                  self.src, pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", self.src, pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "u":
                return Var()
            if text in FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                k, t, _ = self.peek()
                if k == "op" and t == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")")
                want = 2 if text == "pow" else 1
                if len(args) != want:
                    raise ExprSyntaxError(
                        f"{text} takes {want} argument{'s' if want > 1 else ''}",
                        self.src, pos)
                return Call(text, tuple(args))
            raise UnknownIdentifierError(f"unknown identifier {text!r}", self.src, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {text or 'end of input'!r}",
                              self.src, pos)


def parse(src: str) -> Expr:
    """Parse an expression string into an immutable AST."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", src, 0)
    return _Parser(src).parse()


# ------------------------------------------------------------------ evaluation

def _pow(base: float, exponent: float) -> float:
    # math.pow raises ValueError exactly when base < 0 and the exponent is
    # non-integral, which is our real-power domain rule.
    return math.pow(base, exponent)


_UNARY_IMPL = {
    "sqrt": math.sqrt,
    "exp": math.exp,
    "log": math.log,
    "abs": abs,
    "sin": math.sin,
    "cos": math.cos,
}


def evaluate(e: Expr, u: float) -> float:
    """Evaluate at a single point, reporting the offending sub-expression
    whenever the result leaves the real domain."""
    if not math.isfinite(u):
        raise EvalDomainError("non-finite input", to_source(e), u)
    return _eval(e, u)


def _eval(e: Expr, u: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return u
    if isinstance(e, Neg):
        return -_eval(e.operand, u)
    if isinstance(e, BinOp):
        lv = _eval(e.left, u)
        rv = _eval(e.right, u)
        try:
            if e.op == "+":
                out = lv + rv
            elif e.op == "-":
                out = lv - rv
            elif e.op == "*":
                out = lv * rv
            elif e.op == "/":
                out = lv / rv
            else:
                out = _pow(lv, rv)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvalDomainError(str(exc), to_source(e), u) from None
        if not math.isfinite(out):
            raise EvalDomainError("non-finite result", to_source(e), u)
        return out
    # Call
    argv = [_eval(a, u) for a in e.args]
    try:
        out = _pow(argv[0], argv[1]) if e.name == "pow" else _UNARY_IMPL[e.name](argv[0])
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvalDomainError(str(exc), to_source(e), u) from None
    if not math.isfinite(out):
        raise EvalDomainError("non-finite result", to_source(e), u)
    return out


# -------------------------------------------------------------- pretty-printer

# Binding strength; parenthesisation preserves the exact evaluation order,
# including float non-associativity of + - * /.
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    if isinstance(e, Num) and math.copysign(1.0, e.value) < 0:
        return _PREC["neg"]       # prints with a leading minus sign
    return _PREC["atom"]


def to_source(e: Expr) -> str:
    """Render back to the surface grammar; reparsing evaluates identically."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "u"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if _prec(e.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_source(a) for a in e.args)})"
    p = _PREC[e.op]
    left = to_source(e.left)
    right = to_source(e.right)
    if e.op == "^":
        # left operand of ^ is an atom in the grammar; the exponent admits
        # a unary chain.
        if _prec(e.left) < _PREC["atom"]:
            left = f"({left})"
        if _prec(e.right) < _PREC["neg"]:
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        # parenthesise same-precedence right operands to keep association
        if _prec(e.right) <= p:
            right = f"({right})"
    return f"{left} {e.op} {right}"


# ----------------------------------------------------------------- compilation

def _codegen(e: Expr, ns: str) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "u"
    if isinstance(e, Neg):
        return f"(-{_codegen(e.operand, ns)})"
    if isinstance(e, Call):
        args = ", ".join(_codegen(a, ns) for a in e.args)
        if e.name == "pow":
            return f"{ns}_pow({args})"
        return f"{ns}_{e.name}({args})"
    l, r = _codegen(e.left, ns), _codegen(e.right, ns)
    if e.op == "^":
        return f"{ns}_pow({l}, {r})"
    return f"({l} {e.op} {r})"


_SCALAR_NS = {
    "m_pow": math.pow, "m_sqrt": math.sqrt, "m_exp": math.exp,
    "m_log": math.log, "m_abs": abs, "m_sin": math.sin, "m_cos": math.cos,
}

_VECTOR_NS = {
    "v_pow": np.power, "v_sqrt": np.sqrt, "v_exp": np.exp,
    "v_log": np.log, "v_abs": np.abs, "v_sin": np.sin, "v_cos": np.cos,
}


def compile_scalar(e: Expr) -> Callable[[float], float]:
    """Compile to a fast float -> float callable.

    Domain failures raise EvalDomainError like the interpreter, but with the
    whole expression as context rather than the precise sub-expression.
    """
    src = _codegen(e, "m")
    raw = eval(compile(f"lambda u: {src}", "<expr>", "eval"),
               {"__builtins__": {}, **_SCALAR_NS})
    full = to_source(e)

    def fn(u: float) -> float:
        try:
            return raw(u)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvalDomainError(str(exc), full, u) from None

    fn.source = full  # type: ignore[attr-defined]
    return fn


def compile_vector(e: Expr) -> Callable[[np.ndarray], np.ndarray]:
    """Compile to an ndarray -> ndarray callable with a finiteness check."""
    src = _codegen(e, "v")
    raw = eval(compile(f"lambda u: {src}", "<expr>", "eval"),
               {"__builtins__": {}, **_VECTOR_NS})
    full = to_source(e)

    def fn(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            out = raw(u)
        out = np.asarray(out, dtype=float)
        if out.shape != u.shape:
            out = np.full_like(u, float(out))
        bad = ~np.isfinite(out)
        if bad.any():
            where = float(u[bad][0]) if u.ndim else float(u)
            raise EvalDomainError("non-finite result", full, where)
        return out

    fn.source = full  # type: ignore[attr-defined]
    return fn
