"""Expression DSL: parse, differentiate exactly, simplify, and evaluate.

Expressions are complex-valued functions of real variables (time, coordinates,
velocities, named parameters). Complex values enter only through constants;
the bare identifier ``i`` is reserved for the imaginary unit and cannot be
bound. Differentiation is structural tree rewriting, so second partials
(mass matrices and the like) carry no truncation error.

Grammar, loosest to tightest binding::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          right-associative
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Identifiers are ``[A-Za-z_][A-Za-z0-9_]*``; numeric literals are decimal with
an optional exponent. Supported calls: sin, cos, exp, ln, sqrt, tanh.

All node types are immutable and hashable; every operation here is pure, so
expressions are safe to share across threads.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Union

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "tanh")
IMAGINARY_UNIT = "i"

Bindings = Mapping[str, float]


class ExprError(Exception):
    """Base class for expression-engine failures."""


class ExprSyntaxError(ExprError):
    """Malformed source text; carries the offset and the expected token set."""

    def __init__(self, position: int, expected: Iterable[str]) -> None:
        self.position = position
        self.expected = frozenset(expected)
        wanted = ", ".join(sorted(self.expected))
        super().__init__(f"syntax error at offset {position}: expected {wanted}")


class UnknownFunction(ExprError):
    def __init__(self, name: str, position: int = -1) -> None:
        self.name = name
        self.position = position
        super().__init__(
            f"unknown function '{name}' (supported: {', '.join(FUNCTIONS)})"
        )


class DomainError(ExprError):
    """Evaluation left the supported domain (ln of nonpositive real, x/0, 0^negative)."""


class UnboundSymbol(ExprError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unbound symbol '{name}'")


Number = Union[int, float, complex]


@dataclass(frozen=True)
class Expr:
    """Immutable expression node. Arithmetic operators build trees."""

    def __add__(self, other: "Expr | Number") -> "Expr":
        return BinOp("+", self, as_expr(other))

    def __radd__(self, other: Number) -> "Expr":
        return BinOp("+", as_expr(other), self)

    def __sub__(self, other: "Expr | Number") -> "Expr":
        return BinOp("-", self, as_expr(other))

    def __rsub__(self, other: Number) -> "Expr":
        return BinOp("-", as_expr(other), self)

    def __mul__(self, other: "Expr | Number") -> "Expr":
        return BinOp("*", self, as_expr(other))

    def __rmul__(self, other: Number) -> "Expr":
        return BinOp("*", as_expr(other), self)

    def __truediv__(self, other: "Expr | Number") -> "Expr":
        return BinOp("/", self, as_expr(other))

    def __rtruediv__(self, other: Number) -> "Expr":
        return BinOp("/", as_expr(other), self)

    def __pow__(self, other: "Expr | Number") -> "Expr":
        return BinOp("^", self, as_expr(other))

    def __neg__(self) -> "Expr":
        return Neg(self)

    def eval(self, bindings: Bindings) -> complex:
        return evaluate(self, bindings)

    def diff(self, name: str) -> "Expr":
        return diff(self, name)


@dataclass(frozen=True)
class Const(Expr):
    value: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str  # one of FUNCTIONS
    arg: Expr


ZERO = Const(0.0)
ONE = Const(1.0)
I = Const(1j)


def as_expr(x: "Expr | Number") -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex)):
        return Const(complex(x))
    raise TypeError(f"cannot coerce {type(x).__name__} to Expr")


# --- tokenizer / parser ---------------------------------------------------

_NUM = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPS = "+-*/^()"


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | one of _OPS | "eof"
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    out: list[_Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch in " \t\r\n":
            pos += 1
            continue
        if ch in _OPS:
            out.append(_Token(ch, ch, pos))
            pos += 1
            continue
        m = _NUM.match(source, pos)
        if m:
            out.append(_Token("num", m.group(), pos))
            pos = m.end()
            continue
        m = _IDENT.match(source, pos)
        if m:
            out.append(_Token("ident", m.group(), pos))
            pos = m.end()
            continue
        raise ExprSyntaxError(pos, {"number", "identifier", "operator", "parenthesis"})
    out.append(_Token("eof", "", n))
    return out


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self.tokens = tokens
        self.idx = 0

    def peek(self) -> _Token:
        return self.tokens[self.idx]

    def take(self) -> _Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def expect(self, kind: str, expected: Iterable[str]) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExprSyntaxError(tok.pos, expected)
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ExprSyntaxError(tok.pos, {"end of input", "binary operator"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind in "+-":
            op = self.take().kind
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().kind in "*/":
            op = self.take().kind
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek().kind == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().kind == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Const(complex(float(tok.text)))
        if tok.kind == "ident":
            self.take()
            if self.peek().kind == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownFunction(tok.text, tok.pos)
                self.take()
                arg = self.expr()
                self.expect(")", {"')'"})
                return Call(tok.text, arg)
            if tok.text == IMAGINARY_UNIT:
                return I
            return Sym(tok.text)
        if tok.kind == "(":
            self.take()
            e = self.expr()
            self.expect(")", {"')'"})
            return e
        raise ExprSyntaxError(tok.pos, {"number", "identifier", "'('"})


def parse(source: str) -> Expr:
    """Parse `source` into an Expr; position-reporting on invalid input."""
    return _Parser(_tokenize(source)).parse()


# --- evaluation -----------------------------------------------------------


def _domain_pow(a: complex, b: complex) -> complex:
    if a == 0 and b.real < 0:
        raise DomainError("zero raised to a negative power")
    try:
        return a**b
    except ZeroDivisionError:
        raise DomainError("zero raised to a negative power") from None
    except ValueError:
        # negative real base with fractional exponent: principal complex branch
        return complex(a) ** complex(b)


def _domain_div(a: complex, b: complex) -> complex:
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _apply_call(fn: str, z: complex) -> complex:
    if fn == "sin":
        return cmath.sin(z)
    if fn == "cos":
        return cmath.cos(z)
    if fn == "exp":
        return cmath.exp(z)
    if fn == "tanh":
        return cmath.tanh(z)
    if fn == "sqrt":
        return cmath.sqrt(z)
    if fn == "ln":
        if z.imag == 0 and z.real <= 0:
            raise DomainError("ln of nonpositive real")
        return cmath.log(z)
    raise UnknownFunction(fn)


def evaluate(e: Expr, bindings: Bindings) -> complex:
    """Evaluate to an IEEE double-precision number, complex when warranted.

    Variables are real by contract and complexness enters only through
    constants, so real subtrees run in plain float arithmetic. The compiled
    fast path emits the same operations on the same literal values, which
    keeps the two evaluators bitwise interchangeable.
    """
    if isinstance(e, Const):
        v = e.value
        return v.real if v.imag == 0 else v
    if isinstance(e, Sym):
        try:
            return bindings[e.name]
        except KeyError:
            raise UnboundSymbol(e.name) from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, bindings)
    if isinstance(e, BinOp):
        a = evaluate(e.left, bindings)
        b = evaluate(e.right, bindings)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return _domain_div(a, b)
        return _domain_pow(a, b)
    if isinstance(e, Call):
        return _apply_call(e.fn, evaluate(e.arg, bindings))
    raise TypeError(f"not an Expr node: {e!r}")


# --- differentiation ------------------------------------------------------


def _diff_call(e: Call, s: str) -> Expr:
    inner = _diff_raw(e.arg, s)
    fn, arg = e.fn, e.arg
    if fn == "sin":
        outer: Expr = Call("cos", arg)
    elif fn == "cos":
        outer = Neg(Call("sin", arg))
    elif fn == "exp":
        outer = e
    elif fn == "tanh":
        outer = BinOp("-", ONE, BinOp("^", Call("tanh", arg), Const(2.0)))
    elif fn == "sqrt":
        outer = BinOp("/", Const(0.5), Call("sqrt", arg))
    elif fn == "ln":
        outer = BinOp("/", ONE, arg)
    else:
        raise UnknownFunction(fn)
    return BinOp("*", outer, inner)


def _diff_raw(e: Expr, s: str) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == s else ZERO
    if isinstance(e, Neg):
        return Neg(_diff_raw(e.arg, s))
    if isinstance(e, BinOp):
        l, r = e.left, e.right
        dl, dr = _diff_raw(l, s), _diff_raw(r, s)
        if e.op == "+":
            return BinOp("+", dl, dr)
        if e.op == "-":
            return BinOp("-", dl, dr)
        if e.op == "*":
            return BinOp("+", BinOp("*", dl, r), BinOp("*", l, dr))
        if e.op == "/":
            num = BinOp("-", BinOp("*", dl, r), BinOp("*", l, dr))
            return BinOp("/", num, BinOp("^", r, Const(2.0)))
        # power rule; general case via f^g * (g' ln f + g f'/f)
        if isinstance(r, Const):
            c = r.value
            if c == 0:
                return ZERO
            down = BinOp("^", l, Const(c - 1))
            return BinOp("*", BinOp("*", Const(c), down), dl)
        if isinstance(l, Const):
            if l.value == 0:
                return ZERO
            logc = Const(cmath.log(l.value))
            return BinOp("*", BinOp("*", e, logc), dr)
        lhs = BinOp("*", dr, Call("ln", l))
        rhs = BinOp("*", r, BinOp("/", dl, l))
        return BinOp("*", e, BinOp("+", lhs, rhs))
    if isinstance(e, Call):
        return _diff_call(e, s)
    raise TypeError(f"not an Expr node: {e!r}")


@lru_cache(maxsize=None)
def diff(e: Expr, s: str) -> Expr:
    """Exact partial derivative of `e` with respect to the symbol named `s`."""
    return simplify(_diff_raw(e, s))


# --- simplification -------------------------------------------------------


def _is_const(e: Expr, value: complex) -> bool:
    return isinstance(e, Const) and e.value == value


@lru_cache(maxsize=None)
def simplify(e: Expr) -> Expr:
    """Constant folding plus identity elimination (x+0, x*1, x*0, x^1, x^0).

    Conservative by design: no trig identities, no factoring. Evaluation is
    preserved; folds that would raise (e.g. 1/0) are left in place so error
    semantics survive.
    """
    if isinstance(e, (Const, Sym)):
        return e
    if isinstance(e, Neg):
        arg = simplify(e.arg)
        if isinstance(arg, Const):
            return Const(-arg.value)
        if isinstance(arg, Neg):
            return arg.arg
        return Neg(arg)
    if isinstance(e, Call):
        arg = simplify(e.arg)
        if isinstance(arg, Const):
            try:
                return Const(_apply_call(e.fn, arg.value))
            except ExprError:
                pass
        return Call(e.fn, arg)
    if isinstance(e, BinOp):
        l = simplify(e.left)
        r = simplify(e.right)
        op = e.op
        if isinstance(l, Const) and isinstance(r, Const):
            try:
                return Const(evaluate(BinOp(op, l, r), {}))
            except ExprError:
                pass
        if op == "+":
            if _is_const(l, 0):
                return r
            if _is_const(r, 0):
                return l
        elif op == "-":
            if _is_const(r, 0):
                return l
            if _is_const(l, 0):
                return simplify(Neg(r))
        elif op == "*":
            if _is_const(l, 0) or _is_const(r, 0):
                return ZERO
            if _is_const(l, 1):
                return r
            if _is_const(r, 1):
                return l
        elif op == "/":
            if _is_const(r, 1):
                return l
        elif op == "^":
            if _is_const(r, 1):
                return l
            if _is_const(r, 0):
                return ONE  # matches evaluation: 0^0 == 1
        return BinOp(op, l, r)
    raise TypeError(f"not an Expr node: {e!r}")


# --- printing -------------------------------------------------------------


def _num_src(x: float) -> str:
    return repr(float(x))


def _const_src(z: complex) -> str:
    if z.imag == 0:
        return _num_src(z.real)
    if z.real == 0:
        return f"({_num_src(z.imag)} * i)"
    return f"({_num_src(z.real)} + ({_num_src(z.imag)} * i))"


def to_source(e: Expr) -> str:
    """Render parseable text with explicit parentheses; round-trips exactly."""
    if isinstance(e, Const):
        return _const_src(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.arg)})"
    raise TypeError(f"not an Expr node: {e!r}")


# --- structure helpers ----------------------------------------------------


@lru_cache(maxsize=None)
def free_symbols(e: Expr) -> frozenset[str]:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Sym):
        return frozenset((e.name,))
    if isinstance(e, Neg):
        return free_symbols(e.arg)
    if isinstance(e, BinOp):
        return free_symbols(e.left) | free_symbols(e.right)
    if isinstance(e, Call):
        return free_symbols(e.arg)
    raise TypeError(f"not an Expr node: {e!r}")


@lru_cache(maxsize=None)
def conj_expr(e: Expr) -> Expr:
    """Structural conjugate: flips the imaginary part of every constant.

    Since variables are real and the supported calls have real Taylor
    coefficients, eval(conj_expr(e)) == conj(eval(e)) whenever evaluation
    stays off the branch cuts of sqrt/ln/^ (negative real axis). Polynomial
    Lagrangians, which is what the engine derives dynamics from, are exact.
    """
    if isinstance(e, Const):
        return Const(e.value.conjugate())
    if isinstance(e, Sym):
        return e
    if isinstance(e, Neg):
        return Neg(conj_expr(e.arg))
    if isinstance(e, BinOp):
        return BinOp(e.op, conj_expr(e.left), conj_expr(e.right))
    if isinstance(e, Call):
        return Call(e.fn, conj_expr(e.arg))
    raise TypeError(f"not an Expr node: {e!r}")


@lru_cache(maxsize=None)
def re_part(e: Expr) -> Expr:
    """Real part of `e` as a real-valued Expr: (e + conj e)/2."""
    c = conj_expr(e)
    if c == e:  # every constant real: the expression is its own real part
        return simplify(e)
    return simplify(BinOp("*", BinOp("+", e, c), Const(0.5)))


@lru_cache(maxsize=None)
def im_part(e: Expr) -> Expr:
    """Imaginary part of `e` as a real-valued Expr: (e - conj e)/(2i)."""
    c = conj_expr(e)
    if c == e:
        return ZERO
    return simplify(BinOp("*", BinOp("-", e, c), Const(-0.5j)))


# --- compiled fast path ---------------------------------------------------


def _codegen(e: Expr, args: frozenset[str], consts: Mapping[str, complex]) -> str:
    if isinstance(e, Const):
        v = e.value
        return repr(v.real) if v.imag == 0 else repr(v)
    if isinstance(e, Sym):
        if e.name in args:
            return e.name
        if e.name in consts:
            v = complex(consts[e.name])
            return repr(v.real) if v.imag == 0 else repr(v)
        raise UnboundSymbol(e.name)
    if isinstance(e, Neg):
        return f"(-{_codegen(e.arg, args, consts)})"
    if isinstance(e, BinOp):
        l = _codegen(e.left, args, consts)
        r = _codegen(e.right, args, consts)
        if e.op == "/":
            return f"_h_div({l}, {r})"
        if e.op == "^":
            return f"_h_pow({l}, {r})"
        return f"({l} {e.op} {r})"
    if isinstance(e, Call):
        return f"_h_call({e.fn!r}, ({_codegen(e.arg, args, consts)}))"
    raise TypeError(f"not an Expr node: {e!r}")


@lru_cache(maxsize=None)
def _compile(e: Expr, args: tuple[str, ...], const_items: tuple[tuple[str, complex], ...]):
    body = _codegen(e, frozenset(args), dict(const_items))
    src = f"def _f({', '.join(args)}):\n    return {body}\n"
    ns = {
        "__builtins__": {},
        "_h_div": _domain_div,
        "_h_pow": _domain_pow,
        "_h_call": _apply_call,
    }
    exec(src, ns)  # noqa: S102 - source is generated from a validated tree
    return ns["_f"]


def compile_expr(
    e: Expr, args: tuple[str, ...], consts: Mapping[str, float] | None = None
) -> Callable[..., complex]:
    """Compile to a positional-argument closure; semantics match `evaluate`.

    Symbols listed in `args` become positional parameters; symbols in
    `consts` are folded in as literals. Any other free symbol raises
    UnboundSymbol at compile time. Domain guards are shared with the tree
    walker, so error behavior is identical.
    """
    items = tuple(sorted((k, complex(v)) for k, v in (consts or {}).items()))
    return _compile(e, tuple(args), items)
