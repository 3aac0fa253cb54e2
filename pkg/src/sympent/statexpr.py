"""A small language for writing multipartite states.

Grammar (recursive descent, one token of lookahead)::

    document := expr ['@' 'd' '=' INT]
    expr     := term (('+' | '-') term)*
    term     := tensor (('*' | '/') tensor)*
    tensor   := unary ('x' unary)*
    unary    := '-' unary | primary
    primary  := KET | NUMBER | IMAG | call | '(' expr ')'
    call     := IDENT '(' [expr (',' expr)*] ')'

``KET`` is ``|0110>`` (one digit per factor) or ``|1,0,11>`` when a local
dimension exceeds 10.  ``IMAG`` is a number with an ``i`` suffix, or a bare
``i``.  The tensor sign ``x`` binds tighter than ``*``, ``/`` and ``+``.
Values are scalars or states; the two are told apart by a type check that
runs right after parsing, so ``(|01> - |10>)/sqrt(2)`` and
``0.6*|00> + 0.8i*|11>`` are both fine while ``|0> + 1`` is rejected.

Named constructors: ``ghz(L[, d])``, ``w(L)``, ``dicke(L, k)``,
``schmidt_state(p1, ..., pd)``, ``product(s1, s2, ...)``; scalar function
``sqrt``.
"""
from __future__ import annotations

import cmath
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import states as st

DEFAULT_LOCAL_DIM = 2

GRAMMAR_PRODUCTIONS = frozenset({
    "sum", "difference", "multiply", "divide", "tensor", "negate",
    "ket_digits", "ket_commas", "number", "imag", "call", "group", "local_dim",
})


class StateExprError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int | None = None,
                 expected: frozenset = frozenset()):
        self.message = message
        self.text = text
        self.pos = pos
        self.expected = expected
        if pos is not None:
            self.line, self.col = _line_col(text, pos)
            loc = f"{self.line}:{self.col}: "
        else:
            self.line = self.col = None
            loc = ""
        exp = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{loc}{message}{exp}")


class ParseError(StateExprError):
    pass


class EvalError(StateExprError):
    pass


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Ket(Node):
    digits: tuple
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Num(Node):
    value: complex
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Sum(Node):
    terms: tuple  # ((sign, node), ...) with sign +1 or -1; first sign is +1
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Product(Node):
    op: str  # '*' or '/'
    left: Node
    right: Node
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Tensor(Node):
    factors: tuple
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class StateExpr:
    root: Node
    local_dim: int | None = None
    text: str = field(default="", compare=False)
    productions: frozenset = field(default=frozenset(), compare=False)


# -- lexer -------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    pos: int
    end: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<ket>\|[^>|]*>)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<isuffix>i(?![A-Za-z0-9_]))?
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/(),@=])
""", re.VERBOSE)

_OP_KINDS = {"+": "PLUS", "-": "MINUS", "*": "STAR", "/": "SLASH", "(": "LPAREN",
             ")": "RPAREN", ",": "COMMA", "@": "AT", "=": "EQ"}
_KET_DIGITS = re.compile(r"\d+")
_KET_COMMAS = re.compile(r"\d+(?:\s*,\s*\d+)+")


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if m.group("ws"):
            pos = m.end()
            continue
        start, end = m.start(), m.end()
        if m.group("ket") is not None:
            body = m.group("ket")[1:-1].strip()
            if _KET_DIGITS.fullmatch(body):
                out.append(Token("KET", (tuple(int(c) for c in body), "digits"), start, end))
            elif _KET_COMMAS.fullmatch(body):
                out.append(Token("KET", (tuple(int(c) for c in body.split(",")), "commas"), start, end))
            else:
                raise ParseError(f"malformed ket literal {m.group('ket')!r}", text, start)
        elif m.group("number") is not None:
            val = float(m.group("number"))
            if m.group("isuffix"):
                out.append(Token("IMAG", val, start, end))
            else:
                out.append(Token("NUMBER", val, start, end))
        elif kind == "ident":
            name = m.group("ident")
            if name == "x":
                out.append(Token("TENSOR", name, start, end))
            elif name == "i":
                out.append(Token("IMAG", 1.0, start, end))
            else:
                out.append(Token("IDENT", name, start, end))
        else:
            out.append(Token(_OP_KINDS[m.group("op")], m.group("op"), start, end))
        pos = end
    out.append(Token("EOF", None, len(text), len(text)))
    return out


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.used: set[str] = set()

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, label: str | None = None) -> Token:
        if self.tok.kind != kind:
            self.fail(frozenset({label or kind}))
        return self.advance()

    def fail(self, expected: frozenset):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(self.text[t.pos:t.end])
        raise ParseError(f"unexpected {found}", self.text, t.pos, expected)

    def document(self) -> StateExpr:
        root = self.expr()
        local_dim = None
        if self.tok.kind == "AT":
            self.advance()
            name = self.expect("IDENT", "'d'")
            if name.value != "d":
                raise ParseError(f"unknown setting {name.value!r}", self.text, name.pos, frozenset({"'d'"}))
            self.expect("EQ", "'='")
            num = self.expect("NUMBER", "integer")
            if num.value != int(num.value) or num.value < 2:
                raise ParseError("local dimension must be an integer >= 2", self.text, num.pos)
            local_dim = int(num.value)
            self.used.add("local_dim")
        if self.tok.kind != "EOF":
            self.fail(frozenset({"'+'", "'-'", "'*'", "'/'", "'x'", "'@'", "end of input"}))
        return StateExpr(root, local_dim, self.text, frozenset(self.used))

    def expr(self) -> Node:
        start = self.tok.pos
        terms = [(1, self.term())]
        while self.tok.kind in ("PLUS", "MINUS"):
            sign = 1 if self.advance().kind == "PLUS" else -1
            self.used.add("sum" if sign > 0 else "difference")
            terms.append((sign, self.term()))
        if len(terms) == 1:
            return terms[0][1]
        return Sum(tuple(terms), (start, self.tokens[self.i - 1].end))

    def term(self) -> Node:
        start = self.tok.pos
        node = self.tensor()
        while self.tok.kind in ("STAR", "SLASH"):
            op = self.advance().value
            self.used.add("multiply" if op == "*" else "divide")
            node = Product(op, node, self.tensor(), (start, self.tokens[self.i - 1].end))
        return node

    def tensor(self) -> Node:
        start = self.tok.pos
        factors = [self.unary()]
        while self.tok.kind == "TENSOR":
            self.advance()
            self.used.add("tensor")
            factors.append(self.unary())
        if len(factors) == 1:
            return factors[0]
        return Tensor(tuple(factors), (start, self.tokens[self.i - 1].end))

    def unary(self) -> Node:
        if self.tok.kind == "MINUS":
            t = self.advance()
            self.used.add("negate")
            operand = self.unary()
            return Neg(operand, (t.pos, self.tokens[self.i - 1].end))
        return self.primary()

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "KET":
            self.advance()
            digits, form = t.value
            self.used.add("ket_" + form)
            return Ket(digits, (t.pos, t.end))
        if t.kind == "NUMBER":
            self.advance()
            self.used.add("number")
            return Num(complex(t.value), (t.pos, t.end))
        if t.kind == "IMAG":
            self.advance()
            self.used.add("imag")
            return Num(complex(0.0, t.value), (t.pos, t.end))
        if t.kind == "IDENT":
            self.advance()
            self.expect("LPAREN", "'('")
            args = []
            if self.tok.kind != "RPAREN":
                args.append(self.expr())
                while self.tok.kind == "COMMA":
                    self.advance()
                    args.append(self.expr())
            self.expect("RPAREN", "')'")
            self.used.add("call")
            return Call(t.value, tuple(args), (t.pos, self.tokens[self.i - 1].end))
        if t.kind == "LPAREN":
            self.advance()
            node = self.expr()
            self.expect("RPAREN", "')'")
            self.used.add("group")
            return node
        self.fail(frozenset({"ket", "number", "name", "'('", "'-'"}))


# -- static checks -----------------------------------------------------------

_CONSTRUCTORS = {"ghz", "w", "dicke", "schmidt_state", "product"}
_SCALAR_FUNCS = {"sqrt"}

SCALAR = "scalar"


def _int_arg(node: Node) -> int | None:
    if isinstance(node, Num) and node.value.imag == 0 and node.value.real == int(node.value.real):
        return int(node.value.real)
    return None


class _Checker:
    """Infers scalar/state kinds and factor counts, raising with source spans."""

    def __init__(self, text: str, local_dim: int):
        self.text = text
        self.d = local_dim

    def err(self, msg: str, node: Node):
        raise ParseError(msg, self.text, node.span[0])

    def kind(self, node: Node):
        """``SCALAR``, or the number of tensor factors of a state (``None`` if unknown)."""
        if isinstance(node, Num):
            return SCALAR
        if isinstance(node, Ket):
            for q in node.digits:
                if q >= self.d:
                    self.err(f"ket digit {q} is not below local dimension {self.d}", node)
            return len(node.digits)
        if isinstance(node, Neg):
            return self.kind(node.operand)
        if isinstance(node, Sum):
            kinds = [self.kind(t) for _, t in node.terms]
            first = kinds[0]
            for (_, t), k in zip(node.terms[1:], kinds[1:]):
                if (k == SCALAR) != (first == SCALAR):
                    self.err("cannot add a scalar and a state", t)
                if first != SCALAR and k is not None and first is not None and k != first:
                    self.err(f"summand has {k} factors but the first summand has {first}", t)
            if first == SCALAR:
                return SCALAR
            return next((k for k in kinds if k is not None), None)
        if isinstance(node, Product):
            a, b = self.kind(node.left), self.kind(node.right)
            if node.op == "/":
                if b != SCALAR:
                    self.err("can only divide by a scalar", node.right)
                return a
            if a != SCALAR and b != SCALAR:
                self.err("product of two states; use 'x' for the tensor product", node)
            return b if a == SCALAR else a
        if isinstance(node, Tensor):
            total = 0
            for f in node.factors:
                k = self.kind(f)
                if k == SCALAR:
                    self.err("tensor factor must be a state", f)
                total = None if (k is None or total is None) else total + k
            return total
        if isinstance(node, Call):
            return self.call_kind(node)
        raise TypeError(f"unknown node {node!r}")

    def call_kind(self, node: Call):
        name, args = node.name, node.args
        kinds = [self.kind(a) for a in args]
        if name in _SCALAR_FUNCS:
            if len(args) != 1 or kinds[0] != SCALAR:
                self.err(f"{name} takes one scalar argument", node)
            return SCALAR
        if name not in _CONSTRUCTORS:
            self.err(f"unknown function {name!r}", node)
        if name == "product":
            if not args or any(k == SCALAR for k in kinds):
                self.err("product takes one or more state arguments", node)
            return None if any(k is None for k in kinds) else sum(kinds)
        if any(k != SCALAR for k in kinds):
            self.err(f"{name} takes scalar arguments", node)
        if name == "schmidt_state":
            return 2
        n = _int_arg(args[0]) if args else None
        if name in ("ghz", "w") and len(args) not in ((1, 2) if name == "ghz" else (1,)):
            self.err(f"wrong number of arguments to {name}", node)
        if name == "dicke" and len(args) != 2:
            self.err("dicke takes (L, k)", node)
        return n


def parse(text: str, default_d: int = DEFAULT_LOCAL_DIM) -> StateExpr:
    """Parse and type-check a state expression.

    ``default_d`` only matters for checking ket digits when the text has no
    ``@ d=N`` suffix.  Raises :class:`ParseError` with line, column and the
    expected tokens.
    """
    p = _Parser(text)
    doc = p.document()
    _Checker(text, doc.local_dim or default_d).kind(doc.root)
    return doc


# -- evaluation --------------------------------------------------------------

@dataclass
class _Vec:
    amps: np.ndarray
    dims: tuple


class _Evaluator:
    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d

    def err(self, msg: str, node: Node):
        raise EvalError(msg, self.text, node.span[0] if self.text else None)

    def value(self, node: Node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Ket):
            dims = (self.d,) * len(node.digits)
            v = np.zeros(self.d ** len(node.digits), dtype=complex)
            try:
                v[np.ravel_multi_index(node.digits, dims)] = 1.0
            except ValueError:
                self.err(f"ket digits {node.digits} out of range for d={self.d}", node)
            return _Vec(v, dims)
        if isinstance(node, Neg):
            x = self.value(node.operand)
            return _Vec(-x.amps, x.dims) if isinstance(x, _Vec) else -x
        if isinstance(node, Sum):
            acc = None
            for sign, t in node.terms:
                x = self.value(t)
                if acc is None:
                    acc = x if sign > 0 else self._scale(x, -1)
                    continue
                if isinstance(x, _Vec) != isinstance(acc, _Vec):
                    self.err("cannot add a scalar and a state", t)
                if isinstance(x, _Vec):
                    if x.dims != acc.dims:
                        self.err(f"summand dims {x.dims} differ from {acc.dims}", t)
                    acc = _Vec(acc.amps + sign * x.amps, acc.dims)
                else:
                    acc = acc + sign * x
            return acc
        if isinstance(node, Product):
            a, b = self.value(node.left), self.value(node.right)
            if node.op == "/":
                if isinstance(b, _Vec):
                    self.err("can only divide by a scalar", node.right)
                if b == 0:
                    self.err("division by zero", node.right)
                return self._scale(a, 1.0 / b)
            if isinstance(a, _Vec) and isinstance(b, _Vec):
                self.err("product of two states; use 'x' for the tensor product", node)
            return self._scale(b, a) if not isinstance(a, _Vec) else self._scale(a, b)
        if isinstance(node, Tensor):
            vals = [self.value(f) for f in node.factors]
            for f, v in zip(node.factors, vals):
                if not isinstance(v, _Vec):
                    self.err("tensor factor must be a state", f)
            amps = vals[0].amps
            for v in vals[1:]:
                amps = np.kron(amps, v.amps)
            return _Vec(amps, sum((v.dims for v in vals), ()))
        if isinstance(node, Call):
            return self.call(node)
        raise TypeError(f"unknown node {node!r}")

    @staticmethod
    def _scale(x, c):
        return _Vec(c * x.amps, x.dims) if isinstance(x, _Vec) else c * x

    def call(self, node: Call):
        args = [self.value(a) for a in node.args]
        if node.name == "sqrt":
            return cmath.sqrt(args[0]) if args[0].imag or args[0].real < 0 else complex(np.sqrt(args[0].real))
        try:
            if node.name == "product":
                s = st.product(*[a.amps for a in args])
                return _Vec(np.asarray(s.amplitudes), tuple(d for a in args for d in a.dims))
            real = []
            for a in args:
                if isinstance(a, _Vec) or a.imag != 0:
                    self.err(f"{node.name} takes real scalar arguments", node)
                real.append(a.real)
            if node.name == "schmidt_state":
                s = st.schmidt_state(*real)
            else:
                ints = []
                for r in real:
                    if r != int(r):
                        self.err(f"{node.name} takes integer arguments", node)
                    ints.append(int(r))
                if node.name == "ghz" and len(ints) == 1:
                    ints.append(self.d)
                s = st.make_named(node.name, *ints)
        except EvalError:
            raise
        except ValueError as exc:
            self.err(str(exc), node)
        return _Vec(np.array(s.amplitudes), s.dims)


def evaluate(expr: StateExpr | str, default_d: int = DEFAULT_LOCAL_DIM) -> st.MultipartiteState:
    """Evaluate to a normalized, phase-fixed state.

    ``default_d`` is the local dimension for ket literals unless the text
    carries ``@ d=N``.
    """
    if isinstance(expr, str):
        expr = parse(expr, default_d)
    d = expr.local_dim or default_d
    ev = _Evaluator(expr.text, d)
    val = ev.value(expr.root)
    if not isinstance(val, _Vec):
        ev.err("expression is a scalar, not a state", expr.root)
    if np.linalg.norm(val.amps) <= 1e-12:
        ev.err("expression evaluates to the zero vector", expr.root)
    if any(k < 2 for k in val.dims):
        ev.err("factor dimensions must be at least 2", expr.root)
    return st.MultipartiteState(val.amps, val.dims)


# -- printing ----------------------------------------------------------------

_PREC = {Sum: 1, Product: 2, Tensor: 3, Neg: 4}


def _prec(node: Node) -> int:
    return _PREC.get(type(node), 5)


def _fmt_float(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _wrap(node: Node, min_prec: int) -> str:
    s = to_text(node)
    return f"({s})" if _prec(node) < min_prec else s


def to_text(node: Node | StateExpr) -> str:
    """Pretty-print an AST so that ``parse(to_text(e)) == e``."""
    if isinstance(node, StateExpr):
        body = to_text(node.root)
        return body if node.local_dim is None else f"{body} @ d={node.local_dim}"
    if isinstance(node, Ket):
        if any(q > 9 for q in node.digits):
            return "|" + ",".join(str(q) for q in node.digits) + ">"
        return "|" + "".join(str(q) for q in node.digits) + ">"
    if isinstance(node, Num):
        if node.value.imag != 0:
            return _fmt_float(node.value.imag) + "i"
        return _fmt_float(node.value.real)
    if isinstance(node, Call):
        return f"{node.name}(" + ", ".join(to_text(a) for a in node.args) + ")"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, 4)
    if isinstance(node, Sum):
        parts = [_wrap(node.terms[0][1], 2)]
        for sign, t in node.terms[1:]:
            parts.append(("+ " if sign > 0 else "- ") + _wrap(t, 2))
        return " ".join(parts)
    if isinstance(node, Product):
        return f"{_wrap(node.left, 2)} {node.op} {_wrap(node.right, 3)}"
    if isinstance(node, Tensor):
        return " x ".join(_wrap(f, 4) for f in node.factors)
    raise TypeError(f"unknown node {node!r}")


# -- corpus files ------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    lineno: int
    text: str
    expr: StateExpr


def read_corpus(path: str | Path) -> list[CorpusEntry]:
    """Parse a ``.stx`` file: one expression per line, ``#`` starts a comment."""
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            out.append(CorpusEntry(n, text, parse(text)))
        except ParseError as exc:
            raise ParseError(f"{path}:{n}: {exc.message}", exc.text, exc.pos, exc.expected) from None
    return out
