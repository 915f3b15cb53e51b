"""Symbolic functions on Q_p^m: exact expression trees, exact multivariate
polynomials over Q, linear maps under the sup operator norm, and the small
expression language shared with the command line.

Expression grammar (version 1):

    expr       := term (('+' | '-') term)*
    term       := unary (('*' | '/') unary)*
    unary      := '-' unary | atom
    atom       := literal | integer | coordinate | call | '(' expr ')'
    literal    := d0,d1,...eV@p            (see padic.parse_literal)
    coordinate := 'x' index                ('x0', 'x1', ...)
    call       := 'ch' '(' const (';' const)* ';' int ')'   ball indicator
                | 'comp' '(' expr (';' expr)+ ')'           composition

The canonical argument separator is ';'.  A ',' is tolerated as a separator
wherever it cannot be confused with the digit commas of a literal: literal
tokens are matched greedily first, so `ch(1,2;0)` means center coordinates 1
and 2 while `1,2e0@5` is the single literal 11.  Parse errors carry the byte
offset of the offending token.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .padic import (
    Ball,
    PAdicNumber,
    PAdicVector,
    PadicError,
    PrecisionZeroDivision,
    parse_literal,
)


class DomainEscape(PadicError):
    """An evaluation point left the declared domain."""


class ExprSyntaxError(PadicError):
    """Malformed expression source; `offset` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


# ---------------------------------------------------------------------------
# expression nodes
# ---------------------------------------------------------------------------

class Expr:
    """A scalar expression over coordinates x0..x_{m-1}.  Immutable."""

    __slots__ = ()

    def eval(self, x: PAdicVector) -> PAdicNumber:
        raise NotImplementedError

    def max_coord(self) -> int:
        """Largest coordinate index used, -1 if none."""
        raise NotImplementedError

    def to_source(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<expr {self.to_source()}>"


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: PAdicNumber):
        self.value = value

    def eval(self, x):
        return self.value

    def max_coord(self):
        return -1

    def to_source(self):
        return self.value.format_literal()


class Coord(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise PadicError("coordinate index must be >= 0")
        self.index = index

    def eval(self, x):
        if self.index >= x.dim:
            raise PadicError(f"coordinate x{self.index} outside dimension {x.dim}")
        return x[self.index]

    def max_coord(self):
        return self.index

    def to_source(self):
        return f"x{self.index}"


class _Binary(Expr):
    __slots__ = ("a", "b")
    _symbol = "?"

    def __init__(self, a: Expr, b: Expr):
        self.a = a
        self.b = b

    def max_coord(self):
        return max(self.a.max_coord(), self.b.max_coord())

    def to_source(self):
        return f"({self.a.to_source()}{self._symbol}{self.b.to_source()})"


class Add(_Binary):
    __slots__ = ()
    _symbol = "+"

    def eval(self, x):
        return self.a.eval(x) + self.b.eval(x)


class Sub(_Binary):
    __slots__ = ()
    _symbol = "-"

    def eval(self, x):
        return self.a.eval(x) - self.b.eval(x)


class Mul(_Binary):
    __slots__ = ()
    _symbol = "*"

    def eval(self, x):
        return self.a.eval(x) * self.b.eval(x)


class Div(_Binary):
    """Division node; carries the nonvanishing-on-domain assertion, checked
    at every evaluation (a vanishing denominator is a hard error)."""

    __slots__ = ()
    _symbol = "/"

    def eval(self, x):
        denom = self.b.eval(x)
        if denom.is_zero():
            raise PrecisionZeroDivision(
                "expression denominator vanishes at an evaluation point "
                "(nonvanishing assertion failed)")
        return self.a.eval(x) / denom


class Neg(Expr):
    __slots__ = ("a",)

    def __init__(self, a: Expr):
        self.a = a

    def eval(self, x):
        return -self.a.eval(x)

    def max_coord(self):
        return self.a.max_coord()

    def to_source(self):
        return f"(-{self.a.to_source()})"


class ChBall(Expr):
    """Indicator of a ball, applied to the whole input vector."""

    __slots__ = ("ball",)

    def __init__(self, ball: Ball):
        self.ball = ball

    def eval(self, x):
        if x.dim != self.ball.dim:
            raise PadicError("indicator dimension mismatch")
        if self.ball.contains(x):
            return PAdicNumber.from_int(self.ball.p, 1)
        return PAdicNumber.zero(self.ball.p)

    def max_coord(self):
        return self.ball.dim - 1

    def to_source(self):
        cs = ";".join(c.format_literal() for c in self.ball.center.coords)
        return f"ch({cs};{self.ball.rad_exp})"


class Compose(Expr):
    """outer evaluated at the vector of inner values."""

    __slots__ = ("outer", "inners")

    def __init__(self, outer: Expr, inners):
        inners = tuple(inners)
        if not inners:
            raise PadicError("composition needs at least one inner expression")
        if outer.max_coord() >= len(inners):
            raise PadicError(
                f"outer expression uses x{outer.max_coord()} but only "
                f"{len(inners)} inner expressions are given")
        self.outer = outer
        self.inners = inners

    def eval(self, x):
        y = PAdicVector(g.eval(x) for g in self.inners)
        return self.outer.eval(y)

    def max_coord(self):
        return max(g.max_coord() for g in self.inners)

    def to_source(self):
        parts = [self.outer.to_source()] + [g.to_source() for g in self.inners]
        return "comp(" + ";".join(parts) + ")"


# ---------------------------------------------------------------------------
# functions Q_p^m -> Q_p^n
# ---------------------------------------------------------------------------

class SymbolicFunction:
    """A tuple of scalar expressions, evaluated exactly on PAdicVectors.

    `domain`, when given, is a Ball; evaluation outside it raises
    DomainEscape.  Without one the function is taken on all of Q_p^m.
    """

    __slots__ = ("p", "m", "components", "domain")

    def __init__(self, p: int, m: int, components, domain: Ball | None = None):
        components = tuple(components)
        if not components:
            raise PadicError("a function needs at least one component")
        used = max(c.max_coord() for c in components)
        if used >= m:
            raise PadicError(f"component uses x{used} but m={m}")
        if domain is not None and (domain.p != p or domain.dim != m):
            raise PadicError("domain ball does not match (p, m)")
        self.p = p
        self.m = m
        self.components = components
        self.domain = domain

    @property
    def n(self) -> int:
        return len(self.components)

    def __call__(self, x: PAdicVector) -> PAdicVector:
        if x.p != self.p or x.dim != self.m:
            raise PadicError("evaluation point does not match (p, m)")
        if self.domain is not None and not self.domain.contains(x):
            raise DomainEscape(
                f"point outside the declared domain ball (radius exponent "
                f"{self.domain.rad_exp})")
        return PAdicVector(c.eval(x) for c in self.components)

    def compose(self, inner: "SymbolicFunction") -> "SymbolicFunction":
        """self after inner (inner.n must equal self.m)."""
        if inner.p != self.p or inner.n != self.m:
            raise PadicError("composition shape mismatch")
        comps = tuple(Compose(c, inner.components) for c in self.components)
        return SymbolicFunction(self.p, inner.m, comps, domain=inner.domain)

    def to_sources(self) -> list:
        return [c.to_source() for c in self.components]

    @classmethod
    def from_sources(cls, p: int, sources, m: int | None = None,
                     prec: int | None = None,
                     domain: Ball | None = None) -> "SymbolicFunction":
        if isinstance(sources, str):
            sources = [sources]
        comps = [parse_expr(s, p, prec=prec) for s in sources]
        if m is None:
            m = max(1, 1 + max(c.max_coord() for c in comps))
        return cls(p, m, comps, domain=domain)

    def __repr__(self):
        return f"SymbolicFunction({self.m}->{self.n}: {self.to_sources()})"


class LinearMap:
    """An n x m matrix of p-adic entries; exact application, sup operator
    norm = the largest entry norm."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(r) for r in rows)
        if not rows or not rows[0]:
            raise PadicError("empty matrix")
        m = len(rows[0])
        if any(len(r) != m for r in rows):
            raise PadicError("ragged matrix")
        p = rows[0][0].p
        if any(e.p != p for r in rows for e in r):
            raise PadicError("mixed primes in matrix")
        self.rows = rows

    @property
    def p(self) -> int:
        return self.rows[0][0].p

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.rows[0])

    def apply(self, v: PAdicVector) -> PAdicVector:
        if v.dim != self.m:
            raise PadicError("dimension mismatch")
        out = []
        for row in self.rows:
            acc = row[0] * v[0]
            for a, c in zip(row[1:], v.coords[1:]):
                acc = acc + a * c
            out.append(acc)
        return PAdicVector(out)

    def operator_norm(self) -> Fraction:
        return max(e.norm() for r in self.rows for e in r)

    def to_json(self):
        return [[e.format_literal() for e in r] for r in self.rows]

    @classmethod
    def from_json(cls, arr) -> "LinearMap":
        return cls([[parse_literal(s) for s in r] for r in arr])

    @classmethod
    def from_ints(cls, p: int, rows, prec: int | None = None) -> "LinearMap":
        return cls([[PAdicNumber.from_int(p, e, prec=prec) for e in r]
                    for r in rows])

    def __eq__(self, other):
        return isinstance(other, LinearMap) and self.rows == other.rows

    def __repr__(self):
        return f"LinearMap({self.to_json()})"


# ---------------------------------------------------------------------------
# exact multivariate polynomials over Q
# ---------------------------------------------------------------------------

class MultiPoly:
    """A polynomial in m variables with Fraction coefficients, keyed by
    exponent tuples.  All operations are exact; used as the symbolic oracle
    for difference quotients, Taylor parts, and jet manipulation."""

    __slots__ = ("m", "terms")

    def __init__(self, m: int, terms=None):
        self.m = m
        clean = {}
        for exps, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                clean[tuple(exps)] = c
        self.terms = clean

    # -- construction --------------------------------------------------------

    @classmethod
    def zero(cls, m: int) -> "MultiPoly":
        return cls(m)

    @classmethod
    def const(cls, m: int, c) -> "MultiPoly":
        return cls(m, {(0,) * m: Fraction(c)})

    @classmethod
    def coord(cls, m: int, i: int) -> "MultiPoly":
        e = [0] * m
        e[i] = 1
        return cls(m, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, m: int, exps, c=1) -> "MultiPoly":
        return cls(m, {tuple(exps): Fraction(c)})

    # -- ring operations -----------------------------------------------------

    def _check(self, other):
        if self.m != other.m:
            raise PadicError("polynomial variable-count mismatch")

    def __add__(self, other):
        self._check(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, Fraction(0)) + c
        return MultiPoly(self.m, t)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return MultiPoly(self.m, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return MultiPoly(self.m,
                             {e: c * other for e, c in self.terms.items()})
        self._check(other)
        t = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.m, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise PadicError("negative polynomial power")
        out = MultiPoly.const(self.m, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        return (isinstance(other, MultiPoly) and self.m == other.m
                and self.terms == other.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        """-1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def coefficient(self, exps) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def homogeneous_part(self, d: int) -> "MultiPoly":
        return MultiPoly(self.m, {e: c for e, c in self.terms.items()
                                  if sum(e) == d})

    def truncate_total_degree(self, d: int) -> "MultiPoly":
        return MultiPoly(self.m, {e: c for e, c in self.terms.items()
                                  if sum(e) <= d})

    # -- substitution --------------------------------------------------------

    def substitute(self, args) -> "MultiPoly":
        """Plug a polynomial (all over the same new variable set) in for each
        variable; exact composition."""
        args = list(args)
        if len(args) != self.m:
            raise PadicError("substitution needs one polynomial per variable")
        new_m = args[0].m if args else 0
        if any(a.m != new_m for a in args):
            raise PadicError("substitution polynomials disagree on variables")
        out = MultiPoly.zero(new_m)
        for exps, c in self.terms.items():
            term = MultiPoly.const(new_m, c)
            for a, e in zip(args, exps):
                if e:
                    term = term * a**e
            out = out + term
        return out

    def recenter(self, center) -> "MultiPoly":
        """Coefficients of w |-> f(center + w) (exact Taylor rearrangement)."""
        center = [Fraction(c) for c in center]
        if len(center) != self.m:
            raise PadicError("center length mismatch")
        args = [MultiPoly.const(self.m, center[i]) + MultiPoly.coord(self.m, i)
                for i in range(self.m)]
        return self.substitute(args)

    def divide_by_monomial(self, exps) -> "MultiPoly":
        """Exact division by x^exps; raises if any term is not divisible."""
        exps = tuple(exps)
        t = {}
        for e, c in self.terms.items():
            q = tuple(a - b for a, b in zip(e, exps))
            if any(a < 0 for a in q):
                raise PadicError("polynomial not divisible by the monomial")
            t[q] = c
        return MultiPoly(self.m, t)

    # -- evaluation ----------------------------------------------------------

    def evaluate_fraction(self, args) -> Fraction:
        args = [Fraction(a) for a in args]
        if len(args) != self.m:
            raise PadicError("argument count mismatch")
        total = Fraction(0)
        for exps, c in self.terms.items():
            v = c
            for a, e in zip(args, exps):
                if e:
                    v *= a**e
            total += v
        return total

    def evaluate(self, x: PAdicVector, prec: int | None = None) -> PAdicNumber:
        """Exact rational evaluation, then a single p-adic conversion."""
        val = self.evaluate_fraction([c.as_fraction() for c in x.coords])
        return PAdicNumber.from_fraction(x.p, val, prec=prec)

    def __repr__(self):
        if not self.terms:
            return "MultiPoly(0)"
        bits = []
        for exps, c in sorted(self.terms.items()):
            mono = "*".join(f"x{i}^{e}" for i, e in enumerate(exps) if e)
            bits.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(bits) + ")"


def as_polynomial(expr: Expr, m: int) -> MultiPoly:
    """Convert an expression to an exact polynomial; raises PadicError on
    indicator nodes or division by a non-constant."""
    if isinstance(expr, Const):
        return MultiPoly.const(m, expr.value.as_fraction())
    if isinstance(expr, Coord):
        return MultiPoly.coord(m, expr.index)
    if isinstance(expr, Neg):
        return -as_polynomial(expr.a, m)
    if isinstance(expr, Add):
        return as_polynomial(expr.a, m) + as_polynomial(expr.b, m)
    if isinstance(expr, Sub):
        return as_polynomial(expr.a, m) - as_polynomial(expr.b, m)
    if isinstance(expr, Mul):
        return as_polynomial(expr.a, m) * as_polynomial(expr.b, m)
    if isinstance(expr, Div):
        den = as_polynomial(expr.b, m)
        if den.total_degree() != 0:
            raise PadicError("not a polynomial: division by a non-constant")
        return as_polynomial(expr.a, m) * (1 / den.coefficient((0,) * m))
    if isinstance(expr, Compose):
        k = len(expr.inners)
        outer = as_polynomial(expr.outer, k)
        return outer.substitute([as_polynomial(g, m) for g in expr.inners])
    raise PadicError(f"not a polynomial: {type(expr).__name__} node")


def as_polynomials(f: SymbolicFunction) -> list:
    """One exact polynomial per component, or raise PadicError."""
    return [as_polynomial(c, f.m) for c in f.components]


def polynomial_function(p: int, polys, m: int | None = None,
                        prec: int | None = None) -> "callable":
    """Wrap MultiPolys as an exact vector-valued callable on PAdicVectors."""
    polys = list(polys)
    if m is None:
        m = polys[0].m

    def call(x: PAdicVector) -> PAdicVector:
        return PAdicVector(q.evaluate(x, prec=prec) for q in polys)

    return call


# ---------------------------------------------------------------------------
# expression-language parser
# ---------------------------------------------------------------------------

_LIT_RE = re.compile(r"\d+(?:,\d+)*e-?\d+@\d+|0@\d+")
_INT_RE = re.compile(r"\d+")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_COORD_RE = re.compile(r"^x(\d+)$")


def _tokenize(src: str):
    toks = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        m = _LIT_RE.match(src, i)
        if m:
            toks.append(("lit", m.group(), i))
            i = m.end()
            continue
        m = _INT_RE.match(src, i)
        if m:
            toks.append(("int", m.group(), i))
            i = m.end()
            continue
        m = _NAME_RE.match(src, i)
        if m:
            toks.append(("name", m.group(), i))
            i = m.end()
            continue
        if c in "+-*/();,":
            toks.append((c, c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, src: str, p: int, prec: int | None):
        self.toks = _tokenize(src)
        self.pos = 0
        self.p = p
        self.prec = prec

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    # precedence climbing ----------------------------------------------------

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[0] in "*/":
            op = self.take()[0]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        kind, text, off = self.peek()
        if kind == "lit":
            self.take()
            try:
                v = parse_literal(text)
            except PadicError as e:
                raise ExprSyntaxError(str(e), off) from e
            if v.p != self.p:
                raise ExprSyntaxError(
                    f"literal is {v.p}-adic but the context prime is {self.p}",
                    off)
            return Const(_widen_const(v, self.prec))
        if kind == "int":
            self.take()
            return Const(PAdicNumber.from_int(self.p, int(text),
                                              prec=self.prec))
        if kind == "name":
            m = _COORD_RE.match(text)
            if m:
                self.take()
                return Coord(int(m.group(1)))
            if text == "ch":
                return self.ch_call()
            if text == "comp":
                return self.comp_call()
            raise ExprSyntaxError(f"unknown name {text!r}", off)
        if kind == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        raise ExprSyntaxError("expected a value", off)

    # calls --------------------------------------------------------------

    def _call_args(self, name: str):
        self.take("name")
        self.take("(")
        args = [(self.expr(), self.peek()[2])]
        while self.peek()[0] in (";", ","):
            self.take()
            args.append((self.expr(), self.peek()[2]))
        self.take(")")
        if len(args) < 2:
            raise ExprSyntaxError(f"{name} needs at least two arguments",
                                  self.peek()[2])
        return args

    def ch_call(self) -> Expr:
        args = self._call_args("ch")
        center = []
        for e, off in args[:-1]:
            v = _fold_const(e)
            if v is None:
                raise ExprSyntaxError("ch center coordinates must be constant",
                                      off)
            center.append(v)
        last, off = args[-1]
        k = _fold_const(last)
        if k is None or (not k.is_zero() and k.as_fraction().denominator != 1):
            raise ExprSyntaxError("ch radius exponent must be an integer", off)
        rad_exp = 0 if k.is_zero() else int(k.as_fraction())
        return ChBall(Ball(PAdicVector(center), rad_exp))

    def comp_call(self) -> Expr:
        args = self._call_args("comp")
        off = args[1][1]
        try:
            return Compose(args[0][0], [e for e, _ in args[1:]])
        except PadicError as e:
            raise ExprSyntaxError(str(e), off) from e


def _widen_const(v: PAdicNumber, prec: int | None) -> PAdicNumber:
    """A literal denotes an exact rational: unstated digits are zeros, so the
    window may honestly extend past the written digits."""
    if v.is_zero() or prec is None or v.prec >= prec:
        return v
    return PAdicNumber(v.p, v.val, v.unit, prec)


def _fold_const(e: Expr):
    """Collapse a constant expression to its value, or None."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg):
        v = _fold_const(e.a)
        return None if v is None else -v
    if isinstance(e, (Add, Sub, Mul, Div)):
        a, b = _fold_const(e.a), _fold_const(e.b)
        if a is None or b is None:
            return None
        if isinstance(e, Add):
            return a + b
        if isinstance(e, Sub):
            return a - b
        if isinstance(e, Mul):
            return a * b
        return a / b
    return None


def parse_expr(src: str, p: int, prec: int | None = None) -> Expr:
    """Parse one scalar expression; errors carry byte offsets."""
    parser = _Parser(src, p, prec if prec is not None else 24)
    e = parser.expr()
    kind, text, off = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"trailing input {text!r}", off)
    return e
