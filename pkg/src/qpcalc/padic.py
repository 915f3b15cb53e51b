"""Exact arithmetic in Q_p and Q_p^m: canonical digit representatives with explicit
precision windows, norms and valuations, the van der Put linear ordering, dense
sequence generation, balls, and the exact power-of-p magnitude type used for
Hölder arithmetic.

A value is stored as the canonical representative

    p^val * (d0 + d1*p + ... + d_{N-1}*p^(N-1)),    d0 != 0,

together with the window N = number of known digits; the value is known modulo
p^(val+N).  Arithmetic combines representatives exactly (they are rationals with
p-power denominators) and then truncates to the pessimistically propagated
window.  Zero is a single sentinel with +infinity valuation and an empty digit
list; a combination that vanishes modulo its propagated window collapses to this
sentinel, and dividing by it raises.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction


DEFAULT_PREC = 12

_PRIMES_SMALL = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}


class PadicError(ValueError):
    """Invalid p-adic operation (prime mismatch, malformed literal, ...)."""


class PrecisionZeroDivision(PadicError, ZeroDivisionError):
    """Division by a value indistinguishable from zero at the current precision."""


def set_default_prec(n: int) -> None:
    """Set the window used when constructors are not given one (CLI --prec)."""
    global DEFAULT_PREC
    if n < 1:
        raise PadicError("precision window must be >= 1")
    DEFAULT_PREC = n


def _check_prime(p: int) -> None:
    if p < 2 or (p not in _PRIMES_SMALL and any(p % q == 0 for q in range(2, int(p**0.5) + 1))):
        raise PadicError(f"{p} is not a prime")


def _vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PAdicNumber:
    """A canonical p-adic representative with an explicit precision window.

    Immutable by convention; all operations return new values.  `==` is
    bit-exact (same prime, valuation, digits AND window); class equality at the
    shared window is what vdp_compare reports as EQUAL.
    """

    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p: int, val, unit: int, prec: int):
        # Raw constructor: arguments must already be canonical.  Use the
        # classmethods / module functions for anything else.
        self.p = p
        self.val = val          # int, or None for the zero sentinel
        self.unit = unit        # 0 <= unit < p**prec, unit % p != 0 unless zero
        self.prec = prec        # number of known digits (0 for zero)

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, p: int) -> "PAdicNumber":
        return cls(p, None, 0, 0)

    @classmethod
    def from_int(cls, p: int, n: int, prec: int | None = None) -> "PAdicNumber":
        _check_prime(p)
        N = DEFAULT_PREC if prec is None else prec
        if n == 0:
            return cls.zero(p)
        v = _vp(n, p)
        return _make(p, v, n // p**v, v + N)

    @classmethod
    def from_fraction(cls, p: int, q: Fraction, prec: int | None = None) -> "PAdicNumber":
        _check_prime(p)
        N = DEFAULT_PREC if prec is None else prec
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        a, b = q.numerator, q.denominator
        va, vb = _vp(a, p), _vp(b, p)
        v = va - vb
        a //= p**va
        b //= p**vb
        unit = a * pow(b, -1, p**N) % p**N
        return _make(p, v, unit, v + N)

    # -- predicates / accessors --------------------------------------------

    def is_zero(self) -> bool:
        return self.val is None

    def digits(self) -> tuple:
        """Known digits (d0, d1, ...), exactly `prec` of them; () for zero."""
        out, u, p = [], self.unit, self.p
        for _ in range(self.prec):
            u, d = divmod(u, p)
            out.append(d)
        return tuple(out)

    def norm(self) -> Fraction:
        """|x| = p^(-val); exactly 0 for the zero sentinel."""
        if self.val is None:
            return Fraction(0)
        return Fraction(self.p) ** (-self.val)

    def norm_pow(self) -> "PPow":
        if self.val is None:
            return PPow.zero(self.p)
        return PPow(self.p, Fraction(-self.val))

    def as_fraction(self) -> Fraction:
        """The exact rational value of the canonical representative."""
        if self.val is None:
            return Fraction(0)
        return Fraction(self.p) ** self.val * self.unit

    def abs_window(self):
        """Absolute exponent up to which digits are known (None = exact zero)."""
        if self.val is None:
            return None
        return self.val + self.prec

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "PAdicNumber":
        if isinstance(other, PAdicNumber):
            if other.p != self.p:
                raise PadicError(f"prime mismatch: {self.p} vs {other.p}")
            return other
        if isinstance(other, int):
            return PAdicNumber.from_int(self.p, other, prec=max(self.prec, DEFAULT_PREC))
        if isinstance(other, Fraction):
            return PAdicNumber.from_fraction(self.p, other, prec=max(self.prec, DEFAULT_PREC))
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        a = self
        if a.val is None:
            return b
        if b.val is None:
            return a
        v = min(a.val, b.val)
        w = min(a.val + a.prec, b.val + b.prec)
        s = a.unit * a.p ** (a.val - v) + b.unit * a.p ** (b.val - v)
        return _make(a.p, v, s, w)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self + (-b)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return b + (-self)

    def __neg__(self):
        if self.val is None:
            return self
        return PAdicNumber(self.p, self.val, self.p**self.prec - self.unit, self.prec)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        a = self
        if a.val is None or b.val is None:
            return PAdicNumber.zero(a.p)
        n = min(a.prec, b.prec)
        return PAdicNumber(a.p, a.val + b.val, a.unit * b.unit % a.p**n, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        a = self
        if b.val is None:
            raise PrecisionZeroDivision(
                "division by a value indistinguishable from zero at the current precision")
        if a.val is None:
            return a
        n = min(a.prec, b.prec)
        m = a.p**n
        return PAdicNumber(a.p, a.val - b.val, a.unit * pow(b.unit, -1, m) % m, n)

    def __rtruediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return b / self

    def __pow__(self, n: int):
        if n < 0:
            raise PadicError("negative powers: divide explicitly")
        out = PAdicNumber.from_int(self.p, 1, prec=max(self.prec, 1))
        for _ in range(n):
            out = out * self
        return out

    # -- identity ------------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, PAdicNumber) and self.p == other.p
                and self.val == other.val and self.unit == other.unit
                and self.prec == other.prec)

    def __hash__(self):
        return hash((self.p, self.val, self.unit, self.prec))

    def __repr__(self):
        return f"PAdicNumber({self.format_literal()!r})"

    # -- text / JSON ---------------------------------------------------------

    def format_literal(self) -> str:
        if self.val is None:
            return f"0@{self.p}"
        ds = ",".join(str(d) for d in self.digits())
        return f"{ds}e{self.val}@{self.p}"

    def to_json(self):
        return {"p": self.p, "val": self.val, "digits": list(self.digits())}


def _make(p: int, val: int, raw: int, abs_window: int) -> PAdicNumber:
    """Canonicalize p^val * raw truncated to digits below abs_window."""
    if raw == 0:
        return PAdicNumber.zero(p)
    t = _vp(raw, p)
    v = val + t
    if v >= abs_window:
        return PAdicNumber.zero(p)
    unit = (raw // p**t) % p ** (abs_window - v)
    return PAdicNumber(p, v, unit, abs_window - v)


def truncate(x: PAdicNumber, abs_exp: int) -> PAdicNumber:
    """Keep only the digits at positions < abs_exp (coset representative)."""
    if x.val is None or x.val >= abs_exp:
        return PAdicNumber.zero(x.p)
    return _make(x.p, x.val, x.unit, min(x.val + x.prec, abs_exp))


# -- literals ---------------------------------------------------------------

_LITERAL_RE = re.compile(r"^(\d+(?:,\d+)*)e(-?\d+)@(\d+)$")
_ZERO_RE = re.compile(r"^0@(\d+)$")


def parse_literal(s: str) -> PAdicNumber:
    """Parse `d0,d1,...eV@p` (value p^V*(d0+d1*p+...)); `0@p` is zero."""
    s = s.strip()
    m = _ZERO_RE.match(s)
    if m:
        p = int(m.group(1))
        _check_prime(p)
        return PAdicNumber.zero(p)
    m = _LITERAL_RE.match(s)
    if not m:
        raise PadicError(f"malformed p-adic literal: {s!r}")
    digits = [int(d) for d in m.group(1).split(",")]
    val = int(m.group(2))
    p = int(m.group(3))
    _check_prime(p)
    if any(d >= p for d in digits):
        raise PadicError(f"digit out of range for p={p} in literal {s!r}")
    unit = sum(d * p**i for i, d in enumerate(digits))
    return _make(p, val, unit, val + len(digits))


def from_json(obj) -> PAdicNumber:
    p = int(obj["p"])
    _check_prime(p)
    if obj["val"] is None:
        return PAdicNumber.zero(p)
    digits = [int(d) for d in obj["digits"]]
    unit = sum(d * p**i for i, d in enumerate(digits))
    return _make(p, int(obj["val"]), unit, int(obj["val"]) + len(digits))


# -- named operation entry points -------------------------------------------

def arith(a: PAdicNumber, b: PAdicNumber, op: str) -> PAdicNumber:
    """Dispatch add/sub/mul/div with exact window propagation."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise PadicError(f"unknown operation {op!r}")


def norm(x: PAdicNumber) -> Fraction:
    return x.norm()


# -- van der Put ordering ---------------------------------------------------

class Order(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def vdp_compare_full(x: PAdicNumber, y: PAdicNumber):
    """(Order, precision_limited): compare digit expansions from the lowest
    index over the shared window; EQUAL with flag=True means the values agree
    on every digit both windows cover but one window extends further."""
    if x.p != y.p:
        raise PadicError(f"prime mismatch: {x.p} vs {y.p}")
    p = x.p
    if x.val is None or y.val is None:
        if x.val is None and y.val is None:
            return Order.EQUAL, False
        if x.val is None:
            return Order.LESS, False     # zero's digits are all 0; y leads with d0 > 0
        return Order.GREATER, False
    wx = x.val + x.prec
    wy = y.val + y.prec
    w = wx if wx < wy else wy
    base = x.val if x.val < y.val else y.val
    xs = x.unit * p ** (x.val - base)
    ys = y.unit * p ** (y.val - base)
    if wx > w:
        xs %= p ** (w - base)
    if wy > w:
        ys %= p ** (w - base)
    if xs == ys:
        return Order.EQUAL, wx != wy
    d = xs - ys
    k = _vp(d, p)
    dx = (xs // p**k) % p
    dy = (ys // p**k) % p
    return (Order.LESS if dx < dy else Order.GREATER), False


def vdp_compare(x: PAdicNumber, y: PAdicNumber) -> Order:
    return vdp_compare_full(x, y)[0]


def vdp_dense_sequence(p: int, val_floor: int, count: int) -> list:
    """Deterministic two-sided ≺-dense enumeration: 0, then for each depth d
    the values p^val_floor * u for u in [p^(d-1), p^d) in increasing u order.
    The prefix of length p^d is the complete net {p^val_floor*u : u < p^d}."""
    _check_prime(p)
    if count < 1:
        raise PadicError("count must be >= 1")
    out = [PAdicNumber.zero(p)]
    d = 1
    while len(out) < count:
        prec = max(DEFAULT_PREC, d)
        for u in range(p ** (d - 1), p**d):
            t = _vp(u, p)
            out.append(PAdicNumber(p, val_floor + t, u // p**t, prec))
            if len(out) == count:
                return out
        d += 1
    return out


# -- vectors -----------------------------------------------------------------

class PAdicVector:
    """A point of Q_p^m under the sup-norm.  Immutable by convention."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = tuple(coords)
        if not coords:
            raise PadicError("empty coordinate list")
        p = coords[0].p
        if any(c.p != p for c in coords):
            raise PadicError("mixed primes in one vector")
        self.coords = coords

    @property
    def p(self) -> int:
        return self.coords[0].p

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __add__(self, other):
        self._same_shape(other)
        return PAdicVector(a + b for a, b in zip(self.coords, other.coords))

    def __sub__(self, other):
        self._same_shape(other)
        return PAdicVector(a - b for a, b in zip(self.coords, other.coords))

    def __neg__(self):
        return PAdicVector(-a for a in self.coords)

    def scale(self, c: PAdicNumber) -> "PAdicVector":
        return PAdicVector(c * a for a in self.coords)

    def _same_shape(self, other):
        if not isinstance(other, PAdicVector) or other.dim != self.dim:
            raise PadicError("dimension mismatch")

    def sup_norm(self) -> Fraction:
        return max(c.norm() for c in self.coords)

    def __eq__(self, other):
        return isinstance(other, PAdicVector) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return "PAdicVector[" + ", ".join(c.format_literal() for c in self.coords) + "]"

    def to_json(self):
        return [c.format_literal() for c in self.coords]

    @classmethod
    def from_json(cls, arr) -> "PAdicVector":
        return cls(parse_literal(s) for s in arr)

    @classmethod
    def from_ints(cls, p: int, ns, prec: int | None = None) -> "PAdicVector":
        return cls(PAdicNumber.from_int(p, n, prec=prec) for n in ns)

    @classmethod
    def zero(cls, p: int, m: int) -> "PAdicVector":
        return cls(PAdicNumber.zero(p) for _ in range(m))


def sup_norm(x: PAdicVector) -> Fraction:
    return x.sup_norm()


def unit_vector(p: int, m: int, i: int, prec: int | None = None) -> PAdicVector:
    """Standard basis vector e_i."""
    return PAdicVector(PAdicNumber.from_int(p, 1 if j == i else 0, prec=prec)
                       for j in range(m))


def truncate_vector(x: PAdicVector, abs_exp: int) -> PAdicVector:
    return PAdicVector(truncate(c, abs_exp) for c in x.coords)


# -- balls -------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """Closed ball B(center, p^(-rad_exp)) in Q_p^m (clopen; any member is a center)."""
    center: PAdicVector
    rad_exp: int

    @property
    def p(self) -> int:
        return self.center.p

    @property
    def dim(self) -> int:
        return self.center.dim

    def radius(self) -> Fraction:
        return Fraction(self.p) ** (-self.rad_exp)

    def contains(self, x: PAdicVector) -> bool:
        return (x - self.center).sup_norm() <= self.radius()

    def relation(self, other: "Ball") -> str:
        """'equal' | 'disjoint' | 'nested' — the ultrametric trichotomy."""
        d = (self.center - other.center).sup_norm()
        r1, r2 = self.radius(), other.radius()
        if d > max(r1, r2):
            return "disjoint"
        if r1 == r2:
            return "equal"
        return "nested"

    def to_json(self):
        return {"center": self.center.to_json(), "rad_exp": self.rad_exp}

    @classmethod
    def from_json(cls, obj) -> "Ball":
        return cls(PAdicVector.from_json(obj["center"]), int(obj["rad_exp"]))


# -- exact power-of-p magnitudes ---------------------------------------------

class PPow:
    """Exact magnitude p^exp with exp rational (or zero): the value lattice of
    |x|^r terms in Hölder arithmetic.  No floating point anywhere."""

    __slots__ = ("p", "exp")

    def __init__(self, p: int, exp):
        self.p = p
        self.exp = None if exp is None else Fraction(exp)   # None = the zero magnitude

    @classmethod
    def zero(cls, p: int) -> "PPow":
        return cls(p, None)

    @classmethod
    def from_norm(cls, p: int, q: Fraction) -> "PPow":
        """Lift a norm value (a power of p, or 0) into the exact type."""
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        if q.numerator == 1:
            e = -_vp(q.denominator, p)
            rest = q.denominator // p ** (-e)
        else:
            e = _vp(q.numerator, p)
            rest = Fraction(q.numerator // p**e, q.denominator)
        if (Fraction(p) ** e) != q:
            raise PadicError(f"{q} is not a power of {p}")
        return cls(p, e)

    def is_zero(self) -> bool:
        return self.exp is None

    def __mul__(self, other: "PPow") -> "PPow":
        if self.exp is None or other.exp is None:
            return PPow.zero(self.p)
        return PPow(self.p, self.exp + other.exp)

    def __truediv__(self, other: "PPow") -> "PPow":
        if other.exp is None:
            raise ZeroDivisionError("division by zero magnitude")
        if self.exp is None:
            return self
        return PPow(self.p, self.exp - other.exp)

    def pow_frac(self, r) -> "PPow":
        if self.exp is None:
            return self
        return PPow(self.p, self.exp * Fraction(r))

    def _cmp_key(self):
        return (0,) if self.exp is None else (1, self.exp)

    def __eq__(self, other):
        return isinstance(other, PPow) and self.p == other.p and self.exp == other.exp

    def __hash__(self):
        return hash((self.p, self.exp))

    def __lt__(self, other):
        return self._cmp_key() < other._cmp_key()

    def __le__(self, other):
        return self._cmp_key() <= other._cmp_key()

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    def as_fraction(self) -> Fraction:
        """Exact rational value; only for integral exponents."""
        if self.exp is None:
            return Fraction(0)
        if self.exp.denominator != 1:
            raise PadicError(f"p^{self.exp} is irrational; use ceil_fraction()")
        return Fraction(self.p) ** int(self.exp)

    def ceil_fraction(self) -> Fraction:
        """Smallest integral power of p dominating the value: p^ceil(exp)."""
        if self.exp is None:
            return Fraction(0)
        e = -((-self.exp.numerator) // self.exp.denominator)   # ceil
        return Fraction(self.p) ** e

    def __repr__(self):
        return "PPow(0)" if self.exp is None else f"PPow({self.p}^{self.exp})"

    def to_json(self):
        if self.exp is None:
            return {"zero": True}
        return {"p": self.p, "exp": [self.exp.numerator, self.exp.denominator],
                "upper_bound": _frac_str(self.ceil_fraction())}


def ppow_le_scaled(lhs: PPow, scale: Fraction, rhs: PPow) -> bool:
    """Exact test lhs <= scale * rhs with scale a nonnegative rational."""
    scale = Fraction(scale)
    if scale < 0:
        raise PadicError("negative scale in magnitude comparison")
    if lhs.exp is None:
        return True
    if rhs.exp is None or scale == 0:
        return False
    q = lhs.exp - rhs.exp
    # p^q <= scale  <=>  p^q.num <= scale^q.den   (q.den > 0)
    return Fraction(lhs.p) ** q.numerator <= scale ** q.denominator


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)
