"""Exact scalars: rationals, one quadratic extension Q(sqrt d), and rational
functions in a deformation variable eps with valuation at eps = 0.

Rationals are plain :class:`fractions.Fraction`.  Rational functions with
rational coefficients are backed by FLINT polynomials; those with quadratic
coefficients use a small pure-Python polynomial type.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC

import flint

Rational = Fraction

#: valuation of the zero element
VAL_INF = math.inf


class PoleAtZero(ArithmeticError):
    pass


class IncompatibleField(TypeError):
    pass


def _fmpq_to_fraction(x):
    return Fraction(int(x.p), int(x.q))


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


class QuadField:
    """The field Q(sqrt d) for a fixed positive rational d with sqrt d irrational."""

    _cache: dict = {}

    def __new__(cls, d):
        d = Fraction(d)
        if d <= 0:
            raise ValueError("d must be positive")
        if _is_square(d.numerator * d.denominator):
            raise ValueError(f"sqrt({d}) is rational")
        key = d
        if key not in cls._cache:
            obj = super().__new__(cls)
            obj.d = d
            cls._cache[key] = obj
        return cls._cache[key]

    def __reduce__(self):
        return (QuadField, (self.d,))

    def __repr__(self):
        return f"QuadField({self.d})"

    @property
    def sqrt(self) -> "QuadExt":
        return QuadExt(0, 1, self)

    def __call__(self, a, b=0) -> "QuadExt":
        return QuadExt(a, b, self)


class QuadExt:
    """a + b*sqrt(d) with a, b rational."""

    __slots__ = ("a", "b", "field")

    def __init__(self, a, b, field: QuadField):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.field = field

    @property
    def d(self):
        return self.field.d

    def _coerce(self, other):
        if isinstance(other, QuadExt):
            if other.field is not self.field:
                raise IncompatibleField(f"sqrt({self.d}) vs sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction, _RationalABC)):
            return QuadExt(other, 0, self.field)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExt(self.a + o.a, self.b + o.b, self.field)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.field)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExt(self.a - o.a, self.b - o.b, self.field)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadExt(self.a * other, self.b * other, self.field)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExt(self.a * o.a + self.b * o.b * self.field.d,
                       self.a * o.b + self.b * o.a, self.field)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.field.d

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.field)

    def inverse(self) -> "QuadExt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt d)")
        return QuadExt(self.a / n, -self.b / n, self.field)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadExt(self.a / other, self.b / other, self.field)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadExt(1, 0, self.field)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            return self.field is other.field and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.field.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(float(self.field.d))

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b}, d={self.field.d})"

    def __str__(self):
        return render_scalar(self)


# ---------------------------------------------------------------------------
# polynomials over Q(sqrt d)

class QuadPoly:
    """Dense polynomial with QuadExt coefficients (lowest degree first)."""

    __slots__ = ("c", "field")

    def __init__(self, coeffs, field: QuadField):
        c = [x if isinstance(x, QuadExt) else QuadExt(x, 0, field) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = tuple(c)
        self.field = field

    def degree(self):
        return len(self.c) - 1

    def coeffs(self):
        return list(self.c)

    def is_zero(self):
        return not self.c

    def __getitem__(self, i):
        if 0 <= i < len(self.c):
            return self.c[i]
        return QuadExt(0, 0, self.field)

    def __add__(self, o):
        n = max(len(self.c), len(o.c))
        return QuadPoly([self[i] + o[i] for i in range(n)], self.field)

    def __sub__(self, o):
        n = max(len(self.c), len(o.c))
        return QuadPoly([self[i] - o[i] for i in range(n)], self.field)

    def __neg__(self):
        return QuadPoly([-x for x in self.c], self.field)

    def __mul__(self, o):
        if not self.c or not o.c:
            return QuadPoly([], self.field)
        out = [QuadExt(0, 0, self.field)] * (len(self.c) + len(o.c) - 1)
        for i, x in enumerate(self.c):
            if not x:
                continue
            for j, y in enumerate(o.c):
                out[i + j] = out[i + j] + x * y
        return QuadPoly(out, self.field)

    def scale(self, s):
        return QuadPoly([x * s for x in self.c], self.field)

    def divmod(self, o):
        if o.is_zero():
            raise ZeroDivisionError
        r = list(self.c)
        q = [QuadExt(0, 0, self.field)] * max(len(r) - len(o.c) + 1, 1)
        lead_inv = o.c[-1].inverse()
        for k in range(len(r) - len(o.c), -1, -1):
            t = r[k + len(o.c) - 1] * lead_inv
            q[k] = t
            if t:
                for j, y in enumerate(o.c):
                    r[k + j] = r[k + j] - t * y
        return QuadPoly(q, self.field), QuadPoly(r[:len(o.c) - 1], self.field)

    def __floordiv__(self, o):
        return self.divmod(o)[0]

    def __mod__(self, o):
        return self.divmod(o)[1]

    def monic(self):
        if not self.c:
            return self
        return self.scale(self.c[-1].inverse())

    def gcd(self, o):
        a, b = self, o
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def __eq__(self, o):
        return isinstance(o, QuadPoly) and self.c == o.c


def _to_quadpoly(p, field):
    if isinstance(p, QuadPoly):
        return p
    return QuadPoly([_fmpq_to_fraction(x) for x in p.coeffs()], field)


def _ord0(p) -> int:
    """Order of vanishing at 0 of a nonzero polynomial."""
    c = p.coeffs()
    for i, x in enumerate(c):
        if x:
            return i
    raise ValueError("zero polynomial")


def _shift_down(p, k):
    if k == 0:
        return p
    if isinstance(p, QuadPoly):
        return QuadPoly(p.c[k:], p.field)
    return flint.fmpq_poly(p.coeffs()[k:])


def _coef(p, i):
    if isinstance(p, QuadPoly):
        return p[i]
    c = p.coeffs()
    return _fmpq_to_fraction(c[i]) if i < len(c) else Fraction(0)


# ---------------------------------------------------------------------------
# rational functions

_REDUCE_DEGREE = 10


class RatFunc:
    """num(eps)/den(eps) with coefficients in Q or in one Q(sqrt d).

    Common powers of eps are always stripped; the full gcd is only taken
    when the degrees grow past a threshold or a canonical form is needed.
    """

    __slots__ = ("num", "den", "field", "var")

    def __init__(self, num, den=None, field: QuadField | None = None, var: str = "eps",
                 _raw: bool = False):
        self.field = field
        self.var = var
        if _raw:
            self.num, self.den = num, den
            return
        num = self._make_poly(num)
        den = self._make_poly(1 if den is None else den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num, self.den = num, den
        self._strip()

    def _make_poly(self, x):
        if isinstance(x, (flint.fmpq_poly, QuadPoly)):
            if self.field is not None:
                return _to_quadpoly(x, self.field)
            if isinstance(x, QuadPoly):
                raise IncompatibleField("quadratic coefficients in a rational RatFunc")
            return x
        if isinstance(x, (list, tuple)):
            if self.field is None:
                return flint.fmpq_poly([flint.fmpq(Fraction(c).numerator, Fraction(c).denominator)
                                        for c in x])
            return QuadPoly(list(x), self.field)
        if isinstance(x, QuadExt):
            if self.field is None:
                if x.b:
                    raise IncompatibleField("quadratic constant in a rational RatFunc")
                x = x.a
            else:
                return QuadPoly([x], self.field)
        x = Fraction(x)
        if self.field is None:
            return flint.fmpq_poly([flint.fmpq(x.numerator, x.denominator)])
        return QuadPoly([x], self.field)

    @classmethod
    def gen(cls, field=None, var="eps") -> "RatFunc":
        return cls([0, 1], field=field, var=var)

    @classmethod
    def const(cls, c, field=None, var="eps") -> "RatFunc":
        if isinstance(c, QuadExt) and field is None:
            field = c.field
        return cls(c, field=field, var=var)

    def _strip(self):
        if self.num.is_zero():
            self.den = self._make_poly(1)
            return
        k = min(_ord0(self.num), _ord0(self.den))
        if k:
            self.num = _shift_down(self.num, k)
            self.den = _shift_down(self.den, k)
        if self.num.degree() + self.den.degree() > _REDUCE_DEGREE:
            self._reduce()

    def _reduce(self):
        if self.den.degree() == 0:
            return
        g = self.num.gcd(self.den)
        if g.degree() > 0:
            self.num = self.num // g
            self.den = self.den // g

    def reduced(self) -> "RatFunc":
        out = RatFunc(self.num, self.den, self.field, self.var, _raw=True)
        out._reduce()
        lead = out.den.coeffs()[-1]
        if isinstance(out.den, QuadPoly):
            inv = lead.inverse()
            out.num, out.den = out.num.scale(inv), out.den.scale(inv)
        else:
            out.num, out.den = out.num / lead, out.den / lead
        return out

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RatFunc):
            if other.field is self.field:
                return self, other
            if self.field is None:
                return self._promote(other.field), other
            if other.field is None:
                return self, other._promote(self.field)
            raise IncompatibleField(f"sqrt({self.field.d}) vs sqrt({other.field.d})")
        if isinstance(other, QuadExt):
            if self.field is None:
                if other.b == 0:
                    return self, RatFunc(other.a, var=self.var)
                s = self._promote(other.field)
                return s, RatFunc(other, field=other.field, var=self.var)
            if other.field is not self.field:
                raise IncompatibleField(f"sqrt({self.field.d}) vs sqrt({other.d})")
            return self, RatFunc(other, field=self.field, var=self.var)
        if isinstance(other, (int, Fraction)):
            return self, RatFunc(other, field=self.field, var=self.var)
        return None, None

    def _promote(self, field):
        return RatFunc(_to_quadpoly(self.num, field), _to_quadpoly(self.den, field),
                       field, self.var, _raw=True)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)) and self.field is None:
            if other == 0:
                return self
            c = flint.fmpq(Fraction(other).numerator, Fraction(other).denominator)
            return RatFunc(self.num + self.den * c, self.den, None, self.var)
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        if a.den == b.den:
            return RatFunc(a.num + b.num, a.den, a.field, a.var)
        return RatFunc(a.num * b.den + b.num * a.den, a.den * b.den, a.field, a.var)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, self.field, self.var, _raw=True)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and self.field is None:
            if other == 0:
                return RatFunc(0, var=self.var)
            c = flint.fmpq(Fraction(other).numerator, Fraction(other).denominator)
            return RatFunc(self.num * c, self.den, None, self.var, _raw=True)
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return RatFunc(a.num * b.num, a.den * b.den, a.field, a.var)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num, self.field, self.var)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and self.field is None:
            c = flint.fmpq(Fraction(other).numerator, Fraction(other).denominator)
            return RatFunc(self.num, self.den * c, None, self.var, _raw=True)
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return b * a.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = RatFunc(1, field=self.field, var=self.var)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadExt, RatFunc)):
            try:
                a, b = self._coerce(other)
            except IncompatibleField:
                return False
            return (a.num * b.den - b.num * a.den).is_zero()
        return NotImplemented

    def __hash__(self):
        r = self.reduced()
        if r.den.degree() == 0 and r.num.degree() <= 0:
            return hash(eval_at_zero(r))
        return hash((tuple(str(c) for c in r.num.coeffs()), tuple(str(c) for c in r.den.coeffs())))

    def __bool__(self):
        return not self.num.is_zero()

    def is_constant(self) -> bool:
        r = self.reduced()
        return r.num.degree() <= 0 and r.den.degree() == 0

    def __call__(self, x):
        """Evaluate at a rational or quadratic point."""
        def ev(p):
            out = 0
            for c in reversed(p.coeffs()):
                c = _fmpq_to_fraction(c) if not isinstance(c, QuadExt) else c
                out = out * x + c
            return out
        d = ev(self.den)
        if d == 0:
            raise ZeroDivisionError("pole at evaluation point")
        return ev(self.num) / d

    def map_coeffs(self, fn, field=None):
        """Apply fn to the k-th numerator/denominator coefficients: fn(k, c)."""
        f = field if field is not None else self.field
        num = [fn(k, _coef(self.num, k)) for k in range(self.num.degree() + 1)]
        den = [fn(k, _coef(self.den, k)) for k in range(self.den.degree() + 1)]
        return RatFunc(num, den, f, self.var)

    def __repr__(self):
        return f"RatFunc({render_scalar(self)})"

    __str__ = __repr__


def delta_to_eps(f, u: QuadExt) -> "RatFunc | QuadExt | Fraction":
    """Rewrite f(delta) as a function of eps where delta = eps/u."""
    if not isinstance(f, RatFunc):
        return f
    uinv = u.inverse()
    pows = {}

    def fn(k, c):
        if k not in pows:
            pows[k] = uinv ** k
        return pows[k] * c

    out = f.map_coeffs(fn, field=u.field)
    out.var = "eps"
    return out


# ---------------------------------------------------------------------------
# valuation, value and Taylor coefficients at eps = 0

def valuation(f):
    """Order of vanishing at eps = 0; VAL_INF for zero."""
    if isinstance(f, RatFunc):
        if f.num.is_zero():
            return VAL_INF
        return _ord0(f.num) - _ord0(f.den)
    return VAL_INF if f == 0 else 0


def eval_at_zero(f):
    if not isinstance(f, RatFunc):
        return f
    v = valuation(f)
    if v < 0:
        raise PoleAtZero(f"pole of order {-v} at eps = 0")
    zero = QuadExt(0, 0, f.field) if f.field is not None else Fraction(0)
    if v > 0:
        return zero
    out = _coef(f.num, 0) / _coef(f.den, 0)
    if isinstance(out, QuadExt) and out.b == 0:
        return out
    return out


def taylor_coeff(f, k: int):
    """k-th Taylor coefficient at eps = 0, by truncated power-series division."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not isinstance(f, RatFunc):
        return f if k == 0 else 0 * f
    v = valuation(f)
    if v < 0:
        raise PoleAtZero(f"pole of order {-v} at eps = 0")
    if v == VAL_INF:
        return eval_at_zero(f)
    # strip eps^v from the numerator
    oN, oD = _ord0(f.num), _ord0(f.den)
    num = [_coef(f.num, i) for i in range(oN, oN + k + 1)]
    den = [_coef(f.den, i) for i in range(oD, oD + k + 1)]
    shift = oN - oD
    if k < shift:
        return eval_at_zero(f) * 0
    target = k - shift
    series = []
    d0inv = 1 / den[0]
    for n in range(target + 1):
        s = num[n]
        for j in range(1, n + 1):
            s = s - den[j] * series[n - j]
        series.append(s * d0inv)
    return series[target]


def is_integer_scalar(x) -> bool:
    """Exact integrality test for Fraction or QuadExt."""
    if isinstance(x, QuadExt):
        return x.b == 0 and x.a.denominator == 1
    if isinstance(x, RatFunc):
        raise TypeError("integrality of a rational function is not a scalar question")
    return Fraction(x).denominator == 1


def integer_value(x):
    """The integer x equals (constant rational functions allowed), else None."""
    if isinstance(x, RatFunc):
        if not x.is_constant():
            return None
        x = eval_at_zero(x)
    if isinstance(x, QuadExt):
        if x.b != 0:
            return None
        x = x.a
    x = Fraction(x)
    return int(x) if x.denominator == 1 else None


# ---------------------------------------------------------------------------
# rendering and parsing

def _render_frac(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def render_scalar(x) -> str:
    if isinstance(x, RatFunc):
        r = x.reduced()
        num = _render_poly(r.num, r.var)
        if r.den.degree() == 0 and _coef(r.den, 0) == 1:
            return num
        return f"({num})/({_render_poly(r.den, r.var)})"
    if isinstance(x, QuadExt):
        d = _render_frac(x.d)
        if x.b == 0:
            return _render_frac(x.a)
        def root(b):
            return f"sqrt({d})" if b == 1 else f"{_render_frac(b)}*sqrt({d})"
        if x.a == 0:
            return f"-sqrt({d})" if x.b == -1 else root(x.b)
        sign = "-" if x.b < 0 else "+"
        return f"{_render_frac(x.a)} {sign} {root(abs(x.b))}"
    return _render_frac(x)


def _render_poly(p, var):
    terms = []
    for k, c in enumerate(p.coeffs()):
        if not isinstance(c, QuadExt):
            c = _fmpq_to_fraction(c)
        if c == 0:
            continue
        cs = render_scalar(c)
        if isinstance(c, QuadExt) and c.b != 0:
            cs = f"({cs})"
        if k == 0:
            terms.append(cs)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            terms.append(mono if cs == "1" else f"{cs}*{mono}")
    return " + ".join(terms) if terms else "0"


_FRAC = r"-?\d+(?:/\d+)?"
_QUAD_RE = re.compile(rf"^\s*(?:({_FRAC})\s*([+-])\s*)?(-?)({_FRAC})?\*?sqrt\(({_FRAC})\)\s*$")


def parse_scalar(text: str, field: QuadField | None = None):
    """Inverse of :func:`render_scalar`."""
    text = text.strip()
    if "eps" in text or "delta" in text:
        return _parse_ratfunc(text, field)
    if "sqrt" in text:
        m = _QUAD_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse {text!r}")
        a = Fraction(m.group(1)) if m.group(1) else Fraction(0)
        b = Fraction(m.group(4)) if m.group(4) else Fraction(1)
        if m.group(3) == "-":
            b = -b
        if m.group(2) == "-":
            b = -b
        fld = QuadField(Fraction(m.group(5)))
        if field is not None and fld is not field:
            raise IncompatibleField(f"sqrt({fld.d}) vs sqrt({field.d})")
        return QuadExt(a, b, fld)
    return Fraction(text)


def _split_top(text, sep):
    """Split on sep at parenthesis depth 0."""
    parts, depth, cur = [], 0, ""
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and text.startswith(sep, i):
            parts.append(cur)
            cur = ""
            i += len(sep)
            continue
        cur += ch
        i += 1
    parts.append(cur)
    return parts


def _strip_parens(t):
    t = t.strip()
    while t.startswith("("):
        depth = 0
        for i, ch in enumerate(t):
            depth += (ch == "(") - (ch == ")")
            if depth == 0:
                break
        if i != len(t) - 1:
            break
        t = t[1:-1].strip()
    return t


def _parse_poly(text, field, var):
    coeffs: dict[int, object] = {}
    for term in _split_top(text, " + "):
        term = term.strip()
        k = 0
        m = re.search(rf"(?:^|\*)({var})(?:\^(\d+))?$", term)
        if m:
            k = int(m.group(2)) if m.group(2) else 1
            term = term[:m.start()].strip()
            c = parse_scalar(_strip_parens(term), field) if term else Fraction(1)
        else:
            c = parse_scalar(_strip_parens(term), field)
        if isinstance(c, QuadExt):
            field = c.field
        coeffs[k] = coeffs.get(k, 0) + c
    top = max(coeffs) if coeffs else 0
    return [coeffs.get(i, 0) for i in range(top + 1)], field


def _parse_ratfunc(text, field):
    var = "eps" if "eps" in text else "delta"
    parts = _split_top(text, "/(")
    if len(parts) == 2 and text.startswith("("):
        num_t = _strip_parens(parts[0])
        den_t = _strip_parens("(" + parts[1])
    else:
        num_t, den_t = text, "1"
    num, field = _parse_poly(num_t, field, var)
    den, field = _parse_poly(den_t, field, var)
    return RatFunc(num, den, field=field, var=var)


def scalar_field(x):
    """The QuadField a scalar lives in, or None for rational scalars."""
    if isinstance(x, (QuadExt, RatFunc)):
        return x.field
    return None
