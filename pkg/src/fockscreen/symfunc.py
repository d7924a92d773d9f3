"""Partitions, symmetric Laurent polynomials, Jack polynomials and exact
Selberg-type integrals.

All integral values are returned as ratios S_n[f]/S_n[1]; the normalization
S_n[1] itself is only ever exposed as a structured :class:`GammaProduct`.
The weight on the chamber 1 > y_1 > ... > y_n > 0 is

    prod y_i^alpha (1 - y_i)^beta prod_{i<j} (y_i - y_j)^(2 gamma).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .exactnum import (QuadExt, RatFunc, eval_at_zero, is_integer_scalar, parse_scalar,
                       render_scalar, valuation, VAL_INF)


class TooManyParts(ValueError):
    pass


class InadmissibleParams(ValueError):
    pass


class SingularNormalization(InadmissibleParams):
    """S_n[1] has a zero or pole at the requested point."""


class NotSymmetric(ValueError):
    pass


class NonConvergent(ValueError):
    pass


# ---------------------------------------------------------------------------
# partitions

class Partition(tuple):
    """Weakly decreasing tuple of positive integers."""

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"not a partition: {parts}")
        return super().__new__(cls, parts)

    @property
    def parts(self):
        return tuple(self)

    @property
    def size(self):
        return sum(self)

    def __repr__(self):
        return f"Partition({tuple(self)})"


@lru_cache(maxsize=None)
def partitions(n: int, max_part: int | None = None) -> tuple:
    """Partitions of n in reverse lexicographic order: (n), (n-1,1), ..."""
    if max_part is None:
        max_part = n
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def partition_index(n: int) -> dict:
    return {p: i for i, p in enumerate(partitions(n))}


def partitions_nvars(n: int, nvars: int) -> tuple:
    return tuple(p for p in partitions(n) if len(p) <= nvars)


@lru_cache(maxsize=None)
def z_lambda(lam: tuple) -> int:
    out = 1
    for part, mult in Counter(lam).items():
        out *= part ** mult * math.factorial(mult)
    return out


def dominates(lam, mu) -> bool:
    """lam >= mu in dominance order (same size)."""
    s = t = 0
    for i in range(max(len(lam), len(mu))):
        s += lam[i] if i < len(lam) else 0
        t += mu[i] if i < len(mu) else 0
        if s < t:
            return False
    return True


def conjugate(lam) -> tuple:
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p > i) for i in range(lam[0]))


def orbit_size(e: tuple) -> int:
    """Number of distinct permutations of an exponent vector."""
    out = math.factorial(len(e))
    for m in Counter(e).values():
        out //= math.factorial(m)
    return out


# ---------------------------------------------------------------------------
# symmetric Laurent polynomials

def _dominant(e) -> tuple:
    return tuple(sorted(e, reverse=True))


class SymLaurent:
    """sum_e c_e m_e(y_1..y_n) over weakly decreasing integer vectors e."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        self.nvars = nvars
        acc: dict = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has wrong length for {nvars} variables")
            k = _dominant(e)
            acc[k] = acc.get(k, 0) + c
        self.terms = {k: c for k, c in acc.items() if c != 0}

    @classmethod
    def one(cls, nvars):
        return cls(nvars, {(0,) * nvars: 1})

    @classmethod
    def monomial(cls, e, nvars=None):
        e = tuple(e)
        nvars = nvars or len(e)
        e = e + (0,) * (nvars - len(e))
        return cls(nvars, {e: 1})

    @classmethod
    def from_polynomial(cls, nvars: int, poly: dict) -> "SymLaurent":
        """Fold a fully expanded polynomial {exponent: coeff}; checks symmetry."""
        dom: dict = {}
        for e, c in poly.items():
            if c == 0:
                continue
            k = _dominant(e)
            if k in dom:
                if dom[k] != c:
                    raise NotSymmetric(f"coefficients of {k} and {e} differ")
            else:
                dom[k] = c
        for k, c in dom.items():
            for perm in set(itertools.permutations(k)):
                if poly.get(perm, 0) != c:
                    raise NotSymmetric(f"orbit of {k} is incomplete at {perm}")
        return cls(nvars, dom)

    def expand(self) -> dict:
        out = {}
        for k, c in self.terms.items():
            for perm in set(itertools.permutations(k)):
                out[perm] = c
        return out

    @property
    def min_exponent(self) -> int:
        return min((min(k) for k in self.terms), default=0)

    def shift(self, N: int) -> "SymLaurent":
        """Multiply by (y_1 ... y_n)^N."""
        return SymLaurent(self.nvars, {tuple(x + N for x in k): c for k, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, SymLaurent) or other.nvars != self.nvars:
            return NotImplemented
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return SymLaurent(self.nvars, t)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s) -> "SymLaurent":
        return SymLaurent(self.nvars, {k: c * s for k, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, SymLaurent):
            return self.scale(other)
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        a, b = self.expand(), other.expand()
        prod: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                prod[e] = prod.get(e, 0) + ca * cb
        return SymLaurent.from_polynomial(self.nvars, prod)

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, SymLaurent):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))

    def homogeneous_parts(self) -> dict:
        out: dict = {}
        for k, c in self.terms.items():
            out.setdefault(sum(k), {})[k] = c
        return out

    def evaluate(self, point):
        total = 0
        for k, c in self.terms.items():
            mono = 0
            for perm in set(itertools.permutations(k)):
                t = 1
                for y, x in zip(point, perm):
                    t *= y ** x
                mono += t
            total += c * mono
        return total

    def __repr__(self):
        items = " + ".join(f"({render_scalar(c)})*m{k}" for k, c in sorted(self.terms.items(), reverse=True))
        return f"SymLaurent[{self.nvars}]({items or '0'})"


# ---------------------------------------------------------------------------
# Jack polynomials

def _param_key(x) -> str:
    return render_scalar(x)


def _fingerprint(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class _JackCache:
    """In-memory cache with an optional versioned JSON mirror on disk."""

    VERSION = 1

    def __init__(self):
        self.mem: dict = {}
        self.hits = 0
        self.misses = 0
        self._dir: Path | None = None
        self._lock = threading.Lock()

    @property
    def directory(self):
        if self._dir is not None:
            return self._dir
        env = os.environ.get("FOCKSCREEN_CACHE")
        return Path(env) if env else None

    def set_directory(self, path):
        self._dir = Path(path) if path else None

    def _file(self, size, nvars, pkey):
        d = self.directory
        if d is None:
            return None
        return d / f"jack-v{self.VERSION}" / f"n{nvars}-s{size}-{_fingerprint(pkey)}.json"

    def get_block(self, size, nvars, param):
        pkey = _param_key(param)
        key = (size, nvars, pkey)
        with self._lock:
            if key in self.mem:
                self.hits += 1
                return self.mem[key]
        f = self._file(size, nvars, pkey)
        if f is not None and f.exists():
            try:
                data = json.loads(f.read_text())
                if data.get("version") == self.VERSION and data.get("param") == pkey:
                    block = {_untuple(lam): {_untuple(mu): parse_scalar(c) for mu, c in poly.items()}
                             for lam, poly in data["polys"].items()}
                    with self._lock:
                        self.mem[key] = block
                        self.hits += 1
                    return block
            except (ValueError, KeyError):
                pass
        self.misses += 1
        return None

    def put_block(self, size, nvars, param, block):
        pkey = _param_key(param)
        with self._lock:
            self.mem[(size, nvars, pkey)] = block
        f = self._file(size, nvars, pkey)
        if f is None:
            return
        f.parent.mkdir(parents=True, exist_ok=True)
        data = {"version": self.VERSION, "nvars": nvars, "size": size, "param": pkey,
                "polys": {_tuplestr(lam): {_tuplestr(mu): render_scalar(c) for mu, c in poly.items()}
                          for lam, poly in block.items()}}
        tmp = f.with_suffix(".tmp")
        tmp.write_text(json.dumps(data, indent=1, sort_keys=True))
        os.replace(tmp, f)


def _tuplestr(t):
    return ",".join(map(str, t))


def _untuple(s):
    return tuple(int(x) for x in s.split(",")) if s else ()


JACK_CACHE = _JackCache()


def set_cache_dir(path):
    JACK_CACHE.set_directory(path)


def _pad(lam, n):
    return tuple(lam) + (0,) * (n - len(lam))


def _laplace_beltrami_matrix(size, nvars, param):
    """Action of D = (a/2) sum x_i^2 d_i^2 + sum_{i != j} x_i^2/(x_i - x_j) d_i
    on the monomial basis {m_mu : mu |- size, l(mu) <= nvars}."""
    basis = partitions_nvars(size, nvars)
    index = {mu: i for i, mu in enumerate(basis)}
    action = []
    half = param / 2 if not isinstance(param, int) else Fraction(param, 2)
    for mu in basis:
        out: dict = {}
        e0 = _pad(mu, nvars)
        diag = sum(x * (x - 1) for x in e0)
        out[mu] = half * diag
        for e in set(itertools.permutations(e0)):
            for i in range(nvars):
                for j in range(i + 1, nvars):
                    a, b = e[i], e[j]
                    if a < b:
                        continue
                    if a == b:
                        terms = [(a, a, a)]
                    else:
                        k = a - b
                        terms = [(a, b, a), (b, a, a)]
                        terms += [(b + t, b + k - t, a - b) for t in range(1, k)]
                    for ei, ej, c in terms:
                        f = list(e)
                        f[i], f[j] = ei, ej
                        # the m-basis coefficient is read off at the dominant monomial
                        if tuple(f) == _dominant(f):
                            key = tuple(x for x in f if x)
                            out[key] = out.get(key, 0) + c
        action.append({index[k]: v for k, v in out.items() if v != 0})
    return basis, action


def _jack_block(size, nvars, param):
    if isinstance(param, int):
        param = Fraction(param)
    cached = JACK_CACHE.get_block(size, nvars, param)
    if cached is not None:
        return cached
    basis, action = _laplace_beltrami_matrix(size, nvars, param)
    n = len(basis)
    # action[j][i]: coefficient of m_basis[i] in D m_basis[j]; triangular (i >= j)
    eig = [action[j].get(j, 0) for j in range(n)]
    block = {}
    for top in range(n):
        coeffs = {top: 1}
        for i in range(top + 1, n):
            s = 0
            for j, cj in coeffs.items():
                dji = action[j].get(i)
                if dji:
                    s = s + cj * dji
            if s == 0:
                continue
            gap = eig[top] - eig[i]
            if gap == 0:
                raise InadmissibleParams(f"degenerate Jack eigenvalues at parameter {render_scalar(param)}")
            coeffs[i] = s / gap
        block[basis[top]] = {basis[i]: c for i, c in coeffs.items() if c != 0}
    JACK_CACHE.put_block(size, nvars, param, block)
    return block


def jack_in_monomials(lam, nvars: int, jack_param) -> SymLaurent:
    """Monic Jack polynomial P_lam at parameter jack_param in nvars variables."""
    lam = tuple(lam)
    if jack_param == 0:
        raise ValueError("Jack parameter must be nonzero")
    if len(lam) > nvars:
        return SymLaurent(nvars, {})
    poly = _jack_block(sum(lam), nvars, jack_param)[lam]
    return SymLaurent(nvars, {_pad(mu, nvars): c for mu, c in poly.items()})


@lru_cache(maxsize=None)
def _power_to_monomial(size):
    """R[lam][mu]: coefficient of m_mu in p_lam, for partitions of size."""
    basis = partitions(size)
    out = {}
    for lam in basis:
        nv = len(lam)
        # the m_mu coefficient is the number of ways to land on x^mu itself
        rep = {}
        for assign in itertools.product(range(nv), repeat=nv):
            e = [0] * nv
            for part, v in zip(lam, assign):
                e[v] += part
            if tuple(e) == _dominant(e):
                key = tuple(x for x in e if x)
                rep[key] = rep.get(key, 0) + 1
        out[lam] = rep
    return out


def jack_gram_schmidt(lam, jack_param) -> dict:
    """Independent construction of P_lam (infinitely many variables) by
    orthogonalization under <p_lam, p_mu> = delta z_lam a^l(lam).

    Returns {mu: coefficient of m_mu}.  Used as a test oracle.
    """
    lam = tuple(lam)
    size = sum(lam)
    basis = partitions(size)
    R = _power_to_monomial(size)
    n = len(basis)
    # monomial -> power sum via inverting R (R is triangular in reverse order)
    from . import _linalg as L
    Rm = L.from_rows([[R[p].get(m, 0) for m in basis] for p in basis])
    Rinv = L.to_rows(Rm.inv())  # m_mu = sum_p Rinv[mu][p] p_p

    def ip(i, j):
        s = 0
        for k, p in enumerate(basis):
            a, b = Rinv[i][k], Rinv[j][k]
            if a and b:
                s = s + a * b * z_lambda(p) * jack_param ** len(p)
        return s

    top = basis.index(lam)
    lower = [i for i in range(top + 1, n) if dominates(lam, basis[i])]
    # solve <m_lam + sum c_i m_i, m_j> = 0 for j in lower
    if not lower:
        return {lam: 1}
    rows = [[ip(i, j) for i in lower] for j in lower]
    rhs = [-ip(top, j) for j in lower]
    sol = _solve(rows, rhs)
    out = {lam: 1}
    for i, c in zip(lower, sol):
        if c != 0:
            out[basis[i]] = c
    return out


def _solve(rows, rhs):
    from ._linalg import _gauss
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = _gauss(aug, n)
    if piv != list(range(n)):
        raise ValueError("singular system")
    return [r[n] for r in red]


def jack_at_ones(lam, nvars, jack_param):
    """P_lam(1, ..., 1) from the monomial expansion."""
    P = jack_in_monomials(lam, nvars, jack_param)
    return sum((c * orbit_size(k) for k, c in P.terms.items()), 0)


def jack_expand(f: SymLaurent, jack_param) -> dict:
    """Coefficients of a symmetric polynomial f in the Jack basis."""
    if f.min_exponent < 0:
        raise ValueError("jack_expand needs a polynomial")
    n = f.nvars
    out = {}
    for deg, part in f.homogeneous_parts().items():
        rem = {tuple(x for x in k if x): c for k, c in part.items()}
        order = partition_index(deg)
        block = _jack_block(deg, n, jack_param)
        while rem:
            lam = min(rem, key=lambda p: order[p])
            c = rem[lam]
            out[lam] = c
            for mu, a in block[lam].items():
                v = rem.get(mu, 0) - c * a
                if v == 0:
                    rem.pop(mu, None)
                else:
                    rem[mu] = v
    return out


# ---------------------------------------------------------------------------
# Selberg parameters and the closed form

def _is_int(x) -> bool:
    if isinstance(x, RatFunc):
        return is_integer_scalar(eval_at_zero(x)) if valuation(x) >= 0 else False
    return is_integer_scalar(x)


def _identically_int(x) -> bool:
    if isinstance(x, RatFunc):
        return x.is_constant() and is_integer_scalar(eval_at_zero(x))
    return is_integer_scalar(x)


@dataclass(frozen=True)
class SelbergParams:
    n: int
    alpha: object
    beta: object
    gamma: object

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            x = getattr(self, name)
            if isinstance(x, int):
                object.__setattr__(self, name, Fraction(x))

    def _conditions(self, hat: bool):
        a, b, g, n = self.alpha, self.beta, self.gamma, self.n
        out = []
        for j in range(1, n + 1):
            out.append((f"alpha+({j}-1)gamma in Z" if hat else f"{j}(alpha+({j}-1)gamma) in Z",
                        (a + (j - 1) * g) * (1 if hat else j)))
        for j in range(1, n + 1):
            out.append((f"beta+({j}-1)gamma in Z" if hat else f"{j}(beta+({j}-1)gamma) in Z",
                        (b + (j - 1) * g) * (1 if hat else j)))
        for j in range(1, n):
            out.append((f"({j}+1)gamma in Z" if hat else f"{j}({j}+1)gamma in Z",
                        g * (j + 1) * (1 if hat else j)))
        return out

    def violations(self, hat: bool = True):
        """Hyperplanes containing the parameters at eps = 0."""
        return [name for name, x in self._conditions(hat) if _is_int(x)]

    def status(self, hat: bool = True) -> str:
        """'admissible', 'generic' (only off eps = 0) or 'inadmissible'."""
        conds = self._conditions(hat)
        if any(_identically_int(x) for _, x in conds):
            return "inadmissible"
        if any(_is_int(x) for _, x in conds):
            return "generic"
        return "admissible"

    def convergent(self) -> bool:
        """Rational parameters for which the integral itself converges."""
        if not all(isinstance(x, Fraction) for x in (self.alpha, self.beta, self.gamma)):
            return False
        a, b, g, n = self.alpha, self.beta, self.gamma, self.n
        if a <= -1 or b <= -1:
            return False
        if n == 1:
            return True
        # gamma = 0 would need the Jack parameter 1/gamma
        return g != 0 and g > -min(Fraction(1, n), (a + 1) / (n - 1), (b + 1) / (n - 1))

    def admissible_hat(self) -> bool:
        return self.status(True) == "admissible"

    def admissible(self) -> bool:
        return self.status(False) == "admissible"

    def with_alpha(self, alpha) -> "SelbergParams":
        return SelbergParams(self.n, alpha, self.beta, self.gamma)

    def jack_param(self):
        return 1 / self.gamma

    def key(self):
        return (self.n, render_scalar(self.alpha), render_scalar(self.beta), render_scalar(self.gamma))


#: an affine form c0 + ca*alpha + cb*beta + cg*gamma
LinForm = tuple


def _lin_eval(form, p: SelbergParams):
    c0, ca, cb, cg = form
    out = c0
    if ca:
        out = out + ca * p.alpha
    if cb:
        out = out + cb * p.beta
    if cg:
        out = out + cg * p.gamma
    return out


def _lin_render(form) -> str:
    c0, ca, cb, cg = form
    parts = []
    if c0:
        parts.append(str(c0))
    for c, name in ((ca, "alpha"), (cb, "beta"), (cg, "gamma")):
        if c == 1:
            parts.append(name)
        elif c:
            parts.append(f"{c}*{name}")
    return " + ".join(parts) or "0"


@dataclass(frozen=True)
class GammaProduct:
    """prefactor * prod Gamma(arg_k)^(exp_k) with affine arguments."""

    prefactor: Fraction
    factors: tuple  # ((LinForm, exp), ...)
    params: SelbergParams

    def args(self):
        return [(_lin_eval(f, self.params), e) for f, e in self.factors]

    def __str__(self):
        num = [f"Gamma({_lin_render(f)})" for f, e in self.factors if e > 0]
        den = [f"Gamma({_lin_render(f)})" for f, e in self.factors if e < 0]
        return f"{self.prefactor} * {'*'.join(num) or '1'} / ({'*'.join(den) or '1'})"

    def fingerprint(self) -> str:
        return _fingerprint(str(self) + "|" + "|".join(self.params.key()[1:]))

    def ratio(self, other: "GammaProduct"):
        """self/other as an exact scalar; factors must pair with integer shifts."""
        ups = [(x, e) for x, e in self.args()] + [(x, -e) for x, e in other.args()]
        num, den = [], []
        for x, e in ups:
            (num if e > 0 else den).extend([x] * abs(e))
        value = Fraction(self.prefactor) / Fraction(other.prefactor)
        for x in num:
            for i, y in enumerate(den):
                k = _integer_difference(x, y)
                if k is not None:
                    value = value * _pochhammer_ratio(y, k)
                    den.pop(i)
                    break
            else:
                raise ValueError("Gamma factors do not pair off")
        if den:
            raise ValueError("Gamma factors do not pair off")
        return value

    def valuation(self):
        """eps-valuation of the product (arguments depending on eps)."""
        v = 0
        for x, e in self.args():
            if not isinstance(x, RatFunc):
                if _is_int(x) and eval_at_zero(x) <= 0:
                    raise SingularNormalization("Gamma factor at a pole independent of eps")
                continue
            x0 = eval_at_zero(x)
            if _is_int(x) and x0 <= 0:
                order = valuation(x - x0)
                if order == VAL_INF:
                    raise SingularNormalization("Gamma factor at a pole independent of eps")
                v -= e * order
        return v


def _integer_difference(x, y):
    """k with x = y + k for an integer k, else None."""
    d = x - y
    if isinstance(d, RatFunc):
        if not d.is_constant():
            return None
        d = eval_at_zero(d)
    if is_integer_scalar(d):
        return int(d.a if isinstance(d, QuadExt) else d)
    return None


def _pochhammer_ratio(y, k):
    """Gamma(y + k) / Gamma(y)."""
    out = 1
    if k >= 0:
        for i in range(k):
            out = out * (y + i)
    else:
        for i in range(1, -k + 1):
            out = out / (y - i)
    return out


def pochhammer(x, k: int):
    out = 1
    for i in range(k):
        out = out * (x + i)
    return out


def selberg_closed(params: SelbergParams) -> GammaProduct:
    n = params.n
    fac: dict = {}

    def put(form, e):
        fac[form] = fac.get(form, 0) + e

    for i in range(1, n + 1):
        put((1, 0, 0, i), 1)
        put((1, 1, 0, i - 1), 1)
        put((1, 0, 1, i - 1), 1)
        put((1, 0, 0, 1), -1)
        put((2, 1, 1, n + i - 2), -1)
    factors = tuple(sorted(((f, e) for f, e in fac.items() if e), key=lambda fe: (-fe[1], fe[0])))
    return GammaProduct(Fraction(1, math.factorial(n)), factors, params)


def selberg_jack_ratio(lam, params: SelbergParams):
    """S_n[P_lam]/S_n[1] with P_lam the Jack polynomial at parameter 1/gamma."""
    lam = tuple(lam)
    n = params.n
    if params.status(True) == "inadmissible" and not params.convergent():
        raise InadmissibleParams("; ".join(params.violations(True)))
    if len(lam) > n:
        return 0
    if not lam:
        return 1
    a, b, k = params.alpha, params.beta, params.gamma
    out = jack_at_ones(lam, n, 1 / k) if n > 1 else 1
    for i, li in enumerate(lam, start=1):
        num = pochhammer(a + 1 + (n - i) * k, li)
        den = pochhammer(a + b + 2 + (2 * n - i - 1) * k, li)
        if den == 0:
            raise SingularNormalization("S_n[1] vanishes at these parameters")
        out = out * num / den
    return out


class _MomentCache:
    def __init__(self):
        self.data: dict = {}
        self.lock = threading.Lock()


_MOMENTS = _MomentCache()


def _moment_n1(k, params):
    """S_1[y^k]/S_1[1] for any integer k."""
    a, b = params.alpha, params.beta
    out = 1
    if k >= 0:
        for j in range(k):
            den = a + b + 2 + j
            if den == 0:
                raise SingularNormalization("S_1[1] vanishes at these parameters")
            out = out * (a + 1 + j) / den
    else:
        for j in range(1, -k + 1):
            den = a + 1 - j
            if den == 0:
                raise SingularNormalization("pole of S_1[1] at these parameters")
            out = out * (a + b + 2 - j) / den
    return out


def monomial_moment(e, params: SelbergParams):
    """S_n[y^e]/S_n[1] for a single monomial (any representative of its orbit)."""
    e = _dominant(e)
    key = (params.key(), e)
    hit = _MOMENTS.data.get(key)
    if hit is not None:
        return hit
    if params.n == 1:
        val = _moment_n1(e[0], params)
    else:
        val = selberg_eval(SymLaurent(params.n, {e: 1}), params) * Fraction(1, orbit_size(e))
    _MOMENTS.data[key] = val
    return val


def selberg_eval(f: SymLaurent, params: SelbergParams, _checked: bool = False):
    """S_n[f]/S_n[1] for a symmetric Laurent polynomial f.

    Parameters on an admissibility hyperplane are accepted when the integral
    converges outright.
    """
    if f.nvars != params.n:
        raise ValueError("f and params disagree on the number of variables")
    if not _checked and params.status(True) == "inadmissible" and not params.convergent():
        raise InadmissibleParams("; ".join(params.violations(True)))
    if not f.terms:
        return 0
    if params.n == 1:
        return sum((c * _moment_n1(k[0], params) for k, c in f.terms.items()), 0)
    N = max(0, -f.min_exponent)
    if N:
        shifted = params.with_alpha(params.alpha - N)
        norm = selberg_closed(shifted).ratio(selberg_closed(params))
        return selberg_eval(f.shift(N), shifted, True) * norm
    coeffs = jack_expand(f, params.jack_param())
    total = 0
    for lam, c in coeffs.items():
        total = total + c * selberg_jack_ratio(lam, params)
    return total


# ---------------------------------------------------------------------------
# numerical oracle

def quadrature_oracle(f: SymLaurent, params, n: int | None = None) -> float:
    """Adaptive quadrature of S_n[f]/S_n[1] for n <= 2 (floating point)."""
    from scipy import integrate

    if isinstance(params, SelbergParams):
        n = params.n
        a, b, g = float(params.alpha), float(params.beta), float(params.gamma)
    else:
        a, b, g = (float(x) for x in params)
        n = n or f.nvars
    if n not in (1, 2) or f.nvars != n:
        raise ValueError("the quadrature oracle handles n = 1, 2 only")
    N = max(0, -f.min_exponent)
    a_eff = a - N
    if a_eff <= -1 or b <= -1 or (n > 1 and g <= 0):
        raise NonConvergent(f"need alpha > -1, beta > -1, gamma > 0 (alpha after shift {a_eff})")
    fs = f.shift(N)
    terms = [(float(c), k) for k, c in fs.terms.items()]

    def fval(*ys):
        tot = 0.0
        for c, k in terms:
            m = 0.0
            for perm in set(itertools.permutations(k)):
                t = 1.0
                for y, x in zip(ys, perm):
                    t *= y ** x
                m += t
            tot += c * m
        return tot

    opts = dict(epsabs=0.0, epsrel=1e-11, limit=200)
    if n == 1:
        num = integrate.quad(fval, 0, 1, weight="alg", wvar=(a_eff, b), **opts)[0]
        den = integrate.quad(lambda y: 1.0, 0, 1, weight="alg", wvar=(a, b), **opts)[0]
        return num / den

    def outer(h, alpha):
        def inner_int(y1):
            if y1 >= 1.0:
                # the corner y1 = t = 1 is singular for beta < 0; fold (1-t)^beta into the weight
                return integrate.quad(lambda t: h(1.0, t), 0, 1, weight="alg",
                                      wvar=(alpha, 2 * g + b), **opts)[0]
            return integrate.quad(lambda t: (1 - y1 * t) ** b * h(y1, y1 * t), 0, 1,
                                  weight="alg", wvar=(alpha, 2 * g), **opts)[0]
        return integrate.quad(inner_int, 0, 1, weight="alg",
                              wvar=(2 * alpha + 2 * g + 1, b), **opts)[0]

    num = outer(fval, a_eff)
    den = outer(lambda y1, y2: 1.0, a)
    return num / den


def render_params(p: SelbergParams) -> dict:
    return {"n": p.n, "alpha": render_scalar(p.alpha), "beta": render_scalar(p.beta),
            "gamma": render_scalar(p.gamma)}
