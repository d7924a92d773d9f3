"""Neveu-Schwarz Fock modules, NS screenings and the super triplet algebra.

An NS Fock module is a bosonic Fock module tensored with the NS fermion
Fock space, {b_r, b_s} = delta_{r+s,0}, b(z) = sum_r b_r z^{-r-1/2}.  Basis
vectors a_{-lam} b_{-f_1} ... b_{-f_k}|gamma> are keyed by (lam, F) with F
strictly decreasing positive half-odd integers.

Units follow the bosonic modules: with m fixed, u = sqrt(2m+1), a = u b,
level kappa = 1/(2m+1), screening charges 1 and -kappa and background
charge rho = 1 - kappa.  The supercurrent is G = (a b + rho db)/sqrt(kappa);
the rational part (without 1/sqrt(kappa)) is used wherever only the line
spanned by a G-image matters.

The 2m-fold screening pairs the fermion correlator times the Vandermonde
(a symmetric Laurent polynomial, expanded here by Wick contraction) with
the bosonic part and integrates against the weight
y^alpha (1-y)^(beta^2/kappa - 1) |Delta(y)|^(beta^2/kappa - 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from . import _linalg as L
from .exactnum import RatFunc, eval_at_zero, integer_value, render_scalar
from .fock import (BASES, FockContext, FockVector, GradedMap, WeightMismatch,
                   apply_heisenberg, apply_virasoro)
from .screening import (NonLatticeDomain, NormalizationLedger, _corrected_limit, _sqrt_of,
                        cycle_normalization, reference_params)
from .symfunc import (InadmissibleParams, SelbergParams, SingularNormalization, _dominant,
                      monomial_moment, partitions, selberg_closed, z_lambda)
from .vertex import _submultisets, vertex_matrix
from .walgebra import VerifyReport, _Timer

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# basis

@lru_cache(maxsize=None)
def fermion_states(h) -> tuple:
    """Strictly decreasing tuples of positive half-odd integers summing to h."""
    two_h = integer_value(2 * Fraction(h))
    if two_h is None or two_h < 0:
        return ()
    out = []

    def rec(rest, largest, acc):
        if rest == 0:
            out.append(tuple(Fraction(k, 2) for k in acc))
            return
        for k in range(min(largest, rest), 0, -1):
            if k % 2:
                rec(rest - k, k - 2, acc + [k])

    rec(two_h, two_h if two_h % 2 else two_h - 1, [])
    return tuple(sorted(out, key=lambda f: (len(f), f), reverse=False))


@lru_cache(maxsize=None)
def ns_basis(g) -> tuple:
    """(lam, F) with |lam| + sum F = g, ordered by bosonic grade."""
    g = Fraction(g)
    out = []
    for gb in range(int(math.floor(g)) + 1):
        for lam in partitions(gb):
            for f in fermion_states(g - gb):
                out.append((lam, f))
    return tuple(out)


@lru_cache(maxsize=None)
def ns_index(g) -> dict:
    return {k: i for i, k in enumerate(ns_basis(g))}


BASES["ns"] = ns_basis


def ns_grades(cutoff) -> list:
    return [Fraction(k, 2) for k in range(int(2 * Fraction(cutoff)) + 1)]


def _key_grade(key):
    lam, f = key
    return sum(lam) + sum(f, Fraction(0))


class NSVector:
    """Finite combination of a_{-lam} b_{-F}|weight> in one NS Fock module."""

    __slots__ = ("weight", "terms", "ctx")

    def __init__(self, weight, terms: dict | None = None, ctx: FockContext | None = None):
        self.weight = weight
        self.ctx = ctx or FockContext()
        self.terms = {(tuple(k[0]), tuple(Fraction(x) for x in k[1])): c
                      for k, c in (terms or {}).items() if c != 0}

    @classmethod
    def vacuum(cls, weight, ctx=None):
        return cls(weight, {((), ()): 1}, ctx)

    @classmethod
    def basis(cls, weight, lam=(), fermions=(), ctx=None):
        return cls(weight, {(tuple(lam), tuple(fermions)): 1}, ctx)

    def _check(self, other):
        if other.weight != self.weight:
            raise WeightMismatch(f"weights {render_scalar(self.weight)} and {render_scalar(other.weight)}")

    def __add__(self, other):
        self._check(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return NSVector(self.weight, t, self.ctx)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        if s == 0:
            return NSVector(self.weight, {}, self.ctx)
        return NSVector(self.weight, {k: c * s for k, c in self.terms.items()}, self.ctx)

    __mul__ = scale
    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.terms

    def grades(self):
        return sorted({_key_grade(k) for k in self.terms})

    def component(self, g) -> "NSVector":
        return NSVector(self.weight, {k: c for k, c in self.terms.items() if _key_grade(k) == g}, self.ctx)

    def coords(self, g) -> list:
        idx = ns_index(Fraction(g))
        v = [0] * len(idx)
        for k, c in self.terms.items():
            if _key_grade(k) == g:
                v[idx[k]] = c
        return v

    @classmethod
    def from_coords(cls, weight, g, coords, ctx=None):
        return cls(weight, {k: c for k, c in zip(ns_basis(Fraction(g)), coords) if c != 0}, ctx)

    def parity(self):
        """Number of fermion modes mod 2 (None if mixed)."""
        ps = {len(k[1]) % 2 for k in self.terms}
        return ps.pop() if len(ps) == 1 else None

    def __eq__(self, other):
        if not isinstance(other, NSVector):
            return NotImplemented
        return self.weight == other.weight and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms)))

    def render(self) -> str:
        if not self.terms:
            return "0"
        w = render_scalar(self.weight)
        out = []
        for key in sorted(self.terms, key=lambda k: (_key_grade(k), ns_index(_key_grade(k))[k])):
            lam, f = key
            modes = "".join(f"a_{{-{p}}}" for p in reversed(lam))
            modes += "".join(f"b_{{-{render_scalar(x)}}}" for x in f)
            out.append(f"({render_scalar(self.terms[key])}) · {modes or '1'} |{w}⟩")
        return " + ".join(out)

    def __repr__(self):
        return f"NSVector({self.render()})"


# ---------------------------------------------------------------------------
# mode actions

def fermion_mode(r, state: tuple):
    """b_r on b_{-F}|0>: (sign, new state) or None."""
    r = Fraction(r)
    if r < 0:
        f = -r
        if f in state:
            return None
        pos = sum(1 for x in state if x > f)
        return (-1) ** pos, state[:pos] + (f,) + state[pos:]
    if r not in state:
        return None
    pos = state.index(r)
    return (-1) ** pos, state[:pos] + state[pos + 1:]


def apply_fermion(r, v: NSVector) -> NSVector:
    out: dict = {}
    for (lam, f), c in v.terms.items():
        hit = fermion_mode(r, f)
        if hit is None:
            continue
        s, f2 = hit
        out[(lam, f2)] = out.get((lam, f2), 0) + s * c
    return NSVector(v.weight, out, v.ctx)


def _bosonic(op, n, v: NSVector) -> NSVector:
    """A bosonic mode applied to every fermion sector."""
    out: dict = {}
    by_f: dict = {}
    for (lam, f), c in v.terms.items():
        by_f.setdefault(f, {})[lam] = c
    for f, t in by_f.items():
        w = op(n, FockVector(v.weight, t, v.ctx))
        for lam, c in w.terms.items():
            out[(lam, f)] = out.get((lam, f), 0) + c
    return NSVector(v.weight, out, v.ctx)


def _max_mode(v: NSVector):
    top = Fraction(0)
    for lam, f in v.terms:
        top = max(top, max(lam, default=0), max(f, default=0))
    return top


def _fermion_virasoro(n: int, v: NSVector) -> NSVector:
    if n == 0:
        out = {k: c * sum(k[1], Fraction(0)) for k, c in v.terms.items()}
        return NSVector(v.weight, out, v.ctx)
    acc = NSVector(v.weight, {}, v.ctx)
    bound = int(abs(n) + _max_mode(v)) + 1
    s = -bound + HALF
    while s <= bound:
        coeff = (s + Fraction(n, 2)) / 2
        if coeff:
            x = apply_fermion(s, v)
            if not x.is_zero():
                acc = acc + apply_fermion(n - s, x).scale(coeff)
        s += 1
    return acc


def _reduced_supercurrent(r, v: NSVector) -> NSVector:
    """(sum_k a_k b_{r-k} - rho (r + 1/2) b_r) v."""
    r = Fraction(r)
    acc = NSVector(v.weight, {}, v.ctx)
    top = _max_mode(v)
    lo = -int(abs(r) + top + 1)
    hi = int(top) + 1
    for k in range(lo, hi + 1):
        x = apply_fermion(r - k, v)
        if x.is_zero():
            continue
        acc = acc + _bosonic(apply_heisenberg, k, x)
    rho = v.ctx.rho
    if rho != 0 and r + HALF != 0:
        acc = acc - apply_fermion(r, v).scale(rho * (r + HALF))
    return acc


def apply_ns_mode(kind: str, n, v: NSVector, reduced: bool = False) -> NSVector:
    """L_n or G_r on an NS vector.

    With ``reduced`` the supercurrent is returned without its
    1/sqrt(kappa) factor.
    """
    if kind == "L":
        if integer_value(n) is None:
            raise ValueError("L_n needs an integer n")
        n = int(n)
        return _bosonic(apply_virasoro, n, v) + _fermion_virasoro(n, v)
    if kind == "G":
        r = Fraction(n)
        if (2 * r) % 2 != 1:
            raise ValueError("G_r needs r in Z + 1/2")
        out = _reduced_supercurrent(r, v)
        if reduced or v.ctx.kappa == 1:
            return out
        return out.scale(1 / _sqrt_of(v.ctx.kappa))
    raise ValueError(f"unknown NS mode kind {kind!r}")


def ns_central_charge(ctx: FockContext):
    return Fraction(3, 2) - 3 * ctx.rho * ctx.rho / ctx.kappa


def ns_mode_map(kind: str, n, weight, ctx: FockContext, cutoff, reduced: bool = True) -> GradedMap:
    """GradedMap of L_n or (reduced) G_r on an NS module."""
    shift = -Fraction(n)
    blocks = {}
    for g in ns_grades(cutoff):
        t = g + shift
        if t < 0:
            continue
        tidx = ns_index(t)
        entries = {}
        for j, key in enumerate(ns_basis(g)):
            w = apply_ns_mode(kind, n, NSVector(weight, {key: 1}, ctx), reduced=reduced)
            for k, c in w.terms.items():
                entries[(tidx[k], j)] = c
        B = L.from_dict(len(tidx), len(ns_basis(g)), entries)
        if not L.is_zero(B):
            blocks[g] = B
    return GradedMap(weight, weight, Fraction(cutoff), shift, blocks, 1, None, "ns", f"{kind}_{n}")


# ---------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class NSParams:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")

    @cached_property
    def u(self):
        return _sqrt_of(Fraction(2 * self.m + 1))

    @cached_property
    def kappa(self) -> Fraction:
        return Fraction(1, 2 * self.m + 1)

    @cached_property
    def delta(self) -> RatFunc:
        return RatFunc.gen(var="delta")

    def beta_pm(self, sign: str, deformed: bool = False):
        """Rescaled screening charges 1 and -kappa (deformed: 1+delta, -kappa/(1+delta))."""
        if not deformed:
            return Fraction(1) if sign == "+" else -self.kappa
        return 1 + self.delta if sign == "+" else RatFunc(-self.kappa, [1, 1], var="delta")

    def rho(self, deformed: bool = False):
        return self.beta_pm("+", deformed) + self.beta_pm("-", deformed)

    def beta(self, r, s, n: int = 0, deformed: bool = False):
        """Rescaled weight of F^ns_{r,s;n}."""
        return (Fraction(1 - r + n, 2) * self.beta_pm("+", deformed)
                + Fraction(1 - s, 2) * self.beta_pm("-", deformed))

    def ctx(self, deformed: bool = False) -> FockContext:
        return FockContext(self.rho(deformed), self.kappa)

    @property
    def central_charge(self):
        return ns_central_charge(self.ctx())

    def lowest_weight(self, weight):
        return self.ctx().lowest_weight(weight)

    def h(self, r, s, n: int = 0) -> Fraction:
        r = r - n
        q = 2 * self.m + 1
        return (Fraction((r * r - 1) * q, 8) - Fraction(r * s - 1, 4)
                + Fraction(s * s - 1, 8 * q))

    def h_eigenvalue(self, weight):
        """Eigenvalue of h = -2a_0/((2m+1) beta_-) on a module of rescaled weight."""
        return 2 * weight

    def describe(self) -> dict:
        return {"algebra": "sw", "m": self.m, "central_charge": render_scalar(self.central_charge)}


# ---------------------------------------------------------------------------
# screenings

def ns_screening_shift(beta, weight, r, kappa):
    """Grade shift of the r-fold NS screening zero mode.

    The bosonic z-exponent must be an integer; each b(z) adds z^{-1/2} to
    the grade change, so the shift is half-odd for odd r.
    """
    off = r * beta * weight / kappa + Fraction(r * (r - 1), 2) * beta * beta / kappa
    k = integer_value(off)
    if k is None:
        raise NonLatticeDomain(f"z-exponent {render_scalar(off)} is not an integer")
    return -k - Fraction(r, 2)


def _single_block(beta, weight, kappa, g, t, qhat, cache):
    off = integer_value(beta * weight / kappa)
    src = ns_basis(g)
    tidx = ns_index(t)
    entries: dict = {}
    for j, (mu, f) in enumerate(src):
        gb = sum(mu)
        for tb in range(int(math.floor(t)) + 1):
            n = off + tb - gb + HALF
            hit = fermion_mode(n, f)
            if hit is None:
                continue
            sign, f2 = hit
            key = (gb, tb)
            M = cache.get(key)
            if M is None:
                M = L.to_rows(vertex_matrix(beta, kappa, gb, tb, qhat))
                cache[key] = M
            col = partitions(gb).index(mu)
            for i, lam in enumerate(partitions(tb)):
                c = M[i][col]
                if c:
                    k = tidx[(lam, f2)]
                    entries[(k, j)] = entries.get((k, j), 0) + sign * c
    return L.from_dict(len(tidx), len(src), {k: v for k, v in entries.items() if v != 0})


def _wick_terms(bra: tuple, ket: tuple, r: int):
    """Matchings of <G| b(z_1)...b(z_r) |F>.

    Yields (sign, exponents, zz_pairs): the product of the external
    contractions is prod z_i^{exponents[i]}, and each pair (i, j), i < j,
    contributes 1/(z_i - z_j).
    """
    ops = [("B", g) for g in reversed(bra)] + [("Z", i) for i in range(r)] + [("K", f) for f in ket]

    def contract(x, y):
        kx, vx = x
        ky, vy = y
        if kx == "B" and ky == "K":
            return ("c",) if vx == vy else None
        if kx == "B" and ky == "Z":
            return ("z", vy, vx - HALF)
        if kx == "Z" and ky == "K":
            return ("z", vx, -vy - HALF)
        if kx == "Z" and ky == "Z":
            return ("p", vx, vy)
        return None

    def rec(items):
        if not items:
            yield 1, (0,) * r, ()
            return
        first, rest = items[0], items[1:]
        for j, other in enumerate(rest):
            c = contract(first, other)
            if c is None:
                continue
            sign = -1 if j % 2 else 1
            remaining = rest[:j] + rest[j + 1:]
            for s, exps, pairs in rec(remaining):
                if c[0] == "z":
                    e = list(exps)
                    e[c[1]] += c[2]
                    exps = tuple(e)
                elif c[0] == "p":
                    pairs = ((c[1], c[2]),) + pairs
                yield sign * s, exps, pairs

    if len(ops) % 2:
        return
    yield from rec(ops)


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


@lru_cache(maxsize=None)
def _vandermonde_quotient(r: int, pairs: frozenset) -> tuple:
    """prod_{i<j, (i,j) not in pairs} (z_i - z_j) as ((exponents), coeff) items."""
    poly = {(0,) * r: 1}
    for i, j in itertools.combinations(range(r), 2):
        if (i, j) in pairs:
            continue
        ei = tuple(int(k == i) for k in range(r))
        ej = tuple(int(k == j) for k in range(r))
        poly = _poly_mul(poly, {ei: 1, ej: -1})
    return tuple(poly.items())


@lru_cache(maxsize=None)
def fermion_polynomial(bra: tuple, ket: tuple, r: int) -> tuple:
    """Delta(z) <G| b(z_1)...b(z_r) |F> at z_1 = 1, in the remaining r-1 variables."""
    out: dict = {}
    for sign, exps, pairs in _wick_terms(bra, ket, r):
        for e, c in _vandermonde_quotient(r, frozenset(pairs)):
            tot = [int(x + y) for x, y in zip(exps, e)]
            key = tuple(tot[1:])
            out[key] = out.get(key, 0) + sign * c
    return tuple((e, c) for e, c in out.items() if c != 0)


def _power_sum_factor(k: int, nv: int) -> dict:
    """1 + p_k(y_1..y_nv)."""
    out = {(0,) * nv: 1}
    for i in range(nv):
        e = tuple(k if j == i else 0 for j in range(nv))
        out[e] = out.get(e, 0) + 1
    return out


class _BosonPolys:
    """Bosonic factor <lam| prod V(z_i) |mu> at z_1 = 1 as Laurent polynomials."""

    def __init__(self, beta, kappa, nv):
        self.beta, self.kappa, self.nv = beta, kappa, nv
        self.cache: dict = {}
        self.factors: dict = {}

    def _factor(self, k):
        f = self.factors.get(k)
        if f is None:
            f = _power_sum_factor(k, self.nv)
            self.factors[k] = f
        return f

    def poly(self, mu: tuple, lam: tuple) -> dict:
        key = (mu, lam)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        bk = self.beta / self.kappa
        for kept, nrem, mult in _submultisets(mu):
            rest = list(lam)
            ok = True
            for p in kept:
                if p in rest:
                    rest.remove(p)
                else:
                    ok = False
                    break
            if not ok:
                continue
            nu = tuple(rest)
            removed = list(mu)
            for p in kept:
                removed.remove(p)
            c = mult * (-self.beta) ** nrem * bk ** len(nu) * Fraction(1, z_lambda(nu))
            poly = {(0,) * self.nv: c}
            for s in removed:
                poly = _poly_mul(poly, self._factor(-s))
            for p in nu:
                poly = _poly_mul(poly, self._factor(p))
            for e, x in poly.items():
                out[e] = out.get(e, 0) + x
        out = {e: c for e, c in out.items() if c != 0}
        self.cache[key] = out
        return out


def ns_selberg_params(beta, weight, r, kappa) -> SelbergParams:
    b2 = beta * beta / kappa - 1
    return SelbergParams(r - 1, beta * weight / kappa, b2, b2 / 2)


def _multi_block(beta, kappa, r, g, t, bosons, params, moments):
    src = ns_basis(g)
    tidx = ns_index(t)
    entries: dict = {}

    def integrate(pb, pf):
        total = 0
        for eb, cb in pb.items():
            for ef, cf in pf:
                e = _dominant(tuple(x + y for x, y in zip(eb, ef)))
                val = moments.get(e)
                if val is None:
                    val = monomial_moment(e, params)
                    moments[e] = val
                total = total + cb * cf * val
        return total

    for j, (mu, f) in enumerate(src):
        for tb in range(int(math.floor(t)) + 1):
            states = fermion_states(t - tb)
            if not states:
                continue
            for lam in partitions(tb):
                pb = bosons.poly(mu, lam)
                if not pb:
                    continue
                for f2 in states:
                    pf = fermion_polynomial(f2, f, r)
                    if not pf:
                        continue
                    val = integrate(pb, pf)
                    if val:
                        entries[(tidx[(lam, f2)], j)] = val
    return L.from_dict(len(tidx), len(src), entries)


def ns_screening_map(beta, weight, r, kappa, cutoff, label="", src_label=None,
                     qhat: bool = False) -> GradedMap:
    """Zero mode of the r-fold NS screening b(z)Y(beta, z) on F^ns_weight.

    ``qhat`` inserts phi_0 (rescaled units) into a single screening.
    """
    shift = ns_screening_shift(beta, weight, r, kappa)
    src_w = weight if src_label is None else src_label
    cutoff = Fraction(cutoff)
    blocks = {}
    if r == 1:
        cache: dict = {}
        for g in ns_grades(cutoff):
            t = g + shift
            if t < 0:
                continue
            M = _single_block(beta, weight, kappa, g, t, qhat, cache)
            if not L.is_zero(M):
                blocks[g] = M
        return GradedMap(src_w, weight + beta, cutoff, shift, blocks, 1, NormalizationLedger(), "ns",
                         label)
    if qhat:
        raise ValueError("phi_0 insertion is only used with a single screening")
    params = ns_selberg_params(beta, weight, r, kappa)
    if params.status(True) == "inadmissible":
        raise InadmissibleParams(f"{label}: " + "; ".join(params.violations(True)))
    try:
        factor = cycle_normalization(params)
        norm = selberg_closed(reference_params(params))
        per_module = ()
    except SingularNormalization:
        factor, norm, per_module = 1, selberg_closed(params), (label or "S",)
    sigma = norm.valuation() if any(isinstance(x, RatFunc) for x, _ in norm.args()) else 0
    bosons = _BosonPolys(beta, kappa, r - 1)
    moments: dict = {}
    for g in ns_grades(cutoff):
        t = g + shift
        if t < 0:
            continue
        M = _multi_block(beta, kappa, r, g, t, bosons, params, moments)
        if factor != 1:
            M = L.scale(M, factor)
        if not L.is_zero(M):
            blocks[g] = M
    ledger = NormalizationLedger(sigma, (norm,), per_module)
    return GradedMap(src_w, weight + r * beta, cutoff, shift, blocks, 1, ledger, "ns", label)


def ns_single_screen(params: NSParams, sign: str, weight, cutoff) -> GradedMap:
    """S_sign on F^ns_weight (rescaled weight)."""
    return ns_screening_map(params.beta_pm(sign), weight, 1, params.kappa, cutoff, f"S{sign}")


def ns_multi_screen(params: NSParams, weight, cutoff) -> GradedMap:
    """S^{[2m]}_- on F^ns_weight."""
    r = 2 * params.m
    return ns_screening_map(params.beta_pm("-"), weight, r, params.kappa, cutoff, f"S-[{r}]")


def ns_qhat(params: NSParams, weight, cutoff) -> GradedMap:
    """∮ :S_-(z) phi_0(z): with phi_0 in standard units."""
    gm = ns_screening_map(params.beta_pm("-"), weight, 1, params.kappa, cutoff, "Shat-", qhat=True)
    return gm.with_scale(params.u)


def _needed(shift, cutoff):
    return max(Fraction(cutoff) + shift, Fraction(0))


def ns_derivation(params: NSParams, weight, cutoff) -> GradedMap:
    """G^ns_- = (1/(2m+1)) S^{[2m]}_- ∘ ∮:S_- phi_0: on F^ns_weight."""
    qh = ns_qhat(params, weight, cutoff)
    second = ns_multi_screen(params, qh.dst_weight, _needed(qh.shift, cutoff))
    G = second.compose(qh) * params.kappa
    G.label = "Gns-"
    return G


def ns_compose_N(params: NSParams, k: int, cutoff) -> GradedMap:
    """S~^{[2m]}_- ∘ e ∘ S~_- ∘ e on F^ns_{2k+1,1}, landing in F^ns_{2k+1,1;-2}."""
    r = 2 * params.m
    kap = params.kappa
    src = params.beta(2 * k + 1, 1)
    w1 = params.beta(2 * k + 1, 1, deformed=True)
    first = ns_screening_map(params.beta_pm("-", True), w1, 1, kap, cutoff, "S~-", src_label=src)
    w2 = params.beta(2 * k + 2, 2 * params.m, deformed=True)
    if eval_at_zero(w2) != eval_at_zero(first.dst_weight):
        raise WeightMismatch("internal: shift element is not O(eps)")
    second = ns_screening_map(params.beta_pm("-", True), w2, r, kap, _needed(first.shift, cutoff),
                              f"S~-[{r}]", src_label=first.dst_weight)
    N = second.compose(first)
    final = params.beta(2 * k + 1, 1, -2)
    if eval_at_zero(N.dst_weight) != final:
        raise WeightMismatch("internal: N target")
    return GradedMap(N.src_weight, final, N.cutoff, N.shift, N.blocks, N.scale, N.ledger, "ns",
                     f"Nns_k={k}")


def ns_G_limit(params: NSParams, k: int, cutoff) -> GradedMap:
    """lim_F (1/eps) N^ns_{-,k}(eps), eps = u delta, ledger-corrected."""
    N = ns_compose_N(params, k, cutoff)
    out = _corrected_limit(N, 1, scale=1 / params.u, label=f"Gns-_k={k}")
    out.kind = "ns"
    return out


# ---------------------------------------------------------------------------
# super triplet vectors and the sl2 check

def _component_of(params: NSParams, weight) -> int:
    j = integer_value(weight)
    if j is None:
        raise ValueError(f"weight {render_scalar(weight)} is not in the lattice")
    return j


def sw_components(params: NSParams, top) -> list:
    out = []
    for j in itertools.count(0):
        hit = [i for i in {j, -j} if params.lowest_weight(Fraction(i)) <= top]
        if not hit and j > 1:
            break
        out.extend(hit)
    return sorted(out)


def _screen_plus(params: NSParams, j: int, cutoff):
    return ns_single_screen(params, "+", Fraction(j), cutoff)


def triplet_vectors_ns(params: NSParams) -> dict:
    """W^{-,0,+} and their hatted partners."""
    ctx = params.ctx()
    w_minus = NSVector.vacuum(Fraction(-1), ctx)
    hat_minus = NSVector.basis(Fraction(-1), (), (HALF,), ctx)
    out = {}
    for name, v in (("W", w_minus), ("What", hat_minus)):
        vs = [v]
        for j in (-1, 0):
            g = max(vs[-1].grades())
            vs.append(_screen_plus(params, j, g).apply(vs[-1]))
        out[name] = {"-": vs[0], "0": vs[1], "+": vs[2]}
    return out


def ladder_vector(params: NSParams, n: int, k: int) -> NSVector:
    """w^{(n)}_k = S_+^{n+k} |beta_{1,1;-2n}>."""
    v = NSVector.vacuum(Fraction(-n), params.ctx())
    for step in range(n + k):
        j = -n + step
        v = _screen_plus(params, j, max(v.grades())).apply(v)
    return v


def ns_l0_weight(params: NSParams, v: NSVector):
    gs = v.grades()
    if len(gs) != 1:
        return None
    return params.lowest_weight(v.weight) + gs[0]


def is_ns_singular(v: NSVector) -> bool:
    """Annihilated by G_{1/2}, G_{3/2} (hence by all positive NS modes)."""
    return all(apply_ns_mode("G", r, v, reduced=True).is_zero() for r in (HALF, Fraction(3, 2)))


def _ns_kernel(S: GradedMap, g) -> list:
    dim = len(ns_basis(g))
    B = S.block(g)
    if B is None:
        return [[Fraction(int(i == j)) for i in range(dim)] for j in range(dim)]
    return L.nullspace(B)


def _block_rank(gm: GradedMap, g):
    B = gm.blocks.get(g)
    return L.rank(B) if B is not None else 0


def sw_verify(params: NSParams, cutoff=None) -> list:
    """Reports for the super triplet claims (nilpotency, commutation, sl2, ladder)."""
    top = Fraction(2 * params.m + 1)
    cutoff = Fraction(cutoff) if cutoff is not None else Fraction(4)
    return [sw_nilpotent(params, cutoff), sw_commute(params, top), sw_sl2(params)]


def sw_nilpotent(params: NSParams, cutoff, k_range=(-1, 0, 1)) -> VerifyReport:
    """S^{[2m]} ∘ S_- = 0, S_- ∘ S^{[2m]} = 0 and exactness of the complex per grade."""
    report = VerifyReport("sw.nilpotent", params.describe(), render_scalar(Fraction(cutoff)))
    report.scope = f"F^ns_(1,1;2k), k in {list(k_range)}, grades <= {render_scalar(Fraction(cutoff))}"
    with _Timer(report):
        cutoff = Fraction(cutoff)
        kap = params.kappa
        for k in k_range:
            mid = params.beta(1, 1, 2 * k)        # F_{1,1;2k}
            left = params.beta(1, 2 * params.m, 2 * k + 1)
            out = ns_single_screen(params, "-", mid, cutoff)
            inc = ns_multi_screen(params, left, _needed(-ns_screening_shift(
                params.beta_pm("-"), left, 2 * params.m, kap), cutoff))
            if inc.dst_weight != mid:
                report.fail(check="complex labels", k=k)
                continue
            nxt = ns_multi_screen(params, out.dst_weight, _needed(out.shift, cutoff))
            comp = nxt.compose(out)
            report.check(comp.is_zero(), check="S[2m] S- = 0", k=k)
            # S_- after S^[2m], on the source grades that land in the window
            src_cut = cutoff - inc.shift
            inc2 = ns_multi_screen(params, left, max(src_cut, Fraction(0)))
            comp2 = out.compose(GradedMap(inc2.src_weight, inc2.dst_weight, inc2.cutoff, inc2.shift,
                                          {g: B for g, B in inc2.blocks.items() if g + inc2.shift <= cutoff},
                                          inc2.scale, inc2.ledger, "ns", inc2.label))
            report.check(comp2.is_zero(), check="S- S[2m] = 0", k=k)
            dims = []
            for g in ns_grades(cutoff):
                ker = len(ns_basis(g)) - _block_rank(out, g)
                gi = g - inc2.shift
                im = _block_rank(inc2, gi) if gi >= 0 else 0
                dims.append(ker - im)
            report.check(all(d == 0 for d in dims), check="exactness", k=k, ker_minus_im=dims)
    return report


def sw_commute(params: NSParams, top) -> VerifyReport:
    """[S_+, S_-] = 0 on F^ns_{1,1}."""
    report = VerifyReport("sw.commute", params.describe(), render_scalar(Fraction(top)))
    with _Timer(report):
        top = Fraction(top)
        w = Fraction(0)
        Sp = ns_single_screen(params, "+", w, top)
        Sm = ns_single_screen(params, "-", w, top)
        SmSp = ns_single_screen(params, "-", Sp.dst_weight, _needed(Sp.shift, top)).compose(Sp)
        SpSm = ns_single_screen(params, "+", Sm.dst_weight, _needed(Sm.shift, top)).compose(Sm)
        diff = SpSm - SmSp
        report.check(diff.is_zero(), check="[S+,S-] = 0", grades=render_scalar(top),
                     nonzero=not SpSm.is_zero())
    return report


def _proportional(a: NSVector, b: NSVector):
    """Scalar c with a = c b, or None."""
    if a.weight != b.weight or a.grades() != b.grades():
        return None
    if b.is_zero():
        return None
    g = b.grades()[0]
    return L.solve_proportional(a.coords(g), b.coords(g))


def sw_sl2(params: NSParams) -> VerifyReport:
    """sl2 relations of (S_+, h, G^ns_-) on ker S_- up to weight 2m+1."""
    top = Fraction(2 * params.m + 1)
    report = VerifyReport("sw.sl2", params.describe(), render_scalar(top))
    report.scope = f"ker S_- on the lattice components, L0-weight <= {render_scalar(top)}"
    with _Timer(report):
        comps = sw_components(params, top)
        lw = {j: params.lowest_weight(Fraction(j)) for j in comps}
        cut = {j: top - lw[j] for j in comps}
        Sm = {j: ns_single_screen(params, "-", Fraction(j), cut[j]) for j in comps}
        E = {j: ns_single_screen(params, "+", Fraction(j), cut[j]) for j in comps}
        F = {j: ns_derivation(params, Fraction(j), cut[j]) for j in comps}
        kernels = {j: {g: _ns_kernel(Sm[j], g) for g in ns_grades(cut[j])} for j in comps}
        report.note(check="kernel dims", dims={str(j): [len(kernels[j][g]) for g in ns_grades(cut[j])]
                                               for j in comps})
        for j in comps:
            for name, table, step in (("E", E, 2), ("F", F, -2)):
                dh = params.h_eigenvalue(table[j].dst_weight) - params.h_eigenvalue(table[j].src_weight)
                report.check(dh == step, check=f"[h,{name}] = {step}{name}", component=j,
                             h_shift=render_scalar(dh))
                for g in ns_grades(cut[j]):
                    tg = g + table[j].shift
                    for co in kernels[j][g]:
                        img = table[j].apply_coords(g, co)
                        if tg < 0 or all(not x for x in img):
                            continue
                        jj = j + step // 2
                        if jj in comps and not all(not x for x in Sm[jj].apply_coords(tg, img)):
                            report.fail(check=f"{name} preserves ker S-", component=j,
                                        grade=render_scalar(g))

        def bracket(j, g, co):
            acc = None
            for first, second, s1 in ((F, E, -1), (E, F, 1)):
                x = first[j].apply_coords(g, co)
                g1 = g + first[j].shift
                m = j + s1
                if g1 < 0 or m not in comps or all(not c for c in x):
                    y = [0] * len(ns_basis(g))
                else:
                    y = second[m].apply_coords(g1, x)
                acc = y if acc is None else [a - b for a, b in zip(acc, y)]
            return acc

        trip = triplet_vectors_ns(params)
        wp = trip["W"]["+"]
        gp = wp.grades()[0]
        bp = bracket(1, gp, wp.coords(gp))
        c = L.solve_proportional(bp, [2 * x for x in wp.coords(gp)])
        if c is None or c == 0:
            report.fail(check="c_EF", value=None if c is None else "0")
            return report
        report.note(check="c_EF", value=render_scalar(c))
        checked = 0
        for j in comps:
            for g in ns_grades(cut[j]):
                for co in kernels[j][g]:
                    lhs = bracket(j, g, co)
                    rhs = [c * 2 * j * x for x in co]
                    checked += 1
                    if lhs != rhs:
                        report.fail(check="[E,F] = c h", component=j, grade=render_scalar(g))
        report.note(check="[E,F] = c h", vectors=checked)

        for fam in ("W", "What"):
            t = trip[fam]
            weights = {render_scalar(ns_l0_weight(params, v)) for v in t.values()}
            report.check(len(weights) == 1, check=f"{fam} weights", weights=sorted(weights))
            if fam == "W":
                report.check(all(is_ns_singular(v) for v in t.values()), check="W singular")
            for name, table, src, dst in (("E", E, "-", "0"), ("E", E, "0", "+"),
                                          ("F", F, "+", "0"), ("F", F, "0", "-")):
                img = table[_component_of(params, t[src].weight)].apply(t[src])
                ratio = _proportional(img, t[dst])
                report.check(ratio is not None and ratio != 0, check=f"{name} ladder {fam}",
                             src=src, dst=dst, ratio=None if ratio is None else render_scalar(ratio))
            for name, table, key in (("E", E, "+"), ("F", F, "-")):
                img = table[_component_of(params, t[key].weight)].apply(t[key])
                report.check(img.is_zero(), check=f"{name} {fam}{key} = 0")

        # G w^{(1)}_k ladder
        for k in (1, 0, -1):
            v = ladder_vector(params, 1, k)
            img = F[_component_of(params, v.weight)].apply(v)
            if k == -1:
                report.check(img.is_zero(), check="G w(1)_-1 = 0")
            else:
                ratio = _proportional(img, ladder_vector(params, 1, k - 1))
                report.check(ratio is not None and ratio != 0, check=f"G w(1)_{k} ~ w(1)_{k - 1}",
                             ratio=None if ratio is None else render_scalar(ratio))
    return report



def sw_glimit(params: NSParams, cutoff, k_range=(-1, 0, 1)) -> VerifyReport:
    """lim_F eps^{-1} N^ns = G^ns_- on ker S_-, N^ns >= 1 and S~^{[2m]} o e >= 0."""
    report = VerifyReport("sw.glimit", params.describe(), render_scalar(Fraction(cutoff)))
    report.scope = f"F^ns_(2k+1,1), k in {list(k_range)}, grades <= {render_scalar(Fraction(cutoff))}"
    with _Timer(report):
        cutoff = Fraction(cutoff)
        r = 2 * params.m
        for k in k_range:
            wt = params.beta(2 * k + 2, 2 * params.m, deformed=True)
            St = ns_screening_map(params.beta_pm("-", True), wt, r, params.kappa, cutoff,
                                  f"S~-[{r}]", src_label=eval_at_zero(wt))
            val = St.min_valuation() + St.ledger.sigma
            report.check(val >= 0, check="deformed multi-screening >= 0", k=k,
                         valuation=_int_or_inf(val), sigma=St.ledger.sigma)
            N = ns_compose_N(params, k, cutoff)
            val = N.min_valuation() + N.ledger.sigma
            report.check(val >= 1, check="N >= 1", k=k, valuation=_int_or_inf(val),
                         sigma=N.ledger.sigma)
            Gl = ns_G_limit(params, k, cutoff)
            w = params.beta(2 * k + 1, 1)
            Gd = ns_derivation(params, w, cutoff)
            Sm = ns_single_screen(params, "-", w, cutoff)
            vectors = nonzero = 0
            for g in ns_grades(cutoff):
                for co in _ns_kernel(Sm, g):
                    a, b = Gl.apply_coords(g, co), Gd.apply_coords(g, co)
                    vectors += 1
                    nonzero += any(b)
                    if a != b:
                        report.fail(check="G_limit = G_direct", k=k, grade=render_scalar(g))
            report.note(check="G_limit = G_direct", k=k, vectors=vectors, nonzero=nonzero)
    return report


def _int_or_inf(v):
    return "inf" if v == float("inf") else int(v)


def sw_relations(seed: int = 0, draws: int = 5, max_mode: int = 3, max_grade=6) -> VerifyReport:
    """[L_m, L_n], [L_m, G_r] and {G_r, G_s} on random NS vectors, random rho, kappa = 1."""
    import random
    rng = random.Random(seed)
    max_grade = Fraction(max_grade)
    report = VerifyReport("sw.relations", {"seed": seed, "draws": draws}, render_scalar(max_grade))
    report.scope = f"|m|, |r| <= {max_mode}, one random vector per draw, grades <= {render_scalar(max_grade)}"
    ints = range(-max_mode, max_mode + 1)
    halves = [Fraction(2 * k + 1, 2) for k in range(-max_mode, max_mode) if abs(2 * k + 1) <= 2 * max_mode]
    with _Timer(report):
        for _ in range(draws):
            rho = Fraction(rng.randint(-21, 21), rng.randint(1, 7))
            ctx = FockContext(rho, 1)
            c = ns_central_charge(ctx)
            weight = Fraction(rng.randint(-21, 21), rng.randint(1, 7))
            g = Fraction(rng.randint(0, int(2 * max_grade)), 2)
            v = NSVector(weight, {k: Fraction(rng.randint(-6, 6), rng.randint(1, 5))
                                  for k in ns_basis(g)}, ctx)

            def A(kind, n, x):
                return apply_ns_mode(kind, n, x)

            bad = 0
            for m, n in itertools.product(ints, ints):
                lhs = A("L", m, A("L", n, v)) - A("L", n, A("L", m, v))
                rhs = A("L", m + n, v).scale(m - n)
                if m + n == 0:
                    rhs = rhs + v.scale(c * (m ** 3 - m) / 12)
                if lhs != rhs:
                    bad += 1
                    report.fail(check="[L_m, L_n]", m=m, n=n, rho=str(rho))
            for m, r in itertools.product(ints, halves):
                lhs = A("L", m, A("G", r, v)) - A("G", r, A("L", m, v))
                if lhs != A("G", m + r, v).scale(Fraction(m, 2) - r):
                    bad += 1
                    report.fail(check="[L_m, G_r]", m=m, r=str(r), rho=str(rho))
            for r, s in itertools.product(halves, halves):
                lhs = A("G", r, A("G", s, v)) + A("G", s, A("G", r, v))
                rhs = A("L", int(r + s), v).scale(2)
                if r + s == 0:
                    rhs = rhs + v.scale(c * (r * r - Fraction(1, 4)) / 3)
                if lhs != rhs:
                    bad += 1
                    report.fail(check="{G_r, G_s}", r=str(r), s=str(s), rho=str(rho))
            report.note(check="draw", rho=str(rho), weight=str(weight), grade=str(g),
                        central_charge=str(c), failures=bad)
    return report


__all__ = [
    "NSVector", "NSParams", "fermion_states", "ns_basis", "ns_index", "ns_grades", "fermion_mode",
    "apply_fermion", "apply_ns_mode", "ns_central_charge", "ns_mode_map", "ns_screening_map",
    "ns_screening_shift", "ns_selberg_params", "ns_single_screen", "ns_multi_screen", "ns_qhat",
    "ns_derivation", "ns_compose_N", "ns_G_limit", "fermion_polynomial", "triplet_vectors_ns",
    "ladder_vector", "is_ns_singular", "ns_l0_weight", "sw_components", "sw_verify", "sw_nilpotent",
    "sw_commute", "sw_sl2",
    "sw_glimit", "sw_relations",
]
