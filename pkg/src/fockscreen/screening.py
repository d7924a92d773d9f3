"""Screening operators as grade-blocked maps.

Everything is computed in rescaled units: for the pair (p_+, p_-) put
d = 2p_-/p_+, u = sqrt(d) and a = u b.  Then b has level kappa = 1/d, the
screening charges become alpha_+ = 1 and alpha_- = -2/d, and every matrix
entry of a screening operator is rational (vertex operators do not change
under the rescaling).  Fields that involve phi_0 pick up one factor u,
carried as the GradedMap scale.

The eps-deformation alpha_+ -> alpha_+ + eps becomes 1 + delta with
delta = eps/u; valuations in delta and eps coincide.

A multi-screening Q^[r] on F_gamma has Selberg parameters
(beta gamma/kappa including the integer part, beta^2/kappa, beta^2/2kappa).
It is stored divided by S_{r-1}[1] at the reference parameters, where alpha
is moved into [0, 1); modules whose alpha differ by integers then share one
overall scalar.  The eps-valuation of the dropped factor is kept in a
NormalizationLedger.  When the ratio to the reference is singular the
module's own S_{r-1}[1] is used instead and the ledger records it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property

from . import _linalg as L
from .exactnum import (PoleAtZero, QuadField, RatFunc, eval_at_zero, integer_value,
                       render_scalar, valuation)
from .fock import FockContext, FockVector, GradedMap, WeightMismatch
from .symfunc import (InadmissibleParams, SelbergParams, SingularNormalization, _dominant, _moment_n1,
                      monomial_moment, partition_index, partitions, selberg_closed, z_lambda)
from .vertex import (_merge, _submultisets, apply_vertex_coeff, qhat_block,
                     residue_map)


class NonLatticeDomain(ValueError):
    pass


# ---------------------------------------------------------------------------
# lattice data

def _sqrt_of(d: Fraction):
    d = Fraction(d)
    n = d.numerator * d.denominator
    r = math.isqrt(n)
    if r * r == n:
        return Fraction(r, d.denominator)
    return QuadField(n)(0, Fraction(1, d.denominator))


@dataclass(frozen=True)
class Lattice:
    p_plus: int
    p_minus: int

    def __post_init__(self):
        if self.p_plus < 1 or self.p_minus < 2 or math.gcd(self.p_plus, self.p_minus) != 1:
            raise ValueError("need coprime p_+ >= 1, p_- >= 2")

    @cached_property
    def d(self) -> Fraction:
        return Fraction(2 * self.p_minus, self.p_plus)

    @cached_property
    def kappa(self) -> Fraction:
        return 1 / self.d

    @cached_property
    def u(self):
        """sqrt(d): standard units are a = u b, alpha = u * (rescaled alpha)."""
        return _sqrt_of(self.d)

    @cached_property
    def delta(self) -> RatFunc:
        return RatFunc.gen(var="delta")

    def alpha_pm(self, sign: str, deformed: bool = False):
        if not deformed:
            return Fraction(1) if sign == "+" else -2 / self.d
        one_d = 1 + self.delta
        return one_d if sign == "+" else RatFunc(-2 / self.d, [1, 1], var="delta")

    def rho(self, deformed: bool = False):
        return self.alpha_pm("+", deformed) + self.alpha_pm("-", deformed)

    def alpha(self, r, s, n: int = 0, deformed: bool = False):
        """Weight of F_{r,s;n} = F_{r - n p_+, s} in rescaled units."""
        r = r - n * self.p_plus
        return (Fraction(1 - r, 2) * self.alpha_pm("+", deformed)
                + Fraction(1 - s, 2) * self.alpha_pm("-", deformed))

    def ctx(self, deformed: bool = False) -> FockContext:
        return FockContext(self.rho(deformed), self.kappa)

    @property
    def central_charge(self):
        return self.ctx().central_charge

    def lowest_weight(self, r, s, n=0):
        return self.ctx().lowest_weight(self.alpha(r, s, n))

    def h_eigenvalue(self, weight):
        """Eigenvalue of h = -2a_0/(p_- alpha_-) on F_weight."""
        return 2 * weight / self.p_plus

    def key(self):
        return (self.p_plus, self.p_minus)


# ---------------------------------------------------------------------------
# ledgers and specs

@dataclass(frozen=True)
class NormalizationLedger:
    sigma: int = 0
    gamma_products: tuple = ()
    per_module: tuple = ()   # labels of factors normalized at their own alpha

    def combine(self, other: "NormalizationLedger") -> "NormalizationLedger":
        return NormalizationLedger(self.sigma + other.sigma, self.gamma_products + other.gamma_products,
                                   self.per_module + other.per_module)

    def describe(self) -> dict:
        return {"sigma": self.sigma, "gamma_products": [str(g) for g in self.gamma_products],
                "fingerprints": [g.fingerprint() for g in self.gamma_products],
                "per_module": list(self.per_module)}


@dataclass(frozen=True)
class ScreeningSpec:
    lattice: Lattice
    sign: str
    r: int = 1
    deformed: bool = False
    source: tuple = (1, 1, 0)
    cutoff: int = 6

    def __post_init__(self):
        if self.sign not in "+-" or len(self.sign) != 1:
            raise ValueError("sign must be '+' or '-'")
        if self.r < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def weight(self):
        return self.lattice.alpha(*self.source)

    def with_(self, **kw) -> "ScreeningSpec":
        return replace(self, **kw)


# ---------------------------------------------------------------------------
# core construction

class _Integrals:
    """<prod_{s in S}(1 + p_{-s}(y)) prod_{m in nu}(1 + p_m(y))> for one param set."""

    def __init__(self, params: SelbergParams):
        self.params = params
        self.n = params.n
        self.cache: dict = {}
        self.w_cache: dict = {}
        self.moments: dict = {}

    def moment1(self, k):
        m = self.moments.get(k)
        if m is None:
            m = _moment_n1(k, self.params)
            self.moments[k] = m
        return m

    @staticmethod
    def _poly1(parts, sign):
        poly = {0: 1}
        for s in parts:
            new = dict(poly)
            for e, c in poly.items():
                new[e + sign * s] = new.get(e + sign * s, 0) + c
            poly = new
        return poly

    def _w(self, nu, a):
        key = (nu, a)
        hit = self.w_cache.get(key)
        if hit is None:
            B = self._poly1(nu, 1)
            hit = sum((c * self.moment1(b - a) for b, c in B.items()), 0)
            self.w_cache[key] = hit
        return hit

    def _polyn(self, removed, nu):
        n = self.n
        poly = {(0,) * n: 1}
        for s, sign in [(s, -1) for s in removed] + [(m, 1) for m in nu]:
            new = dict(poly)
            for e, c in poly.items():
                for i in range(n):
                    f = list(e)
                    f[i] += sign * s
                    f = tuple(f)
                    new[f] = new.get(f, 0) + c
            poly = new
        return poly

    def value(self, removed: tuple, nu: tuple):
        key = (removed, nu)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if self.n == 1:
            A = self._poly1(removed, 1)  # exponents a of y^{-a}
            val = sum((c * self._w(nu, a) for a, c in A.items()), 0)
        else:
            folded: dict = {}
            for e, c in self._polyn(removed, nu).items():
                k = _dominant(e)
                folded[k] = folded.get(k, 0) + c
            val = 0
            for k, c in folded.items():
                if c:
                    val = val + c * monomial_moment(k, self.params)
        self.cache[key] = val
        return val


def screening_params(beta, weight, r, kappa) -> SelbergParams | None:
    if r < 2:
        return None
    b2 = beta * beta / kappa
    return SelbergParams(r - 1, beta * weight / kappa, b2, b2 / 2)


def reference_params(params: SelbergParams) -> SelbergParams:
    """The same parameters with alpha moved into [0, 1) (at eps = 0)."""
    k = math.floor(eval_at_zero(params.alpha))
    return SelbergParams(params.n, params.alpha - k, params.beta, params.gamma)


def cycle_normalization(params: SelbergParams):
    """S_n[1] at params over S_n[1] at the reference parameters.

    Multi-screenings are stored as S_n[f]/S_n[1]; multiplying by this ratio
    gives all Fock modules of one family (alpha differing by integers) a
    common overall scalar S_n[1](reference).
    """
    ref = reference_params(params)
    if ref.alpha == params.alpha:
        return 1
    try:
        value = selberg_closed(params).ratio(selberg_closed(ref))
    except ZeroDivisionError as exc:
        raise SingularNormalization(f"normalization ratio has a pole at alpha = "
                                    f"{render_scalar(params.alpha)}") from exc
    if not value:
        raise SingularNormalization(f"normalization ratio vanishes at alpha = {render_scalar(params.alpha)}")
    return value


def screening_shift(beta, weight, r, kappa):
    """Grade shift of the z^{-1} coefficient of the r-fold screening."""
    off = r * beta * weight / kappa + Fraction(r * (r - 1), 2) * beta * beta / kappa
    k = integer_value(off)
    if k is None:
        raise NonLatticeDomain(f"z-exponent {render_scalar(off)} is not an integer")
    return -1 - k - (r - 1)


def _block(beta, kappa, r, g, t, integrals):
    src = partitions(g)
    tidx = partition_index(t)
    bk = beta / kappa
    entries: dict = {}
    for j, mu in enumerate(src):
        for kept, nrem, mult in _submultisets(mu):
            rest = t - sum(kept)
            if rest < 0:
                continue
            removed = list(mu)
            for p in kept:
                removed.remove(p)
            removed = tuple(removed)
            pre = mult * (-beta) ** nrem
            for nu in partitions(rest):
                val = integrals.value(removed, nu)
                if not val:
                    continue
                c = pre * bk ** len(nu) * Fraction(1, z_lambda(nu)) * val
                key = (tidx[_merge(kept, nu)], j)
                entries[key] = entries.get(key, 0) + c
    return L.from_dict(len(tidx), len(src), {k: v for k, v in entries.items() if v != 0})


def screening_map(beta, weight, r, kappa, cutoff, label="", src_label=None) -> GradedMap:
    """Zero mode of the r-fold screening of charge beta on F_weight.

    ``src_label`` overrides the stored source weight (used for the
    e^{alpha~ - alpha} shift built into deformed screenings).
    """
    shift = screening_shift(beta, weight, r, kappa)
    src_w = weight if src_label is None else src_label
    if r == 1:
        gm = residue_map(beta, weight, FockContext(0, kappa), cutoff, label=label)
        return GradedMap(src_w, weight + beta, cutoff, shift, gm.blocks, 1,
                         NormalizationLedger(), "boson", label)
    params = screening_params(beta, weight, r, kappa)
    if params.status(True) == "inadmissible":
        raise InadmissibleParams(f"{label}: " + "; ".join(params.violations(True)))
    try:
        factor = cycle_normalization(params)
        norm = selberg_closed(reference_params(params))
        per_module = ()
    except SingularNormalization:
        factor, norm, per_module = 1, selberg_closed(params), (label or "Q",)
    sigma = norm.valuation() if any(isinstance(x, RatFunc) for x, _ in norm.args()) else 0
    integrals = _Integrals(params)
    blocks = {}
    for g in range(cutoff + 1):
        t = g + shift
        if t < 0:
            continue
        M = _block(beta, kappa, r, g, t, integrals)
        if factor != 1:
            M = L.scale(M, factor)
        if not L.is_zero(M):
            blocks[g] = M
    ledger = NormalizationLedger(sigma, (norm,), per_module)
    return GradedMap(src_w, weight + r * beta, cutoff, shift, blocks, 1, ledger, "boson", label)


def _check_domain(spec: ScreeningSpec):
    r_label, s_label, n_label = spec.source
    lat = spec.lattice
    # Q_+^[r] lives on F_{r,k}, Q_-^[s] on F_{k,s}; n shifts r by n p_+
    beta = lat.alpha_pm(spec.sign)
    off = beta * spec.weight / lat.kappa
    if spec.r == 1 and integer_value(off) is None:
        raise NonLatticeDomain(f"charge {spec.sign} on F{spec.source}: exponent {render_scalar(off)}")


def _label(spec: ScreeningSpec, deformed=False):
    t = "~" if deformed else ""
    return f"Q{t}{spec.sign}[{spec.r}]" if spec.r > 1 else f"Q{t}{spec.sign}"


def single_screen(spec: ScreeningSpec) -> GradedMap:
    if spec.r != 1:
        raise ValueError("single_screen needs r = 1")
    _check_domain(spec)
    lat = spec.lattice
    return screening_map(lat.alpha_pm(spec.sign), spec.weight, 1, lat.kappa, spec.cutoff,
                         _label(spec))


def multi_screen(spec: ScreeningSpec) -> GradedMap:
    lat = spec.lattice
    if spec.r == 1:
        return single_screen(spec)
    return screening_map(lat.alpha_pm(spec.sign), spec.weight, spec.r, lat.kappa, spec.cutoff,
                         _label(spec))


def deformed_screen(spec: ScreeningSpec, k_shift=None) -> GradedMap:
    """Q~^[r] o e^{alpha~ - alpha} on F (rational source label, deformed target).

    ``k_shift`` optionally replaces the deformed source weight (a RatFunc
    with the same value at delta = 0), as needed inside composite operators.
    """
    lat = spec.lattice
    r_label, s_label, n_label = spec.source
    w = spec.weight
    wt = lat.alpha(r_label, s_label, n_label, deformed=True) if k_shift is None else k_shift
    if eval_at_zero(wt) != w:
        raise WeightMismatch("deformed weight does not reduce to the source weight")
    return screening_map(lat.alpha_pm(spec.sign, True), wt, spec.r, lat.kappa, spec.cutoff,
                         _label(spec, True), src_label=w)


def shift_map(src_weight, dst_weight, cutoff, label="e") -> GradedMap:
    """The weight relabelling e^{dst - src}: identity blocks."""
    blocks = {g: L.from_dict(len(partitions(g)), len(partitions(g)),
                             {(i, i): 1 for i in range(len(partitions(g)))}) for g in range(cutoff + 1)}
    return GradedMap(src_weight, dst_weight, cutoff, 0, blocks, 1, NormalizationLedger(), "boson", label)


def relabel(gm: GradedMap, src=None, dst=None) -> GradedMap:
    return GradedMap(gm.src_weight if src is None else src, gm.dst_weight if dst is None else dst,
                     gm.cutoff, gm.shift, gm.blocks, gm.scale, gm.ledger, gm.kind, gm.label)


def _needed_cutoff(shift, cutoff):
    return max(cutoff + shift, 0)


# ---------------------------------------------------------------------------
# composites and limits

def deformed_chain(lattice: Lattice, src: tuple, steps, cutoff: int, label="") -> GradedMap:
    """Q~ o e o ... o Q~ o e^{alpha~ - alpha} starting on F_src (rational label).

    Each step (sign, mult, (r, s)) first relabels to alpha~_{r,s} (the shift
    element e^{alpha~_{r,s} - current}, which must vanish at delta = 0) and
    then applies Q~^{[mult]}_sign.
    """
    cur_label = lattice.alpha(*src)
    total = None
    cut = cutoff
    for sign, mult, rs in steps:
        w = lattice.alpha(*rs, deformed=True)
        if eval_at_zero(w) != eval_at_zero(cur_label):
            raise WeightMismatch(f"shift element to alpha~{rs} is not O(eps)")
        op = screening_map(lattice.alpha_pm(sign, True), w, mult, lattice.kappa, cut,
                           f"Q~{sign}[{mult}]" if mult > 1 else f"Q~{sign}", src_label=cur_label)
        total = op if total is None else op.compose(total)
        cut = _needed_cutoff(op.shift, cut)
        cur_label = op.dst_weight
    total.label = label or total.label
    return total


def compose_N(lattice: Lattice, r_or_s: int, sign: str, k: int, cutoff: int) -> GradedMap:
    """N^{[r^v, r]}_{+,k}(eps) on F_{r,k} (or N^{[s^v,s]}_{-,k} on F_{k,s}).

    The final shift e^{alpha - alpha~} is included, so the map lands in the
    undeformed label of F_{r,k;2} (resp. F_{k,s;-2}).
    """
    lat = lattice
    p = lat.p_plus if sign == "+" else lat.p_minus
    r = r_or_s
    if not (p > r >= 1):
        raise ValueError(f"need {p} > r >= 1 (got r = {r})")
    rv = p - r
    if sign == "+":
        src, mid, final = (r, k), (rv, k + lat.p_minus), (r, k + 2 * lat.p_minus)
    else:
        src, mid, final = (k, r), (k + lat.p_plus, rv), (k + 2 * lat.p_plus, r)
    N = deformed_chain(lat, src, [(sign, r, src), (sign, rv, mid)], cutoff,
                       f"N{sign}[{rv},{r}]_k={k}")
    if eval_at_zero(N.dst_weight) != lat.alpha(*final):
        raise WeightMismatch("internal: N target")
    return relabel(N, dst=lat.alpha(*final))


def _corrected_limit(gm: GradedMap, power: int, scale=1, label="") -> GradedMap:
    """lim_F of delta^{-power} * gm, with the ledger sigma folded in."""
    sigma = gm.ledger.sigma if gm.ledger else 0
    net = power - sigma
    blocks = {}
    for g, B in gm.blocks.items():
        rows = L.to_rows(B)
        new = []
        for row in rows:
            out = []
            for x in row:
                if not x:
                    out.append(0)
                    continue
                v = valuation(x)
                if v < net:
                    raise PoleAtZero(f"{label}: entry of valuation {v} + sigma {sigma} < {power}")
                out.append(eval_at_zero(x / RatFunc.gen(var="delta") ** net) if net else eval_at_zero(x))
            new.append(out)
        M = L.from_rows(new, B.nrows(), B.ncols())
        if not L.is_zero(M):
            blocks[g] = M
    src = eval_at_zero(gm.src_weight)
    dst = eval_at_zero(gm.dst_weight)
    out = GradedMap(src, dst, gm.cutoff, gm.shift, blocks, 1, NormalizationLedger(), "boson", label)
    return out.with_scale(scale) if scale != 1 else out


def G_limit(lattice: Lattice, r_or_s: int, sign: str, k: int, cutoff: int) -> GradedMap:
    """lim_F (1/eps) N with eps = u delta, ledger-corrected."""
    N = compose_N(lattice, r_or_s, sign, k, cutoff)
    return _corrected_limit(N, 1, scale=1 / lattice.u, label=f"G{sign}_k={k}")


def qhat(lattice: Lattice, sign: str, weight, cutoff: int) -> GradedMap:
    """∮ :Q_sign(z) phi_0(z): with phi_0 in standard units."""
    return qhat_block(lattice.alpha_pm(sign), weight, cutoff, FockContext(0, lattice.kappa),
                      unit_scale=lattice.u)


def G_direct(sign: str, cutoff: int, params, source=(1, 1, 0)) -> GradedMap:
    """Q^{[p-1]} o ∮:Q phi_0:, times p_+/p_- for the minus sign.

    ``params`` is a Lattice (or anything with a ``lattice`` attribute);
    ``source`` names the Fock module F_{r,s;n}.
    """
    lat = getattr(params, "lattice", params)
    if sign == "+" and lat.p_plus < 2:
        raise ValueError("for p_+ = 1 only the minus derivation exists; E = Q_+")
    p = lat.p_plus if sign == "+" else lat.p_minus
    w = lat.alpha(*source)
    qh = qhat(lat, sign, w, cutoff)
    mid = qh.dst_weight
    if p == 2:
        second = screening_map(lat.alpha_pm(sign), mid, 1, lat.kappa,
                               _needed_cutoff(qh.shift, cutoff), f"Q{sign}")
    else:
        second = screening_map(lat.alpha_pm(sign), mid, p - 1, lat.kappa,
                               _needed_cutoff(qh.shift, cutoff), f"Q{sign}[{p - 1}]")
    G = second.compose(qh)
    if sign == "-":
        G = G * Fraction(lat.p_plus, lat.p_minus)
    G.label = f"G{sign}"
    return G


def am_operator(cutoff: int, params, source=(1, 1, 0)) -> GradedMap:
    """sum_{i>=1} (1/i) Q_+[-i] Q_+[i], Q_+[n] = coefficient of z^{-n-1}."""
    lat = getattr(params, "lattice", params)
    if lat.p_plus != 2:
        raise ValueError("the mode-sum operator is defined for p_+ = 2")
    beta = lat.alpha_pm("+")
    w = lat.alpha(*source)
    ctx = FockContext(0, lat.kappa)
    shift = screening_shift(beta, w, 1, lat.kappa) + screening_shift(beta, w + beta, 1, lat.kappa)
    blocks = {}
    for g in range(cutoff + 1):
        t = g + shift
        if t < 0:
            continue
        cols = []
        for lam in partitions(g):
            v = FockVector(w, {lam: 1}, ctx)
            acc = FockVector(w + 2 * beta, {}, ctx)
            for i in range(1, g + 1 + 1 + abs(integer_value(beta * w / lat.kappa)) + 1):
                x = apply_vertex_coeff(beta, v, -1 - i)
                if x.is_zero():
                    continue
                y = apply_vertex_coeff(beta, x, -1 + i)
                acc = acc + y.scale(Fraction(1, i))
            cols.append(acc.coords(t))
        rows = [list(r) for r in zip(*cols)] if cols else []
        M = L.from_rows(rows, len(partitions(t)), len(partitions(g)))
        if not L.is_zero(M):
            blocks[g] = M
    return GradedMap(w, w + 2 * beta, cutoff, shift, blocks, 1, NormalizationLedger(), "boson", "AM")


def sc_cruc_difference(lattice: Lattice, s: int, n: int, cutoff: int) -> GradedMap:
    """Deformation of Q^{[p_+-1]}_+ [Q_+, Q^{[s]}_-] on F_{1,s;-n}.

    Both chains start from F_{1+n p_+, s} = F_{1, s - n p_-} and end at
    alpha~_{1-p_+, -s-(n-1)p_-}; on ker Q_+ the difference vanishes to
    order eps^2.
    """
    lat = lattice
    p, q = lat.p_plus, lat.p_minus
    if p < 2:
        raise ValueError("needs p_+ >= 2")
    tail = [("+", p - 1, (p - 1, -(n - 1) * q - s))]
    one = deformed_chain(lat, (1 + n * p, s),
                         [("-", s, (1 + n * p, s)), ("+", 1, (1, -n * q - s))] + tail, cutoff, "D1")
    two = deformed_chain(lat, (1, s - n * q),
                         [("+", 1, (1, s - n * q)), ("-", s, (-1 + n * p, s))] + tail, cutoff, "D2")
    two = relabel(two, src=one.src_weight, dst=one.dst_weight)
    return one - two
