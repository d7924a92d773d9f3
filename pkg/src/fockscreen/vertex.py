"""Matrix elements of lattice vertex operators on Fock modules.

With [a_m, a_n] = kappa m delta_{m+n,0}, the vertex operator of charge beta is

    Y(beta, z) = e^{beta â} z^{beta a_0/kappa} E_-(z) E_+(z),
    E_+ : a_{-n} -> a_{-n} - beta z^{-n},
    E_- = sum_nu (beta/kappa)^{l(nu)} a_{-nu} z^{|nu|} / z_nu.

Hence the coefficient of a_{-lam} in Y a_{-mu}|gamma> is a sum over the
parts S of mu removed by E_+ and the parts nu created by E_-, with
(mu minus S) + nu = lam:

    binom(mu; S) (-beta)^{l(S)} (beta/kappa)^{l(nu)} / z_nu,

attached to z^{beta gamma/kappa + |lam| - |mu|}.  The insertion of the
oscillator part phi_0(z) = sum_{n != 0} (...) of the scalar field is kappa
times the beta-derivative of the oscillator exponentials, so it only
multiplies each term by kappa (l(S) + l(nu))/beta.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from . import _linalg as L
from .exactnum import integer_value, render_scalar
from .fock import FockContext, FockVector, GradedMap, WeightMismatch, apply_heisenberg
from .symfunc import (NotSymmetric, SelbergParams, SymLaurent, partition_index, partitions,
                      z_lambda)


class NonIntegerResidue(ValueError):
    pass


@dataclass
class LaurentBlock:
    """Coefficients of z^{offset + k} as maps from one source grade."""

    offset: object
    src_grade: int
    coeffs: dict = field(default_factory=dict)  # k -> matrix (p(g + k) x p(g))

    def at(self, k):
        return self.coeffs.get(k)


@lru_cache(maxsize=None)
def _submultisets(mu: tuple) -> tuple:
    """(kept, removed_len, multiplicity) for every sub-multiset kept of mu."""
    counts = {}
    for p in mu:
        counts[p] = counts.get(p, 0) + 1
    keys = sorted(counts, reverse=True)
    out = []
    for choice in itertools.product(*[range(counts[p] + 1) for p in keys]):
        kept = []
        mult = 1
        for p, c in zip(keys, choice):
            kept.extend([p] * c)
            mult *= comb(counts[p], c)
        out.append((tuple(kept), len(mu) - len(kept), mult))
    return tuple(out)


def _merge(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(a + b, reverse=True))


def _powers(x, n):
    out = [1]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def vertex_matrix(beta, kappa, src_grade: int, dst_grade: int, qhat: bool = False):
    """Matrix (p(dst) x p(src)) of the z-coefficient of Y(beta) (or :Y phi_0:).

    With qhat=True the phi_0 insertion weight kappa(l(S)+l(nu))/beta is
    applied (computed without dividing by beta).
    """
    src = partitions(src_grade)
    tidx = partition_index(dst_grade)
    maxlen = src_grade + dst_grade + 1
    mb = _powers(-beta, maxlen)
    bk = _powers(beta / Fraction(kappa) if isinstance(kappa, int) else beta / kappa, maxlen)
    entries: dict = {}
    for j, mu in enumerate(src):
        for kept, removed, mult in _submultisets(mu):
            rest = dst_grade - sum(kept)
            if rest < 0:
                continue
            for nu in partitions(rest):
                lam = _merge(kept, nu)
                if qhat:
                    tot = removed + len(nu)
                    if tot == 0:
                        continue
                    c = _qhat_weight(beta, kappa, removed, len(nu)) * Fraction(mult, z_lambda(nu))
                else:
                    c = mb[removed] * bk[len(nu)] * Fraction(mult, z_lambda(nu))
                key = (tidx[lam], j)
                entries[key] = entries.get(key, 0) + c
    return L.from_dict(len(tidx), len(src), {k: v for k, v in entries.items() if v != 0})


def _qhat_weight(beta, kappa, s, l):
    # (-beta)^s (beta/kappa)^l kappa (s + l)/beta
    sign = -1 if s % 2 else 1
    out = sign * (s + l) * kappa
    for _ in range(s + l - 1):
        out = out * beta
    for _ in range(l):
        out = out / kappa
    return out


def vertex_block(beta, src, dst_grades, ctx: FockContext, qhat: bool = False) -> LaurentBlock:
    """z-expansion of Y(|beta>, z) from one graded piece of F_gamma."""
    weight, g = src
    offset = beta * weight / ctx.kappa
    blk = LaurentBlock(offset, g)
    for h in dst_grades:
        if h < 0:
            continue
        M = vertex_matrix(beta, ctx.kappa, g, h, qhat)
        if not L.is_zero(M):
            blk.coeffs[h - g] = M
    return blk


def residue_target(beta, weight, grade, kappa):
    """Target grade of the z^{-1} coefficient, or None if it is never reached."""
    off = integer_value(beta * weight / kappa)
    if off is None:
        raise NonIntegerResidue(f"z-exponent offset {render_scalar(beta * weight / kappa)} is not an integer")
    t = grade - 1 - off
    return t if t >= 0 else None


def residue_map(beta, weight, ctx: FockContext, cutoff: int, qhat: bool = False,
                label: str = "", scale=1) -> GradedMap:
    """GradedMap of the zero mode of Y(beta) (or :Y phi_0:) on F_weight."""
    off = integer_value(beta * weight / ctx.kappa)
    if off is None:
        raise NonIntegerResidue(f"z-exponent offset {render_scalar(beta * weight / ctx.kappa)} is not an integer")
    shift = -1 - off
    blocks = {}
    for g in range(cutoff + 1):
        t = g + shift
        if t < 0:
            continue
        M = vertex_matrix(beta, ctx.kappa, g, t, qhat)
        if not L.is_zero(M):
            blocks[g] = M
    gm = GradedMap(weight, weight + beta, cutoff, shift, blocks, 1, None, "boson", label)
    return gm.with_scale(scale) if scale != 1 else gm


def qhat_block(charge, src_weight, cutoff, ctx: FockContext, unit_scale=1) -> GradedMap:
    """∮ :Y(|charge>, z) phi_0(z): dz/2πi as a GradedMap.

    ``unit_scale`` converts phi_0 from rescaled to standard units.
    """
    return residue_map(charge, src_weight, ctx, cutoff, qhat=True, label="Qhat",
                       scale=unit_scale)


def apply_vertex_coeff(beta, v: FockVector, k_total):
    """Coefficient of z^{k_total} in Y(beta, z) v (k_total absolute exponent)."""
    ctx = v.ctx
    off = beta * v.weight / ctx.kappa
    out = FockVector(v.weight + beta, {}, ctx)
    for g in v.grades():
        h = integer_value(k_total - off + g)
        if h is None or h < 0:
            continue
        coords = L.mat_vec(vertex_matrix(beta, ctx.kappa, g, h), v.coords(g))
        out = out + FockVector.from_coords(v.weight + beta, h, coords, ctx)
    return out


def _by_grade(v: FockVector) -> dict:
    out: dict = {}
    for lam, c in v.terms.items():
        out.setdefault(sum(lam), {})[lam] = c
    return {g: FockVector(v.weight, t, v.ctx) for g, t in out.items()}


def _annihilation_part(k, v: FockVector) -> FockVector:
    """sum_{m>=0} binom(-m-1, k-1) a_m v (the regular part of d^{k-1}a/(k-1)!)."""
    acc = FockVector(v.weight, {}, v.ctx)
    top = max(v.grades(), default=0)
    sign = -1 if (k - 1) % 2 else 1
    for m in range(top + 1):
        x = apply_heisenberg(m, v)
        if not x.is_zero():
            acc = acc + x.scale(sign * comb(m + k - 1, k - 1))
    return acc


def _creation_part(k, pieces: dict, top: int) -> dict:
    """sum_{j>=k} binom(j-1, k-1) a_{-j} on a {grade: vector} dict, grades <= top."""
    out: dict = {}
    for g, v in pieces.items():
        for j in range(k, top - g + 1):
            x = apply_heisenberg(-j, v).scale(comb(j - 1, k - 1))
            out[g + j] = out[g + j] + x if g + j in out else x
    return out


def state_field_mode(a: FockVector, n: int, b: FockVector) -> FockVector:
    """a_n b, the coefficient of w^{-n-1} in Y(a, w) b.

    For a = a_{-lam}|beta> the field is the normal-ordered product
    :prod_i d^{lam_i - 1}a(w)/(lam_i - 1)! Y(beta, w):, with the modes
    a_m, m >= 0, to the right.  Each output grade corresponds to a single
    power of w, so only the grade fixed by n is assembled.
    """
    ctx = b.ctx
    beta, gamma = a.weight, b.weight
    off = integer_value(beta * gamma / ctx.kappa)
    if off is None:
        raise NonIntegerResidue(f"Y(a, w)b has exponent offset {render_scalar(beta * gamma / ctx.kappa)}")
    out = FockVector(beta + gamma, {}, ctx)
    for lam, c in a.terms.items():
        for gb, bv in _by_grade(b).items():
            t = sum(lam) + gb - n - 1 - off
            if t < 0:
                continue
            for chosen in itertools.product((False, True), repeat=len(lam)):
                v = bv
                for k, ann in zip(lam, chosen):
                    if ann:
                        v = _annihilation_part(k, v)
                if v.is_zero():
                    continue
                pieces: dict = {}
                for h, vh in _by_grade(v).items():
                    for tp in range(t + 1):
                        coords = L.mat_vec(vertex_matrix(beta, ctx.kappa, h, tp), vh.coords(h))
                        x = FockVector.from_coords(beta + gamma, tp, coords, ctx)
                        pieces[tp] = pieces[tp] + x if tp in pieces else x
                for k, ann in zip(lam, chosen):
                    if not ann:
                        pieces = _creation_part(k, pieces, t)
                if t in pieces:
                    out = out + pieces[t].scale(c)
    return out


# ---------------------------------------------------------------------------
# multi-variable correlators

@dataclass(frozen=True)
class CorrelationPrefactor:
    charges: tuple
    base_weight: object
    kappa: object
    z_exponents: tuple      # exponent of z_i from z^{beta_i a_0/kappa}
    pair_exponents: dict    # (i, j), i < j -> exponent of (z_i - z_j)

    def substituted(self):
        """Under z_1 = z, z_{i+1} = z y_i: (z-exponent, SelbergParams).

        The z-exponent excludes the Jacobian z^{r-1} of dz_2...dz_r.  The
        Selberg alpha keeps the full beta*gamma/kappa, integer part included.
        Parameters only exist when all charges agree.
        """
        r = len(self.charges)
        total = sum(self.z_exponents, 0) + sum(self.pair_exponents.values(), 0)
        if r < 2 or len(set(map(render_scalar, self.charges))) != 1:
            return total, None
        beta = self.charges[0]
        b2 = beta * beta / self.kappa
        params = SelbergParams(r - 1, beta * self.base_weight / self.kappa, b2, b2 / 2)
        return total, params


def correlation_prefactor(charges, base_weight, kappa=1) -> CorrelationPrefactor:
    """Prefactor prod z_i^{e_i} prod_{i<j} (z_i - z_j)^{beta_i beta_j/kappa}.

    Operators are ordered Y(beta_1, z_1) ... Y(beta_r, z_r) acting on
    |base_weight>; z_i sees the charge of everything to its right.
    """
    charges = tuple(charges)
    r = len(charges)
    # z_i^{beta_i * (charges to its right)} combines with E_+E_- into (z_i - z_j)
    pairs = {(i, j): charges[i] * charges[j] / kappa for i in range(r) for j in range(i + 1, r)}
    z_exp = [charges[i] * base_weight / kappa for i in range(r)]
    return CorrelationPrefactor(charges, base_weight, kappa, tuple(z_exp), pairs)


def _laurent_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def normal_ordered_correlation(charges, dual: FockVector, v: FockVector):
    """<dual, :prod_i Ybar(charge_i, z_i): v> as a Laurent polynomial in z.

    Returns a SymLaurent when all charges agree (symmetry is checked on the
    fully expanded polynomial), otherwise a dict {exponent tuple: coeff}.
    """
    charges = tuple(charges)
    ctx = v.ctx
    r = len(charges)
    total = sum(charges, 0)
    if dual.weight + v.weight + total != ctx.rho:
        raise WeightMismatch("dual weight does not match the charged target")
    kappa = ctx.kappa
    dual_grades = dual.grades()
    result: dict = {}
    for mu, cmu in v.terms.items():
        for kept, _removed, mult in _submultisets(mu):
            removed_parts = list(mu)
            for p in kept:
                removed_parts.remove(p)
            # E_+ contributions: each removed part s gives -sum_i beta_i z_i^{-s}
            ann = {(0,) * r: mult}
            for s in removed_parts:
                fac = {}
                for i in range(r):
                    e = [0] * r
                    e[i] = -s
                    fac[tuple(e)] = -charges[i]
                ann = _laurent_mul(ann, fac)
            for gd in dual_grades:
                rest = gd - sum(kept)
                if rest < 0:
                    continue
                for nu in partitions(rest):
                    lam = _merge(kept, nu)
                    d = dual.terms.get(lam)
                    if not d:
                        continue
                    cre = {(0,) * r: Fraction(1, z_lambda(nu))}
                    for n in nu:
                        fac = {}
                        for i in range(r):
                            e = [0] * r
                            e[i] = n
                            fac[tuple(e)] = charges[i] / kappa
                        cre = _laurent_mul(cre, fac)
                    gram = d * (-kappa) ** len(lam) * z_lambda(lam) * cmu
                    for e, c in _laurent_mul(ann, cre).items():
                        result[e] = result.get(e, 0) + c * gram
    result = {e: c for e, c in result.items() if c != 0}
    if len(set(map(render_scalar, charges))) == 1:
        if not result:
            return SymLaurent(r)
        return SymLaurent.from_polynomial(r, result)
    return result


__all__ = [
    "LaurentBlock", "NonIntegerResidue", "NotSymmetric", "vertex_block", "vertex_matrix",
    "residue_map", "residue_target", "qhat_block", "apply_vertex_coeff", "state_field_mode",
    "correlation_prefactor", "normal_ordered_correlation", "CorrelationPrefactor",
]
