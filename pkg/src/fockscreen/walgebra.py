"""Triplet algebra W(p_+, p_-): weights, kernels, triplet vectors and the
verification campaigns for Felder complexes, the sl2 action and the
derivation property.

All vectors live in rescaled units (see ``screening``).  The sl2 generators
are E = Q_+ (p_+ = 1) or G_+, F = G_-, and h acts on F_{1,1;n} by n.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

from . import _linalg as L
from .exactnum import RatFunc, eval_at_zero, render_scalar, valuation
from .fock import (CutoffTooSmall, FockContext, FockVector, GradedMap, apply_heisenberg,
                   apply_virasoro)
from .screening import (G_direct, G_limit, Lattice, ScreeningSpec, am_operator, compose_N,
                        deformed_screen, multi_screen, sc_cruc_difference, screening_shift,
                        single_screen)
from .symfunc import InadmissibleParams, partitions
from .vertex import state_field_mode


class SingularityCheckFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class WParams:
    p_plus: int
    p_minus: int

    def __post_init__(self):
        if not (self.p_minus > self.p_plus >= 1) or math.gcd(self.p_plus, self.p_minus) != 1:
            raise ValueError(f"need coprime p_- > p_+ >= 1, got ({self.p_plus}, {self.p_minus})")

    @cached_property
    def lattice(self) -> Lattice:
        return Lattice(self.p_plus, self.p_minus)

    @property
    def alpha_plus(self):
        """sqrt(2 p_-/p_+) in standard units."""
        return self.lattice.u

    @property
    def alpha_minus(self):
        return -2 / self.lattice.u

    @property
    def alpha_zero(self):
        return self.alpha_plus + self.alpha_minus

    @property
    def central_charge(self) -> Fraction:
        p, q = self.p_plus, self.p_minus
        return 1 - Fraction(6 * (p - q) ** 2, p * q)

    def h(self, r, s, n=0) -> Fraction:
        p, q = self.p_plus, self.p_minus
        r = r - n * p
        return (Fraction((r * r - 1) * q, 4 * p) - Fraction(r * s - 1, 2)
                + Fraction((s * s - 1) * p, 4 * q))

    def alpha(self, r, s, n=0):
        """alpha_{r,s;n} in standard units."""
        return self.lattice.u * self.lattice.alpha(r, s, n)

    def r_dual(self, r):
        return self.p_plus - r

    def s_dual(self, s):
        return self.p_minus - s

    def describe(self) -> dict:
        return {"p_plus": self.p_plus, "p_minus": self.p_minus}

    def label_of(self, weight) -> int:
        """n with F_weight = F_{1,1;n} (rescaled weight n p_+/2)."""
        n = 2 * weight / self.p_plus
        if Fraction(n).denominator != 1:
            raise ValueError(f"weight {render_scalar(weight)} is not on the F_(1,1;n) line")
        return int(n)


def window_top(params: WParams) -> Fraction:
    """Highest L_0-weight of the sl2 verification window."""
    return params.h(4 * params.p_plus - 1, 1) + 2


def ladder_weight(params: WParams, n: int, i: int):
    """(rescaled weight, h-eigenvalue) of the lowest-weight vector w^{(n)}_i."""
    lat = params.lattice
    p = params.p_plus
    if p >= 2:
        src, mult = lat.alpha(p - 1, 1, -2 * n - 1), (n + i + 1) * p - 1
    else:
        src, mult = lat.alpha(p, 1, -2 * n), n + i
    w = src + mult * lat.alpha_pm("+")
    return w, lat.h_eigenvalue(w)


def lowest_weight_of_ladder(params: WParams, n: int) -> Fraction:
    """Lambda_n, the L_0-weight of the w^{(n)}_i."""
    p = params.p_plus
    return params.h(p - 1, 1, -2 * n - 1) if p >= 2 else params.h(p, 1, -2 * n)


# ---------------------------------------------------------------------------
# reports

@dataclass
class KernelBasis:
    grade: int
    vectors: list

    @property
    def dim(self) -> int:
        return len(self.vectors)


@dataclass
class VerifyReport:
    claim_id: str
    params: dict
    cutoff: object
    status: str = "pass"
    witnesses: list = field(default_factory=list)
    duration_ms: int = 0
    cache_hits: int = 0
    scope: str = ""

    def fail(self, **witness):
        self.status = "fail"
        self.witnesses.append({"ok": False, **witness})

    def note(self, **witness):
        self.witnesses.append({"ok": True, **witness})

    def check(self, ok: bool, **witness):
        if ok:
            self.note(**witness)
        else:
            self.fail(**witness)
        return ok

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"claim_id": self.claim_id, "params": self.params, "cutoff": self.cutoff,
                "status": self.status, "witnesses": self.witnesses,
                "duration_ms": self.duration_ms, "cache_hits": self.cache_hits,
                "scope": self.scope}


class _Timer:
    def __init__(self, report: VerifyReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        self.hits0 = _cache_hits()
        return self.report

    def __exit__(self, exc_type, exc, tb):
        self.report.duration_ms = int(1000 * (time.perf_counter() - self.t0))
        self.report.cache_hits = _cache_hits() - self.hits0
        if exc is not None and not isinstance(exc, (KeyboardInterrupt, SystemExit)):
            self.report.fail(error=f"{type(exc).__name__}: {exc}")
            return True
        return False


# ---------------------------------------------------------------------------
# cached operators

@lru_cache(maxsize=None)
def screen(lat: Lattice, sign: str, mult: int, label: tuple, cutoff: int) -> GradedMap:
    """Q^{[mult]}_sign on F_label (label = (r, s, n)) to the given cutoff."""
    spec = ScreeningSpec(lat, sign, mult, False, label, cutoff)
    return single_screen(spec) if mult == 1 else multi_screen(spec)


@lru_cache(maxsize=None)
def derivation(lat: Lattice, sign: str, n: int, cutoff: int) -> GradedMap:
    """G_sign on F_{1,1;n}."""
    return G_direct(sign, cutoff, lat, (1, 1, n))


def raising(lat: Lattice, n: int, cutoff: int) -> GradedMap:
    """E on F_{1,1;n}: Q_+ for p_+ = 1, G_+ otherwise."""
    if lat.p_plus == 1:
        return screen(lat, "+", 1, (1, 1, n), cutoff)
    return derivation(lat, "+", n, cutoff)


def lowering(lat: Lattice, n: int, cutoff: int) -> GradedMap:
    return derivation(lat, "-", n, cutoff)


def _cache_hits() -> int:
    return sum(f.cache_info().hits for f in (screen, derivation))


def clear_caches():
    screen.cache_clear()
    derivation.cache_clear()


# ---------------------------------------------------------------------------
# kernels

def kernel_at_grade(component, maps, grade: int, ctx=None) -> KernelBasis:
    """Common kernel of the given GradedMaps on one grade of F_component."""
    for m in maps:
        if m.src_weight != component:
            raise ValueError(f"{m.label} does not act on F_{render_scalar(component)}")
        if grade > m.cutoff:
            raise CutoffTooSmall(f"{m.label} computed to grade {m.cutoff}, grade {grade} requested")
    dim = len(partitions(grade))
    blocks = [m.block(grade) for m in maps]
    blocks = [B for B in blocks if B is not None]
    if blocks:
        basis = L.nullspace(L.vstack(blocks, dim))
    else:
        basis = [[Fraction(int(i == j)) for i in range(dim)] for j in range(dim)]
    vecs = [FockVector.from_coords(component, grade, v, ctx) for v in basis]
    return KernelBasis(grade, vecs)


def kernel_maps(params: WParams, n: int, cutoff: int) -> list:
    """The screenings cutting out K_{1,1} on F_{1,1;n}."""
    lat = params.lattice
    maps = [screen(lat, "-", 1, (1, 1, n), cutoff)]
    if params.p_plus >= 2:
        maps.append(screen(lat, "+", 1, (1, 1, n), cutoff))
    return maps


def kernel_component(params: WParams, n: int, max_grade: int) -> dict:
    """{grade: KernelBasis} of K_{1,1} on F_{1,1;n} up to max_grade."""
    lat = params.lattice
    maps = kernel_maps(params, n, max_grade)
    w = lat.alpha(1, 1, n)
    return {g: kernel_at_grade(w, maps, g, lat.ctx()) for g in range(max_grade + 1)}


def kernel_at_weight(params: WParams, weight) -> dict:
    """{n: KernelBasis} of K_{1,1} at a fixed L_0-weight, over all components."""
    lat = params.lattice
    out = {}
    for n in _components(params, weight):
        g = int(weight - lat.lowest_weight(1, 1, n))
        out[n] = kernel_component(params, n, g)[g]
    return out


def _components(params: WParams, top) -> list:
    """Even n with lowest weight of F_{1,1;n} at most top."""
    lat = params.lattice
    out = []
    for n in itertools.count(0, 2):
        hit = [m for m in {n, -n} if lat.lowest_weight(1, 1, m) <= top]
        if not hit and n > 2:
            break
        out.extend(hit)
    return sorted(out)


# ---------------------------------------------------------------------------
# singular vectors and triplets

def is_singular(v: FockVector) -> bool:
    return apply_virasoro(1, v).is_zero() and apply_virasoro(2, v).is_zero()


def l0_weight(v: FockVector):
    """L_0-weight of a homogeneous vector (None if inhomogeneous or zero)."""
    gs = v.grades()
    if len(gs) != 1:
        return None
    return v.ctx.lowest_weight(v.weight) + gs[0]


def _leading(v: FockVector) -> FockVector:
    """Leading delta-order of a deformed vector (projective limit)."""
    vals = [valuation(c) for c in v.terms.values() if c]
    if not vals:
        return v
    m = min(vals)
    d = RatFunc.gen(var="delta")
    scale = d ** (-m) if m < 0 else RatFunc.const(1, var="delta") / d ** m if m > 0 else 1
    terms = {lam: eval_at_zero(c * scale) for lam, c in v.terms.items()}
    return FockVector(eval_at_zero(v.weight), {k: c for k, c in terms.items() if c}, v.ctx)


def screened_vector(lat: Lattice, sign: str, mult: int, src: tuple, ledger: list | None = None):
    """Q^{[mult]}_sign |alpha_src>, at leading eps-order if the cycle is singular."""
    w = lat.alpha(*src)
    vac = FockVector.vacuum(w, lat.ctx())
    if mult == 0:
        return vac
    try:
        return screen(lat, sign, mult, src, 0).apply(vac)
    except InadmissibleParams as exc:
        # re-express the source so that the multiplicity is the first (second) label
        r, s = src[0] - src[2] * lat.p_plus, src[1]
        p = lat.p_plus if sign == "+" else lat.p_minus
        j = Fraction((mult - r) if sign == "+" else (mult - s), p)
        if j.denominator != 1:
            raise
        j = int(j)
        lab = (r + j * lat.p_plus, s + j * lat.p_minus)
        spec = ScreeningSpec(lat, sign, mult, True, src, 0)
        gm = deformed_screen(spec, k_shift=lat.alpha(*lab, deformed=True))
        if ledger is not None:
            ledger.append(f"Q{sign}[{mult}] on alpha{src}: singular cycle ({exc}); "
                          f"leading eps-order taken via alpha~{lab}")
        return _leading(gm.apply(vac))


def triplet_vectors(params: WParams, cutoff: int | None = None, ledger: list | None = None) -> dict:
    """{'+': W+, '0': W0, '-': W-}, each checked singular of weight h_{4p_+-1,1}."""
    lat = params.lattice
    p, q = params.p_plus, params.p_minus
    H = params.h(4 * p - 1, 1)
    recipes = {
        "+": ("-", q - 1, (1, q - 1, 3)),
        "0": ("+", 2 * p - 1, (p - 1, 1, -3)),
        "-": ("+", p - 1, (p - 1, 1, -3)) if p >= 2 else ("+", 0, (3, 1, 0)),
    }
    out = {}
    for key, (sign, mult, src) in recipes.items():
        dst = lat.alpha(*src) + mult * lat.alpha_pm(sign)
        need = H - lat.ctx().lowest_weight(dst)
        if cutoff is not None and need > cutoff:
            raise CutoffTooSmall(f"W{key} sits at grade {need} > cutoff {cutoff}")
        v = screened_vector(lat, sign, mult, src, ledger)
        if v.is_zero():
            raise SingularityCheckFailed(f"W{key} vanishes")
        if l0_weight(v) != H:
            raise SingularityCheckFailed(f"W{key} has L0-weight {l0_weight(v)}, expected {H}")
        if not is_singular(v):
            raise SingularityCheckFailed(f"W{key} is not annihilated by L1, L2")
        out[key] = v
    return out


# ---------------------------------------------------------------------------
# Virasoro characters (independent oracle)

def partition_counts(n: int) -> list:
    p = [1] + [0] * n
    for k in range(1, n + 1):
        for m in range(k, n + 1):
            p[m] += p[m - k]
    return p


def minimal_character(p_plus: int, p_minus: int, r: int, s: int, max_grade: int) -> list:
    """Level dimensions of the minimal-series L(h_{r,s}), levels 0..max_grade.

    Alternating sum over the affine Weyl orbit divided by the eta product,
    with h_{r,s} = ((r p_- - s p_+)^2 - (p_- - p_+)^2)/(4 p_+ p_-).
    """
    if not (1 <= r < p_plus and 1 <= s < p_minus):
        raise ValueError("(r, s) outside the Kac table")

    def h(a, b):
        return Fraction((a * p_minus - b * p_plus) ** 2 - (p_minus - p_plus) ** 2, 4 * p_plus * p_minus)

    h0 = h(r, s)
    num = [0] * (max_grade + 1)
    k_range = max_grade + 2
    for k in range(-k_range, k_range + 1):
        for a, sign in ((r + 2 * k * p_plus, 1), (-r + 2 * k * p_plus, -1)):
            e = h(a, s) - h0
            if e.denominator != 1:
                raise ArithmeticError("non-integral level in the character sum")
            if 0 <= e <= max_grade:
                num[int(e)] += sign
    p = partition_counts(max_grade)
    return [sum(num[i] * p[g - i] for i in range(g + 1)) for g in range(max_grade + 1)]


# ---------------------------------------------------------------------------
# Felder complexes

def _felder_maps(params: WParams, which: str, pos: tuple, cutoff: int):
    """(outgoing, incoming) screenings at position F_pos of the complex."""
    lat = params.lattice
    p, q = params.p_plus, params.p_minus
    a, b, n = pos
    if which == "+":
        mult, inc_mult, inc_src = a, p - a, (p - a, b, n - 1)
    else:
        mult, inc_mult, inc_src = b, q - b, (a, q - b, n + 1)
    out = screen(lat, which, mult, pos, cutoff)
    beta = lat.alpha_pm(which)
    inc_shift = screening_shift(beta, lat.alpha(*inc_src), inc_mult, lat.kappa)
    inc = screen(lat, which, inc_mult, inc_src, max(cutoff - inc_shift, 0))
    return out, inc


def verify_felder(params: WParams, which: str, r_or_s: int, n_range, cutoff: int,
                  other: int | None = None) -> VerifyReport:
    """Nilpotency, exactness and cohomology of a Felder complex, grades <= cutoff.

    ``which='+'`` uses Q^{[r]}_+, Q^{[r^v]}_+ on F_{r,s;n} (s = other, default 1);
    ``which='-'`` uses Q^{[s]}_-, Q^{[s^v]}_- on F_{r,s;n} (r = other, default
    p_+ when p_+ = 1 and 1 otherwise).
    """
    p, q = params.p_plus, params.p_minus
    if which == "+":
        r, s = r_or_s, (1 if other is None else other)
        if not (1 <= r < p):
            raise ValueError(f"need 1 <= r < p_+ = {p}")
        labels = {(r, s), (p - r, s)}
    else:
        s, r = r_or_s, (other if other is not None else (p if p == 1 else 1))
        if not (1 <= s < q):
            raise ValueError(f"need 1 <= s < p_- = {q}")
        labels = {(r, s), (r, q - s)}
    report = VerifyReport(f"felder{which}", {**params.describe(), "which": which, "r": r, "s": s,
                                            "n_range": list(n_range)}, cutoff)
    report.scope = f"grades 0..{cutoff} at every listed position"
    with _Timer(report):
        for (a, b), n in itertools.product(sorted(labels), n_range):
            pos = (a, b, n)
            out, inc = _felder_maps(params, which, pos, cutoff)
            bad = []
            for g, B in inc.blocks.items():
                mid = g + inc.shift
                A = out.blocks.get(mid) if 0 <= mid <= cutoff else None
                if A is not None and not L.is_zero(L.matmul(A, B)):
                    bad.append(g)
            report.check(not bad, check="nilpotent", position=list(pos), grades=bad)
            cohomology_here = n == 0 and 1 <= a < p and 1 <= b < q
            expected = minimal_character(p, q, a, b, cutoff) if cohomology_here else [0] * (cutoff + 1)
            dims = []
            for g in range(cutoff + 1):
                dim = len(partitions(g))
                B = out.block(g)
                ker = dim - (L.rank(B) if B is not None else 0)
                gi = g - inc.shift
                Bi = inc.block(gi) if 0 <= gi <= inc.cutoff else None
                im = L.rank(Bi) if Bi is not None else 0
                dims.append(ker - im)
                if ker - im != expected[g]:
                    report.fail(check="cohomology", position=list(pos), grade=g, ker=ker, im=im,
                                expected=expected[g])
            report.note(check="cohomology dims", position=list(pos), dims=dims,
                        character=expected if cohomology_here else "exact")
    return report


# ---------------------------------------------------------------------------
# sl2 action

def _apply(gm: GradedMap, g: int, coords):
    return gm.apply_coords(g, coords)


def _is_zero(xs) -> bool:
    return all(not x for x in xs)


def verify_sl2(params: WParams, cutoff=None) -> VerifyReport:
    """sl2 relations on the kernel window up to L_0-weight h_{4p_+-1,1} + 2."""
    lat = params.lattice
    top = window_top(params)
    if cutoff is not None and cutoff < top:
        raise CutoffTooSmall(f"sl2 window needs L0-weight {top}, cutoff {cutoff}")
    report = VerifyReport("sl2", params.describe(), str(top))
    report.scope = f"K_(1,1) at L0-weight <= {top} plus the triplet span"
    with _Timer(report):
        comps = _components(params, top)
        lw = {n: lat.lowest_weight(1, 1, n) for n in comps}
        cut = {n: int(top - lw[n]) for n in comps}
        E = {n: raising(lat, n, cut[n]) for n in comps}
        F = {n: lowering(lat, n, cut[n]) for n in comps}
        kernels = {n: kernel_component(params, n, cut[n]) for n in comps}
        report.note(check="kernel dims", dims={str(n): [kernels[n][g].dim for g in range(cut[n] + 1)]
                                               for n in comps})

        def in_kernel(n, g, coords):
            if n not in comps:
                return _is_zero(coords)
            return all(_is_zero(m.apply_coords(g, coords)) for m in kernel_maps(params, n, cut[n]))

        # h-bookkeeping and kernel preservation
        for n in comps:
            for name, table, step in (("E", E, 2), ("F", F, -2)):
                dh = lat.h_eigenvalue(table[n].dst_weight) - lat.h_eigenvalue(table[n].src_weight)
                report.check(dh == step, check=f"[h,{name}] = {step}{name}", component=n,
                             h_shift=str(dh))
                for g in range(cut[n] + 1):
                    for v in kernels[n][g].vectors:
                        tg = g + table[n].shift
                        img = _apply(table[n], g, v.coords(g))
                        if tg < 0 or _is_zero(img):
                            continue
                        if not in_kernel(n + step, tg, img):
                            report.fail(check=f"{name} preserves K", component=n, grade=g)

        # [E, F] = c h on the window
        def bracket(n, g, coords):
            acc = None
            for first, second, s1 in ((F, E, -2), (E, F, 2)):
                x = _apply(first[n], g, coords)
                g1 = g + first[n].shift
                m = n + s1
                if g1 < 0 or m not in comps or _is_zero(x):
                    y = [0] * len(partitions(g))
                else:
                    y = _apply(second[m], g1, x)
                if acc is None:
                    acc = y
                else:
                    acc = [a - b for a, b in zip(acc, y)]
            return acc

        trip = triplet_vectors(params, ledger=(ledger := []))
        for line in ledger:
            report.note(check="normalization", detail=line)
        wp = trip["+"]
        gp = wp.grades()[0]
        bp = bracket(params.label_of(wp.weight), gp, wp.coords(gp))
        c = L.solve_proportional(bp, [2 * x for x in wp.coords(gp)])
        if c is None or c == 0:
            report.fail(check="c_EF", value=None if c is None else "0")
            return report
        report.note(check="c_EF", value=render_scalar(c))
        checked = 0
        for n in comps:
            for g in range(cut[n] + 1):
                for v in kernels[n][g].vectors:
                    co = v.coords(g)
                    lhs = bracket(n, g, co)
                    rhs = [c * n * x for x in co]
                    checked += 1
                    if lhs != rhs:
                        report.fail(check="[E,F] = c h", component=n, grade=g,
                                    vector=v.render())
        report.note(check="[E,F] = c h", vectors=checked)

        # ladder on the triplet
        def move(table, v):
            return table[params.label_of(v.weight)].apply(v)

        ladder = [("E", E, trip["-"], trip["0"]), ("E", E, trip["0"], trip["+"]),
                  ("F", F, trip["+"], trip["0"]), ("F", F, trip["0"], trip["-"])]
        for name, table, src, dst in ladder:
            img = move(table, src)
            ratio = None
            if img.weight == dst.weight:
                g = dst.grades()[0]
                ratio = L.solve_proportional(img.coords(g), dst.coords(g)) if img.grades() == dst.grades() else None
            ok = ratio is not None and ratio != 0 and is_singular(img)
            report.check(ok, check=f"{name} ladder", src=_tname(trip, src), dst=_tname(trip, dst),
                         ratio=None if ratio is None else render_scalar(ratio))
        for name, table, key in (("E", E, "+"), ("F", F, "-")):
            img = move(table, trip[key])
            report.check(img.is_zero(), check=f"{name} W{key} = 0")
    return report


def _tname(trip, v):
    for k, w in trip.items():
        if w is v:
            return f"W{k}"
    return "?"


# ---------------------------------------------------------------------------
# derivation property

def conformal_vector(params: WParams) -> FockVector:
    lat = params.lattice
    return apply_virasoro(-2, FockVector.vacuum(0, lat.ctx()))


def verify_leibniz(params: WParams, a: FockVector, b: FockVector, mode_window=None,
                   cutoff: int = 6, sign: str = "-", label: str = "") -> VerifyReport:
    """G(a_n b) = (G a)_n b + a_n (G b) for all grade-compatible n."""
    lat = params.lattice
    report = VerifyReport("leibniz", {**params.describe(), "sign": sign, "pair": label}, cutoff)
    with _Timer(report):
        na, nb = params.label_of(a.weight), params.label_of(b.weight)
        nab = na + nb
        off = a.weight * b.weight / lat.kappa
        top_a = max(a.grades(), default=0)
        top_b = max(b.grades(), default=0)
        # output grade of a_n b is |lam| + g_b - n - 1 - off
        hi = top_a + top_b - 1 - off
        lo = hi - cutoff - top_a - top_b
        window = list(mode_window) if mode_window is not None else list(range(int(lo), int(hi) + 1))
        report.scope = f"modes {window[0]}..{window[-1]}, output grades <= {cutoff}"
        Ga = derivation(lat, sign, na, top_a).apply(a)
        Gb = derivation(lat, sign, nb, top_b).apply(b)
        checked = 0
        for n in window:
            ab = state_field_mode(a, n, b)
            gs = ab.grades()
            if gs and max(gs) > cutoff:
                continue
            g_ab = max(gs, default=0)
            lhs = derivation(lat, sign, nab, max(g_ab, 0)).apply(ab)
            rhs = state_field_mode(Ga, n, b) + state_field_mode(a, n, Gb)
            checked += 1
            if lhs != rhs:
                report.fail(check="leibniz", mode=n, lhs=lhs.render(), rhs=rhs.render())
            elif not lhs.is_zero():
                report.note(check="leibniz", mode=n, nonzero=True)
        report.note(check="modes checked", count=checked)
    return report



# ---------------------------------------------------------------------------
# screening commutation, G consistency and epsilon valuations

def default_screening_cases(params: WParams) -> list:
    """(sign, multiplicity) pairs: Q^{[r]}_+ for 1 <= r < max(p_+, 2), Q^{[s]}_- for 1 <= s < p_-."""
    cases = [("+", r) for r in range(1, max(params.p_plus, 2))]
    cases += [("-", s) for s in range(1, params.p_minus)]
    return cases


def verify_screening_commutation(params: WParams, cutoff: int = 6, cases=None,
                                 modes=range(-2, 3)) -> VerifyReport:
    """[L_n, Q^{[r]}_sign] = 0 on every basis vector of grade <= cutoff."""
    lat = params.lattice
    cases = default_screening_cases(params) if cases is None else list(cases)
    modes = list(modes)
    report = VerifyReport("screening", {**params.describe(),
                                        "cases": [f"{s}{m}" for s, m in cases]}, cutoff)
    report.scope = f"L_n for n in {modes[0]}..{modes[-1]}, basis vectors of grade <= {cutoff}"
    with _Timer(report):
        ctx = lat.ctx()
        reach = max(0, -min(modes))
        for sign, mult in cases:
            src = (mult, 1, 0) if sign == "+" else (1, mult, 0)
            Q = screen(lat, sign, mult, src, cutoff + reach)
            checked = nonzero = 0
            for g in range(cutoff + 1):
                for lam in partitions(g):
                    e = FockVector(Q.src_weight, {lam: Fraction(1)}, ctx)
                    Qe = Q.apply(e)
                    for n in modes:
                        lhs = Q.apply(apply_virasoro(n, e))
                        rhs = apply_virasoro(n, Qe)
                        checked += 1
                        if lhs != rhs:
                            report.fail(check="[L_n, Q]", sign=sign, mult=mult, mode=n,
                                        vector=e.render())
                        elif not lhs.is_zero():
                            nonzero += 1
            report.note(check="[L_n, Q] = 0", sign=sign, mult=mult, source=list(src),
                        shift=Q.shift, checked=checked, nonzero=nonzero)
    return report


def _kernel_vectors(Q: GradedMap, g: int) -> list:
    B = Q.blocks.get(g)
    dim = len(partitions(g))
    if B is None:
        return [[Fraction(int(i == j)) for i in range(dim)] for j in range(dim)]
    return L.nullspace(B)


def verify_g_consistency(params: WParams, cutoff: int = 5, n_range=(-1, 0, 1)) -> VerifyReport:
    """lim_F eps^{-1} N = G_direct on ker Q_sign over F_{1,1;n}; for p_+ = 2 also
    the mode-sum operator against G_+ with a single scalar across all sources."""
    lat = params.lattice
    report = VerifyReport("g-consistency", {**params.describe(), "n_range": list(n_range)}, cutoff)
    report.scope = f"ker Q_sign on F_(1,1;n), grades <= {cutoff}"
    with _Timer(report):
        signs = ["-"] + (["+"] if params.p_plus >= 2 else [])
        for sign, n in itertools.product(signs, n_range):
            src = (1, 1, n)
            k = 1 - n * lat.p_plus if sign == "-" else 1 + n * lat.p_minus
            Gl = G_limit(lat, 1, sign, k, cutoff)
            Gd = derivation(lat, sign, n, cutoff)
            Q = screen(lat, sign, 1, src, cutoff)
            same = Gl.src_weight == Gd.src_weight and Gl.dst_weight == Gd.dst_weight
            report.check(same, check="G weights", sign=sign, component=n)
            vectors = nonzero = 0
            for g in range(cutoff + 1):
                for v in _kernel_vectors(Q, g):
                    a, b = Gl.apply_coords(g, v), Gd.apply_coords(g, v)
                    vectors += 1
                    nonzero += not _is_zero(b)
                    if a != b:
                        report.fail(check="G_limit = G_direct", sign=sign, component=n, grade=g)
            report.note(check="G_limit = G_direct", sign=sign, component=n, vectors=vectors,
                        nonzero=nonzero)
        if params.p_plus == 2:
            ratios = set()
            for src in [(1, 1, 0), (1, 2, 0), (1, 1, -1), (1, 2, -1)]:
                A = am_operator(cutoff, lat, src)
                G = G_direct("+", cutoff, lat, src)
                Q = screen(lat, "+", 1, src, cutoff)
                for g in range(cutoff + 1):
                    for v in _kernel_vectors(Q, g):
                        a, b = A.apply_coords(g, v), G.apply_coords(g, v)
                        if _is_zero(b):
                            if not _is_zero(a):
                                report.fail(check="AM proportional", source=list(src), grade=g)
                            continue
                        c = L.solve_proportional(a, b)
                        if c is None:
                            report.fail(check="AM proportional", source=list(src), grade=g)
                        else:
                            ratios.add(c)
            ok = len(ratios) == 1 and 0 not in ratios
            report.check(ok, check="AM = c G_+", scalars=sorted(render_scalar(c) for c in ratios))
    return report


def _corrected_valuation(gm: GradedMap):
    sigma = gm.ledger.sigma if gm.ledger else 0
    return gm.min_valuation() + sigma, sigma


def verify_valuations(params: WParams, cutoff: int = 5, k_range=(-1, 0, 1, 2),
                      n_range=(-1, 0, 1)) -> VerifyReport:
    """Ledger-corrected eps-valuations: deformed screenings >= 0, N >= 1 and,
    for p_+ >= 2 and s = 1, the commutator difference >= 2 on ker Q_+."""
    lat = params.lattice
    report = VerifyReport("valuations", {**params.describe(), "k_range": list(k_range)}, cutoff)
    report.scope = f"grades <= {cutoff}"
    with _Timer(report):
        for sign, mult in default_screening_cases(params):
            p = lat.p_plus if sign == "+" else lat.p_minus
            if mult >= p:
                continue
            for k in k_range:
                src = (mult, k, 0) if sign == "+" else (k, mult, 0)
                Qt = deformed_screen(ScreeningSpec(lat, sign, mult, True, src, cutoff))
                val, sigma = _corrected_valuation(Qt)
                report.check(val >= 0, check="deformed screening >= 0", sign=sign, mult=mult,
                             source=list(src), valuation=_num(val), sigma=sigma)
                N = compose_N(lat, mult, sign, k, cutoff)
                val, sigma = _corrected_valuation(N)
                report.check(val >= 1, check="N >= 1", sign=sign, mult=mult, k=k,
                             valuation=_num(val), sigma=sigma)
        if params.p_plus >= 2:
            for n in n_range:
                D = sc_cruc_difference(lat, 1, n, cutoff)
                # with s = 1 and p_+ = 2 every factor is a single screening, sigma = 0
                sigma = D.ledger.sigma if D.ledger else 0
                Q = screen(lat, "+", 1, (1, 1, -n), cutoff)
                best = float("inf")
                for g in range(cutoff + 1):
                    for v in _kernel_vectors(Q, g):
                        out = D.apply_coords(g, v)
                        best = min([best] + [valuation(x) for x in out if x])
                report.check(best + sigma >= 2, check="commutator difference >= 2 on ker Q_+",
                             n=n, valuation=_num(best + sigma), raw=_num(D.min_valuation()),
                             sigma=sigma)
    return report


def _num(v):
    return "inf" if v == float("inf") else int(v)


# ---------------------------------------------------------------------------
# Heisenberg and Virasoro relations

def _random_vector(rng, weight, ctx, max_grade):
    terms = {}
    for g in range(max_grade + 1):
        for lam in partitions(g):
            c = Fraction(rng.randint(-6, 6), rng.randint(1, 5))
            if c:
                terms[lam] = c
    return FockVector(weight, terms, ctx)


def _random_fraction(rng, lo=-3, hi=3):
    return Fraction(rng.randint(lo * 7, hi * 7), rng.randint(1, 7))


def verify_relations(seed: int = 0, draws: int = 5, max_mode: int = 3,
                     max_grade: int = 6) -> VerifyReport:
    """[a_m, a_n], [L_m, a_n] and [L_m, L_n] on random vectors for random (rho, kappa, weight)."""
    import random
    rng = random.Random(seed)
    report = VerifyReport("relations", {"seed": seed, "draws": draws}, max_grade)
    report.scope = f"|m|, |n| <= {max_mode}, random vectors with grades <= {max_grade}"
    modes = range(-max_mode, max_mode + 1)
    with _Timer(report):
        for _ in range(draws):
            rho = _random_fraction(rng)
            kappa = abs(_random_fraction(rng, 0, 3)) or Fraction(1)
            ctx = FockContext(rho, kappa)
            c = ctx.central_charge
            v = _random_vector(rng, _random_fraction(rng), ctx, max_grade)
            bad = 0
            for m, n in itertools.product(modes, modes):
                am_an = apply_heisenberg(m, apply_heisenberg(n, v)) - apply_heisenberg(n, apply_heisenberg(m, v))
                if am_an != (v.scale(kappa * m) if m + n == 0 else FockVector(v.weight, {}, ctx)):
                    bad += 1
                    report.fail(check="[a_m, a_n]", m=m, n=n, rho=str(rho), kappa=str(kappa))
                la = apply_virasoro(m, apply_heisenberg(n, v)) - apply_heisenberg(n, apply_virasoro(m, v))
                rhs = apply_heisenberg(m + n, v).scale(-n)
                if m + n == 0:
                    rhs = rhs - v.scale(rho * m * (m + 1) / 2)
                if la != rhs:
                    bad += 1
                    report.fail(check="[L_m, a_n]", m=m, n=n, rho=str(rho), kappa=str(kappa))
                ll = apply_virasoro(m, apply_virasoro(n, v)) - apply_virasoro(n, apply_virasoro(m, v))
                rhs = apply_virasoro(m + n, v).scale(m - n)
                if m + n == 0:
                    rhs = rhs + v.scale(c * (m ** 3 - m) / 12)
                if ll != rhs:
                    bad += 1
                    report.fail(check="[L_m, L_n]", m=m, n=n, rho=str(rho), kappa=str(kappa))
            report.note(check="draw", rho=str(rho), kappa=str(kappa), weight=str(v.weight),
                        central_charge=str(c), failures=bad)
    return report


__all__ = [
    "WParams", "KernelBasis", "VerifyReport", "SingularityCheckFailed", "kernel_at_grade",
    "kernel_component", "kernel_at_weight", "triplet_vectors", "screened_vector", "is_singular",
    "minimal_character", "partition_counts", "verify_felder", "verify_sl2", "verify_leibniz",
    "conformal_vector", "ladder_weight", "lowest_weight_of_ladder", "window_top", "screen",
    "derivation", "raising", "lowering", "clear_caches",
    "verify_screening_commutation", "verify_g_consistency", "verify_valuations",
    "verify_relations", "default_screening_cases",
]
