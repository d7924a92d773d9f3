"""Rank-one Heisenberg Fock modules.

The Heisenberg algebra is realized with an arbitrary level kappa,
[a_m, a_n] = kappa * m * delta_{m+n,0}; kappa = 1 is the usual
normalization.  Rescaled units (kappa = 1/d with a = sqrt(d) * b) keep
every matrix entry rational for the lattice weights used downstream.

With background charge rho the Virasoro modes are

    L_n = (1/2 kappa) sum_k :a_{n-k} a_k: - (rho/2 kappa)(n+1) a_n,

central charge 1 - 3 rho^2/kappa and lowest weight gamma(gamma - rho)/(2 kappa).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import _linalg as L
from .exactnum import (PoleAtZero, QuadExt, RatFunc, eval_at_zero, render_scalar,
                       valuation)
from .symfunc import partition_index, partitions, z_lambda


class CutoffTooSmall(ValueError):
    pass


class WeightMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FockContext:
    rho: object = 0
    kappa: object = 1

    def __post_init__(self):
        for name in ("rho", "kappa"):
            if isinstance(getattr(self, name), int):
                object.__setattr__(self, name, Fraction(getattr(self, name)))

    @property
    def central_charge(self):
        return 1 - 3 * self.rho * self.rho / self.kappa

    def lowest_weight(self, gamma):
        return gamma * (gamma - self.rho) / (2 * self.kappa)

    @property
    def coeff_level(self) -> str:
        for x in (self.rho, self.kappa):
            if isinstance(x, RatFunc):
                return "ratfunc"
        for x in (self.rho, self.kappa):
            if isinstance(x, QuadExt) and x.b != 0:
                return "quad"
        return "rational"

    def key(self):
        return (render_scalar(self.rho), render_scalar(self.kappa))


def _insert(lam: tuple, n: int) -> tuple:
    out = list(lam)
    i = 0
    while i < len(out) and out[i] >= n:
        i += 1
    out.insert(i, n)
    return tuple(out)


def _remove(lam: tuple, n: int) -> tuple:
    out = list(lam)
    out.remove(n)
    return tuple(out)


class FockVector:
    """Finite combination of a_{-lam}|weight> in one Fock module."""

    __slots__ = ("weight", "terms", "ctx")

    def __init__(self, weight, terms: dict | None = None, ctx: FockContext | None = None):
        self.weight = weight
        self.ctx = ctx or FockContext()
        self.terms = {tuple(k): c for k, c in (terms or {}).items() if c != 0}

    @classmethod
    def vacuum(cls, weight, ctx=None):
        return cls(weight, {(): 1}, ctx)

    @classmethod
    def basis(cls, weight, lam, ctx=None):
        return cls(weight, {tuple(lam): 1}, ctx)

    def _check(self, other):
        if other.weight != self.weight:
            raise WeightMismatch(f"weights {render_scalar(self.weight)} and {render_scalar(other.weight)}")

    def __add__(self, other):
        self._check(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return FockVector(self.weight, t, self.ctx)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        if s == 0:
            return FockVector(self.weight, {}, self.ctx)
        return FockVector(self.weight, {k: c * s for k, c in self.terms.items()}, self.ctx)

    __mul__ = scale
    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.terms

    def grades(self):
        return sorted({sum(k) for k in self.terms})

    def component(self, g) -> "FockVector":
        return FockVector(self.weight, {k: c for k, c in self.terms.items() if sum(k) == g}, self.ctx)

    def coords(self, g) -> list:
        idx = partition_index(g)
        v = [0] * len(idx)
        for k, c in self.terms.items():
            if sum(k) == g:
                v[idx[k]] = c
        return v

    @classmethod
    def from_coords(cls, weight, g, coords, ctx=None):
        return cls(weight, {lam: c for lam, c in zip(partitions(g), coords) if c != 0}, ctx)

    def __eq__(self, other):
        if not isinstance(other, FockVector):
            return NotImplemented
        return self.weight == other.weight and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms)))

    def render(self) -> str:
        if not self.terms:
            return "0"
        w = render_scalar(self.weight)
        out = []
        for lam in sorted(self.terms, key=lambda k: (sum(k), partition_index(sum(k))[k])):
            c = render_scalar(self.terms[lam])
            modes = "".join(f"a_{{-{p}}}" for p in reversed(lam)) if lam else "1"
            out.append(f"({c}) · {modes} |{w}⟩")
        return " + ".join(out)

    def __repr__(self):
        return f"FockVector({self.render()})"


def apply_heisenberg(n: int, v: FockVector) -> FockVector:
    if n == 0:
        return v.scale(v.weight)
    out: dict = {}
    if n < 0:
        for lam, c in v.terms.items():
            k = _insert(lam, -n)
            out[k] = out.get(k, 0) + c
    else:
        kn = v.ctx.kappa * n
        for lam, c in v.terms.items():
            m = lam.count(n)
            if m:
                k = _remove(lam, n)
                out[k] = out.get(k, 0) + c * kn * m
    return FockVector(v.weight, out, v.ctx)


def apply_virasoro(n: int, v: FockVector) -> FockVector:
    ctx = v.ctx
    if not v.terms:
        return v
    top = max(max(v.grades()), 0)
    acc = FockVector(v.weight, {}, ctx)
    lo = -((-n) // 2)  # ceil(n/2)
    for j in range(lo, max(top, 0) + 1):
        i = n - j
        if i > j:
            continue
        w = apply_heisenberg(i, apply_heisenberg(j, v))
        acc = acc + (w if i == j else w.scale(2))
    acc = acc.scale(1 / (2 * ctx.kappa))
    if ctx.rho != 0:
        lin = apply_heisenberg(n, v).scale(ctx.rho * (n + 1) / (2 * ctx.kappa))
        acc = acc - lin
    return acc


def shift_weight(delta, v: FockVector) -> FockVector:
    """e^{delta â}: same coefficients, weight label shifted by delta."""
    return FockVector(v.weight + delta, dict(v.terms), v.ctx)


def pair(dual: FockVector, v: FockVector):
    """Contragredient pairing F_{rho - alpha} x F_alpha -> scalars.

    Fixed by <|rho - alpha>, |alpha>> = 1 and
    <psi, a_n v> = <(rho delta_{n,0} - a_{-n}) psi, v>; the Gram matrix is
    diagonal with entries (-kappa)^l(lam) z_lam.
    """
    if dual.weight + v.weight != v.ctx.rho:
        return 0
    kappa = v.ctx.kappa
    total = 0
    for lam, c in v.terms.items():
        d = dual.terms.get(lam)
        if d:
            total = total + c * d * (-kappa) ** len(lam) * z_lambda(lam)
    return total


def lim_F(v: FockVector, target_weight=None) -> FockVector:
    """Coefficientwise eps -> 0 limit."""
    bad = {lam: valuation(c) for lam, c in v.terms.items()
           if isinstance(c, RatFunc) and valuation(c) < 0}
    if bad:
        detail = ", ".join(f"{lam}: {val}" for lam, val in sorted(bad.items()))
        raise PoleAtZero(f"coefficients with poles at eps = 0: {detail}")
    w0 = eval_at_zero(v.weight)
    if target_weight is not None and w0 != target_weight:
        raise WeightMismatch(f"limit weight {render_scalar(w0)} != {render_scalar(target_weight)}")
    ctx = FockContext(eval_at_zero(v.ctx.rho), eval_at_zero(v.ctx.kappa))
    return FockVector(w0, {lam: eval_at_zero(c) for lam, c in v.terms.items()}, ctx)


def to_standard_units(v: FockVector, u) -> FockVector:
    """Rewrite a vector in rescaled units (a = u*b) in the a-basis."""
    uinv = 1 / u
    ctx = FockContext(v.ctx.rho * u, v.ctx.kappa * u * u)
    return FockVector(v.weight * u, {lam: c * uinv ** len(lam) for lam, c in v.terms.items()}, ctx)


# ---------------------------------------------------------------------------
# grade-blocked operators

BASES = {"boson": partitions}


def mode_block(op, n, weight, grade, ctx, kind="boson"):
    """Matrix of a mode action (apply_heisenberg/apply_virasoro) on one grade."""
    if kind != "boson":
        raise ValueError("mode_block handles bosonic modules; see superns for NS")
    src = partitions(grade)
    tgt_grade = grade - n
    if tgt_grade < 0:
        return None
    tidx = partition_index(tgt_grade)
    entries = {}
    for j, lam in enumerate(src):
        w = op(n, FockVector(weight, {lam: 1}, ctx))
        for k, c in w.terms.items():
            entries[(tidx[k], j)] = c
    return L.from_dict(len(tidx), len(src), entries)


@dataclass
class GradedMap:
    """Operator between two graded modules, stored block by source grade.

    Block g maps source grade g to target grade g + shift; the scalar
    ``scale`` multiplies every block (it carries a common irrational factor
    so that blocks stay rational).
    """

    src_weight: object
    dst_weight: object
    cutoff: object
    shift: object
    blocks: dict = field(default_factory=dict)
    scale: object = 1
    ledger: object = None
    kind: str = "boson"
    label: str = ""

    def basis(self, g):
        return BASES[self.kind](g)

    def block(self, g):
        if g > self.cutoff:
            raise CutoffTooSmall(f"{self.label or 'map'} computed to grade {self.cutoff}, grade {g} requested")
        return self.blocks.get(g)

    def scaled_block(self, g):
        B = self.block(g)
        if B is None:
            return None
        return L.scale(B, self.scale) if self.scale != 1 else B

    def grades(self):
        return sorted(self.blocks)

    def apply_coords(self, g, coords):
        B = self.block(g)
        tg = g + self.shift
        n_out = len(self.basis(tg)) if tg >= 0 else 0
        if B is None:
            return [0] * n_out
        out = L.mat_vec(B, coords)
        if self.scale != 1:
            out = [x * self.scale for x in out]
        return out

    def apply(self, v):
        """Apply to a FockVector (or NSVector) of matching weight."""
        if v.weight != self.src_weight:
            raise WeightMismatch(
                f"{self.label}: source weight {render_scalar(self.src_weight)} != {render_scalar(v.weight)}")
        terms: dict = {}
        for g in v.grades():
            tg = g + self.shift
            if tg < 0:
                continue
            vals = self.apply_coords(g, v.coords(g))
            for key, c in zip(self.basis(tg), vals):
                if c != 0:
                    terms[key] = terms.get(key, 0) + c
        return type(v)(self.dst_weight, terms, v.ctx)

    def compose(self, other: "GradedMap") -> "GradedMap":
        """self ∘ other."""
        if other.dst_weight != self.src_weight:
            raise WeightMismatch(f"cannot compose {self.label} after {other.label}: weights do not chain")
        blocks = {}
        for g in other.grades():
            B = other.blocks[g]
            mid = g + other.shift
            if mid > self.cutoff:
                raise CutoffTooSmall(f"{self.label} needs grade {mid}, computed to {self.cutoff}")
            A = self.blocks.get(mid)
            if A is None:
                continue
            P = L.matmul(A, B)
            if not L.is_zero(P):
                blocks[g] = P
        scale = self.scale * other.scale
        out = GradedMap(other.src_weight, self.dst_weight, other.cutoff, other.shift + self.shift,
                        blocks, 1, _merge_ledgers(self.ledger, other.ledger), self.kind,
                        f"{self.label}∘{other.label}")
        return out.with_scale(scale)

    def with_scale(self, s) -> "GradedMap":
        """Attach a scalar; a rational product is folded into the blocks."""
        if isinstance(s, QuadExt) and s.b == 0:
            s = s.a
        if isinstance(s, (int, Fraction)):
            blocks = {g: L.scale(B, s) for g, B in self.blocks.items()} if s != 1 else self.blocks
            return GradedMap(self.src_weight, self.dst_weight, self.cutoff, self.shift, blocks, 1,
                             self.ledger, self.kind, self.label)
        return GradedMap(self.src_weight, self.dst_weight, self.cutoff, self.shift, self.blocks, s,
                         self.ledger, self.kind, self.label)

    def __mul__(self, s):
        return self.with_scale(self.scale * s)

    __rmul__ = __mul__

    def _combine(self, other, sign):
        if (other.src_weight != self.src_weight or other.dst_weight != self.dst_weight
                or other.shift != self.shift):
            raise WeightMismatch("operators act between different modules")
        cutoff = min(self.cutoff, other.cutoff)
        common = self.scale if self.scale == other.scale else 1
        blocks = {}
        for g in sorted(set(self.grades()) | set(other.grades())):
            if g > cutoff:
                continue
            if common != 1:
                A, B = self.blocks.get(g), other.blocks.get(g)
            else:
                A, B = self.scaled_block(g), other.scaled_block(g)
            if A is None:
                C = L.scale(B, sign)
            elif B is None:
                C = A
            else:
                C = L.add(A, B, sign)
            if not L.is_zero(C):
                blocks[g] = C
        return GradedMap(self.src_weight, self.dst_weight, cutoff, self.shift, blocks, common,
                         _merge_ledgers(self.ledger, other.ledger), self.kind,
                         f"({self.label}{'+' if sign == 1 else '-'}{other.label})")

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def is_zero(self) -> bool:
        return all(L.is_zero(B) for B in self.blocks.values()) or self.scale == 0

    def min_valuation(self):
        v = min((L.min_valuation(B) for B in self.blocks.values()), default=float("inf"))
        if self.scale != 1 and v != float("inf"):
            v += valuation(self.scale)
        return v

    def map_entries(self, fn) -> "GradedMap":
        blocks = {}
        for g, B in self.blocks.items():
            rows = [[fn(x) if x else 0 for x in r] for r in L.to_rows(B)]
            M = L.from_rows(rows, B.nrows(), B.ncols())
            if not L.is_zero(M):
                blocks[g] = M
        return GradedMap(self.src_weight, self.dst_weight, self.cutoff, self.shift, blocks,
                         self.scale, self.ledger, self.kind, self.label)


def _merge_ledgers(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a.combine(b)


def mode_map(op, n, weight, ctx, cutoff) -> GradedMap:
    """GradedMap of a Heisenberg or Virasoro mode on F_weight up to a cutoff."""
    blocks = {}
    for g in range(cutoff + 1):
        B = mode_block(op, n, weight, g, ctx)
        if B is not None and not L.is_zero(B):
            blocks[g] = B
    return GradedMap(weight, weight, cutoff, -n, blocks, label=f"{op.__name__}({n})")
