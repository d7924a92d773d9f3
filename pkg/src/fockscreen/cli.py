"""Command-line front end: verification campaigns, exact renderings and Selberg values.

    fockscreen verify --algebra w --p-plus 1 --p-minus 2 --cutoff 6 --claims felder,sl2
    fockscreen compute screening --sign - --mult 2 --p-minus 3 --grade 4
    fockscreen selberg --n 1 --f y --alpha 0 --beta 0 --oracle

Exit codes of ``verify``: 0 all claims pass, 1 some claim fails, 2 bad configuration.
"""

from __future__ import annotations

import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path

import click

from .exactnum import render_scalar
from .fock import FockVector
from .symfunc import InadmissibleParams, NonConvergent, SelbergParams, SymLaurent, partitions

ENV_CACHE = "FOCKSCREEN_CACHE"

W_CLAIMS = ("felder", "sl2", "leibniz", "screening", "g-consistency", "valuations", "relations")
SW_CLAIMS = ("sw.nilpotent", "sw.commute", "sw.sl2", "sw.glimit", "sw.relations")
REGISTRY = {"w": W_CLAIMS, "sw": SW_CLAIMS}


class ConfigError(ValueError):
    pass


@dataclass
class CampaignConfig:
    algebra: str = "w"
    p_plus: int = 1
    p_minus: int = 2
    m: int = 1
    cutoff: int = 6
    claims: list = field(default_factory=list)
    cache_dir: str | None = None
    out: str | None = None
    jobs: int = 1

    def params(self):
        if self.algebra == "w":
            from .walgebra import WParams
            return WParams(self.p_plus, self.p_minus)
        from .superns import NSParams
        return NSParams(self.m)

    def validate(self):
        if self.algebra not in REGISTRY:
            raise ConfigError(f"unknown algebra {self.algebra!r} (choose w or sw)")
        known = REGISTRY[self.algebra]
        unknown = [c for c in self.claims if c not in known]
        if unknown:
            raise ConfigError(f"unknown claim(s) {', '.join(unknown)} for algebra {self.algebra}; "
                              f"registered: {', '.join(known)}")
        if self.jobs < 1:
            raise ConfigError("--jobs must be positive")
        if self.cutoff < 0:
            raise ConfigError("--cutoff must be nonnegative")
        try:
            params = self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for claim in self.claims:
            need = min_cutoff(claim, params)
            if self.cutoff < need:
                raise ConfigError(f"CutoffTooSmall: claim {claim} needs cutoff >= {need}, got {self.cutoff}")


def min_cutoff(claim: str, params) -> int:
    """Smallest cutoff at which a claim is meaningful."""
    if claim == "sl2":
        from .walgebra import window_top
        return math.ceil(window_top(params))
    if claim == "leibniz":
        return _triplet_grade(params)
    if claim in ("sw.nilpotent", "sw.commute", "sw.sl2", "sw.glimit"):
        return 2 * params.m + 3
    return 0


def _triplet_grade(params) -> int:
    from .walgebra import triplet_vectors
    return max(max(v.grades()) for v in triplet_vectors(params).values())


# ---------------------------------------------------------------------------
# claim runners (module level so that worker processes can pickle them)

def _w_reports(claim: str, P, cutoff: int) -> list:
    from . import walgebra as W
    if claim == "felder":
        out = [W.verify_felder(P, "-", s, (-1, 0, 1), cutoff) for s in range(1, P.p_minus)]
        out += [W.verify_felder(P, "+", r, (-1, 0, 1), cutoff) for r in range(1, P.p_plus)]
        return out
    if claim == "sl2":
        return [W.verify_sl2(P, cutoff)]
    if claim == "leibniz":
        trip = W.triplet_vectors(P)
        vac = FockVector.vacuum(0, P.lattice.ctx())
        pairs = [("vacuum,W-", vac, trip["-"]), ("T,W-", W.conformal_vector(P), trip["-"]),
                 ("W-,W-", trip["-"], trip["-"]), ("W+,W-", trip["+"], trip["-"])]
        return [W.verify_leibniz(P, a, b, cutoff=cutoff, label=name) for name, a, b in pairs]
    if claim == "screening":
        return [W.verify_screening_commutation(P, cutoff)]
    if claim == "g-consistency":
        return [W.verify_g_consistency(P, cutoff)]
    if claim == "valuations":
        return [W.verify_valuations(P, cutoff)]
    if claim == "relations":
        return [W.verify_relations(max_grade=cutoff)]
    raise ConfigError(f"unknown claim {claim}")


def _sw_reports(claim: str, P, cutoff: int) -> list:
    from . import superns as S
    if claim == "sw.nilpotent":
        return [S.sw_nilpotent(P, cutoff)]
    if claim == "sw.commute":
        return [S.sw_commute(P, cutoff)]
    if claim == "sw.sl2":
        return [S.sw_sl2(P)]
    if claim == "sw.glimit":
        return [S.sw_glimit(P, cutoff)]
    if claim == "sw.relations":
        return [S.sw_relations(max_grade=cutoff)]
    raise ConfigError(f"unknown claim {claim}")


def run_claim(task) -> list:
    """Run one claim from a clean cache state; returns report dicts."""
    cfg, claim = task
    from . import walgebra
    from .symfunc import set_cache_dir
    walgebra.clear_caches()
    if cfg.cache_dir:
        set_cache_dir(cfg.cache_dir)
    P = cfg.params()
    runner = _w_reports if cfg.algebra == "w" else _sw_reports
    return [r.to_dict() for r in runner(claim, P, cfg.cutoff)]


def run_campaign(cfg: CampaignConfig) -> list:
    tasks = [(cfg, c) for c in cfg.claims]
    if cfg.jobs > 1 and len(tasks) > 1:
        with Pool(min(cfg.jobs, len(tasks)), maxtasksperchild=1) as pool:
            chunks = pool.map(run_claim, tasks, chunksize=1)
    else:
        chunks = [run_claim(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def dump_reports(reports: list) -> str:
    return json.dumps(reports, sort_keys=True, indent=2, default=str) + "\n"


# ---------------------------------------------------------------------------
# configuration

def read_config_file(path) -> dict:
    """key=value lines; '#' starts a comment; dashes in keys become underscores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_INT_KEYS = ("p_plus", "p_minus", "m", "cutoff", "jobs")
_STR_KEYS = ("algebra", "cache_dir", "out")


def build_config(flags: dict, config_path=None, env=None) -> CampaignConfig:
    """Merge flags > config file > environment (cache dir) > defaults."""
    env = os.environ if env is None else env
    filed = read_config_file(config_path) if config_path else {}
    unknown = set(filed) - set(_INT_KEYS) - set(_STR_KEYS) - {"claims"}
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    cfg = CampaignConfig()
    for key in _INT_KEYS + _STR_KEYS + ("claims",):
        value = flags.get(key)
        if value is None:
            value = filed.get(key)
        if value is None:
            continue
        if key in _INT_KEYS:
            try:
                value = int(value)
            except ValueError as exc:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
        if key == "claims":
            value = [c.strip() for c in value.split(",") if c.strip()] if isinstance(value, str) else list(value)
        setattr(cfg, key, value)
    if cfg.cache_dir is None:
        cfg.cache_dir = env.get(ENV_CACHE) or None
    if not cfg.claims:
        cfg.claims = list(REGISTRY.get(cfg.algebra, ()))
    return cfg


# ---------------------------------------------------------------------------
# commands

@click.group()
def main():
    """Exact free-field checks for screening operators and triplet W-algebras."""


@main.command()
@click.option("--algebra", type=str, default=None, help="w (triplet) or sw (super triplet).")
@click.option("--p-plus", type=int, default=None)
@click.option("--p-minus", type=int, default=None)
@click.option("--m", "m", type=int, default=None, help="Super triplet parameter.")
@click.option("--cutoff", type=int, default=None, help="Largest grade checked.")
@click.option("--claims", type=str, default=None, help="Comma separated claim ids.")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report to stdout.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here.")
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None)
@click.option("--jobs", type=int, default=None, help="Worker processes.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key=value file; flags take precedence.")
def verify(algebra, p_plus, p_minus, m, cutoff, claims, as_json, out, cache_dir, jobs, config_path):
    """Run verification claims and emit one JSON array of reports."""
    flags = {"algebra": algebra, "p_plus": p_plus, "p_minus": p_minus, "m": m, "cutoff": cutoff,
             "claims": claims, "out": out, "cache_dir": cache_dir, "jobs": jobs}
    try:
        cfg = build_config(flags, config_path)
        cfg.validate()
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    reports = run_campaign(cfg)
    text = dump_reports(reports)
    if cfg.out:
        Path(cfg.out).write_text(text)
    if as_json:
        click.echo(text, nl=False)
    else:
        for r in reports:
            extra = f" [{r['params'].get('pair')}]" if r["params"].get("pair") else ""
            click.echo(f"{r['status'].upper():4} {r['claim_id']}{extra} ({r['duration_ms']} ms)")
    sys.exit(0 if all(r["status"] == "pass" for r in reports) else 1)


def _parse_source(text):
    parts = [int(x) for x in text.split(",")]
    if len(parts) == 2:
        parts.append(0)
    if len(parts) != 3:
        raise click.BadParameter("expected r,s or r,s,n")
    return tuple(parts)


@main.command()
@click.argument("what", type=click.Choice(["triplet", "kernel", "screening"]))
@click.option("--algebra", type=click.Choice(["w", "sw"]), default="w")
@click.option("--p-plus", type=int, default=1)
@click.option("--p-minus", type=int, default=2)
@click.option("--m", "m", type=int, default=1)
@click.option("--grade", type=int, default=0)
@click.option("--component", type=int, default=0, help="n of F_{1,1;n} for kernels.")
@click.option("--sign", type=click.Choice(["+", "-"]), default="-")
@click.option("--mult", type=int, default=1)
@click.option("--source", type=str, default=None, help="r,s[,n] of the source module.")
@click.option("--json", "as_json", is_flag=True)
def compute(what, algebra, p_plus, p_minus, m, grade, component, sign, mult, source, as_json):
    """Print triplet vectors, kernel bases or screening blocks exactly."""
    try:
        payload = _compute(what, algebra, p_plus, p_minus, m, grade, component, sign, mult, source)
    except (ValueError, InadmissibleParams) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
        return
    for key, value in payload.items():
        if isinstance(value, list):
            click.echo(f"{key}:")
            for item in value:
                click.echo(f"  {item}")
        elif isinstance(value, dict):
            click.echo(f"{key}:")
            for k, v in value.items():
                click.echo(f"  {k}: {v}")
        else:
            click.echo(f"{key}: {value}")


def _compute(what, algebra, p_plus, p_minus, m, grade, component, sign, mult, source):
    if algebra == "sw":
        from .superns import NSParams, ns_l0_weight, triplet_vectors_ns
        P = NSParams(m)
        if what != "triplet":
            raise ValueError("for --algebra sw only 'triplet' is available")
        trip = triplet_vectors_ns(P)
        out = {"m": m}
        for fam, vs in trip.items():
            out[fam] = {k: v.render() for k, v in vs.items()}
            out[f"h({fam})"] = render_scalar(ns_l0_weight(P, vs["-"]))
        return out
    from . import walgebra as W
    P = W.WParams(p_plus, p_minus)
    lat = P.lattice
    if what == "triplet":
        trip = W.triplet_vectors(P)
        return {"params": f"({p_plus},{p_minus})", "h": render_scalar(P.h(4 * p_plus - 1, 1)),
                "vectors": {f"W{k}": trip[k].render() for k in ("+", "0", "-")}}
    if what == "kernel":
        maps = W.kernel_maps(P, component, grade)
        basis = W.kernel_at_grade(lat.alpha(1, 1, component), maps, grade, lat.ctx())
        return {"component": component, "grade": grade, "dim": basis.dim,
                "vectors": [v.render() for v in basis.vectors]}
    src = _parse_source(source) if source else ((mult, 1, 0) if sign == "+" else (1, mult, 0))
    Q = W.screen(lat, sign, mult, src, grade)
    B = Q.scaled_block(grade)
    tg = grade + Q.shift
    rows = [] if tg < 0 else partitions(tg)
    cols = partitions(grade)
    from . import _linalg as L
    dense = L.to_rows(B) if B is not None else [[0] * len(cols) for _ in rows]
    return {"operator": Q.label, "source": ",".join(map(str, src)), "shift": render_scalar(Q.shift),
            "columns": [str(c) for c in cols],
            "rows": [f"{r}: [" + ", ".join(render_scalar(x) for x in row) + "]"
                     for r, row in zip(rows, dense)],
            "ledger": Q.ledger.describe() if Q.ledger else None}


_FACTOR_RE = re.compile(r"^y(\d*)(?:\^(\d+))?$")
_MONO_RE = re.compile(r"^m\(([\d,\s-]*)\)$")


def parse_symmetric(text: str, n: int) -> SymLaurent:
    """Parse a sum of monomial symmetric functions.

    A term is ``[coeff*]mono`` where mono is ``1``, ``m(e1,...,en)`` or a
    product of ``y``/``yi``/``yi^k`` factors; a product y^e stands for the
    orbit sum m_e, so ``y1`` with n = 2 means y1 + y2.
    """
    text = text.replace(" ", "")
    if not text:
        raise ValueError("empty polynomial")
    terms: dict = {}
    # split on top-level signs (parentheses only appear inside m(...))
    pieces, depth, cur = [], 0, ""
    for ch in text:
        if ch in "+-" and depth == 0 and cur and not cur.endswith(("^", "*", "/")):
            pieces.append(cur)
            cur = ch
            continue
        depth += (ch == "(") - (ch == ")")
        cur += ch
    pieces.append(cur)
    for piece in pieces:
        sign = -1 if piece.startswith("-") else 1
        piece = piece.lstrip("+-")
        coeff = Fraction(sign)
        factors = piece.split("*")
        exps = [0] * n
        for fac in factors:
            mm = _MONO_RE.match(fac)
            fm = _FACTOR_RE.match(fac)
            if mm:
                e = [int(x) for x in mm.group(1).split(",") if x.strip()]
                if len(e) > n:
                    raise ValueError(f"{fac} has more than {n} exponents")
                e += [0] * (n - len(e))
                exps = [a + b for a, b in zip(exps, e)]
            elif fm:
                i = int(fm.group(1) or 1)
                if not 1 <= i <= n:
                    raise ValueError(f"variable {fac} outside y1..y{n}")
                exps[i - 1] += int(fm.group(2) or 1)
            else:
                try:
                    coeff *= Fraction(fac)
                except ValueError as exc:
                    raise ValueError(f"cannot parse factor {fac!r}") from exc
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + coeff
    return SymLaurent(n, terms)


@main.command()
@click.option("--n", "n", type=int, default=1, help="Number of integration variables.")
@click.option("--f", "f_text", type=str, default="1", help="Insertion, e.g. 'y', 'm(2,1) - 1/2*y1*y2'.")
@click.option("--alpha", type=str, default="0")
@click.option("--beta", type=str, default="0")
@click.option("--gamma", type=str, default="0")
@click.option("--oracle", is_flag=True, help="Compare with adaptive quadrature (n <= 2).")
@click.option("--json", "as_json", is_flag=True)
def selberg(n, f_text, alpha, beta, gamma, oracle, as_json):
    """Exact S_n[f]/S_n[1], optionally against quadrature."""
    from .symfunc import quadrature_oracle, selberg_eval
    try:
        params = SelbergParams(n, Fraction(alpha), Fraction(beta), Fraction(gamma))
        f = parse_symmetric(f_text, n)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if oracle and n > 2:
        click.echo("error: the quadrature oracle handles n <= 2", err=True)
        sys.exit(2)
    try:
        value = selberg_eval(f, params)
    except InadmissibleParams as exc:
        click.echo(f"error: inadmissible parameters, on hyperplane(s): {exc}", err=True)
        sys.exit(2)
    out = {"n": n, "f": f_text, "alpha": alpha, "beta": beta, "gamma": gamma,
           "value": render_scalar(value)}
    if oracle:
        try:
            num = quadrature_oracle(f, params)
        except NonConvergent as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        exact = float(value)
        out["oracle"] = num
        out["rel_err"] = abs(num - exact) / abs(exact) if exact else abs(num)
    if as_json:
        click.echo(json.dumps(out, sort_keys=True))
    else:
        click.echo(f"value: {out['value']}")
        if oracle:
            click.echo(f"oracle: {out['oracle']!r}  rel_err: {out['rel_err']:.3e}")


if __name__ == "__main__":
    main()
