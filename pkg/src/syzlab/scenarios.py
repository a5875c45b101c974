"""Scenario runner: desk-scale case studies with reproducible reports.

Each run_* function instantiates one family (plane curves, curves on a
Hirzebruch surface, nodal curves on the quadric, syzygy projection
studies, divisor addition), executes its checks and returns a
ScenarioReport whose every numeric claim carries a provenance tag
("paper-formula" for closed forms, "computed" for exact mod-p output).

Working-characteristic policy, stated in every report: a dimension
computed over GF(p) upper-bounds the characteristic-0 Betti number of a
lift, so vanishing over GF(p) certifies char-0 vanishing of the lifted
instance, while every non-vanishing verdict is confirmed by re-running
with a second independent prime.
"""

from __future__ import annotations

import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from hashlib import sha256
from math import comb

import numpy as np

from . import _gauss, _poly
from .ff_linalg import Prime, random_prime
from .graded_modules import (CurveModel, GradedModule, SearchBudgetError,
                             build_ambient_module, build_blowup_module,
                             build_restriction_module, find_rational_points,
                             random_form, sections_with_base_conditions,
                             truncate_at_points)
from .koszul import (betti_table, cell_dim, cell_dim_best, cell_nonzero,
                     check_Mk, duality_instance_check,
                     estimate_differential_nnz, euler_check,
                     restriction_cell_lower_bound, ClassSpace,
                     verify_standing_hypotheses)
from .multilinear import (DivisorClass, SurfaceModel, HIRZEBRUCH, P2,
                          QUADRIC_BLOWUP, section_count)
from .projection import (ProjectionContext, SyzygyClass, del_global,
                         ehbauer_membership, generic_drop_check, lift_eta,
                         project_syzygy, remark_identity_check,
                         sequence_exactness_check, survival_sample)

SCHEMA = "syzlab-report/1"

SEMICONTINUITY_POLICY = (
    "GF(p) Betti dimensions upper-bound those of a characteristic-0 lift: "
    "vanishing over GF(p) certifies char-0 vanishing of the lifted instance; "
    "non-vanishing verdicts are confirmed with a second independent prime.")

#: Largest Koszul differential (nonzero entries) assembled without --force.
NNZ_GUARDRAIL = 20_000_000

#: Cochain size up to which sweep cells get exact dimensions; beyond it
#: a zero/nonzero certificate (exact, early-exit blockwise) is recorded.
SWEEP_EXACT_CAP = 26_000


class ConfigError(ValueError):
    """Invalid scenario configuration (exit code 2)."""


class UnsupportedDivisorError(ConfigError):
    """Divisor specification not realizable on the ambient surface."""


@dataclass
class ScenarioConfig:
    scenario: str
    params: dict
    prime: str = "auto:31"
    seed: int = 0
    checks: list | None = None
    fmt: str = "text"
    force: bool = False
    threads: int = 1

    def to_json(self) -> dict:
        return {"scenario": self.scenario, "params": dict(self.params),
                "prime": self.prime, "seed": self.seed,
                "checks": self.checks, "fmt": self.fmt,
                "force": self.force, "threads": self.threads}


@dataclass
class ScenarioReport:
    schema: str
    scenario: str
    config: dict
    primes: list
    policy: str
    checks: list = field(default_factory=list)
    betti: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    passed: bool = True

    def add_check(self, name: str, expected, computed, provenance: str,
                  caveat: str = "", route: str = "") -> bool:
        ok = expected == computed
        rec = {"name": name, "expected": expected, "computed": computed,
               "expected_provenance": provenance, "verdict": bool(ok)}
        if caveat:
            rec["caveat"] = caveat
        if route:
            rec["route"] = route
        self.checks.append(rec)
        if not ok:
            self.passed = False
        return ok

    def add_betti(self, label: str, prime: int, cells: list):
        self.betti.append({"label": label, "prime": prime,
                           "cells": [[int(p), int(q), int(d)] for p, q, d in cells]})

    def digest(self) -> str:
        """Reproducibility digest over everything except the timings."""
        doc = asdict(self)
        doc.pop("timings", None)
        return sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _resolve_primes(policy: str | int, seed: int) -> tuple[Prime, Prime]:
    if isinstance(policy, int):
        first = Prime(policy)
        second = random_prime(31, seed + 104729)
    else:
        if not str(policy).startswith("auto"):
            raise ConfigError(f"unknown prime policy {policy!r}")
        bits = int(str(policy).split(":")[1]) if ":" in str(policy) else 31
        first = random_prime(bits, seed)
        second = random_prime(bits, seed + 104729)
    bump = 1
    while second.p == first.p:
        second = random_prime(31, seed + 104729 + bump)
        bump += 1
    return first, second


def _mk_record(verdict) -> dict:
    return {"k": verdict.k, "h0L": verdict.h0L, "threshold": verdict.threshold,
            "verdict": verdict.verdict,
            "witnesses": [[p, d] for p, d in verdict.witnesses],
            "routes": {str(p): r for p, r in verdict.routes.items()}}


def _guardrail(module: GradedModule, cells: list, force: bool):
    worst = 0
    for p, q in cells:
        worst = max(worst, estimate_differential_nnz(module, p, q))
    if worst > NNZ_GUARDRAIL and not force:
        raise ConfigError(
            f"largest Koszul matrix would carry {worst} nonzeros "
            f"(> {NNZ_GUARDRAIL}); pass --force to proceed")


def _pmap(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _threshold_sweep(module: GradedModule, threads: int):
    """Per-p zero/nonzero statuses over [1, dim V - 1], exact everywhere.

    Cells whose cochain space is small get exact dimensions (recorded
    in the Betti table); larger cells get an exact blockwise
    zero/nonzero certificate instead of a full dimension.
    """
    h0 = module.vdim

    def job(p):
        ncols = module.dim(1) * comb(h0, p)
        if ncols <= SWEEP_EXACT_CAP:
            d = cell_dim(module, p, 1)
            return p, d, True
        return p, (1 if cell_nonzero(module, p, 1) else 0), False

    rows = _pmap(job, list(range(1, h0)), threads)
    exact_cells = [(p, 1, d) for p, d, is_exact in rows if is_exact]
    statuses = {p: d > 0 for p, d, _ in rows}
    certified = [p for p, _, is_exact in rows if not is_exact]
    return exact_cells, statuses, certified


def _plane_modules(d: int, k: int, prime: Prime, seed: int, qmax: int = 3):
    surf = SurfaceModel(P2)
    rng = random.Random(("plane-form", d, prime.p, seed).__repr__())
    f = random_form(surf, DivisorClass.degree(d), prime, rng)
    curve = CurveModel(surf, f, DivisorClass.degree(d), prime)
    amb = build_ambient_module(surf, DivisorClass.degree(0),
                               DivisorClass.degree(k), qmax, prime)
    sub = build_ambient_module(surf, DivisorClass.degree(-d),
                               DivisorClass.degree(k), qmax, prime)
    a_mod = build_restriction_module(amb, sub, f, DivisorClass.degree(d),
                                     curve=curve)
    return surf, f, curve, amb, sub, a_mod


# -- plane curves (degree d, k = d - 1) ---------------------------------------

def run_plane_curve(d: int, prime_policy="auto:31", seed: int = 0,
                    force: bool = False, threads: int = 1,
                    problem_5_4_gammas: list | None = None,
                    fmt: str = "text") -> ScenarioReport:
    """Smooth plane curve of degree d: threshold, (M_{k-1}), failure, duality."""
    if d < 3:
        raise ConfigError("plane scenario needs degree d >= 3")
    k = d - 1
    t0 = time.time()
    p1, p2 = _resolve_primes(prime_policy, seed)
    cfg = ScenarioConfig("plane_curve", {"d": d}, str(prime_policy), seed,
                         fmt=fmt, force=force, threads=threads)
    rep = ScenarioReport(SCHEMA, "plane_curve", cfg.to_json(),
                         [p1.p, p2.p], SEMICONTINUITY_POLICY)
    timings = {}

    # (a) ambient threshold sweep for O(k): zero iff p >= N(k)
    t = time.time()
    surf = SurfaceModel(P2)
    amb_k = build_ambient_module(surf, DivisorClass.degree(0),
                                 DivisorClass.degree(k), 3, p1)
    h0 = amb_k.vdim
    n_of_k = h0 - k
    _guardrail(amb_k, [(p, 1) for p in range(1, h0)], force)
    cells, statuses, certified = _threshold_sweep(amb_k, threads)
    rep.add_betti(f"K_(p,1)(P2,O({k}))", p1.p, cells)
    caveat = (f"cells {certified} carry exact zero/nonzero certificates "
              f"instead of full dimensions" if certified else "")
    rep.add_check(f"surface vanishing iff p >= N({k}) = {n_of_k}", True,
                  all(statuses[p] == (p < n_of_k) for p in range(1, h0)),
                  "paper-formula", caveat=caveat)
    amb_k2 = build_ambient_module(surf, DivisorClass.degree(0),
                                  DivisorClass.degree(k), 3, p2)
    rep.add_check(f"sharpness K_({n_of_k - 1},1)(P2,O({k})) != 0 (2 primes)",
                  True,
                  statuses[n_of_k - 1] and cell_nonzero(amb_k2, n_of_k - 1, 1),
                  "paper-formula")
    timings["surface_sweep"] = round(time.time() - t, 3)

    # (b) genus bookkeeping and (M_{k-1}) for O_X(k), both primes
    t = time.time()
    genus = (d - 1) * (d - 2) // 2
    mk_first = None
    for pr in (p1, p2):
        _, f, curve, amb, sub, a_mod = _plane_modules(d, k, pr, seed)
        rep.add_check(f"Riemann-Roch dim A_1 (p={pr.p})", d * k - genus + 1,
                      a_mod.dim(1), "paper-formula")
        verdict = check_Mk(a_mod, k - 1)
        if mk_first is None:
            mk_first = verdict
            rep.add_check(f"(M_{k - 1}) for (X, O_X({k}))", True, verdict.verdict,
                          "paper-formula",
                          caveat="vanishing certified mod p (semicontinuity)")
            rep.betti.append({"label": f"Mk window O_X({k})", "prime": pr.p,
                              "cells": [[p, 1, dd] for p, dd in verdict.witnesses]})
            rep.add_check("threshold arithmetic h0L - k' - 1",
                          verdict.h0L - (k - 1) - 1, verdict.threshold, "computed")
            rep.add_check("euler strand l=2 on the curve module", True,
                          euler_check(a_mod, 2), "computed")
        else:
            rep.add_check(f"(M_{k - 1}) verdict reproduced (p={pr.p})",
                          mk_first.verdict, verdict.verdict, "computed")
    timings["mk_check"] = round(time.time() - t, 3)

    # (c) failure of (M_{k-1}) for O_X(k-1) via the injectivity route;
    # the sharp ambient threshold needs k - 1 >= 2, so d >= 4.
    t = time.time()
    n_prev = section_count(surf, DivisorClass.degree(k - 1)) - (k - 1)
    p_star = n_prev - 1
    for pr, tag in ((p1, "p1"), (p2, "p2")) if k - 1 >= 2 else ():
        surf_, f_, curve_, amb_prev, sub_prev, a_prev = _plane_modules(
            d, k - 1, pr, seed)
        bound = restriction_cell_lower_bound(a_prev, p_star)
        rep.add_check(
            f"K_({p_star},1)(X,O_X({k - 1})) != 0 via injectivity ({tag})",
            True, bound is not None and bound[0] > 0, "paper-formula",
            route=bound[1]["rule"] if bound else "unavailable")
        if pr is p1 and d <= 5:
            honest = cell_dim(a_prev, p_star, 1)
            rep.add_check(f"honest K_({p_star},1)(X,O_X({k - 1})) agrees",
                          bound[0], honest, "computed", route="direct")
    timings["failure_instance"] = round(time.time() - t, 3)

    # (d) Green-duality instance
    if k <= 3:
        t = time.time()
        ok, details = duality_instance_check(k, p1)
        rep.add_check(f"duality instance k={k}", True, ok, "paper-formula")
        rep.add_betti(f"duality pairs k={k}", p1.p,
                      [(rec["p"], 1, rec["left"]) for rec in details])
        timings["duality"] = round(time.time() - t, 3)

    # optional Problem-5.4 style exploratory sweep (no claims)
    if problem_5_4_gammas:
        t = time.time()
        _, f, curve, amb, sub, a_mod = _plane_modules(d, k, p1, seed)
        rows = _colinear_point_rows(curve, max(problem_5_4_gammas), seed)
        for gamma in problem_5_4_gammas:
            pts = rows[:gamma]
            t_mod = truncate_at_points(a_mod, [(x, 1) for x in pts], qmax=2)
            verdict = check_Mk(t_mod, k - 1)
            rep.checks.append({
                "name": f"problem-5-4 gamma={gamma} (exploratory)",
                "expected": None, "computed": verdict.verdict,
                "expected_provenance": "exploratory", "verdict": True,
                "detail": _mk_record(verdict)})
        timings["problem_5_4"] = round(time.time() - t, 3)

    timings["total"] = round(time.time() - t0, 3)
    rep.timings = timings
    return rep


def _colinear_point_rows(curve: CurveModel, gamma: int, seed: int):
    """gamma distinct smooth curve points on one line x = a*z."""
    rng = random.Random(("colinear", seed).__repr__())
    p = curve.p
    for _ in range(200):
        a = rng.randrange(p)
        out = {}
        for (i, j, _k2), c in curve.form.items():
            out[j] = (out.get(j, 0) + c * pow(a, i, p)) % p
        g = _poly.utrim([out.get(t, 0) for t in range(max(out) + 1)]) if out else []
        if not g:
            continue
        roots = _poly.uroots(g, p, rng)
        pts = []
        for r in roots:
            try:
                pts.append(curve.normalize((a, r, 1)))
            except ValueError:
                continue
        if len(pts) >= gamma:
            return pts[:gamma]
    raise SearchBudgetError("no line with enough rational curve points", [])


# -- Hirzebruch surfaces ------------------------------------------------------

def hirzebruch_intersection(e: int, ab: tuple, cd: tuple) -> int:
    (a, b), (c, d2) = ab, cd
    return a * d2 + b * c - a * c * e


def run_hirzebruch(e: int, k: int, m: int, mode: str = "gonality",
                   prime_policy="auto:31", seed: int = 0, force: bool = False,
                   threads: int = 1, fmt: str = "text") -> ScenarioReport:
    """Curve X = kC0 + mf on Sigma_e: gonality or canonical mode checks."""
    if e < 0:
        raise ConfigError("Hirzebruch invariant e must be >= 0")
    if mode == "gonality":
        if k < 2 or m < max(k * e, k + e):
            raise ConfigError("gonality mode needs k >= 2 and m >= max(ke, k+e)")
    elif mode == "canonical":
        if k < 3 or m < max(k * e + 1, k + 1, k + 2 * e):
            raise ConfigError(
                "canonical mode needs k >= 3 and m >= max(ke+1, k+1, k+2e)")
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    two_g = (k - 1) * (2 * m - 2 - k * e)
    if two_g % 2:
        raise ConfigError("ke parity makes the genus non-integral")
    genus = two_g // 2

    t0 = time.time()
    p1, p2 = _resolve_primes(prime_policy, seed)
    cfg = ScenarioConfig("hirzebruch", {"e": e, "k": k, "m": m, "mode": mode},
                         str(prime_policy), seed, fmt=fmt, force=force,
                         threads=threads)
    rep = ScenarioReport(SCHEMA, "hirzebruch", cfg.to_json(),
                         [p1.p, p2.p], SEMICONTINUITY_POLICY)
    timings = {}
    surf = SurfaceModel(HIRZEBRUCH, e=e)
    x_cls = DivisorClass.ruled(k, m)

    if mode == "gonality":
        l_cls = DivisorClass.ruled(k - 1, m - 1)     # H_{k,m}
        t = time.time()
        amb = build_ambient_module(surf, DivisorClass.ruled(0, 0), l_cls, 3, p1)
        h0 = amb.vdim
        n_km = h0 - k
        rep.add_check(f"N(k,m) inequality >= h0(H_(k-1,m-1)) + 1", True,
                      n_km >= section_count(surf, DivisorClass.ruled(k - 2, m - 2)) + 1,
                      "computed",
                      caveat="inline inequality verified numerically per scenario")
        _guardrail(amb, [(p, 1) for p in range(1, h0)], force)
        cells, statuses, certified = _threshold_sweep(amb, threads)
        rep.add_betti(f"K_(p,1)(Sigma_{e},H_({k},{m}))", p1.p, cells)
        rep.add_check(f"surface vanishing for p >= N(k,m) = {n_km}", True,
                      all(not statuses[p] for p in range(n_km, h0)),
                      "paper-formula",
                      caveat="vanishing certified mod p (semicontinuity)"
                             + (f"; certificates at {certified}" if certified
                                else ""))
        timings["surface_sweep"] = round(time.time() - t, 3)

        t = time.time()
        deg_l = hirzebruch_intersection(e, (k - 1, m - 1), (k, m))
        mk_first = None
        for pr in (p1, p2):
            rng = random.Random(("hirz-form", e, k, m, pr.p, seed).__repr__())
            f = random_form(surf, x_cls, pr, rng)
            ambp = amb if pr is p1 else build_ambient_module(
                surf, DivisorClass.ruled(0, 0), l_cls, 3, pr)
            sub = build_ambient_module(surf, DivisorClass.ruled(-k, -m),
                                       l_cls, 3, pr)
            a_mod = build_restriction_module(ambp, sub, f, x_cls,
                                             curve=CurveModel(surf, f, x_cls, pr))
            rep.add_check(f"genus bookkeeping dim A_1 (p={pr.p})",
                          deg_l - genus + 1, a_mod.dim(1), "paper-formula")
            verdict = check_Mk(a_mod, k - 1)
            if mk_first is None:
                mk_first = verdict
                rep.add_check(f"(M_{k - 1}) for (X, H_(k,m)|_X)", True,
                              verdict.verdict, "paper-formula",
                              caveat="vanishing certified mod p (semicontinuity)")
                rep.betti.append({"label": "Mk window", "prime": pr.p,
                                  "cells": [[p, 1, dd] for p, dd in verdict.witnesses]})
                rep.add_check("euler strand l=2 on the curve module", True,
                              euler_check(a_mod, 2), "computed")
            else:
                rep.add_check(f"(M_{k - 1}) reproduced (p={pr.p})",
                              mk_first.verdict, verdict.verdict, "computed")
        timings["mk_check"] = round(time.time() - t, 3)
    else:
        # canonical mode: H = K_Sigma + X, restriction computes K_X
        h_cls = DivisorClass.ruled(k - 2, m - 2 - e)
        t = time.time()
        h0_h = section_count(surf, h_cls)
        rep.add_check("h0(K_Sigma + X) equals the genus", genus, h0_h,
                      "paper-formula")
        rep.add_check("h0(H - X) = 0", 0,
                      section_count(surf, h_cls - x_cls), "computed")
        rep.add_check("h0(2H - X) <= g - k", True,
                      section_count(surf, 2 * h_cls - x_cls) <= genus - k,
                      "paper-formula")
        first_cells = None
        for pr in (p1, p2):
            amb = build_ambient_module(surf, DivisorClass.ruled(0, 0), h_cls, 3, pr)
            sub = build_ambient_module(surf, DivisorClass.ruled(-k, -m), h_cls, 3, pr)
            rng = random.Random(("hirz-canon", e, k, m, pr.p, seed).__repr__())
            f = random_form(surf, x_cls, pr, rng)
            a_mod = build_restriction_module(amb, sub, f, x_cls,
                                             curve=CurveModel(surf, f, x_cls, pr))
            rep.add_check(f"h0(K_X) = g (p={pr.p})", genus, a_mod.dim(1),
                          "paper-formula")
            cells = [(p, cell_dim_best(a_mod, p, 1)[0])
                     for p in range(1, a_mod.vdim)]
            if first_cells is None:
                first_cells = cells
                rep.add_betti("K_(p,1)(X,K_X)", pr.p, [(p, 1, dd) for p, dd in cells])
                rep.add_check(f"canonical vanishing for p >= g-k+1 = {genus - k + 1}",
                              True,
                              all(dd == 0 for p, dd in cells if p >= genus - k + 1),
                              "paper-formula",
                              caveat="vanishing certified mod p (semicontinuity)")
                rep.add_check("euler strand l=2 on the canonical module", True,
                              euler_check(a_mod, 2), "computed")
            else:
                rep.add_check(f"nonvanishing probe K_({genus - k},1) reproduced "
                              f"(p={pr.p})",
                              dict(first_cells).get(genus - k, 0) > 0,
                              dict(cells).get(genus - k, 0) > 0, "computed")
        probe = dict(first_cells).get(genus - k, 0)
        rep.add_check(f"nonvanishing probe K_({genus - k},1)(X,K_X) != 0", True,
                      probe > 0, "computed",
                      caveat="consistent with X carrying a degree-k pencil")
        timings["canonical"] = round(time.time() - t, 3)

    timings["total"] = round(time.time() - t0, 3)
    rep.timings = timings
    return rep


# -- nodal curves on P1 x P1 --------------------------------------------------

def _sample_base_points(gamma: int, prime: Prime, seed: int) -> tuple:
    rng = random.Random(("blowup-points", seed, prime.p).__repr__())
    pts = []
    first, second = set(), set()
    guard = 0
    while len(pts) < gamma:
        guard += 1
        if guard > 200:
            raise ConfigError("failed to sample base points in general position")
        u, s = rng.randrange(1, prime.p), rng.randrange(1, prime.p)
        if u in first or s in second:
            continue
        first.add(u)
        second.add(s)
        pts.append(((u, 1), (s, 1)))
    return tuple(pts)


def run_quadric_nodal(k: int, m: int, gamma: int, prime_policy="auto:31",
                      seed: int = 0, force: bool = False, threads: int = 1,
                      fmt: str = "text") -> ScenarioReport:
    """Nodal curve on P1 x P1 with gamma assigned nodes: Prop 7.1 instance."""
    if k < 3 or m < k:
        raise ConfigError("quadric scenario needs k >= 3 and m >= k")
    if not 0 <= gamma <= k - 2:
        raise ConfigError("gamma must satisfy 0 <= gamma <= k - 2")
    t0 = time.time()
    p1, p2 = _resolve_primes(prime_policy, seed)
    cfg = ScenarioConfig("quadric_nodal", {"k": k, "m": m, "gamma": gamma},
                         str(prime_policy), seed, fmt=fmt, force=force,
                         threads=threads)
    rep = ScenarioReport(SCHEMA, "quadric_nodal", cfg.to_json(),
                         [p1.p, p2.p], SEMICONTINUITY_POLICY)
    timings = {}
    genus = (k - 1) * (m - 1) - gamma
    mk_first = None
    for pr in (p1, p2):
        t = time.time()
        points = _sample_base_points(gamma, pr, seed)
        surf = SurfaceModel(QUADRIC_BLOWUP, e=0, points=points,
                            point_modulus=pr.p)
        mults = tuple(1 for _ in range(gamma))
        b_mod = build_blowup_module(surf, DivisorClass.ruled(k - 1, m - 1),
                                    mults, 3, pr)
        dim_v = b_mod.vdim
        if pr is p1:
            rep.add_check("dim V = km - gamma", k * m - gamma, dim_v, "computed")
            rep.add_check("dim V - k = k(m-1) - gamma", k * (m - 1) - gamma,
                          dim_v - k, "paper-formula")
            rep.add_check("h0(H - X) = 0", 0, section_count(
                SurfaceModel(HIRZEBRUCH, e=0), DivisorClass.ruled(-1, -1)),
                "paper-formula")
        sub = build_blowup_module(surf, DivisorClass.ruled(k - 1, m - 1), mults,
                                  3, pr, twist_class=DivisorClass.ruled(-k, -m),
                                  twist_mult_shift=-2)
        xbasis, xmonos, _ = sections_with_base_conditions(
            surf, DivisorClass.ruled(k, m), [2] * gamma, pr)
        if pr is p1:
            rep.add_check("dim H^0(X-class with double points)",
                          (k + 1) * (m + 1) - 3 * gamma, xbasis.shape[0],
                          "computed")
        rng = random.Random(("quadric-form", k, m, gamma, pr.p, seed).__repr__())
        coeffs = np.array([rng.randrange(pr.p) for _ in range(xbasis.shape[0])],
                          dtype=np.int64)
        fvec = _gauss._row_combo_mod(coeffs, xbasis, pr.p)
        f = _poly.poly_from_vector(fvec, xmonos, pr.p)
        if pr is p1:
            rep.add_check("irreducibility evidence (no ruling-line factor)", True,
                          _no_ruling_factor(f, points, pr.p), "computed",
                          caveat="evidence only; full smoothness not verified")
        quad_surface = SurfaceModel(HIRZEBRUCH, e=0)
        a_mod = build_restriction_module(
            b_mod, sub, f, DivisorClass.ruled(k, m, mults), check_classes=False,
            curve=CurveModel(quad_surface, f, DivisorClass.ruled(k, m), pr))
        deg_l = (k - 1) * m + k * (m - 1) - 2 * gamma
        if pr is p1:
            rep.add_check("Riemann-Roch dim A_1", deg_l - genus + 1,
                          a_mod.dim(1), "paper-formula")
        verdict = check_Mk(a_mod, k - 1)
        if mk_first is None:
            mk_first = verdict
            rep.add_check(f"(M_{k - 1}) for (X, H|_X)", True, verdict.verdict,
                          "paper-formula",
                          caveat="vanishing certified mod p (semicontinuity)")
            rep.betti.append({"label": "Mk window", "prime": pr.p,
                              "cells": [[p, 1, dd] for p, dd in verdict.witnesses]})
            rep.add_check("euler strand l=2", True, euler_check(a_mod, 2),
                          "computed")
        else:
            rep.add_check(f"(M_{k - 1}) reproduced (p={pr.p})",
                          mk_first.verdict, verdict.verdict, "computed")
        timings[f"prime_{pr.p}"] = round(time.time() - t, 3)

    if gamma == 0:
        t = time.time()
        cross = run_hirzebruch(0, k, m, "gonality", prime_policy, seed,
                               force=force, threads=threads)
        cross_mk = [c for c in cross.checks if c["name"].startswith("(M_")][0]
        rep.add_check("gamma=0 cross-check vs Sigma_0 builder",
                      cross_mk["computed"], mk_first.verdict, "computed")
        timings["cross_check"] = round(time.time() - t, 3)

    rep.timings = {**timings, "total": round(time.time() - t0, 3)}
    return rep


def _no_ruling_factor(f: dict, points: tuple, p: int) -> bool:
    """Evidence that f is not divisible by a ruling line through a base point."""
    if not f:
        return False
    for (u0, v0), (s0, t0) in points:
        # divisible by (v0*u - u0*v) iff substituting (u,v) = (u0,v0) kills f
        first = {}
        second = {}
        for (i, j, kk, ll), c in f.items():
            key = (kk, ll)
            val = c * pow(u0, i, p) * pow(v0, j, p) % p
            first[key] = (first.get(key, 0) + val) % p
            key2 = (i, j)
            val2 = c * pow(s0, kk, p) * pow(t0, ll, p) % p
            second[key2] = (second.get(key2, 0) + val2) % p
        if not any(first.values()) or not any(second.values()):
            return False
    return True


# -- divisor addition ---------------------------------------------------------

def run_add_divisor(e: int, k: int, m: int, fibers: int = 1,
                    divisor_kind: str = "fiber", prime_policy="auto:31",
                    seed: int = 0, force: bool = False, threads: int = 1,
                    fmt: str = "text") -> ScenarioReport:
    """Verify (M_{k-1}) before and after adding ambient fiber divisors."""
    if divisor_kind != "fiber":
        raise UnsupportedDivisorError(
            "only ambient-realizable fiber divisors are supported; for "
            "point subtraction see the projection study's generic drop check")
    if fibers < 0:
        raise ConfigError("fiber count must be nonnegative")
    if k < 2 or m < max(k * e, k + e):
        raise ConfigError("base scenario needs k >= 2 and m >= max(ke, k+e)")
    t0 = time.time()
    p1, p2 = _resolve_primes(prime_policy, seed)
    cfg = ScenarioConfig("add_divisor",
                         {"e": e, "k": k, "m": m, "fibers": fibers},
                         str(prime_policy), seed, fmt=fmt, force=force,
                         threads=threads)
    rep = ScenarioReport(SCHEMA, "add_divisor", cfg.to_json(),
                         [p1.p, p2.p], SEMICONTINUITY_POLICY)
    surf = SurfaceModel(HIRZEBRUCH, e=e)
    x_cls = DivisorClass.ruled(k, m)
    two_g = (k - 1) * (2 * m - 2 - k * e)
    if two_g % 2:
        raise ConfigError("ke parity makes the genus non-integral")
    genus = two_g // 2
    timings = {}
    verdicts = {}
    for label, extra in (("L0", 0), ("L0+D", fibers)):
        t = time.time()
        l_cls = DivisorClass.ruled(k - 1, m - 1 + extra)
        first = None
        for pr in (p1, p2):
            amb = build_ambient_module(surf, DivisorClass.ruled(0, 0), l_cls, 3, pr)
            sub = build_ambient_module(surf, DivisorClass.ruled(-k, -m),
                                       l_cls, 3, pr)
            rng = random.Random(("addD-form", e, k, m, pr.p, seed).__repr__())
            f = random_form(surf, x_cls, pr, rng)
            a_mod = build_restriction_module(amb, sub, f, x_cls,
                                             curve=CurveModel(surf, f, x_cls, pr))
            deg_l = hirzebruch_intersection(e, (k - 1, m - 1 + extra), (k, m))
            rep.add_check(f"{label}: nonspecial bookkeeping dim A_1 (p={pr.p})",
                          deg_l - genus + 1, a_mod.dim(1), "paper-formula")
            verdict = check_Mk(a_mod, k - 1)
            if first is None:
                first = verdict
                rep.add_check(f"{label}: (M_{k - 1})", True, verdict.verdict,
                              "paper-formula",
                              caveat="vanishing certified mod p (semicontinuity)")
                rep.betti.append({"label": f"{label} Mk window", "prime": pr.p,
                                  "cells": [[p, 1, dd] for p, dd in verdict.witnesses]})
            else:
                rep.add_check(f"{label}: verdict reproduced (p={pr.p})",
                              first.verdict, verdict.verdict, "computed")
        verdicts[label] = first
        timings[label] = round(time.time() - t, 3)
    if fibers == 0:
        rep.add_check("D = 0 gives identical verdicts",
                      verdicts["L0"].verdict, verdicts["L0+D"].verdict,
                      "computed")
    rep.add_check("divisor addition preserves (M_k) on this instance", True,
                  (not verdicts["L0"].verdict) or verdicts["L0+D"].verdict,
                  "paper-formula")
    rep.timings = {**timings, "total": round(time.time() - t0, 3)}
    return rep


# -- projection study ---------------------------------------------------------

def run_projection_study(d: int = 4, strand: int | None = None,
                         survival_points: int = 20, membership_points: int = 5,
                         drop_degree: int | None = 5, prime_policy="auto:31",
                         seed: int = 0, force: bool = False, threads: int = 1,
                         fmt: str = "text") -> ScenarioReport:
    """Projection property suite on a plane curve of degree d."""
    if d < 3:
        raise ConfigError("projection study needs degree d >= 3")
    t0 = time.time()
    p1, p2 = _resolve_primes(prime_policy, seed)
    cfg = ScenarioConfig("projection_study",
                         {"d": d, "strand": strand,
                          "survival_points": survival_points,
                          "membership_points": membership_points,
                          "drop_degree": drop_degree},
                         str(prime_policy), seed, fmt=fmt, force=force,
                         threads=threads)
    rep = ScenarioReport(SCHEMA, "projection_study", cfg.to_json(),
                         [p1.p], SEMICONTINUITY_POLICY)
    timings = {}
    k = d - 1
    t = time.time()
    _, f, curve, amb, sub, a_mod = _plane_modules(d, k, p1, seed)
    if strand is None:
        strand = next(p for p in range(a_mod.vdim - 1, 0, -1)
                      if cell_dim_best(a_mod, p, 1)[0] > 0)
    rep.add_check("standing hypotheses (B_q = 0 for q < 0, K_{p,0} = 0)", True,
                  verify_standing_hypotheses(a_mod, [strand - 1, strand, strand + 1]),
                  "computed")
    top_dim = cell_dim_best(a_mod, strand, 1)[0]
    rep.add_check(f"strand p+1={strand} is nonzero", True, top_dim > 0,
                  "computed")
    timings["setup"] = round(time.time() - t, 3)

    # Lemma 2.2: H^0(del) injective
    t = time.time()
    del_mat, cs_hi, cs_lo = del_global(a_mod, strand)
    rep.add_check("H^0(del) injective", cs_hi.dim, del_mat.rank(),
                  "paper-formula")
    timings["del_global"] = round(time.time() - t, 3)

    # survival sampling (Lemma 2.5)
    t = time.time()
    pts = find_rational_points(curve, max(survival_points, membership_points),
                               seed=seed + 1)
    rng = random.Random(("syzygy", seed).__repr__())
    basis_hi = cs_hi.class_basis()
    coeffs = [rng.randrange(1, p1.p) for _ in range(basis_hi.shape[0])]
    alpha_rep = _gauss._row_combo_mod(np.array(coeffs, dtype=np.int64),
                                      basis_hi, p1.p)
    alpha = SyzygyClass(a_mod, strand, 1, alpha_rep)
    frac, outcomes = survival_sample(alpha, pts[:survival_points], a_mod)
    rep.add_check("survival fraction >= 0.9", True, frac >= 0.9, "computed",
                  caveat=f"fraction {frac:.2f} over {survival_points} points")
    timings["survival"] = round(time.time() - t, 3)

    # per-point pipeline: eta injectivity, Remark identity, containment
    t = time.time()
    def point_job(x):
        ctx = ProjectionContext(a_mod, x, build_truncated=True)
        cs_w = ClassSpace(ctx.w_module, strand, 1)
        wb = cs_w.class_basis()
        lifted = [cs_hi.nf(lift_eta(SyzygyClass(ctx.w_module, strand, 1, b,
                                                context="W"), ctx).rep)
                  for b in wb]
        eta_ok = (len(lifted) == 0 or _gauss.rank(
            np.array(lifted, dtype=np.int64), p1.p) == wb.shape[0])
        ident_ok = all(remark_identity_check(
            SyzygyClass(a_mod, strand, 1, b), ctx) for b in basis_hi)
        members = [ehbauer_membership(project_syzygy(
            SyzygyClass(a_mod, strand, 1, b), ctx), ctx) for b in basis_hi]
        return eta_ok, ident_ok, all(members)

    results = _pmap(point_job, pts[:membership_points], threads)
    rep.add_check("eta_x class-injective at sampled points", True,
                  all(r[0] for r in results), "paper-formula")
    rep.add_check("del_x = (ev_x (x) id) o H^0(del), bit-exact", True,
                  all(r[1] for r in results), "paper-formula")
    rep.add_check("containment in K_(p,1)(X, L-x), all projected classes", True,
                  all(r[2] for r in results), "paper-formula")
    timings["per_point"] = round(time.time() - t, 3)

    # exactness bookkeeping at the first point
    t = time.time()
    ctx0 = ProjectionContext(a_mod, pts[0])
    ex = sequence_exactness_check(ctx0, strand)
    rep.add_check("splitting-sequence rank bookkeeping", True,
                  bool(ex.get("exact")), "computed",
                  caveat=str({kk: vv for kk, vv in ex.items() if kk != "applicable"}))
    timings["exactness"] = round(time.time() - t, 3)

    # Cor 3.3 persistence on the drop scenario
    if drop_degree:
        t = time.time()
        _, f5, curve5, amb5, sub5, a5 = _plane_modules(drop_degree,
                                                       drop_degree - 2, p1, seed)
        witness = next(p for p in range(a5.vdim - 1, 0, -1)
                       if cell_dim_best(a5, p, 1)[0] > 0)
        pts5 = find_rational_points(curve5, membership_points, seed=seed + 2)
        drop = generic_drop_check(a5, witness, pts5)
        rep.add_check(f"drop persistence d={drop_degree}, strand {witness}", True,
                      drop["passed"], "paper-formula",
                      caveat=f"dims {[r['dim'] for r in drop['per_point']]}")
        timings["drop_check"] = round(time.time() - t, 3)

    rep.timings = {**timings, "total": round(time.time() - t0, 3)}
    return rep


# -- serialization ------------------------------------------------------------

def emit_report(report: ScenarioReport, fmt: str = "text") -> str:
    """Serialize a report: human text, per-cell csv, or structured JSON."""
    if fmt == "structured":
        return json.dumps(asdict(report), indent=2, sort_keys=True)
    if fmt == "csv":
        lines = ["table,prime,p,q,dim"]
        for tab in report.betti:
            for p, q, dd in tab["cells"]:
                lines.append(f"{tab['label']},{tab['prime']},{p},{q},{dd}")
        return "\n".join(lines) + "\n"
    if fmt == "text":
        lines = [f"scenario: {report.scenario}",
                 f"primes: {report.primes}",
                 f"policy: {report.policy}", ""]
        for c in report.checks:
            status = "PASS" if c["verdict"] else "FAIL"
            lines.append(f"[{status}] {c['name']}: expected={c['expected']} "
                         f"computed={c['computed']} ({c['expected_provenance']})")
            if c.get("caveat"):
                lines.append(f"       note: {c['caveat']}")
        for tab in report.betti:
            lines.append("")
            lines.append(f"betti table {tab['label']} (p={tab['prime']}):")
            lines.append("  " + "  ".join(f"({p},{q})={dd}"
                                          for p, q, dd in tab["cells"]))
        lines.append("")
        lines.append(f"timings: {report.timings}")
        lines.append(f"overall: {'PASS' if report.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def parse_report(text: str) -> ScenarioReport:
    """Inverse of emit_report for the structured format."""
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unknown report schema {doc.get('schema')!r}")
    return ScenarioReport(**doc)
