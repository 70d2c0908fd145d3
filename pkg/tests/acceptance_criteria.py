"""Acceptance criteria as callable experiments returning plain dicts.

Each crit<N>(threads) returns a JSON-able dict of measured numerics
plus an "ok" flag.  No wall times are stored, so two runs with
different thread counts must return equal dicts when the numerics
agree; the determinism criterion compares them directly.  Oracles are
computed here, independently of the library's own solvers (bisection
for the fixed-point root, closed forms for bounds and multipliers).

Criterion 2 note: the defect |Re g_s(t) - t| decays like e^{-t}, which
is below double resolution for t >= 50, so the gated sequence realizes
as exact zeros (trivially non-increasing and < 0.1).  The visible decay
is gated at t = 5, 10, 20 instead, where e^{-t} is representable.

Criterion 6 note: pairs are drawn with distinct first entries.  In the
parameter plane rays sharing a first entry run exponentially close at
Re kappa = 100 (gap below doubles), so their order there is not a
numerical observable; the dynamic plane resolves such ties by shifting,
but the comparison set must be common to both planes.
"""

from __future__ import annotations

import math
import random

from exporay.address import ExternalAddress, enumerate_periodic, lex_cmp, sort_lex
from exporay.geometry import Rect
from exporay.parallel import parallel_map
from exporay.parameter import (
    check_parameter_ray_bound,
    land_parameter_ray,
    param_vertical_order,
    scan_components,
    trace_parameter_ray,
)
from exporay.rays import eval_ray, functional_residual, land_ray, vertical_order
from exporay.verify import (
    verify_holomorphic_motion,
    verify_theorem2,
)

KAPPAS = (-2 + 0j, -2 + 0.5j, 0.3j)
ZERO = ExternalAddress.parse("|0")


def address_pool() -> list:
    """All addresses of period <= 3 with entries in [-2, 2] (145 total)."""
    pool = set()
    for n in (1, 2, 3):
        pool.update(enumerate_periodic(n, 2))
    return sort_lex(list(pool))


def _c(z: complex) -> list:
    return [z.real, z.imag]


def crit1(threads=None) -> dict:
    """One-step functional equation residual over the desk-scale grid."""
    pool = address_pool()
    ts = (0.5, 1.0, 2.0, 5.0)

    def worst(s):
        return max(functional_residual(k, s, t) for k in KAPPAS for t in ts)

    mx = max(parallel_map(worst, pool, threads=threads))
    return {
        "criterion": 1,
        "addresses": len(pool),
        "kappas": [_c(k) for k in KAPPAS],
        "t_values": list(ts),
        "max_residual": mx,
        "threshold": 1e-9,
        "ok": mx < 1e-9,
    }


def crit2(threads=None) -> dict:
    """Asymptotics: Re g_s(t) - t vanishes as t grows."""
    pool = address_pool()
    gate_ts = (50.0, 100.0, 200.0)
    decay_ts = (5.0, 10.0, 20.0)

    def defects(s):
        return tuple(
            max(abs(eval_ray(k, s, t).z.real - t) for k in KAPPAS)
            for t in gate_ts + decay_ts
        )

    rows = parallel_map(defects, pool, threads=threads)
    gate = [max(r[i] for r in rows) for i in range(len(gate_ts))]
    decay = [max(r[len(gate_ts) + i] for r in rows) for i in range(len(decay_ts))]
    ok = (
        all(a >= b for a, b in zip(gate, gate[1:]))
        and gate[-1] < 0.1
        and all(a > b for a, b in zip(decay, decay[1:]))
    )
    return {
        "criterion": 2,
        "addresses": len(pool),
        "gate_t": list(gate_ts),
        "gate_defect": gate,
        "decay_t": list(decay_ts),
        "decay_defect": decay,
        "threshold": 0.1,
        "ok": ok,
    }


def bisect_fixed_point() -> float:
    """Oracle: 80-step bisection for x = exp(x) - 2 on (1, 1.2)."""
    lo, hi = 1.0, 1.2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if math.exp(mid) - 2.0 - mid > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def crit3(threads=None) -> dict:
    """Zero-address ray at kappa = -2 lands on the repelling fixed point."""
    root = bisect_fixed_point()
    est = land_ray(-2 + 0j, ZERO)
    err = abs(est.limit - root)
    lam = est.orbit.multiplier
    ok = (
        est.converged
        and err < 1e-8
        and est.orbit.stability == "repelling"
        and abs(lam) > 3.0
    )
    return {
        "criterion": 3,
        "oracle_root": root,
        "landing": _c(est.limit),
        "error": err,
        "stability": est.orbit.stability,
        "multiplier": _c(lam),
        "threshold": 1e-8,
        "ok": ok,
    }


def crit4(threads=None) -> dict:
    """Zero-address parameter ray lands at kappa = -1 after polishing."""
    tr = trace_parameter_ray(ZERO, 30.0, 1e-3)
    pp = land_parameter_ray(tr)
    err = abs(pp.kappa - (-1 + 0j))
    return {
        "criterion": 4,
        "landing": _c(pp.kappa),
        "error": err,
        "orbit_period": pp.orbit_period,
        "ray_period": pp.ray_period,
        "threshold": 1e-6,
        "ok": err < 1e-6,
    }


def crit5(threads=None) -> dict:
    """Magnitude bound along the constant-403 parameter ray."""
    s = ExternalAddress.parse("|403")
    tr = trace_parameter_ray(s, 30.0, 0.5, steps=40)
    rep = check_parameter_ray_bound(s, tr)
    formula = 2.0 * math.pi * 403.0 / 5.0
    ok = (
        rep["all_above"]
        and rep["min_margin"] > 0.0
        and abs(rep["kappa_bound"] - formula) < 1e-9
    )
    return {
        "criterion": 5,
        "address": str(s),
        "samples": rep["samples"],
        "kappa_bound": rep["kappa_bound"],
        "min_margin": rep["min_margin"],
        "ok": ok,
    }


def crit6(threads=None) -> dict:
    """Vertical order equals lexicographic order in both planes."""
    rng = random.Random(6)
    pool = address_pool()
    pairs = []
    while len(pairs) < 10:
        a, b = rng.sample(pool, 2)
        if a.entry(1) != b.entry(1):
            pairs.append((a, b))

    def check(pair):
        a, b = pair
        want = "below" if lex_cmp(a, b) < 0 else "above"
        dyn = vertical_order(-2 + 0j, a, b, R=100.0)
        par = param_vertical_order(a, b, R=100.0)
        return {
            "pair": [str(a), str(b)],
            "lex": want,
            "dynamic": dyn,
            "parameter": par,
            "ok": dyn == want and par == want,
        }

    cases = list(parallel_map(check, pairs, threads=threads))
    return {
        "criterion": 6,
        "pairs": len(cases),
        "cases": cases,
        "ok": all(c["ok"] for c in cases),
    }


def crit7(threads=None) -> dict:
    """Ray coverage of the Newton-grid orbits at kappa = -2."""
    box = Rect(-6.0, 6.0, -10.0, 10.0)
    rep2 = verify_theorem2(-2 + 0j, 2, box, 2, threads=threads)
    tally2 = rep2.cases[-1]
    orbit_cases2 = [c for c in rep2.cases if "orbit" in c]
    repelling_dist = [
        c["distance"]
        for c in orbit_cases2
        if c["stability"] == "repelling" and c["covered"]
    ]
    rep1 = verify_theorem2(-2 + 0j, 1, box, 2, threads=threads)
    tally1 = rep1.cases[-1]
    uncovered1 = [c for c in rep1.cases if "orbit" in c and not c["covered"]]
    ok = (
        rep2.verdict == "pass"
        and tally2["uncovered_repelling"] == 0
        and tally2["covered"] == tally2["orbits_found"]
        and len(repelling_dist) == sum(
            1 for c in orbit_cases2 if c["stability"] == "repelling"
        )
        and all(d < 1e-6 for d in repelling_dist)
        and tally1["uncovered_repelling"] == 0
        and tally1["uncovered_nonrepelling"] == 1
        and len(uncovered1) == 1
        and uncovered1[0]["stability"] == "attracting"
        and uncovered1[0]["period"] == 1
    )
    return {
        "criterion": 7,
        "period2": dict(tally2),
        "max_match_distance": max(repelling_dist) if repelling_dist else None,
        "period1": dict(tally1),
        "period1_uncovered_stability": [c["stability"] for c in uncovered1],
        "threshold": 1e-6,
        "ok": ok,
    }


def crit8(threads=None) -> dict:
    """Landing point moves holomorphically along kappa paths."""
    path = [-2 + 0.3j * i / 9 for i in range(10)]
    rep = verify_holomorphic_motion(path, ZERO, threads=threads)
    gaps = [
        c["newton_gap"]
        for c in rep.cases
        if "newton_gap" in c and c["newton_gap"] is not None
    ]
    cr = rep.cases[-1]
    ok = (
        rep.verdict == "pass"
        and len(gaps) == len(path) - 1
        and all(g < 1e-8 for g in gaps)
        and cr["cr_max_residual"] < cr["cr_threshold"]
    )
    return {
        "criterion": 8,
        "path_steps": len(path),
        "max_newton_gap": max(gaps) if gaps else None,
        "cr_max_residual": cr["cr_max_residual"],
        "cr_threshold": cr["cr_threshold"],
        "agree_threshold": 1e-8,
        "ok": ok,
    }


def crit9(threads=None) -> dict:
    """Left strip of the parameter plane is all attracting period 1."""
    grid = scan_components(Rect(-4.0, -1.2, -1.0, 1.0), (100, 80),
                           threads=threads)
    counts = grid.counts()
    total = 100 * 80
    hits = counts.get("attracting_1", 0)
    return {
        "criterion": 9,
        "resolution": [100, 80],
        "counts": dict(counts),
        "fraction_attracting_1": hits / total,
        "ok": hits == total,
    }


CRITERIA = {
    1: crit1,
    2: crit2,
    3: crit3,
    4: crit4,
    5: crit5,
    6: crit6,
    7: crit7,
    8: crit8,
    9: crit9,
}


def run_all(threads=None) -> dict:
    """All nine criteria; keys are criterion numbers as strings."""
    return {str(n): fn(threads=threads) for n, fn in CRITERIA.items()}
