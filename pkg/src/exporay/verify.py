"""Landing experiments composed from the ray, orbit and parameter modules.

Each experiment produces an ExperimentReport with a three-way verdict:
"pass", "fail" or "inconclusive".  The separation matters.  The landing
statements being exercised are proven facts, so a numerical
non-convergence indicts the iteration budget, not the statement; such
cases are listed as inconclusive and are never folded into either of
the other verdicts.  In particular no report ever upgrades an
inconclusive case to a pass.

Reports are deterministic functions of their inputs and configuration:
per-case work may run on a thread pool, but aggregation order is fixed,
so a rerun reproduces every digit.  Wall time is recorded for the
record but excluded from report comparisons.

Verdict-to-exit-code convention (used by the command line front end):
0 for pass, 2 for fail, 3 for inconclusive.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

from .address import ExternalAddress, enumerate_periodic
from .dynamics import (
    classify_singular_orbit,
    find_periodic_points,
    newton_periodic,
)
from .geometry import Rect, point_polyline_distance
from .parallel import parallel_map
from .parameter import Wake, land_parameter_ray, trace_parameter_ray, wake_membership
from .rays import NotConverged, RayEvalConfig, land_ray


class PathCrossesRay(Exception):
    """A path parameter sits on (or too near) a traced parameter ray.

    The holomorphic-motion experiment only claims anything on the
    complement of the closed ray family, so such a path is rejected
    outright rather than reported.
    """

    def __init__(self, kappa: complex, address, distance: float):
        self.kappa = kappa
        self.address = address
        self.distance = distance
        super().__init__(
            f"path point {kappa:.6g} is {distance:.3g} from ray {address} "
            f"(needs clearance)"
        )


def _c(z: complex) -> list:
    return [z.real, z.imag]


@dataclass(frozen=True)
class ExperimentReport:
    """Outcome of one experiment: verdict plus the evidence behind it.

    Every numerical claim in cases carries the tolerance it was tested
    at (the tolerances mapping).  wall_time is informational only and
    excluded from equality, so reports from reruns compare clean.
    """

    experiment: str
    inputs: dict
    tolerances: dict
    cases: tuple
    verdict: str
    notes: tuple = ()
    wall_time: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def exit_code(self) -> int:
        return {"pass": 0, "fail": 2, "inconclusive": 3}[self.verdict]

    def comparable(self) -> dict:
        """Everything but the wall time, for determinism checks."""
        return {
            "experiment": self.experiment,
            "inputs": self.inputs,
            "tolerances": self.tolerances,
            "cases": list(self.cases),
            "verdict": self.verdict,
            "notes": list(self.notes),
        }

    def as_dict(self) -> dict:
        out = self.comparable()
        out["wall_time"] = self.wall_time
        return out

    def as_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def text_summary(self) -> str:
        lines = [
            f"experiment: {self.experiment}",
            f"verdict: {self.verdict.upper()}",
            "inputs: " + json.dumps(self.inputs, sort_keys=True),
            "tolerances: " + json.dumps(self.tolerances, sort_keys=True),
            f"cases: {len(self.cases)}",
        ]
        for case in self.cases:
            body = ", ".join(f"{k}={v}" for k, v in case.items())
            lines.append("  - " + body)
        for note in self.notes:
            lines.append("note: " + note)
        lines.append(f"wall_time: {self.wall_time:.3f}s")
        return "\n".join(lines)


def _finish(report_args: dict, started: float) -> ExperimentReport:
    return ExperimentReport(wall_time=time.perf_counter() - started, **report_args)


def _singular_assumption(kappa: complex, notes: list) -> bool:
    """Record the nonescaping hypothesis; True when it is not contradicted.

    Nonescaping is never certified, only suspected escape is: the report
    carries the classification as an assumption either way.
    """
    cls = classify_singular_orbit(kappa)
    notes.append(f"singular orbit classified {cls.verdict} "
                 f"(nonescaping assumed, not certified)")
    return cls.verdict != "escaping_suspected"


def _landing_point(est) -> complex:
    """The polished orbit point the Cauchy limit matched."""
    return min(est.orbit.points, key=lambda p: abs(p - est.limit))


def _chase_landing(
    kappa: complex, s: ExternalAddress, cfg, tol: float
) -> complex | None:
    """Trusted landing point of g_s at kappa, or None.

    A chase whose Cauchy limit settled but failed to match the polished
    orbit within tol is as untrustworthy as one that never settled (the
    sequence can sit on a spurious plateau of the finite-depth
    evaluation), so both come back None.
    """
    try:
        est = land_ray(kappa, s, cfg, landing_tol=tol)
    except NotConverged:
        return None
    if est.matched_distance > tol:
        return None
    return _landing_point(est)


def _orbit_ok(orbit) -> bool:
    # the landing statement: repelling, or parabolic (rationally
    # indifferent); an irrationally indifferent landing would refute it
    if orbit.stability == "repelling":
        return True
    return orbit.stability == "indifferent" and orbit.parabolic is not None


def verify_theorem1(
    kappa: complex,
    addresses: list,
    cfg: RayEvalConfig | None = None,
    landing_tol: float = 1e-6,
    threads: int | None = None,
) -> ExperimentReport:
    """Every periodic ray that converges must land repelling or parabolic.

    Runs the landing chase for each address and checks the class of the
    matched orbit.  A ray whose Cauchy sequence does not settle within
    budget is inconclusive, never a failure.  The verdict is a pass when
    at least one case converged and every converged case landed on a
    repelling or parabolic orbit.
    """
    started = time.perf_counter()
    kappa = complex(kappa)
    for s in addresses:
        if not s.is_periodic():
            raise ValueError(f"address {s} is not periodic")
    notes: list = []
    assumed = _singular_assumption(kappa, notes)

    def run_case(s: ExternalAddress) -> dict:
        try:
            est = land_ray(kappa, s, cfg, landing_tol=landing_tol)
        except NotConverged as exc:
            return {
                "address": str(s),
                "outcome": "inconclusive",
                "diameter": exc.diameter,
            }
        if est.matched_distance > landing_tol:
            return {
                "address": str(s),
                "outcome": "inconclusive",
                "matched_distance": est.matched_distance,
            }
        orb = est.orbit
        return {
            "address": str(s),
            "outcome": "landed",
            "landing": _c(_landing_point(est)),
            "matched_distance": est.matched_distance,
            "orbit_period": orb.period,
            "stability": orb.stability,
            "parabolic": list(orb.parabolic) if orb.parabolic else None,
            "multiplier": _c(orb.multiplier),
            "ok": _orbit_ok(orb),
        }

    cases = parallel_map(run_case, list(addresses), threads)
    landed = [c for c in cases if c["outcome"] == "landed"]
    if not assumed:
        # hypothesis unmet: the statement claims nothing at this kappa
        verdict = "inconclusive"
    elif any(not c["ok"] for c in landed):
        verdict = "fail"
    elif not landed:
        verdict = "inconclusive"
    else:
        verdict = "pass"
        if len(landed) < len(cases):
            notes.append(f"{len(cases) - len(landed)} case(s) inconclusive, "
                         f"excluded from the claim")
    return _finish(
        dict(
            experiment="thm1",
            inputs={"kappa": _c(kappa), "addresses": [str(s) for s in addresses]},
            tolerances={"landing_tol": landing_tol,
                        "ray_tol": (cfg or RayEvalConfig()).tol},
            cases=tuple(cases),
            verdict=verdict,
            notes=tuple(notes),
        ),
        started,
    )


def verify_theorem2(
    kappa: complex,
    n: int,
    box,
    M: int,
    cfg: RayEvalConfig | None = None,
    match_tol: float = 1e-6,
    seeds_per_axis: int = 24,
    threads: int | None = None,
) -> ExperimentReport:
    """Ray coverage of the period-n orbits in box, searched up to entry M.

    Lands every periodic address of period dividing n with entries in
    [-M, M] and matches landings to orbits by mutual nearest neighbor at
    match_tol (so two rays crowding one orbit cannot mask an uncovered
    one).  At most one orbit may go uncovered; an uncovered nonrepelling
    orbit is the expected exception and is tallied separately.  Uncovered
    repelling orbits beyond the allowance read as a search-space
    limitation (the address entries only run to M), so they make the
    verdict inconclusive with a widen-M hint rather than a failure.
    """
    started = time.perf_counter()
    kappa = complex(kappa)
    if not isinstance(box, Rect):
        box = Rect(*box)
    notes: list = []
    assumed = _singular_assumption(kappa, notes)

    found = find_periodic_points(
        kappa, n, box, seeds_per_axis=seeds_per_axis, threads=threads
    )
    # keep orbits contained in the box: an orbit with a point outside has
    # partners arbitrarily far out whose itineraries need entries beyond
    # any fixed M, so they are out of scope for the searched address set
    orbits = tuple(
        orb for orb in found.orbits
        if all(box.contains(p, pad=1e-9) for p in orb.points)
    )
    addresses = enumerate_periodic(n, M)

    def run_ray(s: ExternalAddress) -> dict:
        z = _chase_landing(kappa, s, cfg, match_tol)
        if z is None:
            return {"address": str(s), "outcome": "inconclusive"}
        return {"address": str(s), "outcome": "landed", "landing": _c(z)}

    ray_cases = parallel_map(run_ray, addresses, threads)
    landings = [(i, complex(*c["landing"]))
                for i, c in enumerate(ray_cases) if c["outcome"] == "landed"]

    # mutual-nearest matching between landing points and orbits
    def orbit_dist(z: complex, orb) -> float:
        return min(abs(z - p) for p in orb.points)

    orbit_cases = []
    uncovered_repelling = 0
    uncovered_nonrepelling = 0
    for j, orb in enumerate(orbits):
        matched = None
        dist = math.inf
        if landings:
            i_best, z_best = min(landings, key=lambda iz: orbit_dist(iz[1], orb))
            d_best = orbit_dist(z_best, orb)
            # the nearest landing must also point back at this orbit
            j_back = min(range(len(orbits)),
                         key=lambda k: orbit_dist(z_best, orbits[k]))
            if d_best < match_tol and j_back == j:
                matched = ray_cases[i_best]["address"]
                dist = d_best
        covered = matched is not None
        if not covered:
            if orb.stability == "repelling":
                uncovered_repelling += 1
            else:
                uncovered_nonrepelling += 1
        orbit_cases.append({
            "orbit": [_c(p) for p in orb.points],
            "period": orb.period,
            "stability": orb.stability,
            "multiplier": _c(orb.multiplier),
            "covered": covered,
            "matched_address": matched,
            "distance": dist if covered else None,
        })

    uncovered = uncovered_repelling + uncovered_nonrepelling
    if not assumed:
        verdict = "inconclusive"
    elif uncovered_nonrepelling > 1:
        # more than one nonrepelling orbit can never be covered by rays;
        # no wider search would ever change that
        verdict = "fail"
    elif uncovered <= 1:
        verdict = "pass"
    else:
        verdict = "inconclusive"
    if uncovered_repelling > 0:
        notes.append(
            f"{uncovered_repelling} repelling orbit(s) uncovered within the "
            f"searched addresses; widen the entry bound M (currently {M})"
        )
    inconclusive_rays = sum(1 for c in ray_cases if c["outcome"] == "inconclusive")
    if inconclusive_rays:
        notes.append(f"{inconclusive_rays} ray landing(s) did not converge")
    notes.append("uncovered counts are relative to the searched M, "
                 "not existence-level")

    return _finish(
        dict(
            experiment="thm2",
            inputs={"kappa": _c(kappa), "n": n, "M": M,
                    "box": [box.re_min, box.re_max, box.im_min, box.im_max],
                    "seeds_per_axis": seeds_per_axis},
            tolerances={"match_tol": match_tol,
                        "ray_tol": (cfg or RayEvalConfig()).tol},
            cases=tuple(
                ray_cases
                + orbit_cases
                + [{
                    "orbits_found": len(orbits),
                    "covered": sum(1 for c in orbit_cases if c["covered"]),
                    "uncovered_repelling": uncovered_repelling,
                    "uncovered_nonrepelling": uncovered_nonrepelling,
                }]
            ),
            verdict=verdict,
            notes=tuple(notes),
        ),
        started,
    )


def _shift_orbit(s: ExternalAddress) -> list:
    """The distinct shifts of a periodic address, in shift order."""
    out = []
    cur = s
    for _ in range(s.exact_period()):
        if cur not in out:
            out.append(cur)
        cur = cur.shift()
    return out


def verify_holomorphic_motion(
    path: list,
    s: ExternalAddress,
    cfg: RayEvalConfig | None = None,
    clearance: float = 1e-3,
    agree_tol: float = 1e-8,
    continuity_factor: float = 50.0,
    grid_step: float = 1e-3,
    cr_factor: float = 1e-4,
    threads: int | None = None,
) -> ExperimentReport:
    """The landing point of g_s as a function of kappa along a path.

    The claim holds away from the parameter rays of the shifts of s, so
    each path point is first checked for clearance against those traced
    rays (PathCrossesRay otherwise).  Then the landing point is chased at
    every path parameter and checked three ways: consecutive landings
    move O(path step); Newton continuation of the periodic point along
    the path reproduces the landing to agree_tol; and on a square grid
    around the middle path point the fourth-order centered-difference
    Wirtinger derivative d/d(conj kappa) of the landing map nearly
    vanishes (residual below cr_factor * grid_step), a discrete
    Cauchy-Riemann check that the motion is not merely continuous but
    holomorphic.
    """
    started = time.perf_counter()
    if not s.is_periodic():
        raise ValueError("the motion experiment needs a periodic address")
    path = [complex(k) for k in path]
    if not path:
        raise ValueError("empty path")
    n = s.exact_period()
    notes: list = []

    # hypothesis: the path lives in the complement of the ray family
    rays = []
    for shifted in _shift_orbit(s):
        tr = trace_parameter_ray(shifted, 30.0, 1e-3)
        pts = list(tr.kappas)
        landing = land_parameter_ray(tr)
        pts.append(landing.kappa)
        rays.append((shifted, pts))
    for k in path:
        for shifted, pts in rays:
            d = point_polyline_distance(k, pts)
            if d <= clearance:
                raise PathCrossesRay(k, shifted, d)

    def chase(k: complex):
        return _chase_landing(k, s, cfg, 1e-6)

    landings = parallel_map(chase, path, threads)

    cases = []
    any_inconclusive = False
    any_fail = False
    newton_prev = landings[0]
    for i, (k, z) in enumerate(zip(path, landings)):
        case = {"kappa": _c(k)}
        if z is None:
            case["outcome"] = "inconclusive"
            any_inconclusive = True
            cases.append(case)
            newton_prev = None
            continue
        case["landing"] = _c(z)
        case["outcome"] = "landed"
        if i > 0 and landings[i - 1] is not None:
            step = abs(path[i] - path[i - 1])
            move = abs(z - landings[i - 1])
            case["move_over_step"] = move / step if step > 0 else 0.0
            if move > continuity_factor * step:
                case["continuity_ok"] = False
                any_fail = True
            else:
                case["continuity_ok"] = True
        if i > 0:
            if newton_prev is None:
                case["newton_gap"] = None
                any_inconclusive = True
            else:
                w = newton_periodic(k, newton_prev, n)
                if w is None:
                    case["newton_gap"] = None
                    any_inconclusive = True
                else:
                    case["newton_gap"] = abs(w - z)
                    if case["newton_gap"] >= agree_tol:
                        any_fail = True
        newton_prev = z
        cases.append(case)

    # discrete Cauchy-Riemann residual around the middle path point
    center = path[len(path) // 2]
    h = grid_step
    half = 2
    grid_k = [center + complex(ix * h, iy * h)
              for iy in range(-half, half + 1)
              for ix in range(-half, half + 1)]
    grid_z = parallel_map(chase, grid_k, threads)
    cr_max = None
    if all(z is not None for z in grid_z):
        width = 2 * half + 1

        def at(ix: int, iy: int) -> complex:
            return grid_z[(iy + half) * width + (ix + half)]

        # Wirtinger derivative d/d(conj kappa) = (d/dx + i d/dy) / 2; the
        # 5-wide grid supports fourth-order centered differences at the
        # center, so the h^2 f''' truncation term cancels there
        def ddx4(iy: int) -> complex:
            return (at(-2, iy) - 8 * at(-1, iy) + 8 * at(1, iy)
                    - at(2, iy)) / (12 * h)

        def ddy4(ix: int) -> complex:
            return (at(ix, -2) - 8 * at(ix, -1) + 8 * at(ix, 1)
                    - at(ix, 2)) / (12 * h)

        cr_max = abs(ddx4(0) + 1j * ddy4(0)) / 2
        if cr_max >= cr_factor * h:
            any_fail = True
    else:
        any_inconclusive = True
        notes.append("Cauchy-Riemann grid had unconverged landings")
    cases.append({
        "cr_center": _c(center),
        "cr_grid_step": h,
        "cr_max_residual": cr_max,
        "cr_threshold": cr_factor * h,
    })

    if any_fail:
        verdict = "fail"
    elif any_inconclusive or all(z is None for z in landings):
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return _finish(
        dict(
            experiment="motion",
            inputs={"path": [_c(k) for k in path], "address": str(s)},
            tolerances={"clearance": clearance, "agree_tol": agree_tol,
                        "continuity_factor": continuity_factor,
                        "grid_step": grid_step, "cr_factor": cr_factor},
            cases=tuple(cases),
            verdict=verdict,
            notes=tuple(notes),
        ),
        started,
    )


def verify_wake_persistence(
    wake: Wake,
    probes: list,
    s_pair,
    cfg: RayEvalConfig | None = None,
    coland_tol: float = 1e-6,
    agree_tol: float = 1e-8,
    threads: int | None = None,
) -> ExperimentReport:
    """Co-landing of a ray pair at every probe parameter inside a wake.

    At each probe both rays are chased and their landing points must
    agree to coland_tol; between consecutive probes the common landing
    point must continue by Newton to agree_tol.  A probe that is not
    inside the wake is a precondition violation: it is reported, skipped,
    and caps the verdict at inconclusive (the claim was never tested as
    posed).
    """
    started = time.perf_counter()
    s1, s2 = s_pair
    if not (s1.is_periodic() and s2.is_periodic()):
        raise ValueError("co-landing addresses must be periodic")
    probes = [complex(k) for k in probes]
    if not probes:
        raise ValueError("no probes")
    notes: list = []
    n = s1.exact_period()

    memberships = [wake_membership(k, wake) for k in probes]
    precondition_ok = all(m == "inside" for m in memberships)
    if not precondition_ok:
        bad = sum(1 for m in memberships if m != "inside")
        notes.append(f"{bad} probe(s) not inside the wake; "
                     f"precondition violated, claim not tested there")

    def chase_pair(k: complex):
        return [_chase_landing(k, s, cfg, coland_tol) for s in (s1, s2)]

    inside = [k for k, m in zip(probes, memberships) if m == "inside"]
    pairs = parallel_map(chase_pair, inside, threads)

    cases = []
    any_fail = False
    any_inconclusive = False
    prev_common = None
    it = iter(pairs)
    for k, m in zip(probes, memberships):
        case = {"kappa": _c(k), "membership": m}
        if m != "inside":
            case["outcome"] = "precondition_violated"
            cases.append(case)
            continue
        z1, z2 = next(it)
        if z1 is None or z2 is None:
            case["outcome"] = "inconclusive"
            any_inconclusive = True
            cases.append(case)
            prev_common = None
            continue
        case["outcome"] = "landed"
        case["landing_1"] = _c(z1)
        case["landing_2"] = _c(z2)
        case["coland_distance"] = abs(z1 - z2)
        if case["coland_distance"] >= coland_tol:
            any_fail = True
        if prev_common is not None:
            w = newton_periodic(k, prev_common, n)
            if w is None:
                case["continuation_gap"] = None
                any_inconclusive = True
            else:
                case["continuation_gap"] = abs(w - z1)
                if case["continuation_gap"] >= agree_tol:
                    any_fail = True
        prev_common = z1
        cases.append(case)

    if any_fail:
        verdict = "fail"
    elif any_inconclusive or not precondition_ok or not pairs:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return _finish(
        dict(
            experiment="wake",
            inputs={"wake_root": _c(wake.root.kappa),
                    "component_period": wake.component_period,
                    "probes": [_c(k) for k in probes],
                    "addresses": [str(s1), str(s2)]},
            tolerances={"coland_tol": coland_tol, "agree_tol": agree_tol},
            cases=tuple(cases),
            verdict=verdict,
            notes=tuple(notes),
        ),
        started,
    )
