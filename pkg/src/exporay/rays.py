"""Dynamic rays of exp(z) + kappa: pullback evaluation, landing, order.

A ray point at potential t and address s is computed by running the
growth map forward from t until it clears an anchor threshold, placing
the start value in the far right half plane, and pulling back through
the inverse branches selected by the address entries.  The anchor error
is bounded by exp(-T) * (2 pi M + |kappa| + 1) at threshold T, so by the
time T is in the hundreds the start error is far below double precision
and the result no longer depends on the depth actually chosen.  This is
what makes the "same answer at higher depth" contract hold: any deeper
start is bit-for-bit indistinguishable after the shared pullback tail.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import forward_depth, pullback, pullback_d
from .address import ExternalAddress
from .dynamics import (
    OVERFLOW_RE,
    OrbitOverflow,
    PeriodicOrbit,
    classify,
    exact_period,
    exp_map,
    growth,
    multiplier,
    newton_periodic,
    orbit,
)

# Anchor threshold cap.  expm1 overflows just past 709, and one growth
# step from anywhere above ~37 already drives the anchor error below
# 1e-16, so nothing is lost by capping.
TSTAR_CAP = 700.0

# Largest t at which the functional-equation residual is numerically
# meaningful: the defect |E(z) - z'| inherits an absolute error of about
# exp(t) * t * 1e-16 from the float representation of z, which passes
# 1e-8 near t = 16.
RESIDUAL_T_MAX = 16.0

# Imaginary parts of exp(w) stop being resolvable once Re w exceeds
# ~36 (exp(36) * eps ~ 1); strip checks stop at this frontier.
STRIP_CHECK_RE_MAX = 34.0


class RayBroken(Exception):
    """The pullback passed within broken_eps of the singular value."""

    def __init__(self, step: int, message: str):
        super().__init__(message)
        self.step = step


class DepthSaturated(Exception):
    """max_depth growth steps did not reach the anchor threshold."""

    def __init__(self, depth: int, t: float, message: str):
        super().__init__(message)
        self.depth = depth
        self.t = t


class NotConverged(Exception):
    """Landing Cauchy test failed; carries the accumulation diameter."""

    def __init__(self, diameter: float, samples: tuple, message: str):
        super().__init__(message)
        self.diameter = diameter
        self.samples = samples


class OrderUnresolved(Exception):
    """Vertical comparison could not be decided numerically."""


@dataclass(frozen=True)
class RayEvalConfig:
    """Knobs for the pullback evaluator.

    max_depth bounds the number of growth/pullback steps; the required
    depth grows like 2/t as t -> 0, so the default admits t down to
    about 1e-7.  anchor_shift starts the pullback at F^N(t) + 2 pi i
    s_{N+1} instead of the bare real value; broken_eps is the distance
    to kappa below which the branch is declared obstructed.
    """

    tol: float = 1e-9
    max_depth: int = 50_000_000
    anchor_shift: bool = True
    broken_eps: float = 1e-8

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not self.broken_eps > 0:
            raise ValueError("broken_eps must be positive")


@dataclass(frozen=True)
class RaySample:
    t: float
    z: complex
    depth_used: int
    residual: float = math.nan

    def as_row(self) -> tuple:
        return (self.t, self.z.real, self.z.imag, self.depth_used, self.residual)


@dataclass(frozen=True)
class LandingEstimate:
    """Result of chasing a periodic ray down to t -> 0.

    limit is the raw Cauchy estimate; orbit is the Newton-polished
    periodic orbit it matched, and matched_distance the gap between the
    two (small exactly when the ray genuinely lands there).
    """

    limit: complex
    orbit: PeriodicOrbit
    t_sequence: tuple
    converged: bool
    matched_distance: float


_DEFAULT_CFG = RayEvalConfig()
_EMPTY = np.zeros(0, dtype=np.int64)


def _entry_arrays(s: ExternalAddress):
    pre = np.asarray(s.preperiod, dtype=np.int64) if s.preperiod else _EMPTY
    blk = np.asarray(s.period_block, dtype=np.int64)
    return pre, blk


def eval_ray(
    kappa: complex,
    s: ExternalAddress,
    t: float,
    cfg: RayEvalConfig | None = None,
    residual: bool = False,
) -> RaySample:
    """Evaluate the dynamic ray at address s and potential t > 0.

    Depth is chosen as the minimal number of growth steps that lifts t
    past min(2 pi M(s) + |kappa| + 20, 700), plus one more step whenever
    the lifted value still fits through expm1; the extra step pushes the
    anchor error to exp(-700) scale, which is zero in doubles.  Raises
    RayBroken if an inverse branch passes within broken_eps of kappa,
    DepthSaturated if max_depth growth steps do not reach the threshold.
    """
    cfg = cfg or _DEFAULT_CFG
    kappa = complex(kappa)
    x, n = _anchor(kappa, s, t, cfg)
    im0 = 2.0 * math.pi * s.entry(n + 1) if cfg.anchor_shift else 0.0
    pre, blk = _entry_arrays(s)
    zr, zi, broken = pullback(
        x, im0, kappa.real, kappa.imag, pre, blk, n, cfg.broken_eps
    )
    if broken:
        raise RayBroken(
            broken, f"pullback met the singular value at level {broken} (t={t:.3g})"
        )
    z = complex(zr, zi)
    res = math.nan
    if residual and t <= RESIDUAL_T_MAX:
        res = abs(exp_map(kappa, z) - eval_ray(kappa, s.shift(), growth(t), cfg).z)
    return RaySample(t, z, n, res)


def _anchor(kappa: complex, s: ExternalAddress, t, cfg: RayEvalConfig):
    """Forward depth selection shared by the plain and derivative evals."""
    t = float(t)
    if not t > 0:
        raise ValueError("ray potential t must be positive")
    tstar = min(2.0 * math.pi * s.bound() + abs(kappa) + 20.0, TSTAR_CAP)
    n, x = forward_depth(t, tstar, cfg.max_depth)
    if x < tstar:
        raise DepthSaturated(
            n, t, f"depth {n} reached only {x:.3g} < {tstar:.3g} at t={t:.3g}"
        )
    if x <= OVERFLOW_RE:
        x = math.expm1(x)
        n += 1
    return x, n


def eval_ray_dk(
    kappa: complex,
    s: ExternalAddress,
    t: float,
    cfg: RayEvalConfig | None = None,
) -> tuple:
    """Ray value and its kappa-derivative, (g_s(t), dg_s(t)/dkappa).

    The derivative is propagated analytically through the pullback (the
    anchor does not depend on kappa, each log contributes
    (d - 1)/(w - kappa)), which is what parameter-plane Newton needs:
    near a traced parameter ray the value explodes in sensitivity while
    finite-difference probes on the far side of the ray cross the log
    branch cuts and return garbage.
    """
    cfg = cfg or _DEFAULT_CFG
    kappa = complex(kappa)
    x, n = _anchor(kappa, s, t, cfg)
    im0 = 2.0 * math.pi * s.entry(n + 1) if cfg.anchor_shift else 0.0
    pre, blk = _entry_arrays(s)
    zr, zi, dr, di, broken = pullback_d(
        x, im0, kappa.real, kappa.imag, pre, blk, n, cfg.broken_eps
    )
    if broken:
        raise RayBroken(
            broken, f"pullback met the singular value at level {broken} (t={t:.3g})"
        )
    return complex(zr, zi), complex(dr, di)


def functional_residual(
    kappa: complex, s: ExternalAddress, t: float, cfg: RayEvalConfig | None = None
) -> float:
    """|E(g_s(t)) - g_{shift s}(F(t))|, the one-step semiconjugacy defect."""
    if t > RESIDUAL_T_MAX:
        raise ValueError(
            f"residual is below float resolution only for t <= {RESIDUAL_T_MAX}"
        )
    z = eval_ray(kappa, s, t, cfg).z
    w = eval_ray(kappa, s.shift(), growth(t), cfg).z
    return abs(exp_map(kappa, z) - w)


def strip_violations(
    kappa: complex, z: complex, s: ExternalAddress, steps: int = 20
) -> list:
    """Check the itinerary of z against the strips of s.

    Follows the forward orbit while imaginary parts remain resolvable
    (Re < ~34) and collects (step, imag, lo, hi) tuples for every iterate
    outside its half-open strip ((2 s_{j+1} - 1) pi, (2 s_{j+1} + 1) pi].
    An empty list means the checkable prefix is consistent with s.
    """
    out = []
    w = complex(z)
    for j in range(steps):
        if w.real > STRIP_CHECK_RE_MAX:
            break
        e = s.entry(j + 1)
        lo = (2 * e - 1) * math.pi
        hi = (2 * e + 1) * math.pi
        if not (lo < w.imag <= hi):
            out.append((j, w.imag, lo, hi))
        try:
            w = exp_map(kappa, w)
        except OrbitOverflow:
            break
    return out


def _diameter(zs) -> float:
    tail = zs[-5:]
    if len(tail) < 2:
        return 0.0
    return max(abs(a - b) for a in tail for b in tail)


def _cycle_derivative(kappa: complex, z: complex, m: int):
    """Return (D, dD/dz) for D(z) = d/dz E^m(z) along the orbit of z."""
    p = 1.0 + 0.0j
    s = 0.0 + 0.0j
    w = z
    for _ in range(m):
        s += p
        e = cmath.exp(w)
        p *= e
        w = e + kappa
    return p, p * s


def _parabolic_refine(kappa: complex, z: complex, m: int, lam: complex):
    """Try to snap a near-indifferent landing point onto an exact parabolic.

    Newton on f(z) = E^m(z) - z stalls at a parabolic point because the
    root is degenerate, leaving a multiplier off unity by the sqrt of the
    achieved residual.  The derivative condition (E^m)'(z) = root of
    unity is a simple root there, so refine on that instead and verify
    the point still closes up.  Returns None when kappa is not actually
    parabolic (the verify step fails), which keeps genuine repelling
    landings untouched.
    """
    target = None
    for q in range(1, 65):
        p = round(q * cmath.phase(lam) / (2.0 * math.pi)) % q
        cand = cmath.exp(2j * math.pi * p / q)
        if abs(lam - cand) < 1e-3 and (q == 1 or math.gcd(p, q) == 1):
            target = cand
            break
    if target is None:
        return None
    w = z
    for _ in range(60):
        d, dp = _cycle_derivative(kappa, w, m)
        h = d - target
        if abs(h) < 1e-14:
            break
        if dp == 0:
            return None
        step = h / dp
        if abs(step) > 1.0:
            step /= abs(step)
        w -= step
    else:
        return None
    pts = orbit(kappa, w, m - 1) if m > 1 else [w]
    if abs(exp_map(kappa, pts[-1]) - w) > 1e-8 * (1.0 + abs(w)):
        return None
    lam2 = multiplier(kappa, pts)
    stability, pq = classify(lam2)
    if stability != "indifferent" or pq is None:
        return None
    return w, pts, lam2, stability, pq


def land_ray(
    kappa: complex,
    s: ExternalAddress,
    cfg: RayEvalConfig | None = None,
    landing_tol: float = 1e-6,
    t_start: float = 1.0,
    ratio: float = 0.5,
    max_steps: int = 60,
) -> LandingEstimate:
    """Chase a periodic ray to t -> 0 and match the limit to an orbit.

    Samples t_k = t_start * ratio^k until three consecutive differences
    drop below landing_tol / 4, then polishes with Newton at the exact
    period and classifies the multiplier.  Near-indifferent multipliers
    get a parabolic refinement pass so that genuinely parabolic landings
    report multiplier on the unit circle instead of a stalled Newton
    iterate.  Raises NotConverged (with the accumulation diameter) when
    the Cauchy test fails or the depth budget runs out first.
    """
    cfg = cfg or _DEFAULT_CFG
    if not s.is_periodic():
        raise ValueError("landing requires a periodic address")
    n = s.exact_period()
    seq = []
    zs = []
    streak = 0
    t = float(t_start)
    for _ in range(max_steps):
        try:
            smp = eval_ray(kappa, s, t, cfg)
        except DepthSaturated as exc:
            raise NotConverged(
                _diameter(zs),
                tuple(seq),
                "depth budget exhausted before the landing Cauchy test passed",
            ) from exc
        seq.append((t, smp.z))
        zs.append(smp.z)
        if len(zs) >= 2:
            if abs(zs[-1] - zs[-2]) < 0.25 * landing_tol:
                streak += 1
            else:
                streak = 0
        if streak >= 3:
            return _polish_landing(kappa, n, zs[-1], tuple(seq), landing_tol)
        t *= ratio
    raise NotConverged(
        _diameter(zs), tuple(seq), "landing Cauchy test did not pass within max_steps"
    )


def _polish_landing(
    kappa: complex, n: int, z_est: complex, seq: tuple, landing_tol: float
) -> LandingEstimate:
    z = newton_periodic(kappa, z_est, n)
    if z is None:
        raise NotConverged(0.0, seq, "Newton polish failed at the landing estimate")
    m = exact_period(kappa, z, n)
    z2 = newton_periodic(kappa, z, m)
    if z2 is not None and abs(z2 - z) < 1e-3:
        z = z2
    pts = orbit(kappa, z, m - 1) if m > 1 else [z]
    lam = multiplier(kappa, pts)
    stability, pq = classify(lam)
    if pq is None and abs(abs(lam) - 1.0) < 1e-4:
        refined = _parabolic_refine(kappa, z, m, lam)
        if refined is not None:
            z, pts, lam, stability, pq = refined
    rep = min(pts, key=lambda p: (p.real, p.imag))
    i = pts.index(rep)
    pts = pts[i:] + pts[:i]
    orb = PeriodicOrbit(tuple(pts), m, lam, stability, pq)
    dist = min(abs(z_est - p) for p in pts)
    return LandingEstimate(
        limit=z_est,
        orbit=orb,
        t_sequence=seq,
        converged=dist < landing_tol,
        matched_distance=dist,
    )


def _t_at_re(kappa: complex, s: ExternalAddress, target: float, cfg: RayEvalConfig):
    """Bisect t so that Re(eval_ray(t)) = target; needs target >= 50."""
    lo = max(target - 8.0, 1.0)
    hi = target + 8.0
    flo = eval_ray(kappa, s, lo, cfg).z.real - target
    fhi = eval_ray(kappa, s, hi, cfg).z.real - target
    if not (flo < 0 < fhi):
        raise OrderUnresolved(
            f"could not bracket Re = {target} along the ray (ends {flo:.3g}, {fhi:.3g})"
        )
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        f = eval_ray(kappa, s, mid, cfg).z.real - target
        if (f > 0) == (flo > 0):
            lo, flo = mid, f
        else:
            hi = mid
    return 0.5 * (lo + hi)


def vertical_order(
    kappa: complex,
    s: ExternalAddress,
    r: ExternalAddress,
    R: float = 50.0,
    cfg: RayEvalConfig | None = None,
) -> str:
    """Where ray s sits relative to ray r at Re = R: "below" or "above".

    Rays with the same first entry run exponentially close at the right
    edge (the gap is e^{-R}-ish, far below doubles at R = 50), so ties
    are resolved by comparing the shifted addresses instead: the map
    preserves vertical order within a strip.
    """
    if R < 50.0:
        raise ValueError("comparison height R must be at least 50")
    cfg = cfg or _DEFAULT_CFG
    a, b = s, r
    for _ in range(10_000):
        if a == b:
            raise ValueError("addresses must differ")
        ts = _t_at_re(kappa, a, R, cfg)
        tr = _t_at_re(kappa, b, R, cfg)
        di = eval_ray(kappa, a, ts, cfg).z.imag - eval_ray(kappa, b, tr, cfg).z.imag
        if abs(di) > 1e-6:
            return "below" if di < 0 else "above"
        a, b = a.shift(), b.shift()
    raise OrderUnresolved("vertical order did not resolve under shifting")


def ray_polyline(
    kappa: complex,
    s: ExternalAddress,
    t_lo: float,
    t_hi: float,
    samples: int = 200,
    cfg: RayEvalConfig | None = None,
    residual: bool = False,
    on_broken: str = "raise",
) -> tuple:
    """Sample the ray on a geometric t-grid from t_hi down to t_lo.

    Returns (samples, broken) where broken is None for a clean trace; with
    on_broken="truncate" a RayBroken stops the walk and is returned instead
    of raised, leaving the partial polyline intact.
    """
    if not 0 < t_lo <= t_hi:
        raise ValueError("need 0 < t_lo <= t_hi")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    if on_broken not in ("raise", "truncate"):
        raise ValueError("on_broken must be 'raise' or 'truncate'")
    ratio = (t_lo / t_hi) ** (1.0 / (samples - 1))
    out = []
    t = t_hi
    broken = None
    for i in range(samples):
        try:
            out.append(eval_ray(kappa, s, t, cfg, residual=residual))
        except RayBroken as exc:
            if on_broken == "raise":
                raise
            broken = exc
            break
        t = t_lo if i == samples - 2 else t * ratio
    return tuple(out), broken
