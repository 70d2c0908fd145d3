"""Iteration of z -> exp(z) + kappa: orbits, periodic points, classification.

The singular value of the map is kappa itself (the one asymptotic value), so
the fate of the orbit of kappa decides hyperbolicity.  Periodic points are
located with a seeded Newton iteration on exp^n(z) - z and classified through
the cycle multiplier, which for this family is exp(sum of the cycle points).
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

from .geometry import Rect
from .parallel import parallel_map

# Largest Re z for which exp(z) is representable in float64.
OVERFLOW_RE = 709.0

# Saturation value for the real growth iteration, kept below float64 max so
# downstream arithmetic (adding |kappa|, 2*pi*M, ...) cannot overflow.
GROWTH_CAP = 1e300


class OrbitOverflow(Exception):
    """Forward iteration left the range where exp is representable."""


class NotACycle(Exception):
    """A claimed cycle does not close up under the map."""


def exp_map(kappa: complex, z: complex) -> complex:
    """One step of the exponential family, exp(z) + kappa."""
    if z.real > OVERFLOW_RE:
        raise OrbitOverflow(f"Re z = {z.real:.6g} exceeds exp range")
    return cmath.exp(z) + kappa


def orbit(kappa: complex, z: complex, n: int) -> list[complex]:
    """[z, f(z), ..., f^n(z)], raising OrbitOverflow when exp leaves range."""
    out = [z]
    for _ in range(n):
        z = exp_map(kappa, z)
        out.append(z)
    return out


# -- real growth model ------------------------------------------------------


def growth(t: float) -> float:
    """exp(t) - 1, the growth rate of potentials along one iteration step."""
    return math.expm1(t)


def growth_inv(t: float) -> float:
    """Inverse of growth on t >= 0."""
    if t < 0:
        raise ValueError("growth_inv needs t >= 0")
    return math.log1p(t)


def growth_iter(n: int, t: float) -> float:
    """n-fold growth iterate; negative n applies the inverse.

    Forward iteration saturates at 1e300 instead of overflowing, which keeps
    comparisons like "M > growth_iter(n, 6)" well defined for any float M.
    """
    if t < 0:
        raise ValueError("growth_iter needs t >= 0")
    v = t
    if n >= 0:
        for _ in range(n):
            if v >= GROWTH_CAP:
                return GROWTH_CAP
            try:
                v = math.expm1(v)
            except OverflowError:
                return GROWTH_CAP
            if v > GROWTH_CAP:
                return GROWTH_CAP
    else:
        for _ in range(-n):
            v = math.log1p(v)
    return v


# -- periodic points ---------------------------------------------------------


@dataclass(frozen=True)
class PeriodicOrbit:
    """One periodic cycle: points[0] is the representative, period = len(points)."""

    points: tuple[complex, ...]
    period: int
    multiplier: complex
    stability: str
    parabolic: tuple[int, int] | None = None

    @property
    def ray_period(self) -> int | None:
        """q * period for a parabolic cycle with multiplier exp(2*pi*i*p/q)."""
        if self.parabolic is None:
            return None
        return self.parabolic[1] * self.period

    def as_dict(self) -> dict:
        return {
            "points": [[p.real, p.imag] for p in self.points],
            "period": self.period,
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "stability": self.stability,
            "parabolic": list(self.parabolic) if self.parabolic else None,
            "ray_period": self.ray_period,
        }


@dataclass(frozen=True)
class OrbitSearchResult:
    orbits: tuple[PeriodicOrbit, ...]
    seed_stats: dict = field(compare=False)

    def __iter__(self):
        return iter(self.orbits)

    def __len__(self):
        return len(self.orbits)


def multiplier(kappa: complex, points: list[complex] | tuple[complex, ...]) -> complex:
    """Cycle multiplier exp(sum of cycle points); checks the cycle closes."""
    pts = list(points)
    if not pts:
        raise NotACycle("empty cycle")
    for i, p in enumerate(pts):
        nxt = pts[(i + 1) % len(pts)]
        img = exp_map(kappa, p)
        if abs(img - nxt) > 1e-6 * (1 + abs(nxt)):
            raise NotACycle(f"point {i} maps {abs(img - nxt):.3g} away from its successor")
    return cmath.exp(sum(pts))


def classify(lam: complex, tol: float = 1e-9, q_max: int = 64) -> tuple[str, tuple[int, int] | None]:
    """Stability from the multiplier, with root-of-unity detection.

    Returns (stability, parabolic) where parabolic is (p, q) in lowest terms
    when lam is within tol of a primitive q-th root of unity, q <= q_max.
    """
    a = abs(lam)
    if a > 1 + tol:
        return "repelling", None
    if a < 1 - tol:
        return "attracting", None
    for q in range(1, q_max + 1):
        p = round(cmath.phase(lam) * q / (2 * math.pi)) % q
        if q > 1 and math.gcd(p, q) != 1:
            continue
        if abs(lam - cmath.exp(2j * math.pi * p / q)) <= tol:
            return "indifferent", (p % q, q)
    return "indifferent", None


def newton_periodic(
    kappa: complex,
    z0: complex,
    n: int,
    tol: float = 1e-13,
    max_iter: int = 60,
) -> complex | None:
    """Newton's method on exp^n(z) - z from z0; None when it does not settle."""
    z = z0
    for _ in range(max_iter):
        w = z
        deriv = 1.0 + 0j
        for _ in range(n):
            if w.real > OVERFLOW_RE:
                return None
            e = cmath.exp(w)
            deriv *= e
            w = e + kappa
        f = w - z
        if abs(f) <= tol * (1 + abs(z)):
            # near-degenerate roots (parabolics) stall with garbage steps
            # long before the step test fires; a tiny value is enough
            return z
        fp = deriv - 1.0
        if abs(fp) < 1e-300:
            return None
        step = f / fp
        cap = 1.0 + abs(z)
        if abs(step) > cap:
            step *= cap / abs(step)
        z = z - step
        if abs(step) < tol * (1 + abs(z)):
            return z
    return None


def exact_period(kappa: complex, z: complex, n: int, tol: float = 1e-8) -> int:
    """Minimal divisor d of n with exp^d(z) = z, up to tol."""
    for d in sorted(d for d in range(1, n + 1) if n % d == 0):
        try:
            pts = orbit(kappa, z, d)
        except OrbitOverflow:
            continue
        if abs(pts[-1] - z) < tol * (1 + abs(z)):
            return d
    raise NotACycle(f"point is not n-periodic for any divisor of {n}")


def find_periodic_points(
    kappa: complex,
    n: int,
    box: Rect,
    seeds_per_axis: int = 24,
    include_lower_periods: bool = False,
    dedup_tol: float = 1e-8,
    stability_tol: float = 1e-9,
    threads: int | None = None,
) -> OrbitSearchResult:
    """Newton search for periodic orbits of period n with a point in box.

    A uniform seed grid is polished seed by seed; converged roots are merged
    (sorted by (Re, Im) first, so the outcome is independent of scheduling),
    grouped into cycles, reduced to their exact period, and classified.
    Orbits whose exact period strictly divides n are dropped unless
    include_lower_periods is set.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    seeds = [
        complex(
            box.re_min + (i + 0.5) * (box.re_max - box.re_min) / seeds_per_axis,
            box.im_min + (j + 0.5) * (box.im_max - box.im_min) / seeds_per_axis,
        )
        for i in range(seeds_per_axis)
        for j in range(seeds_per_axis)
    ]
    polished = parallel_map(lambda s: newton_periodic(kappa, s, n), seeds, threads)
    converged = [z for z in polished if z is not None]

    roots: list[complex] = []
    for z in sorted((z for z in converged if box.contains(z, pad=1e-9)), key=lambda w: (w.real, w.imag)):
        if all(abs(z - r) > dedup_tol for r in roots):
            roots.append(z)

    orbits: list[PeriodicOrbit] = []
    reps: list[complex] = []
    for z in roots:
        try:
            m = exact_period(kappa, z, n)
        except NotACycle:
            continue
        if m < n and not include_lower_periods:
            continue
        pts = []
        w = z
        ok = True
        for _ in range(m):
            pts.append(w)
            w = exp_map(kappa, w)
            refined = newton_periodic(kappa, w, n)
            if refined is None or abs(refined - w) > 1e-6 * (1 + abs(w)):
                ok = False
                break
            w = refined
        if not ok:
            continue
        rep = min(pts, key=lambda p: (p.real, p.imag))
        if any(abs(rep - r) < dedup_tol for r in reps):
            continue
        k = pts.index(rep)
        pts = pts[k:] + pts[:k]
        lam = multiplier(kappa, pts)
        stability, parabolic = classify(lam, tol=stability_tol)
        reps.append(rep)
        orbits.append(PeriodicOrbit(tuple(pts), m, lam, stability, parabolic))

    stats = {
        "seeds_total": len(seeds),
        "seeds_converged": len(converged),
        "roots_in_box": len(roots),
        "orbits": len(orbits),
    }
    return OrbitSearchResult(tuple(orbits), stats)


# -- the singular orbit ------------------------------------------------------


@dataclass(frozen=True)
class SingularOrbitClass:
    """Fate of the orbit of the singular value kappa."""

    verdict: str  # attracting_cycle | escaping_suspected | undecided
    iterations_used: int
    period: int | None = None
    cycle: tuple[complex, ...] | None = None
    multiplier: complex | None = None

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "iterations_used": self.iterations_used,
            "period": self.period,
            "cycle": [[p.real, p.imag] for p in self.cycle] if self.cycle else None,
            "multiplier": [self.multiplier.real, self.multiplier.imag]
            if self.multiplier is not None
            else None,
        }


def classify_singular_orbit(
    kappa: complex,
    max_iter: int = 2000,
    escape_re: float = 50.0,
    escape_run: int = 10,
    cycle_tol: float = 1e-10,
    max_period: int = 32,
    stability_tol: float = 1e-9,
) -> SingularOrbitClass:
    """Iterate the singular value and report where its orbit is heading.

    attracting_cycle means a Newton-confirmed attracting cycle; a revisit
    that polishes to an indifferent or repelling cycle is not taken as
    evidence (so a parabolic basin, e.g. kappa = -1, stays undecided).
    escaping_suspected means Re stayed above escape_re for escape_run steps,
    or one more exp would overflow float64 towards +infinity.
    """
    z = kappa
    history: list[complex] = [z]
    high_run = 0
    for k in range(1, max_iter + 1):
        try:
            z = exp_map(kappa, z)
        except OrbitOverflow:
            if math.cos(history[-1].imag) > 0:
                return SingularOrbitClass("escaping_suspected", k)
            return SingularOrbitClass("undecided", k)
        high_run = high_run + 1 if z.real > escape_re else 0
        if high_run >= escape_run:
            return SingularOrbitClass("escaping_suspected", k)
        lookback = min(max_period, len(history))
        for p in range(1, lookback + 1):
            prev = history[-p]
            if abs(z - prev) < cycle_tol:
                confirmed = _confirm_attracting(kappa, z, p, stability_tol)
                if confirmed is not None:
                    m, cyc, lam = confirmed
                    return SingularOrbitClass("attracting_cycle", k, m, tuple(cyc), lam)
                break
        history.append(z)
    return SingularOrbitClass("undecided", max_iter)


def _confirm_attracting(
    kappa: complex, z: complex, p: int, stability_tol: float
) -> tuple[int, list[complex], complex] | None:
    zc = newton_periodic(kappa, z, p)
    if zc is None:
        return None
    try:
        m = exact_period(kappa, zc, p)
        cyc = orbit(kappa, zc, m - 1) if m > 1 else [zc]
        lam = multiplier(kappa, cyc)
    except (NotACycle, OrbitOverflow):
        return None
    if abs(lam) < 1 - stability_tol:
        rep = min(cyc, key=lambda q: (q.real, q.imag))
        i = cyc.index(rep)
        return m, cyc[i:] + cyc[:i], lam
    return None
