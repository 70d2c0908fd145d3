"""Parameter rays, parabolic parameters, component scans and wakes.

The parameter ray at address s is the set of kappa lying on their own
dynamic ray: Phi(kappa, t) = eval_ray(kappa, s, t) - kappa = 0.  Tracing
is predictor-corrector continuation in t; landing as t -> 0 happens at a
parabolic parameter and is finished off by Newton on a two-dimensional
system in (z, kappa).

The polish is staged.  The naive system {E^n(z) - z, (E^n)'(z) - 1} has
a singular Jacobian whenever the parabolic is a satellite (orbit period
m < n, multiplier a primitive q-th root of unity with m q = n): both
equations degenerate along the orbit collision.  A damped first stage
still creeps close enough to read off m and q, after which the primitive
system {E^m(z) - z, (E^m)'(z) - e^{2 pi i p/q}} has a simple root and
converges quadratically.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, replace

from .address import ExternalAddress, enumerate_periodic, lex_cmp
from .dynamics import (
    OVERFLOW_RE,
    OrbitOverflow,
    classify_singular_orbit,
    growth_iter,
)
from .geometry import Rect, point_in_polygon, point_polyline_distance
from .parallel import parallel_map
from .rays import (
    DepthSaturated,
    NotConverged,
    OrderUnresolved,
    RayBroken,
    RayEvalConfig,
    eval_ray,
    eval_ray_dk,
    land_ray,
)

TWO_PI = 2.0 * math.pi

# Re-coordinate at which wake boundaries are closed off toward +infinity.
WAKE_CLOSE_RE = 1.0e6


class ContinuationStalled(Exception):
    """The adaptive t-step underflowed; carries the last good sample."""

    def __init__(self, t: float, sample, message: str):
        super().__init__(message)
        self.t = t
        self.sample = sample


class PolishDiverged(Exception):
    """No seed led the parabolic Newton system to a solution."""


class PeriodMismatch(Exception):
    """A polished parabolic has the wrong ray period for its ray."""

    def __init__(self, expected: int, found: int, kappa: complex, message: str):
        super().__init__(message)
        self.expected = expected
        self.found = found
        self.kappa = kappa


class RootNotFound(Exception):
    """Multiplier continuation toward the component root stalled."""


class RaysNotFound(Exception):
    """Brute-force search did not yield two co-landing rays."""

    def __init__(self, m_max: int, found: int, message: str):
        super().__init__(message)
        self.m_max = m_max
        self.found = found


class HypothesisNotMet(Exception):
    """The magnitude-bound hypothesis M > F^n(6) fails for this address."""


@dataclass(frozen=True)
class ParabolicParameter:
    """A parameter with a parabolic cycle, as produced by the polish.

    multiplier is within solver tolerance of the primitive q-th root of
    unity e^{2 pi i p/q}, and ray_period = q * orbit_period.
    """

    kappa: complex
    orbit_period: int
    ray_period: int
    orbit_point: complex
    multiplier: complex

    def as_dict(self) -> dict:
        return {
            "kappa": [self.kappa.real, self.kappa.imag],
            "orbit_period": self.orbit_period,
            "ray_period": self.ray_period,
            "orbit_point": [self.orbit_point.real, self.orbit_point.imag],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
        }


@dataclass(frozen=True)
class ParameterRayTrace:
    address: ExternalAddress
    samples: tuple  # of (t, kappa, corrector_residual), t strictly decreasing
    t_min_reached: float
    landing: ParabolicParameter | None = None

    @property
    def kappas(self) -> list:
        return [k for _, k, _ in self.samples]

    def extrapolated_limit(self) -> complex:
        """Linear extrapolation of the last two samples to t = 0."""
        if len(self.samples) >= 2:
            (t0, k0, _), (t1, k1, _) = self.samples[-2], self.samples[-1]
            return k1 + (k0 - k1) * (0.0 - t1) / (t0 - t1)
        return self.samples[-1][1]

    def as_rows(self) -> list:
        return [(t, k.real, k.imag, r) for t, k, r in self.samples]

    def as_dict(self) -> dict:
        return {
            "address": str(self.address),
            "samples": self.as_rows(),
            "t_min_reached": self.t_min_reached,
            "landing": self.landing.as_dict() if self.landing else None,
        }


@dataclass(frozen=True)
class Wake:
    """A wake: two characteristic rays co-landing at a parabolic root."""

    component_period: int
    root: ParabolicParameter
    char_addresses: tuple  # (s1, s2), lexicographically increasing
    boundary: tuple  # (trace of s1, trace of s2); empty for the period-1 wake

    def as_dict(self) -> dict:
        return {
            "component_period": self.component_period,
            "root": self.root.as_dict(),
            "addresses": [str(a) for a in self.char_addresses],
            "boundary": [tr.as_dict() for tr in self.boundary],
        }


@dataclass(frozen=True)
class ComponentGrid:
    """Per-cell singular-orbit verdicts on a rectangle.

    codes/periods are row-major tuples (iy * nx + ix), iy increasing with
    Im.  Code 0 = attracting (period in periods), 1 = escaping suspected,
    2 = undecided.
    """

    rect: Rect
    nx: int
    ny: int
    codes: tuple
    periods: tuple

    CODE_NAMES = ("attracting", "escaping_suspected", "undecided")

    def kappa_at(self, ix: int, iy: int) -> complex:
        dre = (self.rect.re_max - self.rect.re_min) / self.nx
        dim = (self.rect.im_max - self.rect.im_min) / self.ny
        return complex(
            self.rect.re_min + (ix + 0.5) * dre,
            self.rect.im_min + (iy + 0.5) * dim,
        )

    def cell(self, ix: int, iy: int) -> tuple:
        i = iy * self.nx + ix
        return self.CODE_NAMES[self.codes[i]], self.periods[i]

    def counts(self) -> dict:
        out = {}
        for c, p in zip(self.codes, self.periods):
            key = f"attracting_{p}" if c == 0 else self.CODE_NAMES[c]
            out[key] = out.get(key, 0) + 1
        return out

    def as_csv_rows(self) -> list:
        rows = []
        for iy in range(self.ny):
            for ix in range(self.nx):
                k = self.kappa_at(ix, iy)
                i = iy * self.nx + ix
                rows.append(
                    (ix, iy, k.real, k.imag, self.CODE_NAMES[self.codes[i]],
                     self.periods[i])
                )
        return rows


_DEFAULT_CFG = RayEvalConfig()
# Dynamic-ray landing used only to seed the parabolic polish: a tight
# depth budget keeps a hopeless attempt (kappa on its own ray) cheap.
_SEED_LAND_CFG = RayEvalConfig(max_depth=2_000_000)


def _correct(
    s: ExternalAddress,
    kappa0: complex,
    t: float,
    cfg: RayEvalConfig,
    tol: float,
    max_iter: int = 25,
):
    """Guarded Newton in kappa on Phi = eval_ray(kappa, s, t) - kappa.

    The slope dPhi/dkappa comes from the analytic pullback propagation,
    not finite differences: near a parabolic landing |dPhi/dkappa| grows
    like 1/t^2, so the Newton basin shrinks below any difference step,
    and a probe on the far side of the ray crosses the log branch cuts
    and returns a value from the wrong inverse branch.  Steps that do not
    reduce |Phi| (a crossing looks like an O(1) jump) are halved away.
    Returns (kappa, |Phi|) or None.
    """
    k = kappa0
    try:
        z, dz = eval_ray_dk(k, s, t, cfg)
    except RayBroken:
        raise
    phi = z - k
    for _ in range(max_iter):
        if abs(phi) <= tol:
            return k, abs(phi)
        d = dz - 1.0
        if d == 0:
            return None
        step = phi / d
        cap = 1.0 + abs(k)
        if abs(step) > cap:
            step *= cap / abs(step)
        moved = False
        while abs(step) > 1e-17 * (1.0 + abs(k)):
            cand = k - step
            try:
                zc, dzc = eval_ray_dk(cand, s, t, cfg)
                pc = zc - cand
            except RayBroken:
                pc = None
            if pc is not None and abs(pc) < abs(phi):
                k, phi, dz = cand, pc, dzc
                moved = True
                break
            step *= 0.5
        if not moved:
            return None
    return None


def trace_parameter_ray(
    s: ExternalAddress,
    t_start: float,
    t_end: float,
    steps: int = 80,
    corrector_tol: float = 1e-9,
    cfg: RayEvalConfig | None = None,
) -> ParameterRayTrace:
    """Continuation of the parameter ray from t_start down to t_end.

    Starts from the asymptotic guess t_start + 2 pi i s_1, then walks a
    geometric t-schedule with linear extrapolation as predictor and the
    guarded Newton corrector; the step is halved in log scale whenever
    the corrector fails or jumps.  RayBroken propagates (the ray
    genuinely stops there).

    Near a parabolic landing the achievable |Phi| floor is
    |dPhi/dkappa| * ulp(kappa), which crosses corrector_tol shortly
    above typical t_end values (the derivative blows up faster than
    1/t^2 on creeping approaches).  A stall inside the final octave
    [t_end, 2 t_end] is therefore reported through t_min_reached rather
    than an exception; a stall farther out raises ContinuationStalled.
    """
    if not (t_start > t_end > 0):
        raise ValueError("need t_start > t_end > 0")
    if steps < 2:
        raise ValueError("need at least 2 steps")
    cfg = cfg or _DEFAULT_CFG
    base_ratio = (t_end / t_start) ** (1.0 / (steps - 1))

    guess = complex(t_start, TWO_PI * s.entry(1))
    first = _correct(s, guess, t_start, cfg, corrector_tol)
    if first is None:
        raise ContinuationStalled(
            t_start, None, f"corrector failed at the start point t={t_start}"
        )
    samples = [(t_start, first[0], first[1])]

    t = t_start
    ratio = base_ratio
    while t > t_end * (1.0 + 1e-12):
        t_next = max(t * ratio, t_end)
        if len(samples) >= 2:
            (t1, k1, _), (t0, k0, _) = samples[-1], samples[-2]
            pred = k1 + (k1 - k0) * ((t_next - t1) / (t1 - t0))
        else:
            pred = samples[-1][1] + (t_next - t)
        got = _correct(s, pred, t_next, cfg, corrector_tol)
        if got is None or abs(got[0] - pred) > 0.5 * (1.0 + abs(pred)):
            ratio = math.sqrt(ratio)
            if 1.0 - ratio < 1e-9:
                if t <= 2.0 * t_end:
                    break
                raise ContinuationStalled(
                    t, samples[-1], f"continuation step underflowed at t={t:.6g}"
                )
            continue
        t = t_next
        samples.append((t, got[0], got[1]))
        ratio = base_ratio
    return ParameterRayTrace(s, tuple(samples), t, None)


def _propagate(kappa: complex, z: complex, n: int):
    """Forward orbit with derivatives.

    Returns (E^n(z), a, b, sa, sb) where a = d E^n/dz, b = d E^n/dkappa,
    and sa, sb are the sums of the intermediate derivatives entering the
    derivative of the cycle multiplier: d(a)/dz = a*sa, d(a)/dkappa = a*sb.
    """
    a = 1.0 + 0.0j
    b = 0.0 + 0.0j
    sa = 0.0 + 0.0j
    sb = 0.0 + 0.0j
    w = z
    for _ in range(n):
        if w.real > OVERFLOW_RE:
            raise OrbitOverflow(f"Re z = {w.real:.6g} exceeds exp range")
        sa += a
        sb += b
        e = cmath.exp(w)
        a = e * a
        b = e * b + 1.0
        w = e + kappa
    return w, a, b, sa, sb


def _newton_system(
    kappa: complex,
    z: complex,
    n: int,
    target: complex,
    tol: float,
    max_iter: int = 80,
    damp: float = 0.5,
):
    """Damped Newton on {E^n(z) - z = 0, (E^n)'(z) = target} in (z, kappa)."""
    for _ in range(max_iter):
        try:
            w, a, b, sa, sb = _propagate(kappa, z, n)
        except OrbitOverflow:
            return None
        f0 = w - z
        f1 = a - target
        if abs(f0) + abs(f1) <= tol:
            return z, kappa
        j00 = a - 1.0
        j01 = b
        j10 = a * sa
        j11 = a * sb
        det = j00 * j11 - j01 * j10
        if det == 0 or cmath.isnan(det):
            return None
        dz = (f0 * j11 - f1 * j01) / det
        dk = (j00 * f1 - j10 * f0) / det
        m = max(abs(dz), abs(dk))
        if m > damp:
            dz *= damp / m
            dk *= damp / m
        z -= dz
        kappa -= dk
    return None


def polish_parabolic(
    kappa0: complex, z0: complex, n: int, tol: float = 1e-13
) -> ParabolicParameter:
    """Polish (z0, kappa0) to a parabolic parameter of ray period n.

    Stage one runs the damped Newton on the ray-period system with
    multiplier target 1, which is singular at satellite roots but still
    contracts linearly; stage two reads off the orbit period m and the
    root of unity from the almost-converged point, then refines on the
    primitive system where the root is simple.  Raises PolishDiverged
    when no stage-one convergence happens, PeriodMismatch (carrying the
    offending kappa) when the detected parabolic does not have ray
    period n.
    """
    coarse = _newton_system(kappa0, z0, n, 1.0 + 0.0j, tol=1e-8, max_iter=120)
    if coarse is None:
        raise PolishDiverged(f"stage-one Newton diverged from seed z={z0:.6g}")
    z, kappa = coarse
    for m in sorted(d for d in range(1, n + 1) if n % d == 0):
        q = n // m
        try:
            w, am, *_ = _propagate(kappa, z, m)
        except OrbitOverflow:
            continue
        if abs(w - z) > 1e-4 * (1.0 + abs(z)):
            continue
        if _orbit_closes_before(kappa, z, m):
            continue
        p = round(q * cmath.phase(am) / TWO_PI) % q
        if q > 1 and math.gcd(p, q) != 1:
            continue
        target = cmath.exp(2j * math.pi * p / q)
        if abs(am - target) > 0.2:
            continue
        fine = _newton_system(kappa, z, m, target, tol=tol, max_iter=80)
        if fine is None:
            continue
        zf, kf = fine
        if abs(kf - kappa) > 1e-2 * (1.0 + abs(kappa)):
            continue
        _, lam, *_ = _propagate(kf, zf, m)
        return ParabolicParameter(
            kappa=kf,
            orbit_period=m,
            ray_period=m * q,
            orbit_point=zf,
            multiplier=lam,
        )
    # stage one converged somewhere, but no divisor/root-of-unity split
    # reproduces ray period n
    try:
        _, a1, *_ = _propagate(kappa, z, n)
        found = _detect_ray_period(kappa, z, n, a1)
    except OrbitOverflow:
        found = 0
    raise PeriodMismatch(
        n,
        found,
        kappa,
        f"polished parabolic near kappa={kappa:.8g} has ray period {found}, "
        f"expected {n}",
    )


def _orbit_closes_before(kappa: complex, z: complex, m: int) -> bool:
    """True when the orbit of z already closes at a proper divisor of m.

    Guards the orbit-period detection: a fixed point also satisfies the
    period-2 closure test, but calling it a 2-cycle would misreport the
    ray period.
    """
    for d in range(1, m):
        if m % d != 0:
            continue
        try:
            w, *_ = _propagate(kappa, z, d)
        except OrbitOverflow:
            return False
        if abs(w - z) <= 1e-4 * (1.0 + abs(z)):
            return True
    return False


def _detect_ray_period(kappa: complex, z: complex, n: int, a_n: complex) -> int:
    """Best-effort ray period of an (approximately) parabolic (z, kappa)."""
    for m in sorted(d for d in range(1, n + 1) if n % d == 0):
        try:
            w, am, *_ = _propagate(kappa, z, m)
        except OrbitOverflow:
            return 0
        if abs(w - z) > 1e-5 * (1.0 + abs(z)):
            continue
        if _orbit_closes_before(kappa, z, m):
            continue
        for q in range(1, 65):
            p = round(q * cmath.phase(am) / TWO_PI) % q
            if q > 1 and math.gcd(p, q) != 1:
                continue
            if abs(am - cmath.exp(2j * math.pi * p / q)) < 1e-5:
                return m * q
    return 0


def land_parameter_ray(
    trace: ParameterRayTrace, n: int | None = None
) -> ParabolicParameter:
    """Land a traced parameter ray at its parabolic parameter.

    Seeds the polish from the dynamic-ray landing at the trace end when
    that works (it often does not: the trace end lies on its own ray, so
    the dynamic ray is broken or creeps), then from ray points at modest
    potentials, then from the parameter itself.  The accepted parabolic
    must lie near the trace end; a nearby parabolic of the wrong ray
    period raises PeriodMismatch (a tracing fault), exhausted seeds raise
    PolishDiverged.
    """
    s = trace.address
    if not s.is_periodic():
        raise ValueError("landing requires a periodic address")
    n_addr = s.exact_period()
    if n is None:
        n = n_addr
    elif n != n_addr:
        raise ValueError(f"ray period {n} does not match the address ({n_addr})")
    t_end, k_end, _ = trace.samples[-1]
    k_limit = trace.extrapolated_limit()

    seeds = []
    try:
        est = land_ray(k_end, s, _SEED_LAND_CFG, max_steps=25)
        seeds.extend(est.orbit.points)
    except (RayBroken, DepthSaturated, NotConverged):
        pass
    for t_seed in (max(2.0 * t_end, 2e-3), 0.2):
        try:
            seeds.append(eval_ray(k_end, s, t_seed, _SEED_LAND_CFG).z)
        except (RayBroken, DepthSaturated):
            pass
    seeds.append(k_end)

    mismatch = None
    for z0 in seeds:
        try:
            cand = polish_parabolic(k_limit, z0, n)
        except PolishDiverged:
            continue
        except PeriodMismatch as exc:
            if abs(exc.kappa - k_end) <= 0.5 * (1.0 + abs(k_end)):
                mismatch = exc
            continue
        if abs(cand.kappa - k_end) <= 0.5 * (1.0 + abs(k_end)):
            return cand
    if mismatch is not None:
        raise mismatch
    raise PolishDiverged(
        f"no polish seed converged near the trace end kappa={k_end:.8g}"
    )


def trace_and_land(
    s: ExternalAddress,
    t_start: float = 30.0,
    t_end: float = 1e-3,
    steps: int = 80,
    corrector_tol: float = 1e-9,
    cfg: RayEvalConfig | None = None,
) -> ParameterRayTrace:
    """Trace a periodic parameter ray and attach its parabolic landing."""
    tr = trace_parameter_ray(s, t_start, t_end, steps, corrector_tol, cfg)
    return replace(tr, landing=land_parameter_ray(tr))


def parameter_ray_bound(n: int, m_bound: float) -> float:
    """The magnitude bound F^{-(n-1)}(2 pi M)/5 for period-n rays.

    Pure formula; the hypothesis gate (M > F^n(6)) lives in
    check_parameter_ray_bound.  For n=1 this is 2 pi M/5, for n=2
    log(1 + 2 pi M)/5, and so on down the inverse growth iterates.
    """
    if n < 1:
        raise ValueError("period must be positive")
    return growth_iter(-(n - 1), TWO_PI * m_bound) / 5.0


def check_parameter_ray_bound(s: ExternalAddress, samples) -> dict:
    """Margin report for the magnitude bound |kappa| > F^{-(n-1)}(2 pi M)/5.

    The bound only claims anything under the hypothesis M > F^n(6), where
    n is the exact period and M the entry bound; HypothesisNotMet
    otherwise.  samples may be a ParameterRayTrace or a list of kappas.
    """
    if not s.is_periodic():
        raise ValueError("the bound addresses periodic rays")
    n = s.exact_period()
    m_bound = s.bound()
    if not m_bound > growth_iter(n, 6.0):
        raise HypothesisNotMet(
            f"entry bound M={m_bound} is not above F^{n}(6) = "
            f"{growth_iter(n, 6.0):.6g}"
        )
    bound = parameter_ray_bound(n, m_bound)
    if isinstance(samples, ParameterRayTrace):
        kappas = samples.kappas
    else:
        kappas = [complex(k) for k in samples]
    if not kappas:
        raise ValueError("no samples to check")
    margins = [abs(k) - bound for k in kappas]
    return {
        "address": str(s),
        "period": n,
        "entry_bound": m_bound,
        "kappa_bound": bound,
        "samples": len(kappas),
        "min_margin": min(margins),
        "max_margin": max(margins),
        "all_above": all(mg > 0 for mg in margins),
    }


def scan_components(
    rect: Rect,
    resolution,
    max_period: int = 32,
    max_iter: int = 2000,
    threads: int | None = None,
) -> ComponentGrid:
    """Classify the singular orbit on a cell grid over rect.

    rect is a Rect or a (re_min, re_max, im_min, im_max) tuple.  resolution
    is either an int (square grid) or (nx, ny).  Cells are sampled at their
    centers; rows are classified in parallel but the aggregation order is
    fixed, so the grid is deterministic.
    """
    if not isinstance(rect, Rect):
        rect = Rect(*rect)
    if isinstance(resolution, int):
        nx = ny = resolution
    else:
        nx, ny = resolution
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be positive")
    dre = (rect.re_max - rect.re_min) / nx
    dim = (rect.im_max - rect.im_min) / ny

    def classify_row(iy: int):
        im = rect.im_min + (iy + 0.5) * dim
        row = []
        for ix in range(nx):
            re = rect.re_min + (ix + 0.5) * dre
            out = classify_singular_orbit(
                complex(re, im), max_iter=max_iter, max_period=max_period
            )
            if out.verdict == "attracting_cycle":
                row.append((0, out.period))
            elif out.verdict == "escaping_suspected":
                row.append((1, 0))
            else:
                row.append((2, 0))
        return row

    rows = parallel_map(classify_row, range(ny), threads)
    codes = tuple(c for row in rows for c, _ in row)
    periods = tuple(p for row in rows for _, p in row)
    return ComponentGrid(rect, nx, ny, codes, periods)


def _wake_polygon(wake: Wake) -> list:
    tr1, tr2 = wake.boundary
    root = wake.root.kappa
    out1 = [k for _, k, _ in tr1.samples[::-1]]  # near root -> far out
    out2 = [k for _, k, _ in tr2.samples]  # far out -> near root
    far1 = complex(WAKE_CLOSE_RE, out1[-1].imag)
    far2 = complex(WAKE_CLOSE_RE, out2[0].imag)
    return [root] + out1 + [far1, far2] + out2


def period_one_wake() -> Wake:
    """The period-1 wake, encoded by convention as boundaryless: all of C.

    Its root is taken as the principal parabolic kappa = -1 (fixed point
    z = 0, multiplier 1).
    """
    root = ParabolicParameter(
        kappa=-1.0 + 0.0j,
        orbit_period=1,
        ray_period=1,
        orbit_point=0.0 + 0.0j,
        multiplier=1.0 + 0.0j,
    )
    return Wake(component_period=1, root=root, char_addresses=(), boundary=())


def wake_membership(kappa: complex, wake: Wake, boundary_tol: float = 1e-8) -> str:
    """One of "inside", "outside", "on_boundary" for kappa against a wake.

    The wake is the component of the plane cut along the two
    characteristic rays (joined at the root and closed off far to the
    right) that does not contain the far-left real axis.  The period-1
    wake is the whole plane by convention: no boundary, everything is
    inside.
    """
    kappa = complex(kappa)
    if not wake.boundary:
        return "inside"
    poly = _wake_polygon(wake)
    if len(poly) < 3:
        raise ValueError("degenerate wake boundary")
    if point_polyline_distance(kappa, poly) < boundary_tol:
        return "on_boundary"
    return "inside" if point_in_polygon(kappa, poly) else "outside"


def continue_to_multiplier(
    kappa: complex, z: complex, n: int, target: complex, steps: int = 16
) -> tuple[complex, complex]:
    """Walk an n-cycle's multiplier along a segment to the given target.

    Starting from a parameter and cycle point, moves the multiplier target
    linearly from its current value toward target, solving the coupled
    (z, kappa) system at each intermediate stop.  The system is nonsingular
    away from multiplier 1, so the walk succeeds whenever the segment stays
    inside the multiplier image of the component (in particular it must not
    pass through 0, which no exponential cycle attains; route around it
    with two calls if needed).  Returns the final (z, kappa).  Raises
    RootNotFound if adaptive step halving stalls.
    """
    _, lam, *_ = _propagate(kappa, z, n)
    frac = 1.0 / steps
    pos = 0.0
    while pos < 1.0 - 1e-12:
        nxt = min(pos + frac, 1.0)
        tgt = lam + (target - lam) * nxt
        got = _newton_system(kappa, z, n, tgt, tol=1e-11, max_iter=60)
        if got is None:
            frac *= 0.5
            if frac < 1e-6:
                raise RootNotFound(
                    f"multiplier continuation stalled at fraction {pos:.4g}"
                )
            continue
        z, kappa = got
        pos = nxt
    return z, kappa


def _component_root(kappa_s: complex, z0: complex, n: int) -> ParabolicParameter:
    """Continue the attracting cycle's multiplier to 1 and polish.

    Walks the segment from the sampled multiplier toward 1, stopping just
    inside the disk where the system is still nonsingular, then hands the
    last iterate to the staged parabolic polish.
    """
    z, kappa = continue_to_multiplier(kappa_s, z0, n, 1.0 - 1e-3 + 0.0j)
    return polish_parabolic(kappa, z, n)


def find_characteristic_rays(
    component_sample: complex,
    n: int,
    m_max: int = 5,
    threads: int | None = None,
    t_start: float = 30.0,
    t_end: float = 1e-3,
    match_tol: float = 1e-4,
) -> Wake:
    """Construct the wake of the component containing component_sample.

    Locates the root by multiplier continuation, then brute-forces
    period-n addresses with entry bound growing up to m_max, tracing and
    landing each candidate parameter ray until exactly two land at the
    root.  The needed bound is not known a priori, so exhausting m_max
    raises RaysNotFound with the count found.
    """
    if n < 2:
        raise ValueError("period-1 has no characteristic rays (wake is the plane)")
    sing = classify_singular_orbit(complex(component_sample), max_iter=5000)
    if sing.verdict != "attracting_cycle" or sing.period != n:
        raise ValueError(
            f"sample {component_sample} is not in an attracting period-{n} "
            f"component (got {sing.verdict}, period {sing.period})"
        )
    root = _component_root(complex(component_sample), sing.cycle[0], n)
    if root.ray_period != n:
        raise PeriodMismatch(
            n, root.ray_period, root.kappa,
            f"component root has ray period {root.ray_period}, expected {n}",
        )

    def probe(addr):
        try:
            tr = trace_parameter_ray(addr, t_start, t_end)
            landing = land_parameter_ray(tr)
        except (RayBroken, DepthSaturated, ContinuationStalled, PolishDiverged,
                PeriodMismatch):
            return None
        return replace(tr, landing=landing)

    matches = []
    tried = set()
    for m in range(1, m_max + 1):
        candidates = [
            a
            for a in enumerate_periodic(n, m)
            if a.exact_period() == n and a not in tried
        ]
        tried.update(candidates)
        for tr in parallel_map(probe, candidates, threads):
            if tr is not None and abs(tr.landing.kappa - root.kappa) < match_tol:
                matches.append(tr)
        if len(matches) >= 2:
            break
    if len(matches) != 2:
        raise RaysNotFound(
            m_max, len(matches),
            f"found {len(matches)} rays landing at the root within {match_tol} "
            f"(entry bound searched up to {m_max})",
        )
    matches.sort(key=lambda tr: _lex_key(tr.address))
    s1, s2 = matches[0].address, matches[1].address
    if lex_cmp(s1, s2) >= 0:
        s1, s2 = s2, s1
        matches = [matches[1], matches[0]]
    return Wake(
        component_period=n,
        root=root,
        char_addresses=(s1, s2),
        boundary=(matches[0], matches[1]),
    )


def _lex_key(s: ExternalAddress):
    return functools.cmp_to_key(lex_cmp)(s)


def param_vertical_order(
    s: ExternalAddress,
    r: ExternalAddress,
    R: float = 100.0,
    cfg: RayEvalConfig | None = None,
    corrector_tol: float = 1e-9,
) -> str:
    """Vertical order of two parameter rays at Re kappa = R.

    Rays sharing a first entry are exponentially close out there, below
    double resolution; unlike the dynamic plane there is no shift trick
    in the parameter plane, so such pairs raise OrderUnresolved.
    """
    if s == r:
        raise ValueError("addresses must differ")
    if R < 50.0:
        raise ValueError("comparison height R must be at least 50")
    cfg = cfg or _DEFAULT_CFG
    ka = _param_point_at_re(s, R, cfg, corrector_tol)
    kb = _param_point_at_re(r, R, cfg, corrector_tol)
    di = ka.imag - kb.imag
    if abs(di) <= 1e-6:
        raise OrderUnresolved(
            "parameter rays with equal first entries cannot be separated "
            f"numerically at Re = {R}"
        )
    return "below" if di < 0 else "above"


def _param_point_at_re(
    s: ExternalAddress, target: float, cfg: RayEvalConfig, tol: float
) -> complex:
    def kappa_at(t: float) -> complex:
        got = _correct(s, complex(t, TWO_PI * s.entry(1)), t, cfg, tol)
        if got is None:
            raise OrderUnresolved(f"corrector failed at t={t:.6g}")
        return got[0]

    lo, hi = max(target - 8.0, 1.0), target + 8.0
    klo = kappa_at(lo)
    flo = klo.real - target
    fhi = kappa_at(hi).real - target
    if not (flo < 0 < fhi):
        raise OrderUnresolved(f"could not bracket Re kappa = {target}")
    best = klo
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        best = kappa_at(mid)
        f = best.real - target
        if (f > 0) == (flo > 0):
            lo, flo = mid, f
        else:
            hi = mid
    return best
