"""Compiled inner loops for ray evaluation.

Deliberately tiny: one forward growth loop and one pullback loop, both
numba-jitted.  Depth selection, anchor handling and error reporting live
in plain Python in rays.py.
"""

import math

from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def forward_depth(t, tstar, max_depth):
    """Iterate x -> expm1(x) from t until x >= tstar.

    Returns (steps, value).  Stops early at max_depth; the caller decides
    whether that is an error.
    """
    x = t
    n = 0
    while x < tstar and n < max_depth:
        x = math.expm1(x)
        n += 1
    return n, x


@njit(cache=True, nogil=True)
def pullback(wr, wi, kr, ki, pre, block, depth, broken_eps):
    """Apply `depth` inverse steps w <- log(w - kappa) + 2*pi*i*entry(k).

    Address entries are read from the (preperiod, block) pair for
    k = depth down to 1, so the final value sits in the strip of the
    first entry.  hypot keeps the modulus finite even for anchors near
    the top of the double range.

    Returns (re, im, broken_step); broken_step is 0 for a clean pullback,
    else the 1-based level at which |w - kappa| fell below broken_eps.
    """
    n_pre = pre.shape[0]
    n_blk = block.shape[0]
    for k in range(depth, 0, -1):
        ur = wr - kr
        ui = wi - ki
        m = math.hypot(ur, ui)
        if m < broken_eps:
            return wr, wi, k
        if k <= n_pre:
            e = pre[k - 1]
        else:
            e = block[(k - 1 - n_pre) % n_blk]
        wr = math.log(m)
        wi = math.atan2(ui, ur) + TWO_PI * e
    return wr, wi, 0


@njit(cache=True, nogil=True)
def pullback_d(wr, wi, kr, ki, pre, block, depth, broken_eps):
    """Pullback that also propagates the kappa-derivative of the value.

    Each inverse step w <- log(w - kappa) + 2*pi*i*e carries
    d <- (d - 1)/(w - kappa), starting from d = 0 at the anchor (which
    does not depend on kappa).  Exact up to rounding, so the caller gets
    a Newton slope without probing off the ray; finite differences in
    kappa are useless near a traced parameter ray because a probe on the
    far side crosses the branch cuts of the logs.

    Returns (re, im, d_re, d_im, broken_step).
    """
    n_pre = pre.shape[0]
    n_blk = block.shape[0]
    dr = 0.0
    di = 0.0
    for k in range(depth, 0, -1):
        ur = wr - kr
        ui = wi - ki
        m = math.hypot(ur, ui)
        if m < broken_eps:
            return wr, wi, 0.0, 0.0, k
        if k <= n_pre:
            e = pre[k - 1]
        else:
            e = block[(k - 1 - n_pre) % n_blk]
        # d = (d - 1)/u in real pairs; scale by 1/|u|^2 once
        nr = dr - 1.0
        m2 = ur * ur + ui * ui
        dr = (nr * ur + di * ui) / m2
        di = (di * ur - nr * ui) / m2
        wr = math.log(m)
        wi = math.atan2(ui, ur) + TWO_PI * e
    return wr, wi, dr, di, 0
