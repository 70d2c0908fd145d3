"""Deterministic raster output: escape shading, component maps, ray overlays.

Everything here is pixel-exact reproducible: shading comes from integer
iteration counts through fixed lookup tables, polylines are drawn with
one-pixel Bresenham segments (no anti-aliasing), and images are 8-bit
RGB arrays saved through Pillow.  Renderers return the pixel array plus
a metadata dict describing exactly what was drawn, so callers can echo
it into sidecar files.
"""

from __future__ import annotations

import colorsys

import numpy as np
from PIL import Image

from .geometry import Rect
from .parameter import ComponentGrid, scan_components, trace_parameter_ray
from .parameter import ContinuationStalled
from .rays import RayEvalConfig, ray_polyline

# reserved colors for the two non-attracting verdicts; periods get their
# own colors from the rotating palette below
COLOR_ESCAPING = (238, 238, 238)
COLOR_UNDECIDED = (17, 17, 17)
COLOR_BACKGROUND = (0, 0, 0)

OVERLAY_COLORS = (
    (255, 255, 255),
    (255, 214, 64),
    (64, 214, 255),
    (255, 110, 199),
    (130, 255, 130),
)

_GOLDEN = 0.6180339887498949


def period_color(p: int) -> tuple:
    """Fixed color for an attracting period: golden-angle hue stepping."""
    h = (p * _GOLDEN) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, 0.78, 0.92)
    return (int(r * 255), int(g * 255), int(b * 255))


def _shade_table(max_iter: int) -> np.ndarray:
    """Lookup table: escape count -> RGB, cycling hues; slot -1 is interior."""
    table = np.zeros((max_iter + 1, 3), dtype=np.uint8)
    for c in range(max_iter):
        h = (0.58 + 0.03 * c) % 1.0
        v = 0.55 + 0.45 * ((c % 32) / 31.0)
        r, g, b = colorsys.hsv_to_rgb(h, 0.65, v)
        table[c] = (int(r * 255), int(g * 255), int(b * 255))
    table[max_iter] = COLOR_BACKGROUND  # never escaped
    return table


def escape_counts(
    kappa: complex,
    rect: Rect,
    resolution,
    max_iter: int = 120,
    escape_re: float = 50.0,
) -> np.ndarray:
    """Iterations until Re z > escape_re, per pixel center; row 0 is im_max.

    Pixels that never pass the threshold within max_iter get max_iter.
    """
    if not isinstance(rect, Rect):
        rect = Rect(*rect)
    nx, ny = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be positive")
    xs = rect.re_min + (np.arange(nx) + 0.5) * (rect.re_max - rect.re_min) / nx
    ys = rect.im_max - (np.arange(ny) + 0.5) * (rect.im_max - rect.im_min) / ny
    z = xs[None, :] + 1j * ys[:, None]
    counts = np.full(z.shape, max_iter, dtype=np.int32)
    active = np.ones(z.shape, dtype=bool)
    for it in range(max_iter):
        escaped = active & (z.real > escape_re)
        counts[escaped] = it
        active &= ~escaped
        if not active.any():
            break
        # cap the exponent so exp never overflows while a pixel is active
        zr = np.clip(z.real[active], None, escape_re + 1.0)
        z[active] = np.exp(zr + 1j * z.imag[active]) + kappa
    return counts


def shade_counts(counts: np.ndarray, max_iter: int) -> np.ndarray:
    return _shade_table(max_iter)[counts]


def pixel_of(z: complex, rect: Rect, nx: int, ny: int) -> tuple:
    """Integer pixel of a point; may land outside [0, nx) x [0, ny)."""
    fx = (z.real - rect.re_min) / (rect.re_max - rect.re_min)
    fy = (rect.im_max - z.imag) / (rect.im_max - rect.im_min)
    return int(np.floor(fx * nx)), int(np.floor(fy * ny))


def draw_segment(rgb: np.ndarray, a: tuple, b: tuple, color) -> None:
    """One-pixel Bresenham segment, clipped to the array, no blending."""
    ny, nx = rgb.shape[:2]
    x0, y0 = a
    x1, y1 = b
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        if 0 <= x0 < nx and 0 <= y0 < ny:
            rgb[y0, x0] = color
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def draw_polyline(rgb: np.ndarray, points, rect: Rect, color) -> None:
    nx, ny = rgb.shape[1], rgb.shape[0]
    px = [pixel_of(z, rect, nx, ny) for z in points]
    for a, b in zip(px, px[1:]):
        draw_segment(rgb, a, b, color)


def grid_image(grid: ComponentGrid) -> np.ndarray:
    """One pixel per cell, color by attracting period; row 0 is im_max."""
    rgb = np.zeros((grid.ny, grid.nx, 3), dtype=np.uint8)
    for iy in range(grid.ny):
        for ix in range(grid.nx):
            name, p = grid.cell(ix, iy)
            if name == "attracting":
                c = period_color(p)
            elif name == "escaping_suspected":
                c = COLOR_ESCAPING
            else:
                c = COLOR_UNDECIDED
            rgb[grid.ny - 1 - iy, ix] = c
    return rgb


def render_dynamical(
    kappa: complex,
    rect: Rect,
    resolution,
    overlays=(),
    t_lo: float = 0.05,
    t_hi: float | None = None,
    samples: int = 400,
    max_iter: int = 120,
    escape_re: float = 50.0,
    cfg: RayEvalConfig | None = None,
) -> tuple:
    """Escape shading of the dynamical plane with ray polylines on top.

    Overlay rays are sampled on a geometric t-grid and truncated (with an
    annotation in the metadata) when they break, so a partial curve is
    still drawn.  Returns (rgb array, metadata dict).
    """
    if not isinstance(rect, Rect):
        rect = Rect(*rect)
    kappa = complex(kappa)
    counts = escape_counts(kappa, rect, resolution, max_iter, escape_re)
    rgb = shade_counts(counts, max_iter)
    if t_hi is None:
        t_hi = max(rect.re_max + 2.0, t_lo * 2)
    drawn = []
    for i, s in enumerate(overlays):
        color = OVERLAY_COLORS[i % len(OVERLAY_COLORS)]
        pts, broken = ray_polyline(
            kappa, s, t_lo, t_hi, samples=samples, cfg=cfg, on_broken="truncate"
        )
        draw_polyline(rgb, [p.z for p in pts], rect, color)
        drawn.append({
            "address": str(s),
            "color": list(color),
            "samples_drawn": len(pts),
            "broken": None if broken is None else {
                "step": broken.step,
                "error": "RayBroken",
                "message": str(broken),
            },
        })
    meta = {
        "plane": "dynamical",
        "kappa": [kappa.real, kappa.imag],
        "rect": [rect.re_min, rect.re_max, rect.im_min, rect.im_max],
        "size": [rgb.shape[1], rgb.shape[0]],
        "max_iter": max_iter,
        "escape_re": escape_re,
        "t_range": [t_lo, t_hi],
        "overlays": drawn,
    }
    return rgb, meta


def render_parameter(
    rect: Rect,
    resolution,
    overlays=(),
    t_start: float = 30.0,
    t_end: float = 1e-3,
    steps: int = 80,
    max_period: int = 32,
    max_iter: int = 2000,
    threads: int | None = None,
) -> tuple:
    """Component map of the parameter plane with parameter-ray overlays.

    Cells are colored by attracting period (reserved colors for the
    escaping-suspected and undecided verdicts).  Overlay rays that stall
    mid-trace are drawn up to the stall and annotated in the metadata.
    Returns (rgb array, metadata dict).
    """
    if not isinstance(rect, Rect):
        rect = Rect(*rect)
    grid = scan_components(rect, resolution, max_period=max_period,
                           max_iter=max_iter, threads=threads)
    rgb = grid_image(grid)
    drawn = []
    for i, s in enumerate(overlays):
        color = OVERLAY_COLORS[i % len(OVERLAY_COLORS)]
        stalled = None
        try:
            tr = trace_parameter_ray(s, t_start, t_end, steps=steps)
            kappas = tr.kappas
        except ContinuationStalled as exc:
            stalled = {"t": exc.t, "error": "ContinuationStalled",
                       "message": str(exc)}
            kappas = []
            if exc.sample is not None and exc.t < t_start:
                # retrace down to just above the stall so the partial
                # curve still shows up (stalls at <= 2 * t_end end the
                # walk gracefully instead of raising)
                try:
                    tr = trace_parameter_ray(s, t_start, 0.6 * exc.t,
                                             steps=steps)
                    kappas = tr.kappas
                except ContinuationStalled:
                    kappas = []
        if len(kappas) >= 2:
            draw_polyline(rgb, kappas, rect, color)
        drawn.append({
            "address": str(s),
            "color": list(color),
            "samples_drawn": len(kappas),
            "stalled": stalled,
        })
    meta = {
        "plane": "parameter",
        "rect": [rect.re_min, rect.re_max, rect.im_min, rect.im_max],
        "size": [rgb.shape[1], rgb.shape[0]],
        "max_period": max_period,
        "max_iter": max_iter,
        "counts": grid.counts(),
        "t_range": [t_end, t_start],
        "overlays": drawn,
    }
    return rgb, meta


def save_png(rgb: np.ndarray, path) -> None:
    """Write an 8-bit RGB PNG; same array, same bytes."""
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
