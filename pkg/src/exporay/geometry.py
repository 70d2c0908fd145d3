"""Plane geometry helpers: rectangles, polyline distance, polygon membership."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle in the complex plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self) -> None:
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"degenerate rectangle {self}")

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )

    def center(self) -> complex:
        return complex((self.re_min + self.re_max) / 2, (self.im_min + self.im_max) / 2)

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """Parse "re_min:re_max:im_min:im_max"."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"rectangle needs 4 colon-separated numbers: {text!r}")
        return cls(*(float(p) for p in parts))


def point_segment_distance(p: complex, a: complex, b: complex) -> float:
    """Distance from p to the closed segment [a, b]."""
    ab = b - a
    denom = ab.real * ab.real + ab.imag * ab.imag
    if denom == 0.0:
        return abs(p - a)
    ap = p - a
    t = (ap.real * ab.real + ap.imag * ab.imag) / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def point_polyline_distance(p: complex, pts: list[complex]) -> float:
    if not pts:
        raise ValueError("empty polyline")
    if len(pts) == 1:
        return abs(p - pts[0])
    return min(point_segment_distance(p, a, b) for a, b in zip(pts, pts[1:]))


def point_in_polygon(p: complex, polygon: list[complex]) -> bool:
    """Even-odd crossing test against the closed polygon (last edge implicit)."""
    inside = False
    n = len(polygon)
    for i in range(n):
        a = polygon[i]
        b = polygon[(i + 1) % n]
        if (a.imag > p.imag) != (b.imag > p.imag):
            x_cross = a.real + (p.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if p.real < x_cross:
                inside = not inside
    return inside
