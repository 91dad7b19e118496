"""Target sets K for area integrals and series restrictions.

Every region exposes a vectorized ``contains`` that always returns a
verdict (non-finite inputs are outside).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Polynomial, poly_eval


def default_escape_radius(p: Polynomial) -> float:
    """Radius beyond which every orbit of ``p`` tends to infinity."""
    lower = sum(abs(c) for c in p.coeffs[:-1])
    return max(2.0, (1.0 + lower) / abs(p.lead) + 1.0)


class RegionSpec:
    def contains(self, z) -> np.ndarray:
        raise NotImplementedError

    def __contains__(self, z) -> bool:
        return bool(self.contains(np.asarray([z], dtype=complex))[0])

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Disc(RegionSpec):
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(invalid="ignore"):
            return np.isfinite(z) & (np.abs(z - self.center) <= self.radius)

    def to_dict(self):
        return {"kind": "disc", "center": [self.center.real, self.center.imag], "radius": self.radius}


@dataclass(frozen=True)
class HalfLine(RegionSpec):
    """Closed ray ``anchor + s*direction`` for ``s >= 0``."""

    anchor: complex
    direction: complex
    tol: float = 1e-12

    def __post_init__(self):
        if self.direction == 0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "direction", self.direction / abs(self.direction))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        rel = (z - self.anchor) / self.direction
        with np.errstate(invalid="ignore"):
            return np.isfinite(z) & (rel.real >= -self.tol) & (np.abs(rel.imag) <= self.tol)

    def to_dict(self):
        return {"kind": "half_line", "anchor": [self.anchor.real, self.anchor.imag],
                "direction": [self.direction.real, self.direction.imag]}


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        v = ((q - p).conjugate() * (r - p)).imag
        return 0 if abs(v) < 1e-15 else (1 if v > 0 else -1)

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


@dataclass(frozen=True)
class Polygon(RegionSpec):
    vertices: tuple

    def __init__(self, vertices):
        vs = tuple(complex(v) for v in vertices)
        if len(vs) > 1 and vs[0] == vs[-1]:
            vs = vs[:-1]
        if len(vs) < 3:
            raise ValueError("polygon needs at least three vertices")
        n = len(vs)
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_cross(vs[i], vs[(i + 1) % n], vs[j], vs[(j + 1) % n]):
                    raise ValueError("polygon is not simple")
        object.__setattr__(self, "vertices", vs)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        inside = np.zeros(z.shape, dtype=bool)
        vs = self.vertices
        for a, b in zip(vs, vs[1:] + vs[:1]):
            crosses = (a.imag > y) != (b.imag > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            inside ^= crosses & (x < xint)
        return inside & np.isfinite(z)

    def to_dict(self):
        return {"kind": "polygon", "vertices": [[v.real, v.imag] for v in self.vertices]}


@dataclass(frozen=True)
class FilledJulia(RegionSpec):
    """Filled Julia set of ``p``; orbits undecided at the cap count as inside."""

    p: Polynomial
    max_iter: int = 200
    escape_radius: float | None = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.escape_radius is None:
            object.__setattr__(self, "escape_radius", default_escape_radius(self.p))

    def contains(self, z):
        return filled_julia_mask(self.p, z, self.max_iter, self.escape_radius)

    def to_dict(self):
        return {"kind": "filled_julia", "poly": [[c.real, c.imag] for c in self.p.coeffs],
                "max_iter": self.max_iter, "escape_radius": self.escape_radius}


def filled_julia_mask(p: Polynomial, z, max_iter: int, escape_radius: float) -> np.ndarray:
    z = np.array(z, dtype=complex, copy=True)
    inside = np.isfinite(z) & (np.abs(np.nan_to_num(z, nan=np.inf)) <= escape_radius)
    live = np.flatnonzero(inside.ravel())
    flat = z.ravel()
    ok = inside.ravel()
    w = flat[live]
    for _ in range(max_iter):
        if live.size == 0:
            break
        w = poly_eval(p, w)[0]
        stay = np.abs(w) <= escape_radius
        ok[live[~stay]] = False
        live, w = live[stay], w[stay]
    return ok.reshape(z.shape)


def region_from_string(text: str, p: Polynomial | None = None) -> RegionSpec:
    """Parse ``disc:cx,cy,r``, ``ray:ax,ay,dx,dy``, ``polygon:x1,y1,x2,y2,...`` or ``filled-julia[:max_iter]``."""
    kind, _, rest = text.partition(":")
    nums = [float(v) for v in rest.split(",")] if rest else []
    if kind == "disc" and len(nums) == 3:
        return Disc(complex(nums[0], nums[1]), nums[2])
    if kind == "ray" and len(nums) == 4:
        return HalfLine(complex(nums[0], nums[1]), complex(nums[2], nums[3]))
    if kind == "polygon" and len(nums) >= 6 and len(nums) % 2 == 0:
        return Polygon([complex(a, b) for a, b in zip(nums[::2], nums[1::2])])
    if kind == "filled-julia":
        if p is None:
            raise ValueError("filled-julia region needs a polynomial")
        return FilledJulia(p, int(nums[0]) if nums else 200)
    raise ValueError(f"cannot parse region {text!r}")
