"""Reproducible sampling of regions in C^n and of slice parameters.

Quasi-random (scrambled Halton) points are drawn with an explicit seed.  The
sequence is generated in order, so the first k points of a larger grid are
exactly the k points of a smaller one with the same seed and radius.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Mapping, Optional

import numpy as np
from scipy.stats import qmc

from .core import as_direction, as_point
from .errors import InputError

KINDS = ("polydisc", "real", "explicit")


def halton(d: int, count: int, seed: int) -> np.ndarray:
    if count <= 0:
        return np.zeros((0, d))
    return qmc.Halton(d=d, scramble=True, seed=seed).random(count)


def disk_points(count: int, radius: float, seed: int) -> np.ndarray:
    """Quasi-random points filling the closed disk |t| <= radius."""
    u = halton(2, count, seed)
    return radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])


def polydisc_points(n: int, count: int, radius: float, seed: int) -> np.ndarray:
    u = halton(2 * n, count, seed)
    r = radius * np.sqrt(u[:, 0::2])
    return r * np.exp(2j * np.pi * u[:, 1::2])


@dataclass(frozen=True)
class GridSpec:
    """Where to sample: a polydisc of given radius, the real cube, or explicit points.

    Each sample is a pair (z0, t0) describing the point z0 + t0*b on the slice
    through z0.  With ``per_slice == 1`` every base point is its own sample
    (t0 = 0); larger values add quasi-random t0 along each slice, keeping only
    points that stay inside the region.
    """

    radius: float = 10.0
    points: int = 256
    seed: int = 0
    per_slice: int = 1
    kind: str = "polydisc"
    explicit: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"grid kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "explicit":
            if not (isinstance(self.radius, (int, float)) and math.isfinite(self.radius)
                    and self.radius > 0):
                raise InputError(f"grid radius must be a positive number, got {self.radius!r}")
            if int(self.points) < 1:
                raise InputError("grid needs at least one point")
        elif not self.explicit:
            raise InputError("explicit grid needs at least one point")
        if int(self.per_slice) < 1:
            raise InputError("per_slice must be >= 1")

    @classmethod
    def of_points(cls, pts) -> "GridSpec":
        return cls(kind="explicit", explicit=tuple(tuple(complex(v) for v in np.atleast_1d(p))
                                                   for p in pts))

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GridSpec":
        d = dict(d)
        if "explicit" in d:
            d["explicit"] = tuple(tuple(complex(*v) if isinstance(v, list) else complex(v) for v in p)
                                  for p in d["explicit"])
        return cls(**d)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["explicit"] = [[[c.real, c.imag] for c in p] for p in self.explicit]
        return d

    def doubled(self) -> "GridSpec":
        return replace(self, radius=2 * self.radius)

    def refined(self) -> "GridSpec":
        return replace(self, points=2 * self.points)

    def with_radius(self, radius: float) -> "GridSpec":
        return replace(self, radius=float(radius))

    def _base(self, n: int) -> np.ndarray:
        if self.kind == "explicit":
            pts = np.array([as_point(p, n) for p in self.explicit])
            return pts
        count = math.ceil(int(self.points) / int(self.per_slice))
        if self.kind == "real":
            u = halton(n, count, self.seed)
            return (self.radius * (2 * u - 1)).astype(complex)
        return polydisc_points(n, count, self.radius, self.seed)

    def _inside(self, pts: np.ndarray) -> np.ndarray:
        if self.kind == "explicit":
            return np.ones(pts.shape[0], dtype=bool)
        if self.kind == "real":
            return np.all((np.abs(pts.real) <= self.radius) & (pts.imag == 0), axis=-1)
        return np.all(np.abs(pts) <= self.radius * (1 + 1e-12), axis=-1)

    def samples(self, n: int, b=None) -> tuple[np.ndarray, np.ndarray]:
        """Return (z0, t0) with shapes (P, n) and (P,)."""
        base = self._base(n)
        if self.per_slice == 1 or b is None or self.kind == "explicit":
            return base, np.zeros(base.shape[0], dtype=complex)
        bb = as_direction(b, n).components
        s = int(self.per_slice)
        if self.kind == "real":
            if np.any(bb.imag != 0):
                raise InputError("real grids need a real direction")
            ts = (self.radius / np.max(np.abs(bb))) * (2 * halton(1, s - 1, self.seed + 1)[:, 0] - 1)
        else:
            ts = disk_points(s - 1, self.radius / np.linalg.norm(bb), self.seed + 1)
        ts = np.concatenate([[0j], ts]).astype(complex)
        z0 = np.repeat(base, s, axis=0)
        t0 = np.tile(ts, base.shape[0])
        keep = self._inside(z0 + t0[:, None] * bb)
        keep[::s] = True
        return z0[keep], t0[keep]

    def points_for(self, n: int, b=None) -> np.ndarray:
        z0, t0 = self.samples(n, b)
        if b is None:
            return z0
        return z0 + t0[:, None] * as_direction(b, n).components


def grid_from_config(d: Optional[Mapping[str, Any]], **defaults) -> GridSpec:
    merged = dict(defaults)
    merged.update(d or {})
    return GridSpec.from_dict(merged)
