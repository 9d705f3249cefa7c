"""Zeros of slice functions, excluded regions around them, and the counting function.

Zeros of g(t) = F(z0 + t b) in |t| <= R are isolated with the argument
principle: winding numbers of g along closed contours count zeros with
multiplicity.  The search square around the disk is split into rectangles
until each holds one zero (or one multiple zero), which Newton's method then
polishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import EntireFunction, as_direction, as_point
from .deriv import QuadratureOptions, directional_derivatives
from .errors import AccuracyError, InputError, ResolutionError
from .report import jsonable
from .weights import WeightFunction

NONVANISHING, IDENTICALLY_ZERO, LISTED = "nonvanishing", "identically-zero", "listed"

UNDERFLOW = 1e-280
NEAR_ZERO = 1e-8
NUDGE = 1.03
MAX_WINDING_NODES = 2 ** 16
MAX_STEP = math.pi / 4
NEWTON_RADIUS = 1e-3


def winding_number(values_on: Callable[[np.ndarray], np.ndarray], start: int = 64) -> Optional[int]:
    """Winding number of a closed contour image, or None when a zero sits on the contour.

    ``values_on(s)`` evaluates the function at contour parameters s in [0, 1).
    Sampling doubles until consecutive phase increments stay below pi/4 and
    the value at every segment midpoint agrees with linear interpolation of
    its endpoints; the second test catches a zero passing between two nodes,
    whose phase swing would otherwise alias away.
    """
    n = start
    with np.errstate(all="ignore"):
        g = np.asarray(values_on(np.arange(n) / n), dtype=complex)
    while n <= MAX_WINDING_NODES:
        with np.errstate(all="ignore"):
            mid = np.asarray(values_on((np.arange(n) + 0.5) / n), dtype=complex)
        both = np.empty(2 * n, dtype=complex)
        both[0::2], both[1::2] = g, mid
        mag = np.abs(both)
        if not np.all(np.isfinite(both)) or np.any(mag == 0):
            return None
        # a sample far below both neighbours means a zero close to the contour
        neigh = np.maximum(np.roll(mag, 1), np.roll(mag, -1))
        if np.any(mag < NEAR_ZERO * neigh):
            return None
        step = np.angle(np.roll(both, -1) / both)
        nxt = np.roll(g, -1)
        lin_ok = np.abs(mid - 0.5 * (g + nxt)) <= 0.25 * np.minimum(np.abs(g), np.abs(nxt))
        if np.max(np.abs(step)) < MAX_STEP and np.all(lin_ok):
            turns = step.sum() / (2 * np.pi)
            k = int(round(turns))
            if abs(turns - k) < 0.1:
                return k
        g, n = both, 2 * n
    return None


def _circle_path(center: complex, radius: float):
    return lambda s: center + radius * np.exp(2j * np.pi * s)


def _rect_path(x0: float, x1: float, y0: float, y1: float):
    w, h = x1 - x0, y1 - y0
    per = 2 * (w + h)
    cuts = np.array([w, w + h, 2 * w + h]) / per

    def path(s):
        s = np.asarray(s)
        out = np.empty(s.shape, dtype=complex)
        a = s < cuts[0]
        b = (s >= cuts[0]) & (s < cuts[1])
        c = (s >= cuts[1]) & (s < cuts[2])
        d = s >= cuts[2]
        out[a] = x0 + s[a] * per + 1j * y0
        out[b] = x1 + 1j * (y0 + (s[b] - cuts[0]) * per)
        out[c] = (x1 - (s[c] - cuts[1]) * per) + 1j * y1
        out[d] = x0 + 1j * (y1 - (s[d] - cuts[2]) * per)
        return out

    return path


def count_in_disk(g: Callable[[np.ndarray], np.ndarray], center: complex, radius: float,
                  attempts: int = 12) -> tuple[int, float]:
    """Zeros of g (with multiplicity) in the disk, nudging the radius outward when needed.

    Returns (count, radius actually used).
    """
    rho = float(radius)
    if rho == 0:
        return (1 if g(np.array([center]))[0] == 0 else 0), 0.0
    for _ in range(attempts):
        path = _circle_path(center, rho)
        k = winding_number(lambda s: g(path(s)))
        if k is not None:
            return k, rho
        rho *= NUDGE
    raise ResolutionError(f"could not find a zero-free circle near radius {radius} about {center}")


@dataclass
class SliceZeroSet:
    base: np.ndarray
    direction: np.ndarray
    radius: float
    zeros: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    multiplicities: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    status: str = NONVANISHING
    contour_count: int = 0
    tol: float = 1e-10
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    def to_dict(self):
        return jsonable({"base": self.base, "direction": self.direction, "radius": self.radius,
                         "status": self.status, "contour_count": self.contour_count,
                         "zeros": [{"t": a, "multiplicity": int(m), "residual": r}
                                   for a, m, r in zip(self.zeros, self.multiplicities, self.residuals)]})


@dataclass
class ExcludedRegion:
    disks: list[tuple[complex, float]]
    r: float
    whole_line: bool = False

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=complex)
        if self.whole_line:
            return np.ones(t.shape, dtype=bool)
        out = np.zeros(t.shape, dtype=bool)
        for c, rad in self.disks:
            out |= np.abs(t - c) <= rad
        return out

    def to_dict(self):
        return jsonable({"r": self.r, "whole_line": self.whole_line,
                         "disks": [{"center": c, "radius": rad} for c, rad in self.disks]})


class _Slice:
    def __init__(self, F: EntireFunction, z0: np.ndarray, b: np.ndarray, shift: complex = 0):
        self.F, self.z0, self.b, self.shift = F, z0, b, shift

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        with np.errstate(all="ignore"):
            return self.F.evaluate(self.z0 + t[..., None] * self.b) - self.shift

    def derivs(self, t: complex, h: float, orders) -> list[complex]:
        """Derivatives at t on a contour of radius at least h, widening it when the sum fails."""
        h = max(h, NEWTON_RADIUS * max(1.0, abs(t)))
        for _ in range(4):
            try:
                with np.errstate(all="ignore"):
                    res = directional_derivatives(self.F, self.z0 + t * self.b, self.b, orders,
                                                  QuadratureOptions(radius=h))
                return [r.value for r in res]
            except AccuracyError:
                h *= 8
        return [0j for _ in orders]


def _newton(g: _Slice, t: complex, mult: int, h: float, maxiter: int = 60) -> complex:
    """Newton's method on g^(mult-1), which has a simple zero at a zero of g of multiplicity mult."""
    k = mult - 1
    for _ in range(maxiter):
        if k == 0:
            gv = g(np.array([t]))[0]
            if gv == 0:
                return t
            (d,) = g.derivs(t, h, [1])
        else:
            gv, d = g.derivs(t, h, [k, k + 1])
        if d == 0 or not np.isfinite(d):
            return t
        step = gv / d
        t = t - step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(t)):
            break
    return t


def _rect_count(g, rect, attempts: int = 1) -> Optional[int]:
    path = _rect_path(*rect)
    return winding_number(lambda s: g(path(s)))


def find_slice_zeros(F: EntireFunction, z0, b, R: float, tol: float = 1e-10,
                     budget: int = 10000, shift: complex = 0) -> SliceZeroSet:
    """Zeros of F(z0 + t b) - shift in the disk |t| <= R, with multiplicities."""
    if not R > 0:
        raise InputError("search radius must be positive")
    z0 = as_point(z0, F.dimension) if not isinstance(z0, np.ndarray) else z0.astype(complex)
    bb = as_direction(b, F.dimension).components
    g = _Slice(F, z0, bb, complex(shift))
    ring = g(R * np.exp(2j * np.pi * np.arange(256) / 256))
    if np.max(np.abs(ring)) < UNDERFLOW and g(np.array([0j]))[0] == 0:
        return SliceZeroSet(z0, bb, float(R), status=IDENTICALLY_ZERO, tol=tol)
    total, rho = count_in_disk(g, 0j, R)
    if total == 0:
        return SliceZeroSet(z0, bb, rho, status=NONVANISHING, tol=tol)

    found: list[tuple[complex, int, float]] = []
    half = rho
    for _ in range(12):
        root = (-half, half, -half, half)
        c = _rect_count(g, root)
        if c is not None:
            break
        half *= NUDGE
    else:
        raise ResolutionError("no zero-free bounding square", cell=(-half, half, -half, half))
    stack = [(root, c)]
    processed = 0
    min_size = 1e-7 * rho
    while stack:
        rect, c = stack.pop()
        processed += 1
        if processed > budget:
            raise ResolutionError(f"subdivision budget of {budget} cells exhausted", cell=rect)
        if c == 0:
            continue
        x0, x1, y0, y1 = rect
        size = max(x1 - x0, y1 - y0)
        centre = complex((x0 + x1) / 2, (y0 + y1) / 2)
        if c == 1 or size < min_size:
            a = _newton(g, centre, c, max(size / 4, 1e-12))
            inside = x0 <= a.real <= x1 and y0 <= a.imag <= y1
            if inside:
                probe = max(min(size / 4, 1e-3 * max(1.0, abs(a))), 1e-12)
                check = c if c == 1 else count_in_disk(g, a, probe)[0]
                if check == c:
                    res = float(abs(g(np.array([a]))[0]))
                    found.append((a, c, res))
                    continue
            if size < min_size:
                raise ResolutionError("cluster of zeros could not be separated", cell=rect)
        elif c > 1:
            # try a multiple zero before splitting further
            a = _newton(g, centre, c, max(size / 4, 1e-12))
            if x0 <= a.real <= x1 and y0 <= a.imag <= y1:
                probe = max(min(size / 8, 1e-3 * max(1.0, abs(a))), 1e-12)
                try:
                    k, _ = count_in_disk(g, a, probe)
                except ResolutionError:
                    k = -1
                if k == c:
                    found.append((a, c, float(abs(g(np.array([a]))[0]))))
                    continue
        children = _split(g, rect, c)
        if children is None:
            raise ResolutionError("could not place zero-free splitting lines", cell=rect)
        stack.extend(children)

    zeros = [(a, m, r) for a, m, r in found if abs(a) <= rho]
    listed = sum(m for _, m, _ in zeros)
    if listed != total:
        raise ResolutionError(f"listed multiplicity {listed} != contour count {total}")
    zeros.sort(key=lambda e: (round(abs(e[0]), 12), np.angle(e[0])))
    scale = max(1.0, float(np.max(np.abs(ring))) if np.all(np.isfinite(ring)) else 1.0)
    bad = [r for _, _, r in zeros if r > tol * scale]
    zs = SliceZeroSet(z0, bb, rho, np.array([a for a, _, _ in zeros], dtype=complex),
                      np.array([m for _, m, _ in zeros], dtype=int), LISTED, total, tol,
                      np.array([r for _, _, r in zeros]))
    if bad:
        raise ResolutionError(f"{len(bad)} zero(s) failed the residual tolerance {tol}")
    return zs


def _split(g, rect, c):
    x0, x1, y0, y1 = rect
    w, h = x1 - x0, y1 - y0
    for off in (0.0, 0.03, -0.03, 0.07, -0.07, 0.11, -0.11, 0.17, -0.17):
        xm = x0 + w * (0.5 + off)
        ym = y0 + h * (0.5 + off * 0.7)
        quads = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
        counts = [_rect_count(g, q) for q in quads]
        if any(k is None for k in counts) or sum(counts) != c:
            continue
        return [(q, k) for q, k in zip(quads, counts) if k > 0]
    return None


def excluded_region(zs: SliceZeroSet, L: WeightFunction, r: float) -> ExcludedRegion:
    """Disks |t - a_k| <= r / L(z0 + a_k b) around every listed slice zero."""
    if r < 0:
        raise InputError("r must be nonnegative")
    if zs.status == IDENTICALLY_ZERO:
        return ExcludedRegion([], float(r), whole_line=True)
    if zs.status == NONVANISHING or zs.zeros.size == 0:
        return ExcludedRegion([], float(r))
    pts = zs.base + zs.zeros[:, None] * zs.direction
    radii = r / np.atleast_1d(L(pts))
    return ExcludedRegion([(complex(a), float(q)) for a, q in zip(zs.zeros, radii)], float(r))


def counting_function(zs: SliceZeroSet, t0: complex, r: float) -> int:
    """Number of slice zeros (with multiplicity) in the closed disk |t - t0| <= r."""
    if r < 0:
        raise InputError("r must be nonnegative")
    if zs.status == IDENTICALLY_ZERO:
        raise InputError("counting function is undefined for an identically zero slice")
    if abs(complex(t0)) + r > zs.radius * (1 + 1e-12):
        raise InputError(f"search radius {zs.radius} does not cover |t0| + r = {abs(complex(t0)) + r}")
    if zs.zeros.size == 0:
        return 0
    inside = np.abs(zs.zeros - complex(t0)) <= r
    return int(zs.multiplicities[inside].sum())
