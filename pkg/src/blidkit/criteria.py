"""Empirical checks of the characterisations of bounded L-index in a direction.

Each check samples pairs (z0, t0) from a grid, evaluates the quantity the
corresponding inequality bounds, and reports the smallest constant that makes
the inequality hold on the sample together with the witness attaining it.
Existence of a constant for all of C^n is not decidable numerically; the
trend of the constant under grid doubling (``with_trend``) separates "stable"
from "growing" behaviour.
"""

from __future__ import annotations

import math
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import EntireFunction, as_direction, parse_complex
from .deriv import (DEFAULT_OPTIONS, QuadratureOptions, directional_derivatives, pick_radius,
                    slice_derivative_many)
from .errors import AccuracyError, InputError, ResolutionError
from .grids import GridSpec
from .parallel import parallel_map
from .report import FAIL, INDETERMINATE, PASS, CriterionReport, classify_trend, relative_change
from .weights import DEFAULT_CEILING, WeightFunction
from .zeros import IDENTICALLY_ZERO, UNDERFLOW, count_in_disk, find_slice_zeros

CIRCLE_ANGLES = 512
LOG_GUARD = 1e-6
TREND_FACTOR = 2.0

CRITERIA = ("local-deriv", "max-mod", "hayman", "min-max", "log-deriv", "value-dist", "growth")


def default_grid() -> GridSpec:
    return GridSpec(radius=10.0, points=256)


# -- circle extrema ---------------------------------------------------------

def circle_extreme(fn: Callable[[np.ndarray], np.ndarray], center: complex, radius: float,
                   kind: str = "max", angles: int = CIRCLE_ANGLES) -> tuple[float, complex]:
    """Max (or min) of a nonnegative function on |t - center| = radius.

    Dense angular sampling followed by one bounded scalar refinement around the
    best sample.
    """
    sign = -1.0 if kind == "max" else 1.0
    theta = 2 * np.pi * np.arange(angles) / angles
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.asarray(fn(center + radius * np.exp(1j * theta)), dtype=float)
    vals = np.where(np.isfinite(vals), vals, np.inf if kind == "max" else np.nan)
    if kind == "max" and np.any(np.isinf(vals)):
        i = int(np.argmax(np.isinf(vals)))
        return math.inf, center + radius * np.exp(1j * theta[i])
    i = int(np.nanargmax(vals) if kind == "max" else np.nanargmin(vals))
    best_th, best = theta[i], vals[i]
    if radius > 0:
        h = 2 * np.pi / angles

        def obj(th):
            v = float(np.asarray(fn(np.array([center + radius * np.exp(1j * th)])))[0])
            return sign * v if np.isfinite(v) else np.inf

        res = minimize_scalar(obj, bounds=(best_th - h, best_th + h), method="bounded",
                              options={"xatol": 1e-10})
        if np.isfinite(res.fun) and res.fun < sign * best:
            best_th, best = float(res.x), sign * float(res.fun)
    return float(best), complex(center + radius * np.exp(1j * best_th))


class _SliceAbs:
    """|d^m/dt^m g_{z0}(t)| as a vectorised function of t."""

    def __init__(self, F, z0, b, m, radius, opts):
        self.F, self.z0, self.b, self.m, self.radius, self.opts = F, z0, b, m, radius, opts

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        if self.m == 0:
            return np.abs(self.F.evaluate(self.z0 + t[..., None] * self.b))
        vals, _ = slice_derivative_many(self.F, self.z0, self.b, t, self.m, self.radius, self.opts)
        return np.abs(vals)


def _samples(F, b, zgrid):
    bb = as_direction(b, F.dimension).components
    z0, t0 = zgrid.samples(F.dimension, bb)
    return bb, z0, t0


def _report(name, constants, witnesses, params, notes, ceiling, skipped=0, extra=None):
    constants = np.asarray(constants, dtype=float)
    valid = np.isfinite(constants) | np.isinf(constants)
    if constants.size == 0 or not np.any(valid):
        return CriterionReport(name, INDETERMINATE, math.nan, {}, 0, params,
                               dict(extra or {}, skipped=skipped), notes)
    # first maximum wins, so ties resolve to the earliest sample
    i = int(np.argmax(np.where(np.isnan(constants), -np.inf, constants)))
    C = float(constants[i])
    verdict = PASS if C <= ceiling else FAIL
    return CriterionReport(name, verdict, C, witnesses[i], int(constants.size), params,
                           dict(extra or {}, skipped=skipped), notes,
                           samples=list(zip(witnesses, constants.tolist())))


# -- circle-ratio criteria ----------------------------------------------------

def circle_ratio(F: EntireFunction, L: WeightFunction, b, z0, t0, n0: int, r1: float, r2: float,
                 opts: QuadratureOptions = DEFAULT_OPTIONS) -> float:
    """A(r2)/A(r1) with A(rho) = max |d^n0 F(z0+tb)/db^n0| on |t - t0| = rho / L(z0 + t0 b)."""
    bb = as_direction(b, F.dimension).components
    z0 = np.asarray(z0, dtype=complex)
    centre = z0 + complex(t0) * bb
    lc = L(centre)
    h = pick_radius(F, centre, bb, n0) if n0 > 0 else 1.0
    h = min(h, 0.25 * r1 / lc) if n0 > 0 else h
    fn = _SliceAbs(F, z0, bb, n0, h, opts)
    a1, _ = circle_extreme(fn, complex(t0), r1 / lc)
    a2, _ = circle_extreme(fn, complex(t0), r2 / lc)
    if a1 == 0:
        return math.nan if a2 == 0 else math.inf
    return a2 / a1


def local_derivative_check(F: EntireFunction, L: WeightFunction, b, n0: int = 0, r1: float = 1.0,
                           r2: float = 2.0, zgrid: Optional[GridSpec] = None,
                           ceiling: float = DEFAULT_CEILING, opts: QuadratureOptions = DEFAULT_OPTIONS,
                           jobs: int = 1, name: str = "local-deriv") -> CriterionReport:
    """Smallest C with max_{circle r2} |d^n0 F/db^n0| <= C max_{circle r1} |d^n0 F/db^n0|."""
    if not 0 < r1 < r2:
        raise InputError("need 0 < r1 < r2")
    if n0 < 0:
        raise InputError("n0 must be >= 0")
    zgrid = zgrid or default_grid()
    bb, z0, t0 = _samples(F, b, zgrid)
    ratios = parallel_map(lambda i: circle_ratio(F, L, bb, z0[i], t0[i], n0, r1, r2, opts),
                          range(z0.shape[0]), jobs)
    ratios = np.array(ratios)
    skipped = int(np.sum(np.isnan(ratios)))
    notes = [f"{skipped} sample(s) with vanishing derivative on both circles skipped"] if skipped else []
    wit = [{"z0": z0[i], "t0": t0[i]} for i in range(z0.shape[0])]
    params = {"n0": n0, "r1": r1, "r2": r2, "grid": zgrid.to_dict(), "ceiling": ceiling}
    return _report(name, ratios, wit, params, notes, ceiling, skipped)


def max_modulus_check(F: EntireFunction, L: WeightFunction, b, r1: float = 1.0, r2: float = 2.0,
                      zgrid: Optional[GridSpec] = None, ceiling: float = DEFAULT_CEILING,
                      jobs: int = 1) -> CriterionReport:
    """Smallest P with max_{|t-t0|=r2/L} |F(z0+tb)| <= P max_{|t-t0|=r1/L} |F(z0+tb)|."""
    return local_derivative_check(F, L, b, 0, r1, r2, zgrid, ceiling, jobs=jobs, name="max-mod")


def hayman_ratio(F: EntireFunction, L: WeightFunction, b, z, N: int,
                 opts: QuadratureOptions = DEFAULT_OPTIONS) -> float:
    """|d^{N+1}F/db^{N+1}| / L^{N+1} divided by max_{k<=N} |d^k F/db^k| / L^k at z."""
    z = np.asarray(z, dtype=complex)
    bb = as_direction(b, F.dimension).components
    lz = L(z)
    res = directional_derivatives(F, z, bb, range(1, N + 2), opts)
    vals = [abs(F.evaluate(z))] + [abs(r.snapped()) / lz ** r.order for r in res]
    rhs = max(vals[:N + 1])
    if rhs < 1e-300:
        return math.nan
    return vals[N + 1] / rhs


def hayman_check(F: EntireFunction, L: WeightFunction, b, N: int, zgrid: Optional[GridSpec] = None,
                 ceiling: float = DEFAULT_CEILING, opts: QuadratureOptions = DEFAULT_OPTIONS,
                 jobs: int = 1) -> CriterionReport:
    """Smallest C with |d^{N+1}F|/L^{N+1} <= C max_{k<=N} |d^k F|/L^k over the grid."""
    if N < 0:
        raise InputError("N must be >= 0")
    zgrid = zgrid or default_grid()
    bb, z0, t0 = _samples(F, b, zgrid)
    pts = z0 + t0[:, None] * bb
    ratios = np.array(parallel_map(lambda z: hayman_ratio(F, L, bb, z, N, opts), pts, jobs))
    skipped = int(np.sum(np.isnan(ratios)))
    notes = [f"{skipped} point(s) with underflowing right-hand side skipped"] if skipped else []
    wit = [{"z": p} for p in pts]
    params = {"N": N, "grid": zgrid.to_dict(), "ceiling": ceiling}
    rep = _report("hayman", ratios, wit, params, notes, ceiling, skipped)
    if skipped and rep.verdict == PASS:
        rep.notes.append("some points indeterminate")
    return rep


# -- zero-aware criteria ----------------------------------------------------

def _nearby_zeros(F, L, bb, z0, t0, reach: float):
    """Zeros of g_{z0} within ``reach`` of t0, as absolute slice parameters, or None if g == 0."""
    centre = z0 + t0 * bb
    zs = find_slice_zeros(F, centre, bb, reach)
    if zs.status == IDENTICALLY_ZERO:
        return None
    return [(t0 + a, int(m)) for a, m in zip(zs.zeros, zs.multiplicities)]


def _low_weight(L, centre, bb, radius) -> float:
    off = radius * np.concatenate([[0], np.exp(2j * np.pi * np.arange(16) / 16),
                                   0.5 * np.exp(2j * np.pi * np.arange(16) / 16)])
    return float(np.min(L(centre + off[:, None] * bb)))


def min_max_ratio(F, L, b, z0, t0, r, opts=DEFAULT_OPTIONS) -> float:
    """max/min of |F(z0+tb)| on |t - t0| = r / L(z0 + t0 b); nan when the circle meets G_r."""
    bb = as_direction(b, F.dimension).components
    z0 = np.asarray(z0, dtype=complex)
    t0 = complex(t0)
    centre = z0 + t0 * bb
    rc = r / L(centre)
    l_low = _low_weight(L, centre, bb, 3 * rc)
    reach = rc + r / l_low
    near = _nearby_zeros(F, L, bb, z0, t0, reach)
    if near is None:
        return math.nan
    for a, _ in near:
        ra = r / L(z0 + a * bb)
        if abs(abs(a - t0) - rc) <= ra:
            return math.nan
    fn = _SliceAbs(F, z0, bb, 0, 1.0, opts)
    hi, _ = circle_extreme(fn, t0, rc, "max")
    lo, _ = circle_extreme(fn, t0, rc, "min")
    return math.inf if lo == 0 else hi / lo


def min_max_check(F: EntireFunction, L: WeightFunction, b, r: float = 1.0,
                  zgrid: Optional[GridSpec] = None, ceiling: float = DEFAULT_CEILING,
                  jobs: int = 1) -> CriterionReport:
    """Smallest C with max |F| <= C min |F| on circles |t-t0| = r/L that avoid G_r(F, z0)."""
    if not r > 0:
        raise InputError("r must be positive")
    zgrid = zgrid or default_grid()
    bb, z0, t0 = _samples(F, b, zgrid)
    ratios = np.array(parallel_map(lambda i: min_max_ratio(F, L, bb, z0[i], t0[i], r),
                                   range(z0.shape[0]), jobs))
    skipped = int(np.sum(np.isnan(ratios)))
    notes = [f"{skipped} circle(s) meeting the excluded region skipped"] if skipped else []
    wit = [{"z0": z0[i], "t0": t0[i]} for i in range(z0.shape[0])]
    params = {"r": r, "grid": zgrid.to_dict(), "ceiling": ceiling}
    return _report("min-max", ratios, wit, params, notes, ceiling, skipped)


def log_derivative_ratio(F, L, b, z0, t, opts=DEFAULT_OPTIONS) -> float:
    """|dF/db (z0+tb)| / (|F(z0+tb)| L(z0+tb))."""
    bb = as_direction(b, F.dimension).components
    z = np.asarray(z0, dtype=complex) + complex(t) * bb
    fz = abs(F.evaluate(z))
    if fz == 0:
        return math.inf
    d = directional_derivatives(F, z, bb, [1], opts)[0]
    return abs(d.snapped()) / (fz * L(z))


def _log_candidates(F, L, bb, z0, t0, r, real: bool, boundary_angles: int):
    """Points t on the slice outside G_r(F, z0): t0 itself plus the edges of nearby excluded disks."""
    centre = z0 + t0 * bb
    rc = r / L(centre)
    l_low = _low_weight(L, centre, bb, 2 * rc)
    reach = 2 * r / l_low
    near = _nearby_zeros(F, L, bb, z0, t0, reach)
    if near is None:
        return None
    disks = [(a, r / L(z0 + a * bb)) for a, _ in near]

    def outside(t):
        for a, ra in disks:
            if abs(t - a) <= max(ra, LOG_GUARD / L(z0 + t * bb)):
                return False
        return True

    cands = [t0] if outside(t0) else []
    if real:
        dirs = np.array([1.0, -1.0])
    else:
        dirs = np.exp(2j * np.pi * np.arange(boundary_angles) / boundary_angles)
    for a, ra in disks:
        for e in dirs:
            t = a + ra * (1 + 1e-9) * e
            if outside(t):
                cands.append(complex(t))
    return cands


def log_derivative_check(F: EntireFunction, L: WeightFunction, b, r: float = 0.5,
                         zgrid: Optional[GridSpec] = None, ceiling: float = DEFAULT_CEILING,
                         boundary_angles: int = 64, opts: QuadratureOptions = DEFAULT_OPTIONS,
                         jobs: int = 1) -> CriterionReport:
    """Smallest P with |dF/db| <= P L |F| at slice points outside G_r(F, z0).

    Besides the grid samples themselves, points just outside each nearby
    excluded disk are probed, where the supremum is typically attained.  On a
    ``real`` grid only the real points of those disk edges are used.
    """
    if not r > 0:
        raise InputError("r must be positive")
    zgrid = zgrid or default_grid()
    bb, z0, t0 = _samples(F, b, zgrid)
    real = zgrid.kind == "real"

    def work(i):
        cands = _log_candidates(F, L, bb, z0[i], t0[i], r, real, boundary_angles)
        if cands is None:
            return None
        return [(log_derivative_ratio(F, L, bb, z0[i], t, opts), t) for t in cands]

    per = parallel_map(work, range(z0.shape[0]), jobs)
    vals, wit = [], []
    skipped_lines = 0
    for i, rows in enumerate(per):
        if rows is None:
            skipped_lines += 1
            continue
        for v, t in rows:
            vals.append(v)
            wit.append({"z0": z0[i], "t": t})
    notes = [f"{skipped_lines} identically zero slice(s) skipped"] if skipped_lines else []
    params = {"r": r, "grid": zgrid.to_dict(), "ceiling": ceiling, "boundary_angles": boundary_angles}
    return _report("log-deriv", vals, wit, params, notes, ceiling, skipped_lines)


def value_count(F, L, b, z0, t0, w, r) -> Optional[int]:
    """Zeros of F(z0+tb) - w in |t - t0| <= r / L(z0 + t0 b); None when F - w == 0 on the slice."""
    bb = as_direction(b, F.dimension).components
    z0 = np.asarray(z0, dtype=complex)
    t0 = complex(t0)
    rc = r / L(z0 + t0 * bb)

    def g(t):
        return F.evaluate(z0 + np.asarray(t)[..., None] * bb) - w

    ring = g(t0 + max(rc, 1.0) * np.exp(2j * np.pi * np.arange(64) / 64))
    if np.max(np.abs(ring)) < UNDERFLOW and g(np.array([t0]))[0] == 0:
        return None
    k, _ = count_in_disk(g, t0, rc)
    return k


def _value_sup(F, L, bb, values, r, zgrid, jobs):
    z0, t0 = zgrid.samples(F.dimension, bb)
    jobs_list = [(w, i) for w in values for i in range(z0.shape[0])]
    counts = parallel_map(lambda wi: value_count(F, L, bb, z0[wi[1]], t0[wi[1]], wi[0], r),
                          jobs_list, jobs)
    best, wit, skipped = -1, {}, 0
    for (w, i), k in zip(jobs_list, counts):
        if k is None:
            skipped += 1
            continue
        if k > best:
            best, wit = k, {"w": w, "z0": z0[i], "t0": t0[i]}
    return best, wit, skipped, len(jobs_list)


def value_distribution_check(F: EntireFunction, L: WeightFunction, b, values: Sequence = (0,),
                             r: float = 1.0, zgrid: Optional[GridSpec] = None,
                             jobs: int = 1) -> CriterionReport:
    """Sup over (w, z0, t0) of the number of w-points of the slice in |t - t0| <= r/L.

    Passes when the sup is unchanged on the refined grid (twice the points).
    """
    if not r > 0:
        raise InputError("r must be positive")
    zgrid = zgrid or default_grid()
    bb = as_direction(b, F.dimension).components
    values = [parse_complex(w) for w in values]
    best, wit, skipped, size = _value_sup(F, L, bb, values, r, zgrid, jobs)
    fine, _, _, _ = _value_sup(F, L, bb, values, r, zgrid.refined(), jobs)
    notes = [f"{skipped} slice(s) with F - w identically zero skipped"] if skipped else []
    params = {"values": values, "r": r, "grid": zgrid.to_dict()}
    if best < 0:
        return CriterionReport("value-dist", INDETERMINATE, math.nan, {}, size, params,
                               {"refined": fine, "skipped": skipped}, notes)
    verdict = PASS if fine == best else FAIL
    return CriterionReport("value-dist", verdict, float(best), wit, size, params,
                           {"refined": float(fine), "skipped": skipped}, notes)


# -- growth ----------------------------------------------------------------

def max_modulus(F: EntireFunction, b, z0, r: float) -> float:
    """M(r, F, z0) = max_{|t| = r} |F(z0 + t b)|."""
    bb = as_direction(b, F.dimension).components
    z0 = np.asarray(z0, dtype=complex)
    fn = _SliceAbs(F, z0, bb, 0, 1.0, DEFAULT_OPTIONS)
    return circle_extreme(fn, 0j, r, "max")[0]


def growth_profile(F: EntireFunction, b, z0, rmax: float = 50.0, samples: int = 40) -> dict[str, Any]:
    """ln M(r, F, z0) on a geometric ladder up to rmax and the least-squares slope over the top decade."""
    if not rmax > 0:
        raise InputError("rmax must be positive")
    z0 = np.asarray([parse_complex(v) for v in np.atleast_1d(z0)], dtype=complex)
    rs = np.geomspace(rmax / 100, rmax, int(samples))
    rows, notes = [], []
    for r in rs:
        with np.errstate(over="ignore", divide="ignore"):
            M = max_modulus(F, b, z0, float(r))
            lnM = math.log(M) if M > 0 else -math.inf
        if not math.isfinite(M):
            notes.append(f"overflow at r={r:.6g}; profile truncated")
            break
        rows.append((float(r), lnM))
    top = [(r, v) for r, v in rows if r >= rmax / 10 and math.isfinite(v)]
    if len(top) >= 2:
        slope = float(np.polyfit([r for r, _ in top], [v for _, v in top], 1)[0])
    else:
        slope = math.nan
        notes.append("not enough finite points in the top decade")
    return {"table": rows, "type": slope, "rmax": rmax, "notes": notes}


# -- trend -----------------------------------------------------------------

def with_trend(check: Callable[..., CriterionReport], *args, zgrid: Optional[GridSpec] = None,
               factor: float = TREND_FACTOR, **kwargs) -> dict[str, Any]:
    """Run a check on ``zgrid`` and on the grid of doubled radius; classify the constant's trend."""
    zgrid = zgrid or default_grid()
    small = check(*args, zgrid=zgrid, **kwargs)
    large = check(*args, zgrid=zgrid.doubled(), **kwargs)
    trend = classify_trend(small.constant, large.constant, factor)
    return {"report": small, "doubled": large, "change": relative_change(small.constant, large.constant),
            "trend": trend}
