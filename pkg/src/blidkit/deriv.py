"""High-order directional and joint partial derivatives by Cauchy contour quadrature.

The m-th derivative of the slice g(t) = F(z + t b) at t = 0 is read off the
discrete Fourier coefficients of g sampled on |t| = rho:

    g^(m)(0) ~= m! / rho^m * (1/N) sum_k g(rho w_k) w_k^-m,   w_k = exp(2 pi i k / N).

For entire g the trapezoidal rule converges geometrically, so node doubling
gives a reliable error estimate.  Joint partials use the same rule on the
skeleton of a polydisc with an n-dimensional FFT.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import EntireFunction, as_direction, as_point
from .errors import AccuracyError, InputError

EPS = np.finfo(float).eps

RADIUS_BASE = 0.5
RADIUS_FACTOR = 2.0
RADIUS_RUNGS = 12
LADDER_ANGLES = 64

# roundoff floor multiplier for the FFT coefficient estimate
_ROUNDOFF = 100.0
# keep joint quadrature grids in memory
MAX_JOINT_POINTS = 2 ** 22


@dataclass(frozen=True)
class QuadratureOptions:
    nodes: int = 16
    radius: Optional[float] = None
    max_doublings: int = 10
    rtol: float = 1e-13
    atol: float = 0.0

    def __post_init__(self):
        if self.nodes < 16 or self.nodes & (self.nodes - 1):
            raise InputError("nodes must be a power of two >= 16")
        if self.radius is not None and not self.radius > 0:
            raise InputError("radius must be positive")
        if self.max_doublings < 0:
            raise InputError("max_doublings must be >= 0")

    @property
    def max_nodes(self) -> int:
        return self.nodes * 2 ** self.max_doublings


DEFAULT_OPTIONS = QuadratureOptions()


@dataclass(frozen=True)
class DerivativeResult:
    value: complex
    order: int
    radius_used: float
    est_abs_error: float
    nodes: int

    def snapped(self) -> complex:
        """The value, or exactly 0 when it is indistinguishable from quadrature noise."""
        return 0j if abs(self.value) <= self.est_abs_error else self.value


def radius_ladder() -> np.ndarray:
    return RADIUS_BASE * RADIUS_FACTOR ** np.arange(RADIUS_RUNGS)


def _circle(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def _ladder_maxima(F: EntireFunction, z: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rho = radius_ladder()
    t = rho[:, None] * _circle(LADDER_ANGLES)[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.abs(F.evaluate(z + t[..., None] * b))
        peak = np.max(vals, axis=1)
    peak[~np.isfinite(peak)] = np.inf
    return rho, peak


def _pick_from_ladder(rho: np.ndarray, peak: np.ndarray, m: int) -> float:
    if m == 0:
        return float(rho[0])
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        score = np.log(peak) - m * np.log(rho)
    score[~np.isfinite(score)] = np.inf
    # an identically zero slice gives -inf everywhere; any radius will do
    if np.all(peak == 0):
        return float(rho[0])
    if not np.any(np.isfinite(score)):
        return 1.0
    return float(rho[int(np.argmin(score))])


def pick_radius(F: EntireFunction, z, b, m: int) -> float:
    """Contour radius minimising max_{|t|=rho} |g_z(t)| / rho^m over a geometric ladder."""
    if m < 0:
        raise InputError("order must be nonnegative")
    z = as_point(z, F.dimension)
    bb = as_direction(b, F.dimension).components
    rho, peak = _ladder_maxima(F, z, bb)
    return _pick_from_ladder(rho, peak, m)


def _start_nodes(opts: QuadratureOptions, max_order: int) -> int:
    n = opts.nodes
    while n <= 2 * (max_order + 1):
        n *= 2
    return n


def _cauchy_batch(sample, radius: float, orders: Sequence[int], opts: QuadratureOptions,
                  batch: int):
    """Derivatives of order ``orders`` for ``batch`` slices sharing one radius.

    ``sample(t)`` maps an offset array of shape (N,) to values of shape (batch, N).
    Returns (values, errors, nodes) with values/errors of shape (batch, len(orders)).
    """
    orders = np.asarray(orders, dtype=int)
    kmax = int(orders.max())
    n = _start_nodes(opts, kmax)
    if n > opts.max_nodes:
        raise AccuracyError(f"order {kmax} needs more than {opts.max_nodes} nodes")
    fact = np.array([math.factorial(int(m)) for m in orders], dtype=float)
    scale = fact / radius ** orders.astype(float)

    def coeffs(vals):
        c = np.fft.fft(vals, axis=-1) / vals.shape[-1]
        return c[:, orders] * scale

    vals = np.asarray(sample(radius * _circle(n)), dtype=complex).reshape(batch, n)
    prev = coeffs(vals)
    while True:
        n2 = 2 * n
        odd = radius * np.exp(2j * np.pi * (2 * np.arange(n) + 1) / n2)
        new = np.empty((batch, n2), dtype=complex)
        new[:, 0::2] = vals
        new[:, 1::2] = np.asarray(sample(odd), dtype=complex).reshape(batch, n)
        vals, n = new, n2
        cur = coeffs(vals)
        with np.errstate(invalid="ignore", over="ignore"):
            peak = np.max(np.abs(vals), axis=1)
            floor = _ROUNDOFF * EPS * np.log2(n) * peak[:, None] * scale[None, :]
            diff = np.abs(cur - prev)
            err = np.maximum(diff, floor)
            ok = diff <= np.maximum.reduce([opts.rtol * np.abs(cur),
                                            np.full(cur.shape, opts.atol), floor])
        if np.all(ok) and np.all(np.isfinite(cur)):
            return cur, err, n
        if n >= opts.max_nodes or not np.all(np.isfinite(vals)):
            bad = np.argwhere(~ok | ~np.isfinite(cur))[0]
            raise AccuracyError(
                f"contour quadrature for order {int(orders[bad[1]])} did not converge "
                f"with {n} nodes at radius {radius}",
                value=complex(cur[tuple(bad)]), est_abs_error=float(err[tuple(bad)]))
        prev = cur


def directional_derivatives(F: EntireFunction, z, b, orders: Sequence[int],
                            opts: QuadratureOptions = DEFAULT_OPTIONS) -> list[DerivativeResult]:
    """Derivatives d^m/db^m F(z) for several orders, sharing contour samples."""
    z = as_point(z, F.dimension) if not isinstance(z, np.ndarray) else z.astype(complex)
    if z.size != F.dimension:
        raise InputError(f"dimension mismatch: F has n={F.dimension}, z has {z.size}")
    bb = as_direction(b, F.dimension).components
    orders = [int(m) for m in orders]
    if any(m < 0 for m in orders):
        raise InputError("orders must be nonnegative")
    if opts.radius is not None:
        radii = {m: float(opts.radius) for m in orders}
    else:
        rho, peak = _ladder_maxima(F, z, bb)
        radii = {m: _pick_from_ladder(rho, peak, m) for m in orders}

    def sample(t):
        return F.evaluate(z + t[:, None] * bb)[None, :]

    results: dict[int, DerivativeResult] = {}
    for radius in sorted(set(radii.values())):
        group = sorted({m for m in orders if radii[m] == radius})
        vals, errs, n = _cauchy_batch(sample, radius, group, opts, 1)
        for i, m in enumerate(group):
            results[m] = DerivativeResult(complex(vals[0, i]), m, radius, float(errs[0, i]), n)
    return [results[m] for m in orders]


def directional_derivative(F: EntireFunction, z, b, m: int,
                           opts: QuadratureOptions = DEFAULT_OPTIONS) -> DerivativeResult:
    """d^m F / db^m at z, i.e. the m-th t-derivative of F(z + t b) at t = 0."""
    return directional_derivatives(F, z, b, [m], opts)[0]


def slice_derivative_many(F: EntireFunction, z0, b, ts, m: int, radius: float,
                          opts: QuadratureOptions = DEFAULT_OPTIONS) -> tuple[np.ndarray, np.ndarray]:
    """m-th derivative of g_{z0} at many points t on the slice, one shared radius.

    Re-bases the slice at each t (z0 <- z0 + t b).  Returns (values, est_abs_errors).
    """
    z0 = np.asarray(z0, dtype=complex)
    bb = as_direction(b, F.dimension).components
    ts = np.atleast_1d(np.asarray(ts, dtype=complex))

    def sample(offsets):
        tt = ts[:, None] + offsets[None, :]
        return F.evaluate(z0 + tt[..., None] * bb)

    vals, errs, _ = _cauchy_batch(sample, float(radius), [int(m)], opts, ts.size)
    return vals[:, 0], errs[:, 0]


# -- joint partial derivatives ---------------------------------------------

def _joint_batch(F: EntireFunction, z: np.ndarray, R: np.ndarray, Ks: Sequence[tuple[int, ...]],
                 opts: QuadratureOptions):
    n = F.dimension
    kmax = max(max(K) for K in Ks)
    N = _start_nodes(opts, kmax)
    facts = np.array([math.prod(math.factorial(k) for k in K) for K in Ks], dtype=float)
    scale = facts / np.array([math.prod(r ** k for r, k in zip(R, K)) for K in Ks])
    idx = tuple(np.array(col) for col in zip(*Ks))

    def evaluate(N):
        if N ** n > MAX_JOINT_POINTS:
            return None
        axes = [z[j] + R[j] * _circle(N) for j in range(n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = F.evaluate(mesh)
        c = np.fft.fftn(vals) / N ** n
        return vals, c[idx] * scale

    first = evaluate(N)
    if first is None:
        raise AccuracyError(f"joint quadrature grid {N}^{n} exceeds {MAX_JOINT_POINTS} points")
    vals, prev = first
    while True:
        N *= 2
        nxt = evaluate(N) if N <= opts.max_nodes else None
        if nxt is None:
            raise AccuracyError(f"joint quadrature did not converge within node budget at R={list(R)}",
                                value=complex(prev[0]), est_abs_error=float("inf"))
        vals, cur = nxt
        peak = np.max(np.abs(vals))
        floor = _ROUNDOFF * EPS * n * np.log2(N) * peak * scale
        diff = np.abs(cur - prev)
        err = np.maximum(diff, floor)
        ok = diff <= np.maximum.reduce([opts.rtol * np.abs(cur), np.full(cur.shape, opts.atol), floor])
        if np.all(ok) and np.all(np.isfinite(cur)):
            return cur, err, N
        prev = cur


def _axis_radius(F: EntireFunction, z: np.ndarray, j: int, k: int) -> float:
    e = np.zeros(F.dimension, dtype=complex)
    e[j] = 1
    return pick_radius(F, z, e, k)


def joint_partial_derivative(F: EntireFunction, z, K: Sequence[int], R: Optional[Sequence[float]] = None,
                             opts: QuadratureOptions = DEFAULT_OPTIONS) -> DerivativeResult:
    """d^{|K|} F / dz^K at z via the Cauchy formula on the polydisc skeleton T^n(z, R).

    ``radius_used`` reports the largest polyradius component.
    """
    z = as_point(z, F.dimension)
    K = tuple(int(k) for k in K)
    if len(K) != F.dimension or any(k < 0 for k in K):
        raise InputError("multi-index must have n nonnegative entries")
    if R is None:
        R = [_axis_radius(F, z, j, k) for j, k in enumerate(K)]
    R = np.asarray(R, dtype=float)
    if R.size != F.dimension or np.any(~(R > 0)):
        raise InputError("polyradius must have n positive entries")
    vals, errs, N = _joint_batch(F, z, R, [K], opts)
    return DerivativeResult(complex(vals[0]), sum(K), float(R.max()), float(errs[0]), N)


def graded_multi_indices(cap: Sequence[int]) -> list[tuple[int, ...]]:
    """All K <= cap componentwise, in graded lexicographic order."""
    ks = list(itertools.product(*(range(c + 1) for c in cap)))
    return sorted(ks, key=lambda K: (sum(K), tuple(-k for k in K)))


def joint_partial_table(F: EntireFunction, z, cap: Sequence[int],
                        opts: QuadratureOptions = DEFAULT_OPTIONS) -> dict[tuple[int, ...], DerivativeResult]:
    """All joint partials with K <= cap, grouping multi-indices that share a polyradius."""
    z = as_point(z, F.dimension)
    cap = [int(c) for c in cap]
    axis_r = [{k: _axis_radius(F, z, j, k) for k in range(c + 1)} for j, c in enumerate(cap)]
    groups: dict[tuple[float, ...], list[tuple[int, ...]]] = {}
    for K in graded_multi_indices(cap):
        groups.setdefault(tuple(axis_r[j][k] for j, k in enumerate(K)), []).append(K)
    out: dict[tuple[int, ...], DerivativeResult] = {}
    for R, Ks in groups.items():
        vals, errs, N = _joint_batch(F, z, np.asarray(R), Ks, opts)
        for i, K in enumerate(Ks):
            out[K] = DerivativeResult(complex(vals[i]), sum(K), max(R), float(errs[i]), N)
    return {K: out[K] for K in graded_multi_indices(cap)}
