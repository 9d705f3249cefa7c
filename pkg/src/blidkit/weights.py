"""Positive continuous weights L, their lambda-bounds, and the empirical Q-class check."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from .core import as_direction, as_point, inner, parse_complex
from .errors import InputError, WeightError
from .grids import GridSpec, disk_points
from .report import FAIL, PASS, CriterionReport, classify_trend

DEFAULT_FLOOR = 1e-6
DEFAULT_CEILING = 1e6


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """L: C^n -> (0, +inf), vectorised over a leading axis like EntireFunction."""

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    description: str = ""
    params: Mapping[str, Any] = field(default_factory=dict)

    def __call__(self, z):
        arr = np.asarray(z, dtype=complex)
        flat = arr.reshape(-1, arr.shape[-1]) if arr.ndim > 1 else arr[None, :]
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.asarray(self.func(flat), dtype=float)
        vals = np.broadcast_to(vals, (flat.shape[0],))
        bad = ~(np.isfinite(vals) & (vals > 0))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise WeightError(f"weight {self.name} is not positive/finite at {flat[i]}: {vals[i]}")
        if arr.ndim == 1:
            return float(vals[0])
        return vals.reshape(arr.shape[:-1])


def const_weight(c: float = 1.0) -> WeightFunction:
    c = float(c)
    if not c > 0:
        raise WeightError("constant weight must be positive")
    return WeightFunction("const", lambda z: np.full(z.shape[0], c), f"L == {c}", {"c": c})


def poly_abs(c0: float = 1.0, c1: float = 1.0, p: float = 1.0) -> WeightFunction:
    c0, c1, p = float(c0), float(c1), float(p)
    return WeightFunction("poly_abs", lambda z: c0 + c1 * np.linalg.norm(z, axis=-1) ** p,
                          f"{c0} + {c1}|z|^{p}", {"c0": c0, "c1": c1, "p": p})


def slice_dependent(b, c0: float = 1.0, c1: float = 1.0, p: float = 1.0) -> WeightFunction:
    """c0 + c1 |<z, conj(b)>|^p, i.e. depends on z through sum_j z_j b_j."""
    bb = as_point(b)
    c0, c1, p = float(c0), float(c1), float(p)
    return WeightFunction("slice_dependent",
                          lambda z: c0 + c1 * np.abs(inner(z, np.conj(bb))) ** p,
                          f"{c0} + {c1}|<z,conj(b)>|^{p}",
                          {"b": [str(v) for v in bb], "c0": c0, "c1": c1, "p": p})


def exp_abs(c: float = 1.0, s: float = 1.0, p: float = 1.0) -> WeightFunction:
    c, s, p = float(c), float(s), float(p)
    return WeightFunction("exp_abs", lambda z: c * np.exp(s * np.linalg.norm(z, axis=-1) ** p),
                          f"{c} exp({s}|z|^{p})", {"c": c, "s": s, "p": p})


def recip_poly(c0: float = 1.0, c1: float = 1.0, p: float = 2.0) -> WeightFunction:
    c0, c1, p = float(c0), float(c1), float(p)
    return WeightFunction("recip_poly", lambda z: 1.0 / (c0 + c1 * np.linalg.norm(z, axis=-1) ** p),
                          f"1/({c0} + {c1}|z|^{p})", {"c0": c0, "c1": c1, "p": p})


def scaled(L: WeightFunction, theta: float) -> WeightFunction:
    theta = float(theta)
    if not theta > 0:
        raise WeightError("scale factor must be positive")
    return WeightFunction(f"{theta}*{L.name}", lambda z: theta * L.func(z),
                          f"{theta} * ({L.description})", {"theta": theta, "base": dict(L.params)})


WEIGHTS: dict[str, Callable[..., WeightFunction]] = {
    "const": const_weight,
    "poly_abs": poly_abs,
    "slice_dependent": slice_dependent,
    "exp_abs": exp_abs,
    "recip_poly": recip_poly,
}


def build_weight(name: str, params: Optional[Mapping[str, Any]] = None) -> WeightFunction:
    if name not in WEIGHTS:
        raise InputError(f"unknown weight {name!r}; known: {sorted(WEIGHTS)}")
    params = dict(params or {})
    if name == "slice_dependent" and "b" in params:
        params["b"] = [parse_complex(v) for v in params["b"]]
    try:
        return WEIGHTS[name](**params)
    except TypeError as exc:
        raise InputError(f"invalid parameters for weight {name}: {exc}") from exc


# -- lambda bounds ---------------------------------------------------------

@dataclass
class LambdaBounds:
    eta: float
    lambda1: float
    lambda2: float
    sample_size: int
    witnesses: dict[str, Any]

    def to_dict(self):
        return {"eta": self.eta, "lambda1": self.lambda1, "lambda2": self.lambda2,
                "sample_size": self.sample_size, "witnesses": self.witnesses}


def disk_offsets(radii: int, angles: int) -> np.ndarray:
    """Polar grid of the closed unit disk: the centre plus radii x angles nodes.

    Doubling either count produces a superset of the previous nodes.
    """
    r = np.arange(1, radii + 1) / radii
    a = np.exp(2j * np.pi * np.arange(angles) / angles)
    return np.concatenate([[0j], (r[:, None] * a[None, :]).ravel()])


def _lambda_batch(L: WeightFunction, z: np.ndarray, bb: np.ndarray, t0: np.ndarray,
                  eta: float, offsets: np.ndarray, chunk: int = 2048):
    """Per-sample min/max of L(z+tb)/L(z+t0 b) over |t - t0| <= eta/L(z+t0 b)."""
    P = z.shape[0]
    lo = np.empty(P)
    hi = np.empty(P)
    tlo = np.empty(P, dtype=complex)
    thi = np.empty(P, dtype=complex)
    for s in range(0, P, chunk):
        zz, tt = z[s:s + chunk], t0[s:s + chunk]
        centre = zz + tt[:, None] * bb
        l0 = L(centre)
        ts = tt[:, None] + (eta / l0)[:, None] * offsets[None, :]
        ratio = L(zz[:, None, :] + ts[..., None] * bb) / l0[:, None]
        i_lo, i_hi = np.argmin(ratio, axis=1), np.argmax(ratio, axis=1)
        rows = np.arange(zz.shape[0])
        lo[s:s + chunk], hi[s:s + chunk] = ratio[rows, i_lo], ratio[rows, i_hi]
        tlo[s:s + chunk], thi[s:s + chunk] = ts[rows, i_lo], ts[rows, i_hi]
    return lo, hi, tlo, thi


def lambda_bounds_local(L: WeightFunction, z, b, t0: complex, eta: float,
                        radii: int = 64, angles: int = 128) -> LambdaBounds:
    """Sampled inf/sup of L(z+tb)/L(z+t0 b) on the disk |t - t0| <= eta / L(z+t0 b)."""
    if eta < 0:
        raise InputError("eta must be nonnegative")
    z = as_point(z)
    bb = as_direction(b, z.size).components
    offsets = disk_offsets(radii, angles) if eta > 0 else np.array([0j])
    lo, hi, tlo, thi = _lambda_batch(L, z[None, :], bb, np.array([complex(t0)]), eta, offsets)
    wit = {"lambda1": {"z": z, "t0": complex(t0), "t": tlo[0]},
           "lambda2": {"z": z, "t0": complex(t0), "t": thi[0]}}
    return LambdaBounds(float(eta), float(lo[0]), float(hi[0]), offsets.size, wit)


def _q_table(L, b, etas, zgrid: GridSpec, t0_per_z: int, radii: int, angles: int):
    n = len(as_direction(b).components)
    bb = as_direction(b).components
    base = zgrid.points_for(n)
    if t0_per_z > 1:
        ts = np.concatenate([[0j], disk_points(t0_per_z - 1, zgrid.radius / np.linalg.norm(bb),
                                               zgrid.seed + 7)])
    else:
        ts = np.array([0j])
    z = np.repeat(base, ts.size, axis=0)
    t0 = np.tile(ts, base.shape[0])
    # sampled centres z + t0 b stay inside the region
    keep = np.all(np.abs(z + t0[:, None] * bb) <= zgrid.radius, axis=1)
    keep[::ts.size] = True
    z, t0 = z[keep], t0[keep]
    rows = []
    for eta in etas:
        offsets = disk_offsets(radii, angles) if eta > 0 else np.array([0j])
        lo, hi, tlo, thi = _lambda_batch(L, z, bb, t0, float(eta), offsets)
        i1, i2 = int(np.argmin(lo)), int(np.argmax(hi))
        rows.append({
            "eta": float(eta), "lambda1": float(lo[i1]), "lambda2": float(hi[i2]),
            "witness1": {"z": z[i1], "t0": t0[i1], "t": tlo[i1]},
            "witness2": {"z": z[i2], "t0": t0[i2], "t": thi[i2]},
        })
    return rows, z.shape[0] * offsets.size


def check_Q_class(L: WeightFunction, b, etas: Sequence[float], zgrid: Optional[GridSpec] = None,
                  t0_per_z: int = 64, radii: int = 16, angles: int = 32,
                  floor: float = DEFAULT_FLOOR, ceiling: float = DEFAULT_CEILING,
                  trend: bool = True, growth_factor: float = 2.0) -> CriterionReport:
    """Sampled necessary check of 0 < lambda1(eta) <= lambda2(eta) < inf.

    With ``trend`` the table is recomputed on the grid of doubled radius; a
    bound that moves by more than ``growth_factor`` is reported as growing and
    fails the check.  A pass is a failure to falsify, not a proof.
    """
    etas = [float(e) for e in etas]
    if not etas or any(e < 0 for e in etas):
        raise InputError("etas must be a nonempty list of nonnegative numbers")
    zgrid = zgrid or GridSpec(radius=10.0, points=500)
    params = {"etas": etas, "grid": zgrid.to_dict(), "t0_per_z": t0_per_z, "disk": [radii, angles],
              "floor": floor, "ceiling": ceiling, "weight": L.name}
    try:
        rows, size = _q_table(L, b, etas, zgrid, t0_per_z, radii, angles)
    except WeightError as exc:
        return CriterionReport("q-class", FAIL, float("inf"), params=params,
                               notes=[f"weight leaves floating-point range on sampled disks: {exc}"])
    ok = all(r["lambda1"] >= floor and r["lambda2"] <= ceiling for r in rows)
    notes = []
    if trend:
        try:
            big, _ = _q_table(L, b, etas, zgrid.doubled(), t0_per_z, radii, angles)
        except WeightError as exc:
            big = [dict(r, lambda1=0.0, lambda2=float("inf")) for r in rows]
            notes.append(f"doubled grid: weight leaves floating-point range: {exc}")
        for r, rb in zip(rows, big):
            r["lambda1_doubled"] = rb["lambda1"]
            r["lambda2_doubled"] = rb["lambda2"]
            up = classify_trend(r["lambda2"], rb["lambda2"], growth_factor)
            down = classify_trend(1 / r["lambda1"], 1 / rb["lambda1"], growth_factor)
            r["trend"] = "growing" if "growing" in (up, down) else "stable"
            if r["trend"] == "growing":
                ok = False
                notes.append(f"lambda bounds at eta={r['eta']} grow under grid doubling")
    worst = max(rows, key=lambda r: max(r["lambda2"], 1 / r["lambda1"]))
    return CriterionReport(
        "q-class", PASS if ok else FAIL, worst["lambda2"],
        witness={"lambda1": worst["witness1"], "lambda2": worst["witness2"]},
        sample_size=size, params=params,
        details={"table": rows}, notes=notes)


def check_equivalent(L: WeightFunction, Lstar: WeightFunction, zgrid: Optional[GridSpec] = None,
                     n: Optional[int] = None, floor: float = DEFAULT_FLOOR,
                     ceiling: float = DEFAULT_CEILING) -> CriterionReport:
    """Empirical theta1 = min L*/L and theta2 = max L*/L over the grid."""
    zgrid = zgrid or GridSpec(radius=10.0, points=500)
    n = n or (len(zgrid.explicit[0]) if zgrid.kind == "explicit" else 1)
    z = zgrid.points_for(n)
    ratio = Lstar(z) / L(z)
    i1, i2 = int(np.argmin(ratio)), int(np.argmax(ratio))
    th1, th2 = float(ratio[i1]), float(ratio[i2])
    ok = th1 >= floor and th2 <= ceiling
    return CriterionReport(
        "equivalent", PASS if ok else FAIL, th2,
        witness={"theta1": {"z": z[i1]}, "theta2": {"z": z[i2]}}, sample_size=z.shape[0],
        params={"grid": zgrid.to_dict(), "floor": floor, "ceiling": ceiling,
                "L": L.name, "Lstar": Lstar.name},
        details={"theta1": th1, "theta2": th2})


def equivalence_ratio(L: WeightFunction, Lstar: WeightFunction, z) -> float:
    return float(Lstar(as_point(z)) / L(as_point(z)))
