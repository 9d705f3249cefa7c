"""Normalised directional derivatives T_m and L-index estimates.

T_m(z) = |d^m F(z) / db^m| / (m! L(z)^m).  The L-index in direction b at z is
the least N with T_m(z) <= max_{k <= N} T_k(z) for every m.  Only orders up to
a probe cap M are examined, so an index found here is a lower-bound
certificate "at scale"; a candidate N is accepted only when N < M, so at least
one higher order actually witnesses the inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import numpy as np

from .core import EntireFunction, as_direction, as_point
from .deriv import DEFAULT_OPTIONS, QuadratureOptions, directional_derivatives, joint_partial_table
from .errors import InputError
from .grids import GridSpec
from .parallel import parallel_map
from .report import jsonable
from .weights import WeightFunction

UNBOUNDED = "unbounded-at-scale"
DEGENERATE_RHS = 1e-300
REL_SLACK = 1e-9


@dataclass
class TmTable:
    z: np.ndarray
    direction: np.ndarray
    weight: float
    values: np.ndarray
    errors: np.ndarray

    @property
    def M(self) -> int:
        return self.values.size - 1

    def to_dict(self):
        return jsonable({"z": self.z, "direction": self.direction, "L": self.weight,
                         "T": self.values, "T_err": self.errors})


@dataclass
class PointIndex:
    index: Optional[int]
    indeterminate: bool = False
    defect_order: Optional[int] = None
    defect: float = 0.0

    @property
    def found(self) -> bool:
        return self.index is not None

    def bound(self, M: int) -> int:
        """The index as a lower bound: not-found means 'at least M'."""
        return M if self.index is None else self.index


@dataclass
class IndexEstimate:
    global_N: Union[int, str, None]
    per_point: list[dict[str, Any]]
    M_max: int
    grid: dict[str, Any]
    witness: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    attachments: dict[str, Any] = field(default_factory=dict)

    @property
    def bounded(self) -> bool:
        return isinstance(self.global_N, int)

    def max_bound(self) -> int:
        """Largest per-point index, counting not-found points as M_max."""
        vals = [self.M_max if p["n"] is None else p["n"]
                for p in self.per_point if not p["indeterminate"]]
        return max(vals) if vals else 0

    def to_dict(self):
        return jsonable({"global_N": self.global_N, "M_max": self.M_max, "grid": self.grid,
                         "witness": self.witness, "notes": self.notes,
                         "per_point": self.per_point, **self.attachments})


def tm_table(F: EntireFunction, L: WeightFunction, z, b, M: int,
             opts: QuadratureOptions = DEFAULT_OPTIONS) -> TmTable:
    """T_0..T_M at z with propagated quadrature errors; T_0 is |F(z)| itself."""
    if M < 0:
        raise InputError("probe order must be >= 0")
    z = as_point(z, F.dimension) if not isinstance(z, np.ndarray) else z.astype(complex)
    bb = as_direction(b, F.dimension).components
    lz = L(z)
    vals = np.zeros(M + 1)
    errs = np.zeros(M + 1)
    vals[0] = abs(F.evaluate(z))
    if M >= 1:
        for res in directional_derivatives(F, z, bb, range(1, M + 1), opts):
            norm = math.factorial(res.order) * lz ** res.order
            vals[res.order] = abs(res.snapped()) / norm
            errs[res.order] = res.est_abs_error / norm
    return TmTable(z, bb, lz, vals, errs)


def index_from_values(values: Sequence[float], errors: Optional[Sequence[float]] = None,
                      rel_slack: float = REL_SLACK) -> PointIndex:
    """Least N < M with T_m <= max_{k<=N} T_k (up to slack) for all m <= M."""
    T = np.asarray(values, dtype=float)
    E = np.zeros_like(T) if errors is None else np.asarray(errors, dtype=float)
    M = T.size - 1
    degenerate = False
    order, defect = None, 0.0
    for N in range(M):
        k = int(np.argmax(T[:N + 1]))
        rhs = T[k]
        tail = T[N + 1:]
        slack = np.maximum(rel_slack * rhs, E[N + 1:] + E[k])
        viol = tail > rhs + slack
        if not np.any(viol):
            return PointIndex(N, False, order, defect)
        # remember which order forced the candidate N to be rejected
        j = int(np.argmax(np.where(viol, tail, -1.0)))
        order = N + 1 + j
        if rhs < DEGENERATE_RHS:
            degenerate, defect = True, math.inf
        else:
            defect = float(tail[j] / rhs)
    return PointIndex(None, degenerate, order, defect)


def point_index(F: EntireFunction, L: WeightFunction, z, b, M: int,
                opts: QuadratureOptions = DEFAULT_OPTIONS) -> PointIndex:
    if M < 1:
        raise InputError("probe order M must be >= 1")
    tab = tm_table(F, L, z, b, M, opts)
    return index_from_values(tab.values, tab.errors)


def _summarize(per_point, tables, M, grid, notes):
    live = [i for i, p in enumerate(per_point) if not p["indeterminate"]]
    missing = [i for i in live if per_point[i]["n"] is None]
    if missing:
        i = max(missing, key=lambda j: (per_point[j]["defect"], -j))
        global_N: Union[int, str] = UNBOUNDED
    elif live:
        i = max(live, key=lambda j: (per_point[j]["n"], -j))
        global_N = int(per_point[i]["n"])
    else:
        i, global_N = 0, None
        notes.append("every sampled point is indeterminate")
    witness = {"z": per_point[i]["z"], "order": per_point[i]["defect_order"],
               "table": tables[i]} if per_point else {}
    return IndexEstimate(global_N, per_point, M, grid, witness, notes)


def estimate_index(F: EntireFunction, L: WeightFunction, b, zgrid: Optional[GridSpec] = None,
                   M: int = 16, opts: QuadratureOptions = DEFAULT_OPTIONS,
                   jobs: int = 1) -> IndexEstimate:
    """Per-point and global L-index in direction b over a grid of slice samples."""
    if M < 1:
        raise InputError("probe order M must be >= 1")
    zgrid = zgrid or GridSpec()
    bb = as_direction(b, F.dimension).components
    pts = zgrid.points_for(F.dimension, bb)

    def work(z):
        tab = tm_table(F, L, z, bb, M, opts)
        return tab, index_from_values(tab.values, tab.errors)

    results = parallel_map(work, pts, jobs)
    per_point = [{"z": z, "n": r.index, "indeterminate": r.indeterminate,
                  "defect_order": r.defect_order, "defect": r.defect}
                 for z, (_, r) in zip(pts, results)]
    notes = []
    n_ind = sum(p["indeterminate"] for p in per_point)
    if n_ind:
        notes.append(f"{n_ind} point(s) indeterminate: near-zero right-hand side")
    return _summarize(per_point, [t for t, _ in results], M, zgrid.to_dict(), notes)


def estimate_joint_index(F: EntireFunction, Lvec: Sequence[WeightFunction],
                         zgrid: Optional[GridSpec] = None, Kmax: Optional[Sequence[int]] = None,
                         opts: QuadratureOptions = DEFAULT_OPTIONS, jobs: int = 1) -> IndexEstimate:
    """L-index in joint variables over multi-indices K <= Kmax (graded lexicographic order).

    The normalised entry for K is |d^K F(z)| / (K! prod_j l_j(z)^k_j); the
    per-point index is the least N < |Kmax| such that every entry is bounded
    by the largest entry with |K| <= N.
    """
    n = F.dimension
    if len(Lvec) != n:
        raise InputError(f"need {n} weight functions, got {len(Lvec)}")
    Kmax = [int(k) for k in (Kmax if Kmax is not None else [4] * n)]
    if len(Kmax) != n or any(k < 1 for k in Kmax):
        raise InputError("every component of Kmax must be >= 1")
    zgrid = zgrid or GridSpec(points=64)
    pts = zgrid.points_for(n)
    top = sum(Kmax)

    def work(z):
        table = joint_partial_table(F, z, Kmax, opts)
        ls = np.array([Lj(z) for Lj in Lvec])
        # group entries by total order so the directional machinery applies per degree
        by_deg = np.zeros(top + 1)
        err_deg = np.zeros(top + 1)
        entries = []
        for K, res in table.items():
            norm = math.prod(math.factorial(k) for k in K) * float(np.prod(ls ** np.array(K)))
            v = abs(F.evaluate(z)) if sum(K) == 0 else abs(res.snapped()) / norm
            e = 0.0 if sum(K) == 0 else res.est_abs_error / norm
            entries.append((K, v, e))
            d = sum(K)
            if v > by_deg[d]:
                by_deg[d], err_deg[d] = v, e
        return entries, index_from_values(by_deg, err_deg)

    results = parallel_map(work, pts, jobs)
    per_point = [{"z": z, "n": r.index, "indeterminate": r.indeterminate,
                  "defect_order": r.defect_order, "defect": r.defect}
                 for z, (_, r) in zip(pts, results)]
    tables = [{"entries": [{"K": list(K), "value": v, "err": e} for K, v, e in ent]}
              for ent, _ in results]
    return _summarize(per_point, tables, top, zgrid.to_dict(), [])


def compare_directions(F: EntireFunction, L: WeightFunction, b_list: Sequence, zgrid: Optional[GridSpec] = None,
                       M: int = 16, opts: QuadratureOptions = DEFAULT_OPTIONS, jobs: int = 1) -> dict[str, Any]:
    """Estimate the index along each direction and flag where boundedness differs."""
    if len(b_list) < 2:
        raise InputError("compare_directions needs at least two directions")
    rows = []
    for b in b_list:
        est = estimate_index(F, L, b, zgrid, M, opts, jobs)
        rows.append({"direction": as_direction(b, F.dimension).components,
                     "global_N": est.global_N, "bounded": est.bounded, "estimate": est})
    statuses = {r["bounded"] for r in rows}
    return {"rows": rows, "status_differs": len(statuses) > 1,
            "differing": [i for i, r in enumerate(rows) if len(statuses) > 1 and not r["bounded"]]}
