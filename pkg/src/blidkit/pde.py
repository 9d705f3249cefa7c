"""Linear PDEs in powers of one directional derivative.

A DirectionalPDE encodes  sum_j a_j(z) d^j F/db^j = c(z),  j = 0..s.
Coefficients are numbers or expressions in z1..zn built from constants,
+ - * /, integer powers and exp/sin/cos.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from .core import EntireFunction, as_direction, as_point
from .deriv import DEFAULT_OPTIONS, QuadratureOptions, directional_derivatives
from .errors import InputError, PreconditionError
from .grids import GridSpec
from .index import IndexEstimate, estimate_index
from .parallel import parallel_map
from .report import FAIL, PASS, CriterionReport, jsonable
from .weights import WeightFunction

RESIDUAL_TOL = 1e-9
ODE_RTOL = 1e-10
ODE_ATOL = 1e-13
CONSTANCY_POINTS = 32
CONSTANCY_TOL = 1e-10
LEADING_FLOOR = 1e-12

_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}


class Expression:
    """A coefficient expression evaluated on arrays of points of shape (..., n)."""

    def __init__(self, source: Union[str, int, float, complex], dimension: int):
        self.source = source
        self.dimension = int(dimension)
        text = repr(source) if not isinstance(source, str) else source
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise InputError(f"cannot parse expression {source!r}: {exc.msg}") from None
        self._tree = tree.body
        self._check(self._tree)

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
                raise InputError(f"unsupported constant {node.value!r} in {self.source!r}")
        elif isinstance(node, ast.Name):
            self._coordinate(node.id)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise InputError(f"unsupported unary operator in {self.source!r}")
            self._check(node.operand)
        elif isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int) and exp.value >= 0):
                    raise InputError(f"only nonnegative integer powers are allowed in {self.source!r}")
            elif type(node.op) not in _BINOPS:
                raise InputError(f"unsupported operator in {self.source!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS) or node.keywords \
                    or len(node.args) != 1:
                raise InputError(f"only exp(.), sin(.), cos(.) calls are allowed in {self.source!r}")
            self._check(node.args[0])
        else:
            raise InputError(f"unsupported syntax {type(node).__name__} in {self.source!r}")

    def _coordinate(self, name: str) -> int:
        if name.startswith("z") and name[1:].isdigit():
            j = int(name[1:])
            if 1 <= j <= self.dimension:
                return j - 1
        raise InputError(f"unknown name {name!r} in {self.source!r}; use z1..z{self.dimension}")

    def _eval(self, node, Z):
        if isinstance(node, ast.Constant):
            return complex(node.value)
        if isinstance(node, ast.Name):
            return Z[..., self._coordinate(node.id)]
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, Z)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            left = self._eval(node.left, Z)
            if isinstance(node.op, ast.Pow):
                return left ** node.right.value
            return _BINOPS[type(node.op)](left, self._eval(node.right, Z))
        return _FUNCS[node.func.id](self._eval(node.args[0], Z))

    def __call__(self, z) -> np.ndarray:
        Z = np.asarray(z, dtype=complex)
        out = self._eval(self._tree, Z)
        return np.broadcast_to(np.asarray(out, dtype=complex), Z.shape[:-1]).copy()

    def __repr__(self):
        return f"Expression({self.source!r})"


def _as_expr(e, n) -> Expression:
    return e if isinstance(e, Expression) else Expression(e, n)


@dataclass
class DirectionalPDE:
    direction: np.ndarray
    coefficients: list[Expression]
    rhs: Expression
    sources: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(cls, direction, coefficients: Sequence, rhs="0") -> "DirectionalPDE":
        """Coefficients a_0..a_s as numbers or expression strings."""
        bb = as_direction(direction).components
        n = bb.size
        if len(coefficients) < 2:
            raise InputError("need at least coefficients a_0 and a_1")
        coefs = [_as_expr(c, n) for c in coefficients]
        return cls(bb, coefs, _as_expr(rhs, n),
                   {"direction": bb, "coefficients": [c.source for c in coefs], "rhs": _as_expr(rhs, n).source})

    @classmethod
    def from_dict(cls, d: dict) -> "DirectionalPDE":
        return cls.build(d["direction"], d["coefficients"], d.get("rhs", "0"))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def dimension(self) -> int:
        return self.direction.size

    def to_dict(self):
        return jsonable(self.sources)


def _terms(pde: DirectionalPDE, F: EntireFunction, z: np.ndarray, opts) -> tuple[np.ndarray, complex]:
    """(a_j(z) d^j F/db^j for j = 0..s, c(z)) at one point."""
    derivs = np.empty(pde.order + 1, dtype=complex)
    derivs[0] = F.evaluate(z)
    for r in directional_derivatives(F, z, pde.direction, range(1, pde.order + 1), opts):
        derivs[r.order] = r.snapped()
    a = np.array([c(z) for c in pde.coefficients]).reshape(-1)
    return a * derivs, complex(pde.rhs(z))


def relative_residual(pde: DirectionalPDE, F: EntireFunction, z,
                      opts: QuadratureOptions = DEFAULT_OPTIONS) -> float:
    """|sum_j a_j d^j F - c| / (1 + max_j |a_j d^j F|) at z."""
    z = as_point(z, F.dimension) if not isinstance(z, np.ndarray) else z.astype(complex)
    terms, c = _terms(pde, F, z, opts)
    return float(abs(terms.sum() - c) / (1 + np.max(np.abs(terms))))


def _check_leading(pde: DirectionalPDE, pts: np.ndarray):
    if float(np.max(np.abs(pde.coefficients[-1](pts)))) <= LEADING_FLOOR:
        raise PreconditionError("leading coefficient vanishes on the sampled region")


def residual_check(pde: DirectionalPDE, F: EntireFunction, zgrid: Optional[GridSpec] = None,
                   tol: float = RESIDUAL_TOL, opts: QuadratureOptions = DEFAULT_OPTIONS,
                   jobs: int = 1) -> CriterionReport:
    """Largest relative residual of F in the PDE over the grid; pass when it is <= tol."""
    if pde.dimension != F.dimension:
        raise InputError(f"PDE acts on C^{pde.dimension} but F is on C^{F.dimension}")
    zgrid = zgrid or GridSpec()
    pts = zgrid.points_for(F.dimension, pde.direction)
    _check_leading(pde, pts)
    res = np.array(parallel_map(lambda z: relative_residual(pde, F, z, opts), pts, jobs))
    i = int(np.argmax(res))
    return CriterionReport("pde-residual", PASS if res[i] <= tol else FAIL, float(res[i]),
                           {"z": pts[i]}, int(res.size),
                           {"pde": pde.to_dict(), "tol": tol, "grid": zgrid.to_dict()})


def _assert_slice_constant(pde: DirectionalPDE, z0: np.ndarray, t_end: complex):
    if np.max(np.abs(pde.rhs(z0 + np.linspace(0, 1, CONSTANCY_POINTS)[:, None] * t_end * pde.direction))) > 0:
        raise PreconditionError("slice ODE cross-check needs a homogeneous equation")
    ts = np.linspace(0, 1, CONSTANCY_POINTS) * t_end
    pts = z0 + ts[:, None] * pde.direction
    for j, c in enumerate(pde.coefficients):
        vals = c(pts)
        spread = float(np.max(np.abs(vals - vals[0])))
        if spread > CONSTANCY_TOL * max(1.0, abs(vals[0])):
            raise PreconditionError(f"coefficient a_{j} varies along the slice by {spread:.3g}")
    if vals[0] == 0:
        raise PreconditionError("leading coefficient vanishes on the slice")


def slice_ode_crosscheck(pde: DirectionalPDE, F: EntireFunction, z0, t_end: complex = 2.0,
                         steps: int = 20, rtol: float = ODE_RTOL, atol: float = ODE_ATOL,
                         opts: QuadratureOptions = DEFAULT_OPTIONS) -> dict[str, Any]:
    """Integrate the slice ODE from initial data of F and compare with F along [0, t_end].

    The path is the straight segment t = tau * t_end, tau in [0, 1].
    """
    s = pde.order
    if s < 1:
        raise InputError("order must be >= 1")
    z0 = as_point(z0, F.dimension) if not isinstance(z0, np.ndarray) else z0.astype(complex)
    t_end = complex(t_end)
    _assert_slice_constant(pde, z0, t_end)
    a = np.array([complex(c(z0)) for c in pde.coefficients])
    companion = -a[:s] / a[s]

    y0 = np.empty(s, dtype=complex)
    y0[0] = F.evaluate(z0)
    for r in directional_derivatives(F, z0, pde.direction, range(1, s), opts):
        y0[r.order] = r.snapped()

    def rhs(_tau, y):
        dy = np.empty_like(y)
        dy[:-1] = y[1:]
        dy[-1] = companion @ y
        return t_end * dy

    taus = np.linspace(0.0, 1.0, int(steps) + 1)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", t_eval=taus, rtol=rtol, atol=atol)
    if not sol.success:
        raise PreconditionError(f"integration failed: {sol.message}")
    ts = taus * t_end
    exact = F.evaluate(z0 + ts[:, None] * pde.direction)
    dev = np.abs(sol.y[0] - exact)
    i = int(np.argmax(dev))
    return {"deviation": float(dev[i]), "witness_t": complex(ts[i]), "t_end": t_end, "steps": int(steps),
            "rtol": rtol, "atol": atol, "nfev": int(sol.nfev),
            "table": [(complex(t), complex(g), complex(e)) for t, g, e in zip(ts, sol.y[0], exact)]}


def solution_index_report(pde: DirectionalPDE, F: EntireFunction, L: WeightFunction,
                          zgrid: Optional[GridSpec] = None, M: int = 16, tol: float = RESIDUAL_TOL,
                          opts: QuadratureOptions = DEFAULT_OPTIONS, jobs: int = 1) -> IndexEstimate:
    """estimate_index along the PDE direction for a verified solution, with the residual report attached."""
    rep = residual_check(pde, F, zgrid, tol, opts, jobs)
    if not rep.passed:
        raise PreconditionError(f"F does not solve the PDE: relative residual {rep.constant:.3g} > {tol}")
    est = estimate_index(F, L, pde.direction, zgrid, M, opts, jobs)
    est.attachments["residual"] = rep.to_dict()
    return est
