"""Entire functions of several variables, directions, slices and the fixture corpus.

Every evaluator is vectorised over a leading axis: ``F(z)`` accepts an array of
shape ``(n,)`` or ``(k, n)`` and returns a complex scalar or an array of shape
``(k,)``.  Fixtures carry an exact directional-derivative oracle whenever a
closed form is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import FixtureError, InputError

ArrayFunc = Callable[[np.ndarray], np.ndarray]
# (points (k, n), direction (n,), order m) -> (k,) complex
DerivOracle = Callable[[np.ndarray, np.ndarray, int], np.ndarray]


def parse_complex(value: Any) -> complex:
    """Accept numbers, ``"1+2j"`` strings and ``[re, im]`` pairs."""
    try:
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
        return complex(value)
    except (TypeError, ValueError):
        raise InputError(f"not a complex number: {value!r}") from None


def as_point(z: Any, n: Optional[int] = None) -> np.ndarray:
    """Validate and convert ``z`` into a finite complex vector of length n >= 1."""
    if np.isscalar(z):
        z = [z]
    arr = np.array([parse_complex(v) for v in np.ravel(np.asarray(z, dtype=object))],
                   dtype=complex)
    if arr.size < 1:
        raise InputError("a point needs at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"point has non-finite coordinates: {arr}")
    if n is not None and arr.size != n:
        raise InputError(f"dimension mismatch: expected {n} coordinates, got {arr.size}")
    return arr


def inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hermitian inner product sum_j a_j * conj(b_j) over the last axis."""
    return np.sum(np.asarray(a) * np.conj(np.asarray(b)), axis=-1)


@dataclass(frozen=True, eq=False)
class Direction:
    """A nonzero vector b in C^n."""

    components: np.ndarray

    def __post_init__(self):
        comps = as_point(self.components)
        object.__setattr__(self, "components", comps)
        if not np.any(comps != 0):
            raise InputError("direction must be a nonzero vector")

    @property
    def n(self) -> int:
        return self.components.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def scaled(self, s: complex) -> "Direction":
        return Direction(self.components * complex(s))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)

    def __repr__(self):
        return f"Direction({list(self.components)})"


def as_direction(b: Any, n: Optional[int] = None) -> Direction:
    d = b if isinstance(b, Direction) else Direction(b)
    if n is not None and d.n != n:
        raise InputError(f"dimension mismatch: direction has {d.n} components, expected {n}")
    return d


@dataclass(frozen=True, eq=False)
class EntireFunction:
    """Evaluator contract for an entire function F: C^n -> C."""

    name: str
    dimension: int
    func: ArrayFunc
    derivative: Optional[DerivOracle] = None
    description: str = ""
    params: Mapping[str, Any] = field(default_factory=dict)

    def __call__(self, z) -> Any:
        return self.evaluate(z)

    def evaluate(self, z):
        arr = np.asarray(z, dtype=complex)
        if arr.shape[-1] != self.dimension:
            raise InputError(
                f"{self.name}: expected points with {self.dimension} coordinates, "
                f"got shape {arr.shape}")
        if arr.ndim == 1:
            return complex(self.func(arr[None, :])[0])
        flat = arr.reshape(-1, self.dimension)
        return np.asarray(self.func(flat), dtype=complex).reshape(arr.shape[:-1])

    @property
    def has_exact_derivative(self) -> bool:
        return self.derivative is not None

    def exact_directional_derivative(self, z, b, m: int):
        """Closed-form d^m/db^m F at z, or None when no oracle exists."""
        if self.derivative is None:
            return None
        bb = as_direction(b, self.dimension).components
        arr = np.asarray(z, dtype=complex)
        if arr.ndim == 1:
            return complex(self.derivative(arr[None, :], bb, int(m))[0])
        flat = arr.reshape(-1, self.dimension)
        return np.asarray(self.derivative(flat, bb, int(m))).reshape(arr.shape[:-1])


@dataclass(frozen=True, eq=False)
class SliceFunction:
    """g(t) = F(z0 + t b)."""

    function: EntireFunction
    base: np.ndarray
    direction: Direction

    def __call__(self, t):
        return eval_slice(self.function, self.base, self.direction, t)


def slice_points(z0: np.ndarray, b: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=complex)
    return z0 + t[..., None] * b


def eval_slice(F: EntireFunction, z0, b, t):
    """Value of F at z0 + t b (t may be a scalar or an array)."""
    z0 = np.asarray(z0, dtype=complex) if isinstance(z0, np.ndarray) else as_point(z0)
    bb = as_direction(b).components
    if z0.size != F.dimension or bb.size != F.dimension:
        raise InputError(
            f"dimension mismatch: F has n={F.dimension}, z0 has {z0.size}, b has {bb.size}")
    return F.evaluate(slice_points(z0, bb, t))


def make_slice(F: EntireFunction, z0, b) -> SliceFunction:
    z0 = as_point(z0, F.dimension)
    return SliceFunction(F, z0, as_direction(b, F.dimension))


def linear_combination(terms: Sequence[tuple[complex, EntireFunction]],
                       name: str = "combination") -> EntireFunction:
    """sum alpha_i F_i, with an exact oracle when every term has one."""
    if not terms:
        raise InputError("empty linear combination")
    n = terms[0][1].dimension
    if any(F.dimension != n for _, F in terms):
        raise InputError("dimension mismatch in linear combination")
    coeffs = [complex(a) for a, _ in terms]
    funcs = [F for _, F in terms]

    def func(z):
        return sum(a * F.func(z) for a, F in zip(coeffs, funcs))

    deriv = None
    if all(F.derivative is not None for F in funcs):
        def deriv(z, b, m):
            return sum(a * F.derivative(z, b, m) for a, F in zip(coeffs, funcs))

    return EntireFunction(name, n, func, deriv,
                          " + ".join(f"({a})*{F.name}" for a, F in zip(coeffs, funcs)))


# -- one-variable building blocks -----------------------------------------

def _univariate(spec: Mapping[str, Any]) -> tuple[Callable[[np.ndarray], np.ndarray], str]:
    kind = spec.get("kind")
    if kind == "exp":
        a = parse_complex(spec.get("a", 1))
        return (lambda t: np.exp(a * t)), f"exp({a}*t)"
    if kind == "sin":
        a = parse_complex(spec.get("a", 1))
        return (lambda t: np.sin(a * t)), f"sin({a}*t)"
    if kind == "cos":
        a = parse_complex(spec.get("a", 1))
        return (lambda t: np.cos(a * t)), f"cos({a}*t)"
    if kind == "gauss":
        a = parse_complex(spec.get("a", 1))
        return (lambda t: np.exp(a * t * t)), f"exp({a}*t^2)"
    if kind == "poly":
        coeffs = [parse_complex(c) for c in spec.get("coeffs", [])]
        if not coeffs:
            raise FixtureError("poly factor needs a nonempty 'coeffs' list")
        return (lambda t: np.polynomial.polynomial.polyval(t, coeffs)), f"poly{coeffs}"
    if kind == "const":
        c = parse_complex(spec.get("c", 1))
        return (lambda t: np.full(np.shape(t), c, dtype=complex)), f"{c}"
    raise FixtureError(f"unknown one-variable factor kind {kind!r}")


# -- fixtures --------------------------------------------------------------

def exp_linear(c) -> EntireFunction:
    c = as_point(c)
    n = c.size

    def func(z):
        return np.exp(inner(z, c))

    def deriv(z, b, m):
        return inner(b, c) ** m * np.exp(inner(z, c))

    return EntireFunction("exp_linear", n, func, deriv, f"exp(<z,c>), c={list(c)}",
                          {"c": [str(v) for v in c]})


def sin_linear(c) -> EntireFunction:
    c = as_point(c)
    n = c.size

    def func(z):
        return np.sin(inner(z, c))

    def deriv(z, b, m):
        a = inner(b, c)
        w = inner(z, c)
        # sin^{(m)} cycles through sin, cos, -sin, -cos
        base = (np.sin(w), np.cos(w), -np.sin(w), -np.cos(w))[m % 4]
        return a ** m * base

    return EntireFunction("sin_linear", n, func, deriv, f"sin(<z,c>), c={list(c)}",
                          {"c": [str(v) for v in c]})


def separable_product(factors: Sequence[Mapping[str, Any]]) -> EntireFunction:
    if not factors:
        raise FixtureError("separable_product needs at least one factor")
    parts = [_univariate(f) for f in factors]
    n = len(parts)

    def func(z):
        out = np.ones(z.shape[0], dtype=complex)
        for j, (f, _) in enumerate(parts):
            out = out * f(z[:, j])
        return out

    return EntireFunction("separable_product", n, func, None,
                          " * ".join(f"f{j + 1}(z{j + 1})=" + d for j, (_, d) in enumerate(parts)),
                          {"factors": [dict(f) for f in factors]})


def composite_sum(factor: Mapping[str, Any], n: int) -> EntireFunction:
    if int(n) < 1:
        raise FixtureError("composite_sum needs n >= 1")
    f, desc = _univariate(factor)

    def func(z):
        return f(np.sum(z, axis=-1))

    return EntireFunction("composite_sum", int(n), func, None,
                          f"f(z1+...+zn), f(t)={desc}", {"factor": dict(factor), "n": int(n)})


def _parse_poly_coeffs(coeffs) -> dict[tuple[int, ...], complex]:
    items: list[tuple[Any, Any]]
    if isinstance(coeffs, Mapping):
        items = list(coeffs.items())
    else:
        items = [(k, v) for k, v in coeffs]
    out: dict[tuple[int, ...], complex] = {}
    for key, val in items:
        if isinstance(key, str):
            key = tuple(int(s) for s in key.replace("(", "").replace(")", "").split(",") if s.strip())
        elif isinstance(key, int):
            key = (key,)
        key = tuple(int(k) for k in key)
        if any(k < 0 for k in key):
            raise FixtureError(f"negative exponent in monomial {key}")
        out[key] = out.get(key, 0) + parse_complex(val)
    if not out:
        raise FixtureError("polynomial needs at least one coefficient")
    dims = {len(k) for k in out}
    if len(dims) != 1 or 0 in dims:
        raise FixtureError("all monomial exponents must have the same nonzero length")
    return out


def polynomial(coeffs) -> EntireFunction:
    terms = _parse_poly_coeffs(coeffs)
    n = len(next(iter(terms)))
    keys = list(terms)
    exps = np.array(keys, dtype=int)
    vals = np.array([terms[k] for k in keys], dtype=complex)
    degree = int(exps.sum(axis=1).max())

    def func(z):
        out = np.zeros(z.shape[0], dtype=complex)
        for e, c in zip(exps, vals):
            out = out + c * np.prod(z ** e, axis=1)
        return out

    def deriv(z, b, m):
        if m > degree:
            return np.zeros(z.shape[0], dtype=complex)
        # coefficient of t^m in P(z + t b), expanded factor by factor
        total = np.zeros(z.shape[0], dtype=complex)
        for e, c in zip(exps, vals):
            poly = np.ones((z.shape[0], 1), dtype=complex)
            for j, k in enumerate(e):
                if k == 0:
                    continue
                i = np.arange(k + 1)
                binom = np.array([math.comb(int(k), int(ii)) for ii in i], dtype=float)
                fac = binom * z[:, j:j + 1] ** (k - i) * b[j] ** i
                poly = np.array([np.convolve(p, q) for p, q in zip(poly, fac)])
            if poly.shape[1] > m:
                total = total + c * poly[:, m]
        return math.factorial(m) * total

    return EntireFunction("polynomial", n, func, deriv,
                          f"polynomial of degree {degree} with {len(keys)} terms",
                          {"coeffs": [[list(k), str(terms[k])] for k in keys]})


@dataclass(frozen=True)
class CanonicalProductInfo:
    genus: int
    zeros: np.ndarray
    tail_sum: float  # sum over omitted zeros of |a_k|^-(p+1), or inf when unknown


def canonical_product(genus: int = 1, scale: float = 1.0, exponent: float = 1.0,
                      angle: float = 0.0, factors: int = 200, c=None,
                      zeros=None) -> EntireFunction:
    """Truncated Weierstrass product prod_k E_p(<z,c>/a_k).

    Zeros are either given explicitly or generated on a ray as
    a_k = scale * k**exponent * exp(i*angle), k = 1..factors.  For the
    generated sequence the omitted tail obeys, for |w| <= |a_{K+1}|/2,
    |log prod_{k>K} E_p(w/a_k)| <= 2 |w|^{p+1} sum_{k>K} |a_k|^{-(p+1)};
    ``tail_bound(w)`` reports that estimate.
    """
    p = int(genus)
    if p < 0:
        raise FixtureError("genus must be nonnegative")
    c = as_point(c if c is not None else [1.0])
    if zeros is not None:
        a = np.array([parse_complex(v) for v in zeros], dtype=complex)
        if np.any(a == 0):
            raise FixtureError("canonical product zeros must be nonzero")
        tail = 0.0
    else:
        if scale <= 0 or exponent <= 0:
            raise FixtureError("scale and exponent must be positive")
        if exponent * (p + 1) <= 1:
            raise FixtureError(
                f"sum |a_k|^-(p+1) diverges for exponent={exponent}, genus={p}; "
                "need exponent*(genus+1) > 1")
        if int(factors) < 1:
            raise FixtureError("factors must be >= 1")
        k = np.arange(1, int(factors) + 1)
        a = scale * k.astype(float) ** exponent * np.exp(1j * angle)
        s = exponent * (p + 1)
        kk = int(factors)
        # integral comparison of the tail sum_{k>K} k^-s
        tail = scale ** (-(p + 1)) * (kk ** (1 - s)) / (s - 1) if s > 1 else math.inf
    a = np.asarray(a)

    def func(z):
        w = inner(z, c)
        u = w[:, None] / a[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log(1 - u)
            for j in range(1, p + 1):
                logs = logs + u ** j / j
            out = np.exp(np.sum(logs, axis=1))
        out[np.any(u == 1, axis=1)] = 0
        return out

    F = EntireFunction("canonical_product", c.size, func, None,
                       f"prod E_{p}(<z,c>/a_k) over {a.size} zeros",
                       {"genus": p, "scale": scale, "exponent": exponent, "angle": angle,
                        "factors": int(a.size), "c": [str(v) for v in c]})
    object.__setattr__(F, "info", CanonicalProductInfo(p, a, tail))
    return F


def canonical_tail_bound(F: EntireFunction, w: complex) -> float:
    """Upper bound for |log(omitted tail)| at linear-form value w."""
    info: CanonicalProductInfo = getattr(F, "info")
    if info.tail_sum == 0.0:
        return 0.0
    if abs(w) > abs(info.zeros[-1]) / 2:
        return math.inf
    return 2 * abs(w) ** (info.genus + 1) * info.tail_sum


def _hermite_like(m: int) -> np.ndarray:
    """Coefficients of P_m with d^m/dx^m exp(x^2) = P_m(x) exp(x^2)."""
    p = np.array([1.0])
    for _ in range(m):
        dp = np.polynomial.polynomial.polyder(p) if p.size > 1 else np.array([0.0])
        p = np.polynomial.polynomial.polyadd(dp, np.polynomial.polynomial.polymulx(2 * p))
    return p


def gauss_square(n: int = 1) -> EntireFunction:
    n = int(n)
    if n < 1:
        raise FixtureError("gauss_square needs n >= 1")

    def func(z):
        return np.exp(z[:, 0] ** 2)

    def deriv(z, b, m):
        x = z[:, 0]
        return b[0] ** m * np.polynomial.polynomial.polyval(x, _hermite_like(m)) * np.exp(x ** 2)

    return EntireFunction("gauss_square", n, func, deriv, "exp(z1^2), unbounded index along e1",
                          {"n": n})


# -- registry --------------------------------------------------------------

@dataclass(frozen=True)
class FixtureInfo:
    name: str
    builder: Callable[..., EntireFunction]
    params: str
    facts: str
    base: Optional[str] = None
    base_params: Optional[Mapping[str, Any]] = None


_BUILTINS: dict[str, FixtureInfo] = {
    "exp_linear": FixtureInfo(
        "exp_linear", exp_linear, "c: list of n complex",
        "L-index 0 in direction b with L == |<b,c>|"),
    "sin_linear": FixtureInfo(
        "sin_linear", sin_linear, "c: list of n complex",
        "L-index 1 in direction b with L == |<b,c>|"),
    "separable_product": FixtureInfo(
        "separable_product", separable_product,
        "factors: list of {kind: exp|sin|cos|gauss|poly|const, ...}", "product of one-variable factors"),
    "composite_sum": FixtureInfo(
        "composite_sum", composite_sum, "factor: {kind, ...}; n: int", "f(z1+...+zn)"),
    "polynomial": FixtureInfo(
        "polynomial", polynomial, "coeffs: {\"k1,...,kn\": complex} or [[K, c], ...]",
        "bounded index; constants have L-index 0"),
    "canonical_product": FixtureInfo(
        "canonical_product", canonical_product,
        "genus, scale, exponent, angle, factors (default 200), c; or zeros: list",
        "zeros on a ray; truncated with documented tail bound"),
    "gauss_square": FixtureInfo(
        "gauss_square", gauss_square, "n: int (default 1)",
        "unbounded index in direction e1 for L == 1"),
}

_CUSTOM: dict[str, FixtureInfo] = {}


def _normalize_params(name: str, params: Mapping[str, Any]) -> dict[str, Any]:
    params = dict(params or {})
    if name == "polynomial" and "coeffs" not in params:
        params = {"coeffs": params}
    return params


def build_fixture(name: str, params: Optional[Mapping[str, Any]] = None) -> EntireFunction:
    """Instantiate a registered fixture by name."""
    if name in _CUSTOM:
        info = _CUSTOM[name]
        merged = dict(info.base_params or {})
        merged.update(params or {})
        F = build_fixture(info.base, merged)
        object.__setattr__(F, "name", name)
        return F
    if name not in _BUILTINS:
        raise FixtureError(f"unknown fixture {name!r}; known: {sorted(fixture_names())}")
    try:
        return _BUILTINS[name].builder(**_normalize_params(name, params or {}))
    except FixtureError:
        raise
    except (TypeError, ValueError, InputError) as exc:
        raise FixtureError(f"invalid parameters for {name}: {exc}") from exc


def register_fixture(name: str, base: str, params: Mapping[str, Any],
                     facts: str = "custom entry") -> None:
    if name in _BUILTINS:
        raise FixtureError(f"cannot shadow built-in fixture {name!r}")
    build_fixture(base, params)  # validate eagerly
    _CUSTOM[name] = FixtureInfo(name, _BUILTINS[base].builder, _BUILTINS[base].params,
                                facts, base, dict(params))


def clear_custom_fixtures() -> None:
    _CUSTOM.clear()


def fixture_names() -> list[str]:
    return list(_BUILTINS) + list(_CUSTOM)


def list_fixtures() -> list[dict[str, str]]:
    rows = []
    for info in list(_BUILTINS.values()) + list(_CUSTOM.values()):
        rows.append({"name": info.name, "params": info.params, "facts": info.facts,
                     "kind": "custom" if info.base else "built-in"})
    return rows
