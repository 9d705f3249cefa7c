"""Command-line front end: JSON config plus flag overrides in, JSON report (and CSV tables) out.

Exit codes: 0 success, 2 invalid configuration, 3 computation error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import json
import sys
from importlib import metadata
from pathlib import Path
from typing import Any, Optional, Sequence

import jsonschema

from . import criteria as crit
from .core import build_fixture, clear_custom_fixtures, list_fixtures, register_fixture
from .deriv import QuadratureOptions
from .errors import BlidError, FixtureError, InputError
from .grids import GridSpec
from .index import compare_directions, estimate_index, estimate_joint_index
from .pde import DirectionalPDE, residual_check, slice_ode_crosscheck, solution_index_report
from .report import jsonable
from .weights import build_weight, check_Q_class
from .zeros import counting_function, excluded_region, find_slice_zeros

SCHEMA_VERSION = 1
TOOL = "blidkit"
EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3

OPERATIONS = ("estimate-index", "estimate-joint-index", "compare-directions", "check-q", "zeros",
              "verify", "pde-check", "growth", "list-fixtures")

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "string"},
                      {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}
_vector = {"type": "array", "items": _complex, "minItems": 1}
_named = {"oneOf": [{"type": "string"},
                    {"type": "object", "required": ["name"],
                     "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
                     "additionalProperties": False}]}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "fixture": _named,
        "weight": _named,
        "weights": {"type": "array", "items": _named, "minItems": 1},
        "direction": _vector,
        "directions": {"type": "array", "items": _vector, "minItems": 2},
        "grid": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "points": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "per_slice": {"type": "integer", "minimum": 1},
                "kind": {"enum": ["polydisc", "real", "explicit"]},
                "explicit": {"type": "array", "items": _vector},
            },
        },
        "quadrature": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "nodes": {"type": "integer", "minimum": 16},
                "radius": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "max_doublings": {"type": "integer", "minimum": 0},
                "rtol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "params": {"type": "object"},
        "criterion": {"enum": list(crit.CRITERIA)},
        "pde": {
            "type": "object", "required": ["coefficients"], "additionalProperties": False,
            "properties": {
                "direction": _vector,
                "coefficients": {"type": "array", "minItems": 2,
                                 "items": {"oneOf": [_number, {"type": "string"}]}},
                "rhs": {"oneOf": [_number, {"type": "string"}]},
            },
        },
        "custom_fixtures": {
            "type": "array",
            "items": {"type": "object", "required": ["name", "base"], "additionalProperties": False,
                      "properties": {"name": {"type": "string"}, "base": {"type": "string"},
                                     "params": {"type": "object"}, "facts": {"type": "string"}}},
        },
        "jobs": {"type": "integer", "minimum": 1},
        "output": {"type": "string"},
        "tables": {"type": "string"},
    },
}


NO_FIXTURE = ("list-fixtures", "check-q")


class ConfigError(Exception):
    pass


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def validate_config(cfg: dict) -> None:
    """Raise ConfigError with a path-qualified message on schema violations."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path)
        raise ConfigError(f"{path}: {e.message}")


def _parse_vector(text: str) -> list:
    try:
        v = json.loads(text)
    except json.JSONDecodeError:
        v = [s.strip() for s in text.split(",")]
    return v if isinstance(v, list) else [v]


def merge_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    """Apply command-line flags on top of the config file."""
    cfg = copy.deepcopy(cfg)
    if args.fixture:
        cfg["fixture"] = {"name": args.fixture, "params": json.loads(args.fixture_params or "{}")}
    elif args.fixture_params:
        base = cfg.get("fixture", {})
        name = base if isinstance(base, str) else base.get("name")
        cfg["fixture"] = {"name": name, "params": json.loads(args.fixture_params)}
    if args.weight:
        cfg["weight"] = {"name": args.weight, "params": json.loads(args.weight_params or "{}")}
    if args.direction:
        cfg["direction"] = _parse_vector(args.direction)
    grid = cfg.setdefault("grid", {})
    for key, val in (("radius", args.grid_radius), ("points", args.grid_points), ("seed", args.seed),
                     ("kind", args.grid_kind)):
        if val is not None:
            grid[key] = val
    quad = cfg.setdefault("quadrature", {})
    for key, val in (("nodes", args.nodes), ("radius", args.radius), ("max_doublings", args.max_doublings)):
        if val is not None:
            quad[key] = val
    params = cfg.setdefault("params", {})
    if args.max_order is not None:
        params["max_order"] = args.max_order
    for item in args.param or []:
        key, _, raw = item.partition("=")
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    if getattr(args, "criterion", None):
        cfg["criterion"] = args.criterion
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if args.output:
        cfg["output"] = args.output
    if args.tables:
        cfg["tables"] = args.tables
    return cfg


def _named_spec(spec) -> tuple[str, dict]:
    if isinstance(spec, str):
        return spec, {}
    return spec["name"], dict(spec.get("params") or {})


class Context:
    """Objects built from a validated config."""

    def __init__(self, cfg: dict, operation: str):
        self.cfg = cfg
        # the registry is process-wide; each run sees only its own custom entries
        clear_custom_fixtures()
        for entry in cfg.get("custom_fixtures", []):
            register_fixture(entry["name"], entry["base"], entry.get("params", {}),
                             entry.get("facts", "custom entry"))
        self.params = cfg.get("params", {})
        self.jobs = int(cfg.get("jobs", 1))
        q = cfg.get("quadrature", {})
        self.opts = QuadratureOptions(**q) if q else QuadratureOptions()
        self.F = None
        if operation not in NO_FIXTURE:
            if "fixture" not in cfg:
                raise ConfigError("$.fixture: required for this operation")
            self.F = build_fixture(*_named_spec(cfg["fixture"]))

    def weight(self):
        name, params = _named_spec(self.cfg.get("weight", "const"))
        return build_weight(name, params)

    def direction(self):
        if "direction" in self.cfg:
            return self.cfg["direction"]
        if "pde" in self.cfg and "direction" in self.cfg["pde"]:
            return self.cfg["pde"]["direction"]
        n = self.F.dimension if self.F is not None else 1
        return [1] + [0] * (n - 1)

    def grid_or(self, default: GridSpec) -> GridSpec:
        if not self.cfg.get("grid"):
            return default
        merged = default.to_dict()
        merged.update(self.cfg["grid"])
        if merged.get("kind") != "explicit":
            merged["explicit"] = []
        return GridSpec.from_dict(merged)

    def pde(self) -> DirectionalPDE:
        if "pde" not in self.cfg:
            raise ConfigError("$.pde: required for pde-check")
        d = dict(self.cfg["pde"])
        d.setdefault("direction", self.direction())
        return DirectionalPDE.from_dict(d)


# -- operations -------------------------------------------------------------

def _index_rows(est):
    rows = [["z", "n", "indeterminate", "defect_order", "defect"]]
    for p in est.per_point:
        rows.append([json.dumps(jsonable(p["z"])), p["n"], p["indeterminate"], p["defect_order"],
                     jsonable(p["defect"])])
    return rows


def op_estimate_index(ctx: Context):
    est = estimate_index(ctx.F, ctx.weight(), ctx.direction(), ctx.grid_or(GridSpec()),
                         int(ctx.params.get("max_order", 16)), ctx.opts, ctx.jobs)
    return est.to_dict(), {"per_point": _index_rows(est)}


def op_estimate_joint_index(ctx: Context):
    n = ctx.F.dimension
    specs = ctx.cfg.get("weights") or [ctx.cfg.get("weight", "const")] * n
    Lvec = [build_weight(*_named_spec(s)) for s in specs]
    Kmax = ctx.params.get("Kmax", [int(ctx.params.get("max_order", 4))] * n)
    est = estimate_joint_index(ctx.F, Lvec, ctx.grid_or(GridSpec(points=64)), Kmax, ctx.opts, ctx.jobs)
    return est.to_dict(), {"per_point": _index_rows(est)}


def op_compare_directions(ctx: Context):
    dirs = ctx.cfg.get("directions")
    if not dirs:
        raise ConfigError("$.directions: at least two directions are required")
    out = compare_directions(ctx.F, ctx.weight(), dirs, ctx.grid_or(GridSpec()),
                             int(ctx.params.get("max_order", 16)), ctx.opts, ctx.jobs)
    rows = [{"direction": r["direction"], "global_N": r["global_N"], "bounded": r["bounded"],
             "estimate": r["estimate"].to_dict()} for r in out["rows"]]
    table = [["direction", "global_N", "bounded"]] + [
        [json.dumps(jsonable(r["direction"])), r["global_N"], r["bounded"]] for r in out["rows"]]
    return jsonable({"rows": rows, "status_differs": out["status_differs"],
                     "differing": out["differing"]}), {"directions": table}


def op_check_q(ctx: Context):
    p = ctx.params
    rep = check_Q_class(ctx.weight(), ctx.direction(), p.get("etas", [0.5, 1.0, 2.0]),
                        ctx.grid_or(GridSpec(radius=10.0, points=500)),
                        t0_per_z=int(p.get("t0_per_z", 64)),
                        trend=bool(p.get("trend", True)),
                        growth_factor=float(p.get("growth_factor", 2.0)))
    return rep.to_dict(), {}


def op_zeros(ctx: Context):
    p = ctx.params
    z0 = p.get("z0", [0] * ctx.F.dimension)
    zs = find_slice_zeros(ctx.F, z0, ctx.direction(), float(p.get("search_radius", 10.0)),
                          float(p.get("tol", 1e-10)), shift=p.get("shift", 0) if not isinstance(
                              p.get("shift", 0), list) else complex(*p["shift"]))
    out = zs.to_dict()
    if "r" in p:
        out["excluded_region"] = excluded_region(zs, ctx.weight(), float(p["r"])).to_dict()
    if "count_radius" in p:
        t0 = p.get("t0", 0)
        out["counting_function"] = counting_function(
            zs, complex(*t0) if isinstance(t0, list) else complex(t0), float(p["count_radius"]))
    table = [["t_re", "t_im", "multiplicity", "residual"]] + [
        [a.real, a.imag, int(m), r] for a, m, r in zip(zs.zeros, zs.multiplicities, zs.residuals)]
    return out, {"zeros": table}


def _criterion_report(ctx: Context, name: str):
    p = ctx.params
    F, b = ctx.F, ctx.direction()
    if name == "growth":
        prof = crit.growth_profile(F, b, p.get("z0", [0] * F.dimension), float(p.get("rmax", 50.0)),
                                   int(p.get("samples", 40)))
        return jsonable(prof), {"growth": [["r", "lnM"]] + [list(r) for r in prof["table"]]}
    L = ctx.weight()
    grid = ctx.grid_or(crit.default_grid())
    common = {"zgrid": grid, "jobs": ctx.jobs}
    if name == "local-deriv":
        rep = crit.local_derivative_check(F, L, b, int(p.get("n0", 0)), float(p.get("r1", 1.0)),
                                          float(p.get("r2", 2.0)), opts=ctx.opts, **common)
    elif name == "max-mod":
        rep = crit.max_modulus_check(F, L, b, float(p.get("r1", 1.0)), float(p.get("r2", 2.0)), **common)
    elif name == "hayman":
        rep = crit.hayman_check(F, L, b, int(p.get("N", 1)), opts=ctx.opts, **common)
    elif name == "min-max":
        rep = crit.min_max_check(F, L, b, float(p.get("r", 1.0)), **common)
    elif name == "log-deriv":
        rep = crit.log_derivative_check(F, L, b, float(p.get("r", 0.5)), opts=ctx.opts, **common)
    else:
        rep = crit.value_distribution_check(F, L, b, p.get("values", [0]), float(p.get("r", 1.0)), **common)
    rows = [["witness", "value"]] + [[json.dumps(jsonable(w)), jsonable(v)] for w, v in rep.samples]
    return rep.to_dict(), {"samples": rows}


def op_verify(ctx: Context):
    name = ctx.cfg.get("criterion")
    if not name:
        raise ConfigError("$.criterion: required for verify (use --criterion)")
    return _criterion_report(ctx, name)


def op_growth(ctx: Context):
    return _criterion_report(ctx, "growth")


def op_pde_check(ctx: Context):
    p = ctx.params
    pde = ctx.pde()
    grid = ctx.grid_or(GridSpec())
    tol = float(p.get("tol", 1e-9))
    rep = residual_check(pde, ctx.F, grid, tol, ctx.opts, ctx.jobs)
    out: dict[str, Any] = {"pde": pde.to_dict(), "residual": rep.to_dict()}
    tables = {}
    if "t_end" in p:
        t_end = p["t_end"]
        cross = slice_ode_crosscheck(pde, ctx.F, p.get("z0", [0] * ctx.F.dimension),
                                     complex(*t_end) if isinstance(t_end, list) else complex(t_end),
                                     int(p.get("steps", 20)), opts=ctx.opts)
        tables["slice_ode"] = [["t", "numeric", "exact"]] + [
            [json.dumps(jsonable(t)), json.dumps(jsonable(g)), json.dumps(jsonable(e))]
            for t, g, e in cross.pop("table")]
        out["slice_ode"] = jsonable(cross)
    if p.get("index") and rep.passed:
        est = solution_index_report(pde, ctx.F, ctx.weight(), grid, int(p.get("max_order", 16)),
                                    tol, ctx.opts, ctx.jobs)
        out["index"] = est.to_dict()
    return jsonable(out), tables


def op_list_fixtures(ctx: Context):
    return jsonable({"fixtures": list_fixtures()}), {}


DISPATCH = {
    "estimate-index": op_estimate_index,
    "estimate-joint-index": op_estimate_joint_index,
    "compare-directions": op_compare_directions,
    "check-q": op_check_q,
    "zeros": op_zeros,
    "verify": op_verify,
    "pde-check": op_pde_check,
    "growth": op_growth,
    "list-fixtures": op_list_fixtures,
}


# -- reports ----------------------------------------------------------------

def payload_bytes(report: dict) -> bytes:
    """Canonical bytes of a report with the timestamp removed."""
    body = {k: v for k, v in report.items() if k != "timestamp"}
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode()


def run(operation: str, cfg: dict) -> tuple[int, dict, dict]:
    """Validate, dispatch and assemble a report.  Returns (exit code, report, tables)."""
    if operation not in DISPATCH:
        raise ConfigError(f"unknown operation {operation!r}")
    validate_config(cfg)
    report: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": TOOL, "version": tool_version()},
        "operation": operation,
        "config": cfg,
        "seed": cfg.get("grid", {}).get("seed", 0),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    try:
        ctx = Context(cfg, operation)
    except (InputError, FixtureError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    try:
        result, tables = DISPATCH[operation](ctx)
    except (InputError, FixtureError) as exc:
        raise ConfigError(str(exc)) from exc
    except BlidError as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc),
                           **{k: jsonable(v) for k, v in vars(exc).items()}}
        return EXIT_COMPUTE, report, {}
    report["status"] = "ok"
    report["result"] = result
    return EXIT_OK, report, tables


def write_outputs(report: dict, tables: dict, output: Optional[str], table_dir: Optional[str]) -> None:
    text = json.dumps(report, sort_keys=True, indent=2)
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if table_dir and tables:
        d = Path(table_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, rows in tables.items():
            with open(d / f"{name}.csv", "w", newline="") as fh:
                csv.writer(fh).writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--fixture")
    common.add_argument("--fixture-params", help="JSON object of fixture parameters")
    common.add_argument("--weight")
    common.add_argument("--weight-params", help="JSON object of weight parameters")
    common.add_argument("--direction", help='JSON list, e.g. "[1, 1]" or "1,1j"')
    common.add_argument("--grid-radius", type=float)
    common.add_argument("--grid-points", type=int)
    common.add_argument("--grid-kind", choices=["polydisc", "real", "explicit"])
    common.add_argument("--seed", type=int)
    common.add_argument("--max-order", type=int)
    common.add_argument("--nodes", type=int)
    common.add_argument("--radius", type=float, help="fixed Cauchy contour radius")
    common.add_argument("--max-doublings", type=int)
    common.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="operation parameter (value parsed as JSON when possible)")
    common.add_argument("--jobs", type=int)
    common.add_argument("--output", help="report path (default: stdout)")
    common.add_argument("--tables", help="directory for CSV tables")

    parser = argparse.ArgumentParser(prog=TOOL, description="Numerical checks of bounded L-index in a direction.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {tool_version()}")
    sub = parser.add_subparsers(dest="operation", required=True)
    for op in OPERATIONS:
        p = sub.add_parser(op, parents=[common])
        if op == "verify":
            p.add_argument("--criterion", choices=crit.CRITERIA)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = {}
        if args.config:
            try:
                cfg = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"$: cannot read config {args.config}: {exc}") from exc
            if not isinstance(cfg, dict):
                raise ConfigError("$: config must be a JSON object")
        cfg = merge_overrides(cfg, args)
        code, report, tables = run(args.operation, cfg)
    except ConfigError as exc:
        print(f"{TOOL}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.operation == "list-fixtures" and not cfg.get("output"):
        for row in report["result"]["fixtures"]:
            print(f"{row['name']:<20} {row['kind']:<9} {row['params']}  -- {row['facts']}")
    else:
        write_outputs(report, tables, cfg.get("output"), cfg.get("tables"))
    if code == EXIT_COMPUTE:
        print(f"{TOOL}: computation failed: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
