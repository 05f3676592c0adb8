"""Command-line front end.

    extsource phase   --a 2 --t 0.5
    extsource density --a 2 --t 0.4 --out results/
    extsource verify  --a 2 --t 0.5 --n 12

Settings come from flags, then a key=value file given with --config, then
defaults.  JSON outputs embed the resolved configuration.
"""
from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys

import numpy as np

from . import asymptotics, density, ensemble, lambdas, model_rhp, mop
from .curve import ModelParams, Phase, branch_points, classify_phase
from .errors import ExtSourceError, PhaseError
from .precision import use_profile

COMMANDS = ("phase", "support", "density", "sample", "kernel", "limits", "verify")

DEFAULTS = {
    "a": 2.0,
    "t": 0.5,
    "n": None,
    "seed": 0,
    "draws": 100,
    "bins": 0.1,
    "grid": None,
    "precision": "double",
    "threads": 1,
    "out": None,
    "timestamp": True,
}


class ConfigError(Exception):
    pass


class CheckFailed(Exception):
    pass


# ---------------------------------------------------------------------------
# serialisation


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag])
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(float(v)) if not isinstance(v, str) else v for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# configuration


def read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                key = key.replace("-", "_")
                if key not in DEFAULTS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                out[key] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in ("a", "t", "bins"):
            return float(value)
        if key in ("seed", "draws", "threads"):
            return int(value)
        if key == "n":
            if isinstance(value, (list, tuple)):
                return [int(v) for v in value]
            return [int(v) for v in str(value).split(",") if v.strip()]
        if key == "timestamp":
            return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
        if key == "precision":
            if value not in ("double", "extended"):
                raise ConfigError(f"precision must be double or extended, got {value!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        if key == "timestamp":
            if args.no_timestamp:
                cfg["timestamp"] = False
            continue
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    cfg["command"] = args.command
    if cfg["draws"] < 1 or cfg["threads"] < 1 or cfg["bins"] <= 0:
        raise ConfigError("draws and threads must be positive and bins > 0")
    if cfg["n"] is not None and min(cfg["n"]) < 3:
        raise ConfigError("n must be at least 3")
    try:
        ModelParams(cfg["a"], cfg["t"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg["n"] is not None:
        cfg["counts"] = [list(mop.split_counts(n, cfg["t"])) for n in cfg["n"]]
    return cfg


def _params(cfg, three_cut=True):
    params = ModelParams(cfg["a"], cfg["t"])
    if three_cut:
        try:
            params.require_three_cut()
        except PhaseError as exc:
            raise ConfigError(str(exc)) from exc
    return params


def _single_n(cfg, default):
    ns = cfg["n"] or [default]
    if len(ns) != 1:
        raise ConfigError(f"{cfg['command']} takes a single n")
    return ns[0]


def _parse_range(spec, default):
    """'lo:hi:count' or a single count over the default range."""
    lo, hi, count = default
    if spec:
        parts = spec.split(":")
        try:
            if len(parts) == 1:
                count = int(parts[0])
            elif len(parts) == 3:
                lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            else:
                raise ValueError
        except ValueError as exc:
            raise ConfigError(f"bad grid {spec!r}; use COUNT or LO:HI:COUNT") from exc
    if count < 1:
        raise ConfigError("grid needs at least one point")
    return np.linspace(lo, hi, count)


def _parse_list(spec):
    try:
        return tuple(float(v) for v in spec.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad grid {spec!r}; use comma-separated values") from exc


# ---------------------------------------------------------------------------
# output


class Output:
    def __init__(self, cfg):
        self.cfg = cfg
        self.dir = cfg["out"]
        if self.dir:
            os.makedirs(self.dir, exist_ok=True)

    def json(self, name, payload):
        doc = {"config": {k: v for k, v in self.cfg.items()}, **payload}
        if self.cfg["timestamp"]:
            doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        text = dumps(doc) + "\n"
        self._emit(name + ".json", text)

    def csv(self, name, header, rows):
        self._emit(name + ".csv", _csv(header, rows))

    def _emit(self, fname, text):
        if self.dir:
            with open(os.path.join(self.dir, fname), "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_phase(cfg, out):
    report = classify_phase(ModelParams(cfg["a"], cfg["t"]))
    out.json("phase", {"phase": report.to_dict()})


def cmd_support(cfg, out):
    params = _params(cfg)
    sd = branch_points(params)
    out.json("support", {"support": sd.to_dict(), "intervals": [list(iv) for iv in sd.intervals]})


def cmd_density(cfg, out):
    params = _params(cfg)
    sd = branch_points(params)
    xs = _parse_range(cfg["grid"], (-sd.z3 - 0.5, sd.z3 + 0.5, 401))
    values = density.rho(params, sd, xs)
    out.csv("density", ["x", "rho"], zip(xs, values))
    out.json("masses", {"masses": list(density.masses(params, sd)), "support": sd.to_dict()})


def cmd_sample(cfg, out):
    params = _params(cfg)
    n = _single_n(cfg, 300)
    ecfg = ensemble.EnsembleConfig.from_model(params, n, cfg["seed"], cfg["draws"])
    eigs = ensemble.sample_all(ecfg, threads=cfg["threads"])
    out.csv("eigenvalues", [f"lambda_{k}" for k in range(n)], eigs)
    hist = ensemble.empirical_density(params, eigs, cfg["bins"])
    out.json("histogram", {"histogram": hist.to_dict()})


def cmd_kernel(cfg, out):
    params = _params(cfg)
    n = _single_n(cfg, 12)
    sd = branch_points(params)
    fp = mop.FiniteSizeParams.from_model(params, n)
    xs = _parse_range(cfg["grid"], (-sd.z3, sd.z3, 9))
    rows = []
    for x in xs:
        for y in xs:
            ke = mop.kernel_Kn(fp, x, y, params)
            rows.append((x, y, ke.kn, ke.hat_kn))
    out.csv("kernel", ["x", "y", "Kn", "hatKn"], rows)


def cmd_limits(cfg, out):
    params = _params(cfg)
    sd = branch_points(params)
    n_list = tuple(cfg["n"] or (12, 24, 48))
    bulk_grid = _parse_list(cfg["grid"]) if cfg["grid"] else asymptotics.BULK_GRID
    reports = {
        "bulk_outer": asymptotics.bulk_limit_check(params, n_list, 0.5 * (sd.z2 + sd.z3), bulk_grid).to_dict(),
        "bulk_center": asymptotics.bulk_limit_check(params, n_list, 0.0, bulk_grid).to_dict(),
        "edge_z3": asymptotics.edge_limit_check(params, n_list, "z3").to_dict(),
        "edge_z1": asymptotics.edge_limit_check(params, n_list, "z1").to_dict(),
        "diagonal": asymptotics.diagonal_density_check(params, n_list).to_dict(),
    }
    out.json("limits", {"reports": reports})


def verification_suites(params: ModelParams, n: int | None = None):
    """Residual suites as a list of (name, passed, details)."""
    sd = branch_points(params)
    suites = []
    masses = density.masses(params, sd)
    expected = (params.t1, params.t, params.t3)
    err = max(abs(m - e) for m, e in zip(masses, expected))
    suites.append(("masses", err <= 1e-8, {"masses": list(masses), "max_error": err}))
    jumps = lambdas.check_jump_relations(params, sd, 20)
    worst = max(r["max_residual"] for r in jumps)
    suites.append(("lambda_jumps", worst <= 1e-8, {"relations": jumps, "max_residual": worst}))
    ordering = []
    for interval in (1, 2, 3):
        for frac in (1e-2, 1e-3):
            rep = lambdas.check_sheet_ordering(params, sd, interval, frac * (sd.z3 - sd.z2))
            ordering.append({k: rep[k] for k in ("interval", "dominant_sheet", "offset", "min_margin", "holds")})
    suites.append(("lambda_ordering", all(o["holds"] for o in ordering), {"checks": ordering}))
    jumps_m = model_rhp.verify_model_jumps(params, sd, 20)
    values, table_err = model_rhp.value_table(params, sd)
    norm = model_rhp.normalization_check(params, sd)
    det_err = model_rhp.det_check(params, sd)
    ok = (max(r["max_residual"] for r in jumps_m.values()) <= 1e-9 and table_err <= 1e-8
          and norm[1e4] <= 1e-3 and norm[1e5] <= 1e-4
          and norm[1e5] <= 0.1 * norm[1e4] * (1 + 1e-9) and det_err <= 1e-8)
    suites.append(("model_rhp", ok, {"jumps": jumps_m, "value_table_error": table_err,
                                     "printed_table_notes": list(model_rhp.PRINTED_TABLE_NOTES),
                                     "normalization": {str(k): v for k, v in norm.items()},
                                     "det_error": det_err}))
    if n is not None:
        suites.append(finite_n_suite(params, n))
    return suites


def finite_n_suite(params: ModelParams, n: int):
    """det Y, jump, ODE, recurrence and (for n <= 12) trace residuals at size n."""
    sd = branch_points(params)
    fp = mop.FiniteSizeParams.from_model(params, n)
    xs = np.linspace(-sd.z3, sd.z3, 10)
    det_res = max(mop.assemble_Y(fp, x, "above").det_residual for x in xs)
    jump_res = max(mop.jump_residual(fp, x) for x in xs)
    ode_res = max(mop.verify_ode(fp, z) for z in (1 + 1j, -0.5 + 0.3j, 2.5 - 0.7j))
    rec_res = max(mop.verify_recurrence(fp, fp.index, z) for z in (2 + 1j, 0.3 - 0.4j))
    details = {"index": list(fp.index), "det_residual": det_res, "jump_residual": jump_res,
               "ode_residual": ode_res, "recurrence_residual": rec_res,
               "weight_convention": "w_j(x) = exp(-n (x^2/2 - a_j x))"}
    ok = det_res <= 1e-9 and jump_res <= 1e-8 and ode_res <= 1e-7 and rec_res <= 1e-7
    if n <= 12:
        tr = mop.trace_check(fp)
        details["trace"] = tr
        ok = ok and tr["relative_error"] <= 1e-6
    return (f"finite_n[{n}]", ok, details)


def cmd_verify(cfg, out):
    params = _params(cfg)
    report = classify_phase(params)
    suites = [("phase", report.phase == Phase.THREE_CUT and report.delta_c > 0, report.to_dict())]
    suites += verification_suites(params)
    for n in cfg["n"] or []:
        suites.append(finite_n_suite(params, n))
    out.json("verify", {"suites": {name: {"passed": ok, **details} for name, ok, details in suites},
                        "all_passed": all(ok for _, ok, _ in suites)})
    failed = [name for name, ok, _ in suites if not ok]
    if failed:
        raise CheckFailed(", ".join(failed))


HANDLERS = {
    "phase": cmd_phase,
    "support": cmd_support,
    "density": cmd_density,
    "sample": cmd_sample,
    "kernel": cmd_kernel,
    "limits": cmd_limits,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=float, help="source eigenvalue magnitude (three cuts need a^2 > 3)")
    common.add_argument("--t", type=float, help="fraction of zero source eigenvalues, 0 < t < 1")
    common.add_argument("--n", type=str, help="matrix size, or comma-separated sizes for limits/verify")
    common.add_argument("--seed", type=int)
    common.add_argument("--draws", type=int)
    common.add_argument("--bins", type=float, help="histogram bin width")
    common.add_argument("--grid", type=str, help="COUNT or LO:HI:COUNT; comma list of u values for limits")
    common.add_argument("--precision", choices=("double", "extended"))
    common.add_argument("--threads", type=int)
    common.add_argument("--out", type=str, help="output directory (default: stdout)")
    common.add_argument("--no-timestamp", action="store_true")
    common.add_argument("--config", type=str, help="key=value configuration file")
    parser = argparse.ArgumentParser(prog="extsource", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        with use_profile(cfg["precision"]):
            HANDLERS[cfg["command"]](cfg, Output(cfg))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except ExtSourceError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
