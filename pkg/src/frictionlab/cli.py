"""Command line entry point: ``frictionlab <command> [-c CONFIG] [--out DIR]``.

Every command writes plot-ready CSV files plus ``manifest.json`` holding the
config hash, file checksums, timestamps and key scalars.  CSV content never
depends on wall-clock time, so identical configs give identical files.
"""
from __future__ import annotations

import argparse
import copy
import itertools
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, contraction, field_sim, io, kernels, steady_state, volterra
from .modes import mode_quadrature
from .potentials import PotentialError, build_potential

SCHEMA_VERSION = 1

DEFAULT_CONFIG = {
    "schema": SCHEMA_VERSION,
    "scenario": "reference",
    "potential": {"family": "gaussian", "amplitude": 1.0, "width": 1.0, "kappa": 1.0, "mass": 1.0},
    "beta0": {"kind": "zero"},
    "X0": [0.0, 0.0, 0.0],
    "P0": [0.0, 0.0, 0.01],
    "external": {"kind": "none"},
    "grid": {"h": 0.01, "t_max": 100.0},
    "modes": {"n_radial": None, "angular": ["lebedev", 11], "k_max": None},
    "analysis": {"window": None},
    "epsilon": 1e-2,
    "record_every": 10,
    "drag": {"speeds": [0.0125, 0.025, 0.05, 0.1, 0.2, 0.4], "forces": [1e-3, 2e-3]},
    "omega": {"deltas": None, "tol": 1e-8},
}

_PARAM_LABEL = {"mass": "potential.mass (M0)", "kappa": "potential.kappa",
                "width": "potential.width", "amplitude": "potential.amplitude"}


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ExperimentConfig:
    raw: dict
    spec: object
    beta0: field_sim.InitialField
    X0: np.ndarray
    P0: np.ndarray
    external: field_sim.ExternalPotential
    h: float
    t_max: float
    n_steps: int

    @property
    def hash(self):
        return io.config_hash(self.raw)

    def quadrature(self):
        m = self.raw["modes"]
        ang = tuple(m.get("angular") or ("lebedev", 11))
        return mode_quadrature(self.spec, n_radial=m.get("n_radial"), angular=ang,
                               k_max=m.get("k_max"), t_max=self.t_max)

    @property
    def window(self):
        w = self.raw["analysis"].get("window")
        return None if w is None else tuple(float(x) for x in w)


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _vec3(raw, name):
    v = raw.get(name)
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(name, "must be a list of 3 numbers") from None
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(name, "must be a finite 3-vector")
    return arr


def validate_config(raw: dict, h=None, t_max=None) -> ExperimentConfig:
    """Merge defaults, apply overrides and validate every sub-config."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    raw = _merge(DEFAULT_CONFIG, raw)
    if raw.get("schema") != SCHEMA_VERSION:
        raise ConfigError("schema", f"unsupported schema {raw.get('schema')!r}, expected {SCHEMA_VERSION}")
    if h is not None:
        raw["grid"]["h"] = float(h)
    if t_max is not None:
        raw["grid"]["t_max"] = float(t_max)
    pot = raw["potential"]
    try:
        spec = build_potential(pot.get("family"), float(pot.get("amplitude")), float(pot.get("width")),
                               float(pot.get("kappa")), float(pot.get("mass")))
    except PotentialError as exc:
        name = str(exc).split(" ", 1)[0]
        raise ConfigError(_PARAM_LABEL.get(name, "potential." + name), str(exc)) from None
    except (TypeError, ValueError):
        raise ConfigError("potential", "amplitude, width, kappa and mass must be numbers") from None
    try:
        beta0 = field_sim.InitialField.from_dict(raw["beta0"])
    except (field_sim.FieldConfigError, TypeError) as exc:
        raise ConfigError("beta0", str(exc)) from None
    try:
        external = field_sim.ExternalPotential.from_dict(raw["external"])
    except (field_sim.FieldConfigError, TypeError) as exc:
        raise ConfigError("external", str(exc)) from None
    X0, P0 = _vec3(raw, "X0"), _vec3(raw, "P0")
    g = raw["grid"]
    for key in ("h", "t_max"):
        try:
            ok = float(g[key]) > 0
        except (KeyError, TypeError, ValueError):
            ok = False
        if not ok:
            raise ConfigError("grid." + key, "must be a positive number")
    try:
        hh, tt = float(g["h"]), float(g["t_max"])
        n = kernels.grid_steps(hh, tt)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("grid", str(exc) or "h and t_max required") from None
    ang = raw["modes"].get("angular")
    if ang is not None and (not isinstance(ang, (list, tuple)) or ang[0] not in ("lebedev", "product")):
        raise ConfigError("modes.angular", "must be ['lebedev', order] or ['product', n_theta, n_phi]")
    w = raw["analysis"].get("window")
    if w is not None and (len(w) != 2 or not float(w[0]) < float(w[1])):
        raise ConfigError("analysis.window", "must be [t_a, t_b] with t_a < t_b")
    return ExperimentConfig(raw, spec, beta0, X0, P0, external, hh, tt, n)


def load_config(path, h=None, t_max=None) -> ExperimentConfig:
    if path is None:
        return validate_config({}, h, t_max)
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return validate_config(raw, h, t_max)


# ------------------------------------------------------------ commands

def _fit_summary(t, y, window):
    try:
        fr = analysis.fit_power_law(t, y, window)
    except analysis.FitError as exc:
        return {"error": str(exc)}
    d, ok = analysis.delta_from_exponent(fr.exponent)
    out = fr.to_dict()
    out.update(delta_fit=d, delta_positive=ok)
    return out


def cmd_kernel(cfg: ExperimentConfig, out: Path):
    table = kernels.friction_kernel(cfg.spec, cfg.h, cfg.t_max, validate_tail=False)
    kernels.write_kernel_csv(table, out / "kernel.csv")
    return ["kernel.csv"], {"Z": table.Z, "c_f": table.c_f, "t_switch": table.t_switch,
                            "tail_residual": table.tail_residual, "quad_error": table.quad_error}


def cmd_resolvent(cfg, out):
    table = kernels.friction_kernel(cfg.spec, cfg.h, cfg.t_max, validate_tail=False)
    kt = volterra.solve_K(table)
    io.write_csv(out / "k_table.csv", *kt.columns())
    window = cfg.window or analysis.final_decade(kt.t)
    scalars = {"c_K": kt.c_K, "C_K": kt.C_K, "T_renorm": kt.T_renorm,
               "tauberian_coefficient": volterra.tauberian_coefficient(cfg.spec),
               "K_fit": _fit_summary(kt.t, kt.K, window)}
    try:
        scalars["tail_coefficient"] = analysis.tail_coefficient(kt.t, kt.K, -0.5, window)
    except analysis.FitError as exc:
        scalars["tail_coefficient"] = {"error": str(exc)}
    try:
        scalars["Kdot_fit"] = volterra.verify_kdot_decay(kt).to_dict()
    except analysis.FitError as exc:
        scalars["Kdot_fit"] = {"error": str(exc)}
    return ["k_table.csv"], scalars


def cmd_reduced(cfg, out):
    quad = cfg.quadrature()
    sol = volterra.solve_reduced_P(cfg.spec, cfg.beta0, cfg.X0, cfg.P0, cfg.h, cfg.t_max, quad)
    kt = volterra.solve_K(volterra.kernel_table_from_rule(cfg.spec, quad.radial, cfg.h, cfg.t_max))
    ff = np.full(sol.t.size, np.nan)
    scalars = {"T_renorm": kt.T_renorm}
    if np.isfinite(kt.T_renorm) and kt.T_renorm < cfg.t_max:
        rep = volterra.eval_finalform_residual(sol, kt)
        ff[sol.t.size - rep.t.size:] = rep.residual
        scalars["finalform_max_residual"] = rep.max_residual
    io.write_csv(out / "reduced.csv", *sol.columns(ff))
    scalars["P_fit"] = _fit_summary(sol.t, np.linalg.norm(sol.P, axis=1),
                                    cfg.window or analysis.final_decade(sol.t))
    return ["reduced.csv"], scalars


def cmd_simulate(cfg, out):
    quad = cfg.quadrature()
    every = int(cfg.raw.get("record_every") or 1)
    rec = field_sim.simulate(cfg.spec, cfg.beta0, cfg.X0, cfg.P0, quad, cfg.h, cfg.t_max,
                             external=cfg.external, record_every=every, epsilon=cfg.raw.get("epsilon"))
    io.write_csv(out / "trajectory.csv", *rec.columns())
    E0 = rec.energy[0]
    scalars = {"energy_drift": float(np.max(np.abs(rec.energy - E0)) / max(abs(E0), 1.0)),
               "P_fit": _fit_summary(rec.t, rec.speed, cfg.window or analysis.final_decade(rec.t))}
    fit = scalars["P_fit"]
    scalars["delta_fit"] = fit.get("delta_fit", float("nan"))
    if cfg.external.kind == "constant_force":
        value, spread, ok = field_sim.plateau(rec.t, rec.P @ (np.asarray(cfg.external.force)
                                                             / np.linalg.norm(cfg.external.force)))
        scalars.update(terminal_velocity=value / cfg.spec.mass, plateau_spread=spread, plateau=ok)
        try:
            vT = steady_state.terminal_velocity(cfg.spec, cfg.external.force)
            scalars["golden_rule_velocity"] = float(np.linalg.norm(vT))
        except steady_state.NoRootError as exc:
            scalars["golden_rule_velocity"] = {"error": str(exc)}
    return ["trajectory.csv"], scalars, rec.warnings


def cmd_drag(cfg, out):
    d = cfg.raw["drag"]
    io.write_csv(out / "drag_curve.csv", *steady_state.drag_curve(cfg.spec, d["speeds"]))
    forces = np.asarray(d.get("forces") or [], dtype=float)
    vt = [float(np.linalg.norm(steady_state.terminal_velocity(cfg.spec, [0.0, 0.0, F]))) for F in forces]
    io.write_csv(out / "terminal_velocity.csv", ["F", "v_terminal"], [forces, np.asarray(vt)])
    return ["drag_curve.csv", "terminal_velocity.csv"], {
        "drag_coefficient": steady_state.drag_coefficient(cfg.spec),
        "decel_constant": steady_state.decel_constant(cfg.spec),
        "terminal_velocity": dict(zip([repr(float(F)) for F in forces], vt))}


def cmd_omega(cfg, out):
    o = cfg.raw["omega"]
    res = contraction.omega_table(o.get("deltas"), o.get("tol", 1e-8))
    io.write_csv(out / "omega.csv", *res.columns())
    return ["omega.csv"], res.summary()


COMMANDS = {"kernel": cmd_kernel, "resolvent": cmd_resolvent, "reduced": cmd_reduced,
            "simulate": cmd_simulate, "drag": cmd_drag, "omega": cmd_omega}


def execute(command, cfg: ExperimentConfig, out) -> dict:
    """Run one command, write its files and manifest; returns the manifest."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    result = COMMANDS[command](cfg, out)
    files, scalars = result[0], result[1]
    warnings = list(result[2]) if len(result) > 2 else []
    manifest = {
        "command": command,
        "config_hash": cfg.hash,
        "config": cfg.raw,
        "code_version": __version__,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "files": {f: io.sha256(out / f) for f in files},
        "scalars": scalars,
        "warnings": warnings,
    }
    io.write_json(out / "manifest.json", manifest)
    return manifest


def cmd_fit(args):
    data = io.read_csv(args.csv)
    if args.column not in data:
        raise ConfigError("column", f"{args.column!r} not in {sorted(data)}")
    t = data[args.time]
    y = np.abs(data[args.column])
    fr = analysis.fit_power_law(t, y, tuple(args.window) if args.window else None)
    out = Path(args.out or Path(args.csv).parent)
    res = fr.to_dict()
    res["delta_fit"], res["delta_positive"] = analysis.delta_from_exponent(fr.exponent)
    io.write_json(out / "fit.json", {"source": str(args.csv), "sha256": io.sha256(args.csv),
                                     "column": args.column, "fit": res})
    print(f"exponent {fr.exponent:.6f} coefficient {fr.coefficient:.6e} on [{fr.window[0]:g}, {fr.window[1]:g}]")
    return 0


# --------------------------------------------------------------- sweep

def _set_path(d, path, value):
    keys = path.split(".")
    cur = d
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
    cur[keys[-1]] = value


def parse_axis(text):
    """``path=v1,v2,...`` with JSON values (numbers, lists)."""
    if "=" not in text:
        raise ConfigError("axis", f"expected path=v1,v2,... got {text!r}")
    path, vals = text.split("=", 1)
    items = [v for v in vals.split(";")] if ";" in vals else vals.split(",")
    values = [json.loads(v) for v in items if v.strip()]
    if not values:
        raise ConfigError("axis", "empty sweep")
    return path.strip(), values


def sweep_configs(template: dict, axes):
    if not axes:
        raise ConfigError("axis", "empty sweep")
    names = [a[0] for a in axes]
    runs = []
    for combo in itertools.product(*[a[1] for a in axes]):
        raw = copy.deepcopy(template)
        for name, value in zip(names, combo):
            _set_path(raw, name, value)
        runs.append((dict(zip(names, combo)), raw))
    return runs


def _sweep_worker(job):
    command, raw, out, h, t_max = job
    try:
        cfg = validate_config(raw, h, t_max)
        man = execute(command, cfg, out)
        return {"ok": True, "scalars": man["scalars"]}
    except Exception as exc:    # recorded per row; the sweep continues
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}


def _scalar(s, key):
    v = s.get(key, float("nan"))
    return v if isinstance(v, (int, float)) else float("nan")


def run_sweep(command, template, axes, out, workers=1, h=None, t_max=None):
    runs = sweep_configs(template, axes)
    out = Path(out)
    jobs = [(command, raw, out / f"run_{i:03d}", h, t_max) for i, (_, raw) in enumerate(runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    names = [a[0] for a in axes]
    cols = {n: [] for n in names}
    extra = {k: [] for k in ("delta_fit", "terminal_velocity", "energy_drift")}
    status = []
    for (params, _), res in zip(runs, results):
        for n in names:
            v = params[n]
            cols[n].append(json.dumps(v) if not isinstance(v, (int, float)) else v)
        s = res.get("scalars", {})
        for k in extra:
            extra[k].append(_scalar(s, k))
        status.append("ok" if res["ok"] else res["error"].replace(",", ";"))
    header = ["run"] + names + list(extra) + ["status"]
    columns = [[f"run_{i:03d}" for i in range(len(runs))]] + [cols[n] for n in names] \
        + [extra[k] for k in extra] + [status]
    io.write_csv(out / "sweep.csv", header, columns)
    io.write_json(out / "manifest.json", {
        "command": "sweep", "inner_command": command, "config_hash": io.config_hash(template),
        "code_version": __version__, "files": {"sweep.csv": io.sha256(out / "sweep.csv")},
        "runs": len(runs), "failures": sum(not r["ok"] for r in results),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z")})
    return results


# ---------------------------------------------------------------- main

def _workers(value):
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("FRICTIONLAB_WORKERS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError("FRICTIONLAB_WORKERS", f"not an integer: {env!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="frictionlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-c", "--config", help="JSON config (defaults used when omitted)")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--h", type=float, default=None, help="override grid.h")
        sp.add_argument("--tmax", type=float, default=None, help="override grid.t_max")

    helps = {"kernel": "tabulate the friction kernel f", "resolvent": "solve for K and fit its decay",
             "reduced": "solve the reduced momentum equation", "simulate": "direct particle-field run",
             "drag": "golden-rule drag curve and terminal velocities",
             "omega": "contraction integrals and delta*"}
    for name, text in helps.items():
        common(sub.add_parser(name, help=text))
    fp = sub.add_parser("fit", help="re-fit a column of an existing CSV")
    fp.add_argument("csv")
    fp.add_argument("--column", default="P_abs")
    fp.add_argument("--time", default="t")
    fp.add_argument("--window", type=float, nargs=2, default=None)
    fp.add_argument("--out", default=None)
    sp = sub.add_parser("sweep", help="cartesian parameter sweep of another command")
    common(sp)
    sp.add_argument("--command", dest="inner", default="simulate", choices=sorted(COMMANDS))
    sp.add_argument("--axis", action="append", default=[],
                    help="path=v1,v2,... (JSON values; separate list values with ';')")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            return cmd_fit(args)
        workers = _workers(args.workers)
        out = Path(args.out or Path("runs") / args.command)
        if args.command == "sweep":
            axes = [parse_axis(a) for a in args.axis]
            template = json.loads(Path(args.config).read_text()) if args.config else {}
            validate_config(template, args.h, args.tmax)
            results = run_sweep(args.inner, template, axes, out, workers, args.h, args.tmax)
            failed = sum(not r["ok"] for r in results)
            print(f"sweep: {len(results) - failed}/{len(results)} runs succeeded -> {out / 'sweep.csv'}")
            return 1 if failed == len(results) else 0
        cfg = load_config(args.config, args.h, args.tmax)
        man = execute(args.command, cfg, out)
        print(f"{args.command}: wrote {', '.join(man['files'])} to {out}")
        return 0
    except ConfigError as exc:
        print(f"frictionlab: invalid config: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, analysis.FitError) as exc:
        print(f"frictionlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
