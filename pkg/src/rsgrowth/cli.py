"""Batch command-line front end.

Subcommands: solve, euler, drift, simulate, verify, report.  Configs are
JSON; tabular artifacts are CSV (comma, dot decimal, LF, header row);
reports are JSON.  Exit codes: 0 success, 1 failed verification, 2
configuration error.  All error paths emit a machine-readable JSON
document on stderr.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .bellman import Grid, SolveResult, solve, write_solution_csv
from .dynamics import (drift_check, simulate, stationary_estimate,
                       write_ecdf_csv, write_trace_csv)
from .errors import ConvergenceError, SpecError
from .euler import envelope_check, euler_report, write_euler_csv
from .model import (ModelSpec, default_x_max, make_preset, model_from_dict,
                    model_to_dict, validate)
from .verify import run_all

__all__ = ["RunConfig", "main"]

_CONFIG_DEFAULTS: Dict[str, Any] = {
    "grid": {"points": 400, "spacing": "uniform", "x_max": None},
    "solver": {"tol": 1e-8, "max_iter": 20000},
    "simulate": {"chains": 4, "steps": 200_000, "burn_in": 10_000,
                 "seeds": None, "x0": None},
    "output_dir": None,
}


@dataclass
class RunConfig:
    model: ModelSpec
    grid: Dict[str, Any]
    solver: Dict[str, Any]
    simulate: Dict[str, Any]
    output_dir: str
    doc: Dict[str, Any] = field(default_factory=dict)  # resolved raw document

    def make_grid(self) -> Grid:
        x_max = self.grid.get("x_max")
        if x_max is None:
            x_max = default_x_max(self.model)
        points = int(self.grid.get("points", 400))
        spacing = self.grid.get("spacing", "uniform")
        if spacing == "uniform":
            return Grid.uniform(points, float(x_max))
        if spacing == "log":
            return Grid.loguniform(points, float(x_max))
        raise SpecError("grid_invalid", f"unknown grid spacing {spacing!r}")

    def seeds(self) -> List[int]:
        seeds = self.simulate.get("seeds")
        chains = int(self.simulate.get("chains", 4))
        if seeds is None:
            seeds = list(range(101, 101 + chains))
        if len(seeds) != chains:
            raise SpecError("bad_value",
                            f"{chains} chains need {chains} seeds, got {len(seeds)}")
        return [int(s) for s in seeds]


def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _apply_override(doc: Dict[str, Any], dotted: str, value) -> None:
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def build_config(args) -> RunConfig:
    """Resolve preset/config file plus --set overrides into a RunConfig."""
    doc = copy.deepcopy(_CONFIG_DEFAULTS)
    if args.config is not None:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as e:
            raise SpecError("config_unreadable", f"cannot read config: {e}")
        except json.JSONDecodeError as e:
            raise SpecError("config_invalid", f"config is not valid JSON: {e}")
        if not isinstance(loaded, dict):
            raise SpecError("config_invalid", "config root must be a JSON object")
        for k, v in loaded.items():
            if isinstance(v, dict) and isinstance(doc.get(k), dict):
                doc[k].update(v)
            else:
                doc[k] = v
    if args.preset is not None:
        if "model" in doc:
            raise SpecError("config_invalid",
                            "--preset conflicts with a config that defines a model")
        doc["model"] = model_to_dict(make_preset(args.preset))
    if "model" not in doc:
        raise SpecError("config_invalid", "no model: pass --preset or a config file")
    for item in args.set or []:
        if "=" not in item:
            raise SpecError("config_invalid", f"--set needs key=value, got {item!r}")
        key, raw = item.split("=", 1)
        _apply_override(doc, key.strip(), _parse_set_value(raw))
    out = (args.out or doc.get("output_dir") or os.environ.get("RSGROWTH_OUT")
           or os.path.join(os.getcwd(), "rsgrowth-out"))
    model = model_from_dict(doc["model"])
    cfg = RunConfig(model=model, grid=doc["grid"], solver=doc["solver"],
                    simulate=doc["simulate"], output_dir=str(out), doc=doc)
    if args.seed is not None:
        chains = int(cfg.simulate.get("chains", 4))
        cfg.simulate["seeds"] = list(range(args.seed, args.seed + chains))
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _solve(cfg: RunConfig) -> SolveResult:
    grid = cfg.make_grid()
    report = validate(cfg.model, grid)
    if not report.all_pass:
        failed = [c.name for c in report.checks if not c.passed]
        raise SpecError("assumptions_violated",
                        f"model assumptions failed: {', '.join(failed)}")
    return solve(cfg.model, grid, tol=float(cfg.solver.get("tol", 1e-8)),
                 max_iter=int(cfg.solver.get("max_iter", 20000)))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    r = _solve(cfg)
    write_solution_csv(r, os.path.join(cfg.output_dir, "solution.csv"))
    _write_json(os.path.join(cfg.output_dir, "solve.json"), {
        "iterations": r.iterations,
        "final_residual": r.final_residual,
        "contraction_modulus": r.contraction_modulus,
        "grid_points": r.value.grid.m,
        "x_max": r.value.grid.x_max,
        "tol": float(cfg.solver.get("tol", 1e-8)),
    })
    print(f"solved in {r.iterations} iterations, residual {r.final_residual:.3e}")
    return 0


def cmd_euler(cfg: RunConfig) -> int:
    r = _solve(cfg)
    rep = euler_report(r, cfg.model)
    env = envelope_check(r, cfg.model)
    write_euler_csv(rep, os.path.join(cfg.output_dir, "euler.csv"))
    _write_json(os.path.join(cfg.output_dir, "euler.json"), {
        "euler": rep.summary(),
        "envelope_max_rel_error": env.max_rel_error,
        "skipped": [[x, why] for x, why in rep.skipped],
    })
    print(f"euler residual median {rep.median_residual:.3e} "
          f"max {rep.max_residual:.3e} over window {rep.window}")
    return 0


def cmd_drift(cfg: RunConfig) -> int:
    r = _solve(cfg)
    rep = drift_check(r, cfg.model)
    _write_json(os.path.join(cfg.output_dir, "drift.json"), rep.to_json())
    print(f"drift verdict: {rep.verdict} "
          f"(lambda1 {rep.lambda1:.4f}, kappa1 {rep.kappa1:.4g})")
    return 0 if rep.verdict == "pass" else 1


def cmd_simulate(cfg: RunConfig) -> int:
    r = _solve(cfg)
    seeds = cfg.seeds()
    steps = int(cfg.simulate.get("steps", 200_000))
    burn_in = int(cfg.simulate.get("burn_in", 10_000))
    x0 = cfg.simulate.get("x0")
    x0 = 0.5 * r.value.grid.x_max if x0 is None else float(x0)
    for s in seeds:
        tr = simulate(r, cfg.model, x0, steps, s, burn_in=burn_in)
        write_trace_csv(tr, os.path.join(cfg.output_dir, f"trace_{s}.csv"))
    drift = drift_check(r, cfg.model)
    st = stationary_estimate(r, cfg.model, len(seeds), steps, burn_in,
                             seeds=seeds, x0=x0, drift=drift)
    write_ecdf_csv(st, os.path.join(cfg.output_dir, "ecdf.csv"))
    _write_json(os.path.join(cfg.output_dir, "stationary.json"), {
        "seeds": st.seeds, "n_samples": st.n_samples,
        "ks_half": st.ks_half, "p_near_zero": st.p_near_zero,
        "warning": st.warning,
    })
    print(f"simulated {len(seeds)} chains x {steps} steps; "
          f"KS(half,half) {st.ks_half:.4f}, P(x near 0) {st.p_near_zero:.2e}")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results, ok = run_all(progress=lambda g: print(
        f"gate {g.number:2d} {'PASS' if g.passed else 'FAIL'}  {g.name}: {g.detail}"))
    _write_json(os.path.join(cfg.output_dir, "verify.json"), {
        "all_pass": ok,
        "gates": [{"number": g.number, "name": g.name, "passed": g.passed,
                   "detail": g.detail} for g in results],
    })
    print("verify:", "all gates pass" if ok else "FAILED")
    return 0 if ok else 1


def cmd_report(cfg: RunConfig) -> int:
    names = ["solve.json", "euler.json", "drift.json", "stationary.json",
             "verify.json"]
    collected = {}
    for name in names:
        path = os.path.join(cfg.output_dir, name)
        if os.path.exists(path):
            with open(path) as fh:
                collected[name[:-5]] = json.load(fh)
    if not collected:
        raise SpecError("no_artifacts",
                        f"no prior artifacts found in {cfg.output_dir}")
    _write_json(os.path.join(cfg.output_dir, "report.json"), collected)
    print(f"report.json collates: {', '.join(sorted(collected))}")
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "euler": cmd_euler,
    "drift": cmd_drift,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "report": cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsgrowth",
        description="Risk-sensitive stochastic growth model solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "solve the model; write value/policy CSV + JSON"),
        ("euler", "first-order-condition residual diagnostics"),
        ("drift", "Lyapunov drift verification"),
        ("simulate", "simulate controlled paths and estimate the stationary law"),
        ("verify", "run the full acceptance gate suite"),
        ("report", "collate prior artifacts into one JSON summary"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration file")
        p.add_argument("--preset", help="built-in model preset "
                       "(multiplicative or additive)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="dotted-path config override, e.g. model.gamma=2")
        p.add_argument("--out", help="output directory "
                       "(fallback: config, then $RSGROWTH_OUT)")
        p.add_argument("--threads", type=int, default=0,
                       help="worker threads (0 = auto)")
        p.add_argument("--seed", type=int, help="base seed for simulation chains")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads and args.threads > 0:
        try:
            import numba
            numba.set_num_threads(args.threads)
        except Exception:
            pass
    try:
        cfg = build_config(args)
        return _COMMANDS[args.command](cfg)
    except SpecError as e:
        json.dump(e.to_json(), sys.stderr)
        sys.stderr.write("\n")
        return 2
    except ConvergenceError as e:
        json.dump({"error": "no_convergence", "message": str(e),
                   "last_residual": e.last_residual}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
