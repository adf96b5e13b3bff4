"""Config-driven command line front end.

Subcommands:

    solve   --config cfg.json [--out DIR --grid M --tol X --max-steps N --seed N]
            [--sweep GLOB]
    check   --config cfg.json [--out DIR]
    verify  --result result.json --config cfg.json [--out DIR]

Exit codes: 0 success, 1 configuration/domain error, 2 ran but did not
converge (solve) or a requested condition failed (check/verify).  Artifacts
are still written on exit 2.  Result JSON is deterministic for a fixed
config and seed; wall-clock metadata goes to a separate sidecar file that
is excluded from any hashing.

The environment variable CURVEFLOW_LOG in {error, info, debug} controls
logging verbosity.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import anisotropy, curvfun, flow
from .anisotropy import (check_firey, check_guanma, check_position_concavity,
                         SphereFunction)
from .barrier import BarrierPair
from .errors import ConfigError, CurveflowError, MonitorError, StallError
from .profile import profile_from_dict, profile_to_csv, profile_to_dict
from .spaceform import SpaceformConfig
from .verify import bvp_oracle_n1, evaluate_gap, residual

log = logging.getLogger("curveflow")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def _setup_logging():
    level = os.environ.get("CURVEFLOW_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise ConfigError(f"CURVEFLOW_LOG must be one of {sorted(levels)}, got {level!r}")
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# config validation (strict: unknown keys are rejected with their path)
# ---------------------------------------------------------------------------


def _require_keys(obj: dict, allowed: set, required: set, path: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{path}: missing required keys {sorted(missing)}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def build_space(obj, path="problem.space") -> SpaceformConfig:
    _require_keys(obj, {"kind", "annulus"}, {"kind", "annulus"}, path)
    annulus = obj["annulus"]
    if not (isinstance(annulus, list) and len(annulus) == 2):
        raise ConfigError(f"{path}.annulus: expected [a, b]")
    return SpaceformConfig(obj["kind"], (float(annulus[0]), float(annulus[1])))


def build_curvature(obj, n: int, path="problem.curvature"):
    _require_keys(obj, {"family", "k", "l"}, {"family"}, path)
    family = obj["family"]
    if family == "mean":
        return curvfun.mean(n)
    if family == "gauss":
        return curvfun.gauss(n)
    if family == "power_mean":
        if "k" not in obj:
            raise ConfigError(f"{path}: power_mean needs k")
        return curvfun.power_mean(int(obj["k"]), n)
    if family == "quotient":
        if "l" not in obj or "k" not in obj:
            raise ConfigError(f"{path}: quotient needs l and k")
        return curvfun.quotient(int(obj["l"]), int(obj["k"]), n)
    raise ConfigError(f"{path}.family: unknown family {family!r}")


def _build_phi(value, path):
    if isinstance(value, (int, float)):
        return SphereFunction.constant(float(value))
    if isinstance(value, str):
        return SphereFunction.from_expression(value)
    raise ConfigError(f"{path}: phi must be a number or an expression string")


def build_data(obj, n: int, path="problem.data"):
    _require_keys(obj, {"form", "q", "p", "k", "phi", "source"}, {"form"}, path)
    form = obj.get("form")
    if form == "power_law":
        _require_keys(obj, {"form", "q", "phi"}, {"form", "q", "phi"}, path)
        return anisotropy.power_law(float(obj["q"]), _build_phi(obj["phi"], path), n)
    if form == "curvature_measure":
        _require_keys(obj, {"form", "p", "k", "phi"}, {"form", "p", "k", "phi"}, path)
        return anisotropy.curvature_measure(float(obj["p"]), int(obj["k"]),
                                            _build_phi(obj["phi"], path), n)
    if form == "dual_minkowski":
        _require_keys(obj, {"form", "q", "k", "phi"}, {"form", "q", "k", "phi"}, path)
        return anisotropy.dual_minkowski(float(obj["q"]), int(obj["k"]),
                                         _build_phi(obj["phi"], path), n)
    if form == "lp_aleksandrov":
        _require_keys(obj, {"form", "p", "k", "phi"}, {"form", "p", "k", "phi"}, path)
        return anisotropy.lp_aleksandrov(float(obj["p"]), int(obj["k"]),
                                         _build_phi(obj["phi"], path), n)
    if form == "expression":
        _require_keys(obj, {"form", "source"}, {"form", "source"}, path)
        return anisotropy.expression_data(obj["source"], n)
    raise ConfigError(f"{path}.form: unknown form {form!r}")


def build_problem(cfg: dict) -> flow.ProblemSpec:
    _require_keys(cfg.get("problem", {}),
                  {"space", "curvature", "n", "data", "mode", "start_side"},
                  {"space", "curvature", "n", "data", "mode"}, "problem")
    p = cfg["problem"]
    n = int(p["n"])
    space = build_space(p["space"])
    F = build_curvature(p["curvature"], n)
    data = build_data(p["data"], n)
    return flow.make_problem(space, F, data, p["mode"],
                             start_side=p.get("start_side", "lower"))


def build_options(cfg: dict, overrides: dict) -> flow.RunOptions:
    num = cfg.get("numerics", {})
    _require_keys(num, {"grid", "tol", "max_steps", "record_every", "seed",
                        "start_round"}, set(), "numerics")
    opts = flow.RunOptions(
        tol=float(overrides.get("tol") or num.get("tol", 1e-8)),
        max_steps=int(overrides.get("max_steps") or num.get("max_steps", 200_000)),
        grid=int(overrides.get("grid") or num.get("grid", 128)),
        record_every=int(num.get("record_every", 100)),
        seed=int(overrides.get("seed") if overrides.get("seed") is not None
                 else num.get("seed", 0)),
        start=num.get("start_round"),
    )
    return opts


def _out_dir(cfg: dict, overrides: dict) -> Path:
    out = cfg.get("outputs", {})
    _require_keys(out, {"dir", "basename"}, set(), "outputs")
    d = Path(overrides.get("out") or out.get("dir", "out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _basename(cfg: dict) -> str:
    return cfg.get("outputs", {}).get("basename", "result")


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _history_csv(history: dict) -> str:
    cols = ["step", "t", "dt", "residual", "speed_min", "speed_max",
            "min_radius", "max_radius", "value_min", "value_max", "trace",
            "pinch"]
    lines = [",".join(cols)]
    for i in range(len(history["step"])):
        lines.append(",".join(repr(history[c][i]) for c in cols))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(config_path: str, overrides: dict) -> int:
    cfg = load_config(config_path)
    _require_keys(cfg, {"problem", "numerics", "outputs", "verify"}, {"problem"},
                  "config")
    problem = build_problem(cfg)
    options = build_options(cfg, overrides)
    out = _out_dir(cfg, overrides)
    base = _basename(cfg)

    t0 = time.monotonic()
    try:
        result = flow.run(problem, options)
    except (StallError, MonitorError) as exc:
        # ran but failed: write what we know and report non-convergence
        payload = {
            "config": cfg,
            "converged": False,
            "stop_reason": f"{type(exc).__name__}: {exc}",
            "history": getattr(exc, "history", None),
        }
        (out / f"{base}.json").write_text(_dump_json(payload))
        print(f"solve: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    wall = time.monotonic() - t0

    payload = result.to_dict(config_echo=cfg)
    (out / f"{base}.json").write_text(_dump_json(payload))
    (out / f"{base}_profile.csv").write_text(profile_to_csv(result.profile))
    (out / f"{base}_history.csv").write_text(_history_csv(result.history))
    # timestamps live in a sidecar so the result JSON stays byte-reproducible
    (out / f"{base}_meta.json").write_text(_dump_json({
        "wall_seconds": wall,
        "finished_at_unix": time.time(),
    }))
    if not result.converged:
        print(f"solve: not converged ({result.stop_reason})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


_CHECK_KEYS = {"inverse_concave", "dual_boundary", "lambda_eps",
               "position_concavity", "guanma", "firey"}


def cmd_check(config_path: str, overrides: dict) -> int:
    cfg = load_config(config_path)
    _require_keys(cfg, {"checks", "outputs"}, {"checks"}, "config")
    checks = cfg["checks"]
    _require_keys(checks, _CHECK_KEYS, set(), "checks")
    out = _out_dir(cfg, overrides)
    report = {}
    all_ok = True

    def record(name, ok, payload):
        nonlocal all_ok
        report[name] = {"pass": bool(ok), **payload}
        all_ok &= bool(ok)

    if "inverse_concave" in checks:
        blk = checks["inverse_concave"]
        _require_keys(blk, {"curvature", "n", "pairs", "seed"}, {"curvature", "n"},
                      "checks.inverse_concave")
        F = build_curvature(blk["curvature"], int(blk["n"]), "checks.inverse_concave.curvature")
        v = curvfun.check_inverse_concave(F, blk.get("pairs", 10_000),
                                          seed=blk.get("seed", 0))
        record("inverse_concave", v.holds, {"margin": v.margin, "detail": v.detail})

    if "dual_boundary" in checks:
        blk = checks["dual_boundary"]
        _require_keys(blk, {"curvature", "n", "expect"}, {"curvature", "n"},
                      "checks.dual_boundary")
        F = build_curvature(blk["curvature"], int(blk["n"]), "checks.dual_boundary.curvature")
        v = curvfun.check_dual_boundary(F)
        expect = bool(blk.get("expect", True))
        record("dual_boundary", v.holds == expect,
               {"vanishes": v.holds, "expected": expect, "margin": v.margin})

    if "lambda_eps" in checks:
        blk = checks["lambda_eps"]
        _require_keys(blk, {"curvature", "n", "eps", "samples", "seed"},
                      {"curvature", "n", "eps"}, "checks.lambda_eps")
        F = build_curvature(blk["curvature"], int(blk["n"]), "checks.lambda_eps.curvature")
        rep = curvfun.check_lambda_eps(F, float(blk["eps"]),
                                       sample_count=blk.get("samples", 10_000),
                                       seed=blk.get("seed", 0))
        record("lambda_eps", rep.classified and rep.holds, {
            "classified": rep.classified, "gamma": rep.gamma,
            "fitted_C": rep.fitted_C, "theoretical_C": rep.theoretical_C,
            "detail": rep.detail,
        })

    if "position_concavity" in checks:
        blk = checks["position_concavity"]
        _require_keys(blk, {"space", "data", "n"}, {"space", "data", "n"},
                      "checks.position_concavity")
        space = build_space(blk["space"], "checks.position_concavity.space")
        data = build_data(blk["data"], int(blk["n"]), "checks.position_concavity.data")
        v = check_position_concavity(data, space)
        record("position_concavity", v.holds, {"margin": v.margin, "detail": v.detail})

    if "guanma" in checks:
        blk = checks["guanma"]
        _require_keys(blk, {"phi", "q", "variant", "grid", "expect"},
                      {"phi", "q"}, "checks.guanma")
        v = check_guanma(_build_phi(blk["phi"], "checks.guanma.phi"),
                         float(blk["q"]), blk.get("variant", "i"),
                         grid=blk.get("grid", 256))
        expect = bool(blk.get("expect", True))
        record("guanma", v.holds == expect,
               {"holds": v.holds, "expected": expect, "margin": v.margin})

    if "firey" in checks:
        blk = checks["firey"]
        _require_keys(blk, {"psi", "n", "k", "grid"}, {"psi", "n", "k"},
                      "checks.firey")
        rep = check_firey(_build_phi(blk["psi"], "checks.firey.psi"),
                          int(blk["n"]), int(blk["k"]), grid=blk.get("grid", 256))
        record("firey", rep.all_hold(), {
            "finite_limits": rep.finite_limits.holds,
            "integral_positive": rep.integral_positive.holds,
            "indicator_positive": rep.indicator_positive.holds,
            "indicator_margin": rep.indicator_positive.margin,
        })

    payload = {"config": cfg, "checks": report}
    (out / "check_report.json").write_text(_dump_json(payload))
    for name, entry in report.items():
        print(f"check {name}: {'PASS' if entry['pass'] else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_NOT_CONVERGED


def cmd_verify(result_path: str, config_path: str, overrides: dict) -> int:
    cfg = load_config(config_path)
    _require_keys(cfg, {"problem", "numerics", "outputs", "verify"}, {"problem"},
                  "config")
    vcfg = cfg.get("verify", {})
    _require_keys(vcfg, {"residual_tol", "oracle_gap_tol", "oracle_grid",
                         "oracle_init"}, set(), "verify")
    residual_tol = float(vcfg.get("residual_tol", 1e-6))
    gap_tol = float(vcfg.get("oracle_gap_tol", 1e-5))

    try:
        with open(result_path) as fh:
            result_obj = json.load(fh)
        prof = profile_from_dict(result_obj["final_profile"])
    except OSError as exc:
        raise ConfigError(f"cannot read result {result_path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"result file {result_path} is corrupted: {exc}") from exc

    problem = build_problem(cfg)
    sup, _ = residual(prof, problem)
    report = {"config": cfg, "residual_sup": sup, "residual_tol": residual_tol,
              "oracle_gap": None}
    ok = sup < residual_tol
    if problem.parametrization == "support" and problem.n == 1:
        oracle = bvp_oracle_n1(problem, init=vcfg.get("oracle_init"),
                               M=int(vcfg.get("oracle_grid", prof.M)))
        gap = evaluate_gap(prof, oracle)
        report["oracle_gap"] = gap
        report["oracle_gap_tol"] = gap_tol
        ok = ok and gap < gap_tol

    out = _out_dir(cfg, overrides)
    (out / "verify_report.json").write_text(_dump_json(report))
    print(f"verify: residual {sup:.3e}" + (
        f", oracle gap {report['oracle_gap']:.3e}" if report["oracle_gap"] is not None
        else ""))
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curveflow",
        description="Curvature-flow solver for prescribed-curvature equations. "
                    "Expression grammar for data: numbers, theta, s, absx, "
                    "+ - * / ^, sin cos tan cosh sinh exp log, parentheses; "
                    "angles in radians.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="integrate a flow to its steady state")
    solve.add_argument("--config", help="path to a run configuration JSON")
    solve.add_argument("--sweep", help="glob of configs to run sequentially")
    solve.add_argument("--out", help="output directory override")
    solve.add_argument("--grid", type=int, help="grid size override")
    solve.add_argument("--tol", type=float, help="tolerance override")
    solve.add_argument("--max-steps", type=int, dest="max_steps")
    solve.add_argument("--seed", type=int)

    check = sub.add_parser("check", help="run structural/admissibility checks")
    check.add_argument("--config", required=True)
    check.add_argument("--out")

    verify = sub.add_parser("verify", help="verify a solve result against oracles")
    verify.add_argument("--result", required=True)
    verify.add_argument("--config", required=True)
    verify.add_argument("--out")

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _setup_logging()
        if args.command == "solve":
            overrides = {"out": args.out, "grid": args.grid, "tol": args.tol,
                         "max_steps": args.max_steps, "seed": args.seed}
            if args.sweep:
                paths = sorted(glob.glob(args.sweep))
                if not paths:
                    raise ConfigError(f"--sweep matched no configs: {args.sweep}")
                codes = [cmd_solve(p, overrides) for p in paths]
                return max(codes)
            if not args.config:
                raise ConfigError("solve needs --config or --sweep")
            return cmd_solve(args.config, overrides)
        if args.command == "check":
            return cmd_check(args.config, {"out": args.out})
        return cmd_verify(args.result, args.config, {"out": args.out})
    except CurveflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
