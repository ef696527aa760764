"""Command-line front end: ``plan``, ``mc``, ``zstar`` and ``print-defaults``.

Exit codes: 0 success, 1 usage or input error, 2 no agent could be aided.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .kinematics import AgentSpec, CnaSpec, Vec2, propagate_track
from .montecarlo import PLANNERS, RNG_ALGORITHM, STRATEGIES, McConfig, McReport, run_experiment
from .planner import DEFAULT_BUDGET, BudgetExceeded, PlanResult, exhaustive_plan, greedy_plan, parse_weights
from .simulator import MissionResult, Scenario, run_mission
from .uncertainty import NoiseParams, agent_cost, max_cost, optimal_aid_step, optimal_aid_time

log = logging.getLogger("cnaplan")

WORKERS_ENV = "CNAPLAN_WORKERS"

DEFAULTS = {
    "M": 60,
    "T_max": 2000.0,
    "dt": 1.0,
    "v_c": 1.0,
    "v_a": 0.5,
    "nu_w": 1.0,
    "nu_c": 0.1,
    "nu_y": 10.0,
    "nu_G": 10.0,
}


class InputError(ValueError):
    """Bad input file or argument; the message names the offending field."""


def fmt(x: float) -> str:
    return format(float(x), ".15g")


# -- scenario files ----------------------------------------------------------


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InputError(f"{path}: expected a finite number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{path}: expected an integer, got {value!r}")
    return value


def _point(value: Any, path: str) -> Vec2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise InputError(f"{path}: expected [x, y], got {value!r}")
    return Vec2(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


def _object(value: Any, path: str, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        raise InputError(f"{path}: expected an object, got {type(value).__name__}")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise InputError(f"{path}: unknown field(s) {', '.join(unknown)}")
    return value


def _read_json(path: Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def parse_params(raw: Optional[dict], path: str = "params") -> dict:
    raw = _object(raw or {}, path, set(DEFAULTS))
    out = {}
    for key, default in DEFAULTS.items():
        if key in raw:
            out[key] = _integer(raw[key], f"{path}.{key}") if key == "M" else _number(raw[key], f"{path}.{key}")
        else:
            log.info("%s.%s not given, using default %s", path, key, default)
            out[key] = default
    return out


def noise_from_params(p: dict, path: str = "params") -> NoiseParams:
    try:
        return NoiseParams(p["nu_w"], p["nu_c"], p["nu_y"], p["nu_G"], p["M"], p["dt"])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def scenario_from_dict(doc: Any) -> Scenario:
    doc = _object(doc, "<root>", {"params", "cna", "agents", "horizon", "D"})
    p = parse_params(doc.get("params"))
    noise = noise_from_params(p)

    cna_raw = _object(doc.get("cna", {}), "cna", {"start", "speed"})
    cna_start = _point(cna_raw.get("start", [0.0, 0.0]), "cna.start")
    cna_speed = _number(cna_raw.get("speed", p["v_c"]), "cna.speed")

    agents_raw = doc.get("agents")
    if not isinstance(agents_raw, list) or not agents_raw:
        raise InputError("agents: expected a non-empty list")
    agents = []
    for j, a in enumerate(agents_raw):
        where = f"agents[{j}]"
        a = _object(a, where, {"id", "start", "heading_deg", "heading_rad", "speed", "nu0"})
        for key in ("id", "start", "nu0"):
            if key not in a:
                raise InputError(f"{where}.{key}: missing")
        if ("heading_deg" in a) == ("heading_rad" in a):
            raise InputError(f"{where}: give exactly one of heading_deg, heading_rad")
        if "heading_deg" in a:
            heading = math.radians(_number(a["heading_deg"], f"{where}.heading_deg"))
        else:
            heading = _number(a["heading_rad"], f"{where}.heading_rad")
        try:
            agents.append(
                AgentSpec(
                    _integer(a["id"], f"{where}.id"),
                    _point(a["start"], f"{where}.start"),
                    heading,
                    _number(a.get("speed", p["v_a"]), f"{where}.speed"),
                    _number(a["nu0"], f"{where}.nu0"),
                )
            )
        except ValueError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"{where}: {exc}") from exc

    horizon = _integer(doc["horizon"], "horizon") if "horizon" in doc else None
    D = _integer(doc["D"], "D") if "D" in doc else None
    try:
        return Scenario(tuple(agents), CnaSpec(cna_start, cna_speed), noise, p["T_max"], horizon, D)
    except ValueError as exc:
        raise InputError(f"scenario: {exc}") from exc


def load_scenario(path: Path) -> Scenario:
    return scenario_from_dict(_read_json(path))


def scenario_to_dict(sc: Scenario, v_a: float = DEFAULTS["v_a"]) -> dict:
    n = sc.noise
    return {
        "params": {
            "M": n.surface_steps,
            "T_max": sc.t_max,
            "dt": n.dt,
            "v_c": sc.cna.speed,
            "v_a": v_a,
            "nu_w": n.nu_w,
            "nu_c": n.nu_c,
            "nu_y": n.nu_y,
            "nu_G": n.nu_G,
        },
        "cna": {"start": list(sc.cna.start), "speed": sc.cna.speed},
        "agents": [
            {"id": a.id, "start": list(a.start), "heading_rad": a.heading, "speed": a.speed, "nu0": a.nu0}
            for a in sc.agents
        ],
        "horizon": sc.horizon,
        "D": sc.D,
    }


def save_scenario(sc: Scenario, path: Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2) + "\n")


# -- Monte Carlo config files ------------------------------------------------

_MC_FIELDS = {
    "n_values",
    "trials",
    "box_side",
    "strategies",
    "nu0_max",
    "seed",
    "planners",
    "exhaustive_n_cap",
    "budget",
    "circle_radius",
    "params",
}


def mc_config_from_dict(doc: Any) -> McConfig:
    doc = _object(doc, "<root>", _MC_FIELDS)
    p = parse_params(doc.get("params"))
    kw: dict[str, Any] = {
        "noise": noise_from_params(p),
        "t_max": p["T_max"],
        "cna_speed": p["v_c"],
        "agent_speed": p["v_a"],
    }
    if "n_values" in doc:
        nv = doc["n_values"]
        if not isinstance(nv, list) or not nv:
            raise InputError("n_values: expected a non-empty list of integers")
        kw["n_values"] = tuple(_integer(v, f"n_values[{j}]") for j, v in enumerate(nv))
    for key in ("trials", "seed", "exhaustive_n_cap", "budget"):
        if key in doc:
            kw[key] = _integer(doc[key], key)
    for key in ("box_side", "nu0_max", "circle_radius"):
        if key in doc:
            kw[key] = _number(doc[key], key)
    for key, allowed in (("strategies", STRATEGIES), ("planners", PLANNERS)):
        if key in doc:
            vals = doc[key]
            if not isinstance(vals, list) or any(v not in allowed for v in vals):
                raise InputError(f"{key}: expected a list drawn from {list(allowed)}, got {vals!r}")
            kw[key] = tuple(vals)
    try:
        return McConfig(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# -- writers -----------------------------------------------------------------


def _header(lines: list[str]) -> str:
    return "".join(f"# {line}\n" for line in lines)


def _tasks_str(tasks) -> str:
    return " ".join(str(t) for t in tasks)


def write_plan_summary(path: Path, sc: Scenario, plan: PlanResult, planner: str) -> None:
    lines = [
        f"# cnaplan {__version__} plan summary",
        f"planner: {planner}",
        f"N: {sc.N}",
        f"horizon: {sc.horizon}",
        f"D: {sc.D}",
        f"sequence: {_tasks_str(plan.tasks)}",
        f"completion_time: {fmt(plan.sequence.completion_time)}",
        f"surfacing_step: {'' if plan.surfacing_step is None else plan.surfacing_step}",
        f"cost_J_prime: {fmt(plan.cost)}",
        f"cost_J: {fmt(plan.cost_J)}",
    ]
    if plan.n_evaluated is not None:
        lines.append(f"sequences_evaluated: {plan.n_evaluated}")
    for task in plan.tasks:
        if task:
            lines.append(f"task {task}: Z={plan.aiding_steps[task]} J_i={fmt(plan.per_agent_costs[task - 1])}")
        else:
            lines.append(f"task 0: S={plan.surfacing_step}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_trace(path: Path, sc: Scenario, mission: MissionResult) -> None:
    """One row per step: CNA position and variance, then each agent's."""
    tracks = [propagate_track(a, sc.horizon, sc.noise.dt) for a in sc.agents]
    cols = ["k", "cna_x", "cna_y", "nu_c"]
    for a in sc.agents:
        cols += [f"agent{a.id}_x", f"agent{a.id}_y", f"agent{a.id}_nu"]
    out = [_header([f"cnaplan {__version__} trace export", f"cost_J_prime: {fmt(mission.cost)}"]), ",".join(cols) + "\n"]
    for k in range(sc.horizon + 1):
        row = [str(k), fmt(mission.cna_path[k, 0]), fmt(mission.cna_path[k, 1]), fmt(mission.cna_trace[k])]
        for tr, track in zip(mission.agent_traces, tracks):
            row += [fmt(track[k, 0]), fmt(track[k, 1]), fmt(tr[k])]
        out.append(",".join(row) + "\n")
    Path(path).write_text("".join(out))


def write_events(path: Path, sc: Scenario, mission: MissionResult) -> None:
    rows = ["event,task,start_step,end_step\n"]
    for task in mission.sequence.tasks:
        if task == 0:
            S = mission.surfacing_step
            rows.append(f"surface,0,{S},{S + sc.noise.surface_steps}\n")
        else:
            Z = mission.aiding_steps[task]
            rows.append(f"aid,{task},{Z},{Z}\n")
    Path(path).write_text("".join(rows))


def write_mc_report(out_dir: Path, report: McReport) -> None:
    """``trials.csv`` and ``summary.csv`` are reproducible; timings go to ``timing.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = report.config
    meta = _header(
        [
            f"cnaplan {__version__} Monte Carlo report",
            f"seed: {cfg.seed}",
            f"rng: {RNG_ALGORITHM}",
            f"numpy: {np.__version__}",
            f"python: {platform.python_version()}",
            f"n_values: {' '.join(map(str, cfg.n_values))}",
            f"trials: {cfg.trials}",
            f"strategies: {' '.join(cfg.strategies)}",
            f"planners: {' '.join(cfg.planners)}",
            f"exhaustive_n_cap: {cfg.exhaustive_n_cap}",
            f"box_side: {fmt(cfg.box_side)}",
            f"circle_radius: {fmt(cfg.radius)}",
        ]
    )
    trials = [meta, "N,trial,strategy,planner,status,cost,cost_J,lower,upper,sequence\n"]
    for r in report.rows:
        trials.append(
            f"{r.N},{r.trial},{r.strategy},{r.planner},{r.status},{fmt(r.cost)},{fmt(2 * r.cost)},"
            f"{fmt(r.lower)},{fmt(r.upper)},{_tasks_str(r.tasks)}\n"
        )
    (out_dir / "trials.csv").write_text("".join(trials))

    summary = [meta, "N,planner,n_trials,mean_cost,mean_cost_J,mean_lower,mean_upper\n"]
    for a in report.aggregates:
        summary.append(
            f"{a.N},{a.planner},{a.n_trials},{fmt(a.mean_cost)},{fmt(2 * a.mean_cost)},"
            f"{fmt(a.mean_lower)},{fmt(a.mean_upper)}\n"
        )
    (out_dir / "summary.csv").write_text("".join(summary))

    timing = [_header(["wall-clock planning times; not reproducible"]), "N,planner,n_trials,mean_plan_time_s\n"]
    for a in report.aggregates:
        timing.append(f"{a.N},{a.planner},{a.n_trials},{a.mean_plan_time:.6e}\n")
    (out_dir / "timing.csv").write_text("".join(timing))


# -- commands ----------------------------------------------------------------


def cmd_plan(args) -> int:
    sc = load_scenario(args.scenario)
    if args.planner == "greedy":
        try:
            weights = parse_weights(args.weights)
        except ValueError as exc:
            raise InputError(f"--weights: {exc}") from exc
        plan = greedy_plan(sc, weights)
        label = f"greedy {args.weights}"
    else:
        try:
            plan, worst = exhaustive_plan(sc, budget=args.budget)
        except BudgetExceeded as exc:
            raise InputError(f"{exc} (raise it with --budget {exc.required})") from exc
        label = "exhaustive"
    mission = run_mission(sc, plan.tasks)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_plan_summary(out / "plan.txt", sc, plan, label)
    write_trace(out / "trace.csv", sc, mission)
    write_events(out / "events.csv", sc, mission)
    print(f"sequence: {_tasks_str(plan.tasks) or '(empty)'}")
    print(f"cost J' = {fmt(plan.cost)}  J = {fmt(plan.cost_J)}")
    if not plan.aiding_steps:
        print("no agent can be reached within the mission time", file=sys.stderr)
        return 2
    return 0


def _workers(arg: Optional[int]) -> int:
    if arg is not None:
        return arg
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{WORKERS_ENV}: expected an integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"{WORKERS_ENV}: must be >= 1")
    return n


def cmd_mc(args) -> int:
    cfg = mc_config_from_dict(_read_json(args.config))
    report = run_experiment(cfg, workers=_workers(args.workers))
    write_mc_report(Path(args.out), report)
    skipped = sum(1 for r in report.rows if r.status != "ok")
    print(f"{len(report.rows)} trial rows, {len(report.aggregates)} aggregate rows, {skipped} skipped")
    return 0


def cmd_zstar(args) -> int:
    if args.nuw <= 0:
        raise InputError("--nuw must be > 0: with no agent process noise the cost is monotone in Z")
    if args.T < 1:
        raise InputError("--T must be >= 1")
    if min(args.nu0, args.nucna, args.nuy) < 0:
        raise InputError("--nu0, --nucna and --nuy must be >= 0")
    # CNA process noise plays no part here; the CNA variance at the aid is --nucna
    noise = NoiseParams(nu_w=args.nuw, nu_c=0.0, nu_y=args.nuy)
    z = optimal_aid_time(args.nu0, args.nucna, noise, args.T)
    zi = optimal_aid_step(args.nu0, args.nucna, noise, args.T)
    print(f"Z*_continuous: {fmt(z)}")
    print(f"Z*_integer: {zi}")
    print(f"J_i(Z*): {fmt(agent_cost(args.nu0, zi, args.nucna, noise, args.T))}")
    print(f"J_i_max: {fmt(max_cost(args.nu0, noise, args.T))}")
    return 0


def cmd_print_defaults(args) -> int:
    print(json.dumps(DEFAULTS, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnaplan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log default-filling notices")
    parser.add_argument("--print-defaults", action="store_true", help="print the default parameters and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("plan", help="plan a CNA task sequence for a scenario file")
    p.add_argument("scenario", type=Path)
    p.add_argument("--planner", choices=("greedy", "exhaustive"), default="greedy")
    p.add_argument("--weights", default="G4", help="G1..G4 or alpha,beta,gamma (greedy only)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max sequences for exhaustive")
    p.add_argument("--out", type=Path, default=Path("plan_out"))
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("mc", help="run a Monte Carlo comparison from a config file")
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, default=Path("mc_out"))
    p.add_argument("--workers", type=int, default=None, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("zstar", help="optimal time-to-aid for a single agent")
    p.add_argument("--nu0", type=float, required=True)
    p.add_argument("--nucna", type=float, required=True)
    p.add_argument("--T", type=int, default=int(DEFAULTS["T_max"]))
    p.add_argument("--nuw", type=float, default=DEFAULTS["nu_w"])
    p.add_argument("--nuy", type=float, default=DEFAULTS["nu_y"])
    p.set_defaults(func=cmd_zstar)

    p = sub.add_parser("print-defaults", help="print the default parameters")
    p.set_defaults(func=cmd_print_defaults)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.print_defaults:
        return cmd_print_defaults(args)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
