"""Command-line front end; a thin client over the engine.

Exit codes: 0 success, 1 config or IO error (the message names the
offending field or path), 2 solved but some users remain in outage (the
artifact is still written).
"""

from __future__ import annotations

import argparse
import sys

from . import artifacts
from .config import load_config_file, scenario_from_config
from .errors import ConfigError, PlanningError
from .optimizer import BASELINE_REGIMES, run_baseline, solve
from .scenario import Scenario, validate
from .sweep_runner import SweepSpec, optimizer_config_from, run_sweep


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="scenario config JSON; omitted means bundled defaults")
    parser.add_argument("--seed", type=int, default=0, help="run seed (layout and search)")
    parser.add_argument("--out", help="output path; omitted prints to stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntnplan",
        description="Planning engine for reflector-assisted aerial access networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the full planning search")
    _add_common(p_solve)

    p_base = sub.add_parser("baseline", help="evaluate named operating regimes")
    _add_common(p_base)
    p_base.add_argument(
        "--regime",
        choices=(*BASELINE_REGIMES, "all"),
        default="all",
        help="single regime, or 'all' for the four-row comparison table",
    )

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep from a spec file")
    p_sweep.add_argument("--spec", required=True, help="sweep spec JSON")
    p_sweep.add_argument("--out", help="output path; omitted prints to stdout")
    p_sweep.add_argument("--format", choices=("json", "csv"), default="json")

    p_val = sub.add_parser("validate", help="check a scenario config against all invariants")
    p_val.add_argument("--config", help="scenario config JSON; omitted means bundled defaults")
    p_val.add_argument("--seed", type=int, default=0)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def _load_scenario(config_path: str | None, seed: int) -> Scenario:
    overrides = load_config_file(config_path) if config_path else {}
    scenario = scenario_from_config(overrides, seed)
    violations = validate(scenario)
    if violations:
        raise ConfigError("invalid scenario: " + "; ".join(violations))
    return scenario


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output file {out}: {exc}")


def _emit_solution(artifact: dict, fmt: str, out: str | None) -> None:
    if fmt == "json":
        _write(artifacts.canonical_json(artifact), out)
    else:
        _write(artifacts.rows_to_csv(artifacts.ALLOCATION_FIELDS, artifact["allocation"]), out)


def _cmd_solve(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.config, args.seed)
    result = solve(scenario, seed=args.seed)
    artifact = artifacts.solution_artifact(result, scenario, args.seed, regime="optimized")
    _emit_solution(artifact, args.format, args.out)
    return 2 if result.best.outage_users else 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.config, args.seed)
    if args.regime != "all":
        result = run_baseline(args.regime, scenario, args.seed)
        artifact = artifacts.solution_artifact(result, scenario, args.seed, regime=args.regime)
        _emit_solution(artifact, args.format, args.out)
        return 2 if result.best.outage_users else 0

    results = {regime: run_baseline(regime, scenario, args.seed) for regime in BASELINE_REGIMES}
    artifact = artifacts.comparison_artifact(results, scenario, args.seed)
    if args.format == "json":
        _write(artifacts.canonical_json(artifact), args.out)
    else:
        _write(artifacts.rows_to_csv(artifacts.BASELINE_FIELDS, artifact["rows"]), args.out)
    return 2 if results["optimized"].best.outage_users else 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    raw = load_config_file(args.spec)
    known = {"variable", "grid", "regime", "replications", "config", "optimizer"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown sweep spec fields: {', '.join(unknown)}")
    if "variable" not in raw or "grid" not in raw:
        raise ConfigError("sweep spec requires 'variable' and 'grid'")
    optimizer_config_from(raw.get("optimizer", {}))  # fail fast on bad knobs
    spec = SweepSpec(
        variable=raw["variable"],
        grid=tuple(raw["grid"]),
        regime=raw.get("regime", "optimized"),
        replications=int(raw.get("replications", 1)),
        config=raw.get("config", {}),
        optimizer=raw.get("optimizer", {}),
    )
    result = run_sweep(spec)
    artifact = artifacts.sweep_artifact(result)
    if args.format == "json":
        _write(artifacts.canonical_json(artifact), args.out)
    else:
        _write(artifacts.rows_to_csv(artifacts.SWEEP_FIELDS, artifact["rows"]), args.out)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    overrides = load_config_file(args.config) if args.config else {}
    scenario = scenario_from_config(overrides, args.seed)
    violations = validate(scenario)
    if violations:
        for line in violations:
            print(f"violation: {line}")
        return 1
    print("ok")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "baseline": _cmd_baseline,
        "sweep": _cmd_sweep,
        "validate": _cmd_validate,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PlanningError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
