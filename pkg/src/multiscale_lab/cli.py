"""Command-line driver.

``multiscale-lab run FILE``, ``study FILE``, ``validate FILE`` and
``list-scenarios``.  FILE may also be the name of a shipped scenario.  Output
goes under ``$MSLAB_OUTPUT_ROOT`` (default ``./mslab-output``) unless
``--output-root`` is given.

Exit codes: 0 success, 2 validation failure, 3 runtime model failure.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import yaml

from .runner import OUTPUT_ROOT_ENV, ModelRunError, run_scenario, run_study
from .scenario import ScenarioError, parse_scenario, parse_study

__all__ = ["main", "shipped_scenarios", "resolve_scenario_path", "EXIT_OK", "EXIT_INVALID", "EXIT_RUNTIME"]

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


def shipped_scenarios() -> list[Path]:
    """Paths of the scenario and study files bundled with the package, sorted by name."""
    root = resources.files("multiscale_lab") / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml"))


def resolve_scenario_path(name: str) -> Path:
    """A file path as given, or the shipped file called ``name`` (with or without ``.yaml``)."""
    path = Path(name)
    if path.exists():
        return path
    stem = name[:-5] if name.endswith(".yaml") else name
    for p in shipped_scenarios():
        if p.stem == stem:
            return p
    return path


def _is_study(path: Path) -> bool:
    try:
        data = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError):
        return False
    return isinstance(data, dict) and "study" in data


def _report_errors(exc: ScenarioError) -> int:
    print(f"validation failed ({len(exc.errors)} problem{'s' if len(exc.errors) != 1 else ''}):", file=sys.stderr)
    for e in exc.errors:
        print(f"  {e}", file=sys.stderr)
    return EXIT_INVALID


def _cmd_validate(args) -> int:
    path = resolve_scenario_path(args.file)
    try:
        obj = parse_study(path) if _is_study(path) else parse_scenario(path)
    except ScenarioError as exc:
        return _report_errors(exc)
    kind = "study" if _is_study(path) else "scenario"
    model = obj.base.model if kind == "study" else obj.model
    print(f"{path}: valid {kind} {obj.name!r} (model {model})")
    return EXIT_OK


def _cmd_run(args) -> int:
    path = resolve_scenario_path(args.file)
    if _is_study(path):
        return _cmd_study(args)
    try:
        scen = parse_scenario(path)
    except ScenarioError as exc:
        return _report_errors(exc)
    try:
        res = run_scenario(scen, args.output_root)
    except ModelRunError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for line in res.metrics.get("report", []):
        print(line)
    print(res.summary_line())
    print(f"wrote {len(res.files)} files to {res.directory}")
    return EXIT_OK


def _cmd_study(args) -> int:
    path = resolve_scenario_path(args.file)
    try:
        spec = parse_study(path)
    except ScenarioError as exc:
        return _report_errors(exc)
    try:
        res = run_study(spec, args.output_root)
    except ScenarioError as exc:
        return _report_errors(exc)
    except ModelRunError as exc:
        print(f"study aborted (completed rows kept): {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(res.summary_line())
    print(f"wrote study table to {res.directory / 'study.csv'}")
    return EXIT_OK


def _cmd_list(args) -> int:
    for p in shipped_scenarios():
        data = yaml.safe_load(p.read_text())
        if "study" in data:
            desc = f"study of {data['study'].get('metric')} over {data['study'].get('parameter')} ({data['base'].get('model')})"
        else:
            desc = data.get("model", "?")
        print(f"{p.stem:28s} {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiscale-lab", description="Scenario-driven multiscale model laboratory.")
    parser.add_argument("--output-root", default=None,
                        help=f"output directory root (default: ${OUTPUT_ROOT_ENV} or ./mslab-output)")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a scenario (or study) file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("study", help="run a parameter study file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_study)
    p = sub.add_parser("validate", help="check a scenario or study file without running it")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("list-scenarios", help="list the shipped scenario files")
    p.set_defaults(func=_cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
