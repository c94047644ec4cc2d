"""
Command-line entry point.

    python -m lagrange_ca derive   <file or Lagrangian text> [--equation]
    python -m lagrange_ca run      <scenario> [--out DIR] [--seed N] [--ticks N] ...
    python -m lagrange_ca channels <type> <type> [--rules qed|qed-mu]
    python -m lagrange_ca validate <scenario>
    python -m lagrange_ca serve    [--host H] [--port P]

Data goes to stdout, logs to stderr. Exit codes: 0 success, 1 the
simulation aborted, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from lagrange_ca.config import API_HOST, API_PORT, DEFAULT_EQUIVALENCE, DEFAULT_RULE_TABLE
from lagrange_ca.errors import ScenarioError, SimulationError
from lagrange_ca.interaction.channels import EQUIVALENCES
from lagrange_ca.interaction.rules import RULE_TABLES
from lagrange_ca.scenario.loader import load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SIMULATION = 1
EXIT_INPUT = 2


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------
def _read_target(target: str) -> str:
    path = Path(target)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    return target


def _cmd_derive(args: argparse.Namespace) -> int:
    from lagrange_ca.services.derive_service import derivation_report, derive_from_scenario, derive_from_source

    text = _read_target(args.target)
    if "[lagrangian]" in text:
        result = derive_from_scenario(text, args.target)
    else:
        result = derive_from_source(text.strip(), args.constant, is_equation=args.equation)
    if args.json:
        print(json.dumps(result, indent=2, ensure_ascii=False))
    else:
        print("\n".join(derivation_report(result)))
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    from lagrange_ca.services.run_service import run_scenario

    overrides = {
        "seed": args.seed,
        "ticks": args.ticks,
        "max_time": args.max_time,
        "snapshot_every": args.snapshot_every,
        "mode": args.mode,
        "allow_unstable": True if args.allow_unstable else None,
    }
    record = run_scenario(load_scenario(args.scenario), overrides, args.out)
    print(json.dumps(record.summary(), indent=2, sort_keys=True, default=str))
    return EXIT_OK


def _cmd_channels(args: argparse.Namespace) -> int:
    from lagrange_ca.services.channel_service import list_channels

    result = list_channels(args.first, args.second, args.rules, args.equivalence)
    if args.json:
        print(json.dumps(result, indent=2, ensure_ascii=False))
    elif args.details:
        for item in result["details"]:
            print(item["text"])
    elif not result["channels"]:
        print("no channels")
    else:
        for text in result["channels"]:
            print(text)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    from lagrange_ca.services.run_service import validate_text

    text = Path(args.scenario).read_text(encoding="utf-8")
    result = validate_text(text, args.scenario)
    for item in result["diagnostics"]:
        where = f"{item['file']}:{item['line']}: " if item["file"] else ""
        print(f"{where}{item['level']}: {item['message']}")
    if not result["ok"]:
        return EXIT_INPUT
    print("ok")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("lagrange_ca.main:app", host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lagrange-ca", description="Lagrangian cellular-automaton simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    derive = sub.add_parser("derive", help="derive the equation of motion and its stencil")
    derive.add_argument("target", help="scenario file, Lagrangian file or Lagrangian text")
    derive.add_argument("--equation", action="store_true", help="input is an equation of motion")
    derive.add_argument("--constant", action="append", default=[], help="declare a constant name")
    derive.add_argument("--json", action="store_true")
    derive.set_defaults(handler=_cmd_derive)

    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("scenario")
    run.add_argument("--out", default=None, help="directory for snapshots, plot data and events")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--ticks", type=int, default=None)
    run.add_argument("--max-time", type=float, default=None)
    run.add_argument("--snapshot-every", type=int, default=None)
    run.add_argument("--mode", choices=["corrected", "literal"], default=None)
    run.add_argument("--allow-unstable", action="store_true")
    run.set_defaults(handler=_cmd_run)

    channels = sub.add_parser("channels", help="list interaction channels for two particle types")
    channels.add_argument("first")
    channels.add_argument("second")
    channels.add_argument("--rules", choices=sorted(RULE_TABLES), default=DEFAULT_RULE_TABLE)
    channels.add_argument("--equivalence", choices=EQUIVALENCES, default=DEFAULT_EQUIVALENCE)
    channels.add_argument("--details", action="store_true", help="show template numbers and out types")
    channels.add_argument("--json", action="store_true")
    channels.set_defaults(handler=_cmd_channels)

    validate = sub.add_parser("validate", help="check a scenario without running it")
    validate.add_argument("scenario")
    validate.set_defaults(handler=_cmd_validate)

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--host", default=API_HOST)
    serve.add_argument("--port", type=int, default=API_PORT)
    serve.set_defaults(handler=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s  %(levelname)s  %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except ScenarioError as exc:
        for item in exc.diagnostics:
            print(str(item), file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SimulationError as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
