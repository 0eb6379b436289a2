"""
MongeLab command-line front end

Exit codes: 0 all checks pass, 1 a check or solver failed, 2 usage error.
"""
import argparse
import asyncio
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli import accept, barrier, entire, large, sweep, verify
from app.core.errors import InputError, LabError
from app.core.logging_setup import setup_logging
from app.models.run_config import RunConfig, load_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

COMMAND_MODULES = (entire, large, barrier, verify, sweep, accept)


class UsageError(Exception):
    """Bad command line, reported as exit 2"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _error_line(kind: str, message: str, **details) -> None:
    payload = {'error': kind, 'message': message}
    payload.update(details)
    print(json.dumps(payload, default=str), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", dest="config_file", help="flat KEY=VALUE run configuration file")
    common.add_argument("--output-dir", dest="output_dir", help="directory that receives run folders")
    common.add_argument("--format", dest="output_format", choices=["csv", "json"], help="primary table format")
    common.add_argument("--plot", action="store_true", default=None, help="write SVG plots")
    common.add_argument("--label", help="run folder name")

    parser = _Parser(prog="mongelab", description="Numerical laboratory for det D^2 u = A u^p")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for module in COMMAND_MODULES:
        module.register(subparsers, common)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file; absent flags are None and leave file values alone"""
    overrides = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields and k != 'command'}
    return load_run_config(args.command, config_file=args.config_file, **overrides)


def main(argv: Optional[List[str]] = None) -> int:
    from app.core.runner import run, run_sweep

    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
    except UsageError as e:
        _error_line("usage", str(e))
        return EXIT_USAGE
    except ValidationError as e:
        _error_line("invalid_config", "run configuration rejected", details=e.errors(include_url=False))
        return EXIT_USAGE
    except (InputError, OSError) as e:
        _error_line("invalid_config", str(e))
        return EXIT_USAGE

    setup_logging()
    logger.info(f"Starting {config.command} run: {config.run_label()}")
    try:
        if config.command == 'sweep':
            outcome = asyncio.run(run_sweep(config))
        else:
            outcome = run(config)
    except InputError as e:
        _error_line("invalid_input", str(e))
        return EXIT_USAGE
    except LabError as e:
        logger.error(f"{config.command} run failed: {type(e).__name__}: {e}")
        _error_line("solver_failure", str(e), error_type=type(e).__name__)
        return EXIT_FAILED

    failures = outcome.summary.failures()
    if failures:
        _error_line("check_failed", f"{len(failures)} check(s) failed", checks=failures)
    print(json.dumps({'run_dir': str(outcome.run_dir), 'passed': not failures}))
    return outcome.exit_code
