#!/usr/bin/env python3

import sys
import os
import argparse
import logging
import signal
from logging.handlers import TimedRotatingFileHandler
from typing import Dict, List, Optional

# --- Add project root to Python path ---
# This allows importing 'platoonsim' even when running main.py directly
project_root = os.path.dirname(os.path.abspath(__file__))
if project_root not in sys.path:
    sys.path.insert(0, project_root)
# ---

from platoonsim.core.service import PlatoonExperimentService
from platoonsim.core.domain import CaseWindow, RunConfig, Strategy
from platoonsim.core.errors import (
    ConfigError, FormatError, PlatoonSimError, TrainingDivergenceError,
)
from platoonsim.core.ports import ProfileSource
from platoonsim.adapters.config.dotfile import DEFAULT_CONFIG, SCHEMA, DotfileConfigProvider
from platoonsim.adapters.model.text_file import TextModelStore
from platoonsim.adapters.profile.csv_file import CsvProfileSource
from platoonsim.adapters.profile.synthetic import SyntheticProfileSource
from platoonsim.adapters.storage.csv_files import CsvResultStorage

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4

# --- Global Logger Setup ---
log_formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger("platoonsim")
logger.setLevel(logging.INFO)

stream_handler = logging.StreamHandler()
stream_handler.setFormatter(log_formatter)
logger.addHandler(stream_handler)

# File Handler (configured later once config is loaded)
file_handler = None

# Signal handler needs the service to request a graceful stop
experiment_service: Optional[PlatoonExperimentService] = None


def setup_logging(config: RunConfig):
    """Add file logging when run.log_file is set."""
    global file_handler
    log_file = config.log_file
    if not log_file:
        return
    log_dir = os.path.dirname(log_file)
    try:
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        # Rotate weekly, keep 2 older files
        file_handler = TimedRotatingFileHandler(
            filename=log_file, when='D', interval=7, backupCount=2, encoding='utf-8'
        )
        file_handler.setFormatter(log_formatter)
        logger.addHandler(file_handler)
        logger.info(f"File logging configured to {log_file}")
    except Exception as e:
        logger.error(f"Failed to configure file logging to {log_file}: {e}", exc_info=True)
        file_handler = None


def shutdown_handler(signum, frame):
    """Finish the current training episode, then save and exit."""
    logger.warning(f"Received signal {signum}. Stopping after the current episode...")
    if experiment_service:
        experiment_service.request_stop()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", default=DEFAULT_CONFIG,
                        help="key=value configuration file, or 'default' for built-in defaults")
    common.add_argument("--verbose", action="store_true", help="debug logging")
    keys = common.add_argument_group("configuration keys")
    for key in SCHEMA:
        keys.add_argument(f"--{key.leaf}", f"--{key.key}", dest=key.key, default=None, metavar="VALUE",
                          help=f"default: {key.default or '(unset)'}")

    parser = argparse.ArgumentParser(prog="platoonsim", allow_abbrev=False,
                                     description="CACC / DDPG / HCFS platoon car-following simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], allow_abbrev=False, help="train the DDPG policy")
    eval_parser = sub.add_parser("eval", parents=[common], allow_abbrev=False, help="run one case under one strategy")
    eval_parser.add_argument("--case", required=True, help="start:end:followers, e.g. 200:220:8")
    eval_parser.add_argument("--strategy", required=True, choices=[s.value for s in Strategy])
    sub.add_parser("compare", parents=[common], allow_abbrev=False, help="all cases under all strategies")
    synth = sub.add_parser("synth-profile", parents=[common], allow_abbrev=False, help="write a synthetic leader profile")
    synth.add_argument("--output", default="profile.csv", help="output CSV (relative to run.out_dir)")
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, str]:
    return {key.key: getattr(args, key.key) for key in SCHEMA if getattr(args, key.key) is not None}


def parse_case(text: str) -> CaseWindow:
    try:
        start, end, followers = text.split(":")
        return CaseWindow("case", float(start), float(end), int(followers))
    except ValueError as e:
        raise ConfigError(f"invalid --case {text!r}: expected start:end:followers") from e


def make_profile_source(config: RunConfig, synthetic: bool) -> ProfileSource:
    if config.profile.path and not synthetic:
        return CsvProfileSource(config.profile.path, config.platoon.v_max)
    return SyntheticProfileSource(config.profile, config.seed, config.platoon.v_max)


def run(argv: List[str]) -> int:
    global experiment_service
    global file_handler

    args = build_parser().parse_args(argv)
    logger.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    previous_sigterm = signal.getsignal(signal.SIGTERM)
    previous_sigint = signal.getsignal(signal.SIGINT)

    try:
        # --- 1. Configuration ---
        config_provider = DotfileConfigProvider(args.config, collect_overrides(args))
        config = config_provider.get_config()

        # --- 2. Setup Logging (with file path from config) ---
        setup_logging(config)
        logger.info(f"Starting platoonsim {args.command} (seed={config.seed}, out_dir={config.out_dir})")

        # --- 3. Instantiate Adapters and Service ---
        experiment_service = PlatoonExperimentService(
            config=config,
            config_provider=config_provider,
            profile_source=make_profile_source(config, synthetic=args.command == "synth-profile"),
            model_store=TextModelStore(),
            storage=CsvResultStorage(config.out_dir),
        )

        # --- 4. Graceful shutdown on SIGTERM / Ctrl+C ---
        signal.signal(signal.SIGTERM, shutdown_handler)
        signal.signal(signal.SIGINT, shutdown_handler)

        # --- 5. Run the command ---
        if args.command == "train":
            experiment_service.train()
        elif args.command == "eval":
            experiment_service.evaluate(parse_case(args.case), Strategy(args.strategy))
        elif args.command == "compare":
            experiment_service.compare()
        else:
            experiment_service.synth_profile(args.output)
        return EXIT_OK

    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except TrainingDivergenceError as e:
        logger.error(f"Training diverged: {e}")
        return EXIT_DIVERGED
    except (OSError, FormatError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except PlatoonSimError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_UNEXPECTED
    except Exception as e:
        logger.critical(f"Unhandled exception in main execution: {e}", exc_info=True)
        return EXIT_UNEXPECTED
    finally:
        signal.signal(signal.SIGTERM, previous_sigterm)
        signal.signal(signal.SIGINT, previous_sigint)
        experiment_service = None
        # Clean up logging file handler
        if file_handler:
            logger.removeHandler(file_handler)
            file_handler.close()
            file_handler = None


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
