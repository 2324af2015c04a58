"""The main entry point for the command-line toolkit.

This module wires logging, argument parsing and the experiment service
together and maps the exception families onto the documented exit codes.
"""

import logging
import sys
from typing import List, Optional

import numpy as np

from app.cli import build_parser, config_from_args, render
from app.exceptions import ChainViolationError, NumericalError, SpecError
from app.services import experiment_service

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_NUMERICAL = 3
EXIT_CHAIN = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str):
    """Sends every log record to standard error at the given level.

    Raises:
        SpecError: If the level name is unknown.
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise SpecError(f"config.log_level: unknown logging level {level!r}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, stream=sys.stderr, force=True)


def run(argv: Optional[List[str]] = None) -> int:
    """Runs one command and returns its exit code.

    Results go to standard output; diagnostics go to standard error.

    Returns:
        0 on success, 2 for spec or parse errors, 3 for numerical failures and
        4 when an asserted inequality chain fails.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_SPEC
    try:
        config = config_from_args(args)
        configure_logging(config.log_level)
        result = experiment_service.execute(config)
        sys.stdout.write(render(result, config.output))
        sys.stdout.flush()
    except SpecError as e:
        logger.error("Invalid input: %s", e)
        return EXIT_SPEC
    except (NumericalError, np.linalg.LinAlgError) as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except ChainViolationError as e:
        logger.error("Inequality check failed: %s", e)
        return EXIT_CHAIN
    return EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
