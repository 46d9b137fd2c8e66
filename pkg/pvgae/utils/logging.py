"""
Centralized logging configuration.

Every pvgae module logs through ``get_logger(area)``, which returns a child
of the ``pvgae`` package logger. ``setup_logging`` attaches handlers to that
package logger once per process.

Key features:
- One configuration point, guarded against repeated setup
- Console output on standard error so stdout stays free for results
- Optional log file next to the console output
- Verbose format with logger name and line number
- Third-party libraries kept at WARNING
"""

import sys
import logging
from pathlib import Path
from typing import List, Optional

PACKAGE_LOGGER = "pvgae"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
BASE_FORMAT = "%(asctime)s | %(levelname)-8s | %(message)s"
VERBOSE_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s:%(lineno)d | %(message)s"
QUIET_LIBRARIES = ("sklearn", "matplotlib", "numba")

_CONFIGURED = False


def _handlers(log_file: Optional[Path], formatter: logging.Formatter) -> List[logging.Handler]:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        log_file = Path(log_file).expanduser()
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    for handler in handlers:
        handler.setFormatter(formatter)
    return handlers


def setup_logging(level: str = "INFO",
                  log_file: Optional[Path] = None,
                  verbose: bool = False
                  ) -> None:
    """
    Attach console and file handlers to the ``pvgae`` logger.

    Only the first call in a process has an effect. Training emits one loss
    line per logging interval at INFO.

    :param level: DEBUG, INFO, WARNING, ERROR or CRITICAL (any case).
    :param log_file: Optional file that receives the same records.
    :param verbose: Add logger name and line number to every record.
    """
    global _CONFIGURED
    if _CONFIGURED:
        return

    formatter = logging.Formatter(VERBOSE_FORMAT if verbose else BASE_FORMAT, datefmt=DATE_FORMAT)
    package = logging.getLogger(PACKAGE_LOGGER)
    package.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    package.handlers.clear()
    for handler in _handlers(log_file, formatter):
        package.addHandler(handler)
    package.propagate = False

    for name in QUIET_LIBRARIES:
        logging.getLogger(name).setLevel(logging.WARNING)

    _CONFIGURED = True


def get_logger(name: str) -> logging.Logger:
    """
    Logger for one pvgae area.

    :param name: Area name such as "training", "graph.io" or "sweep".
    :return: The ``pvgae.<name>`` logger.
    """
    return logging.getLogger(f"{PACKAGE_LOGGER}.{name}")
