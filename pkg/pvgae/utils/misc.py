"""
Miscellaneous utility functions for the pvgae CLI.

Key utilities:
- config_hash: Stable short digest of a configuration payload
- unique_run_dir: Run directory named by hash and seed, never overwritten
- parse_values / parse_seeds: Comma-separated option parsing
- handle_errors: Turn toolkit errors into a red message and an exit code
"""

import json
import hashlib
from pathlib import Path
from contextlib import contextmanager
from typing import Any, Callable, Iterator, List, TypeVar

import typer
from rich import print

from pvgae.utils.errors import ConfigError, PvgaeError, TrainingAborted

T = TypeVar("T")


def config_hash(payload: Any) -> str:
    """
    Hash a JSON-serializable payload.

    Keys are sorted and separators fixed so equal payloads always give the
    same digest.

    :param payload: Nested dicts/lists of plain values.
    :return: First 12 hex characters of the SHA-256 digest.
    """
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def unique_run_dir(root: Path, prefix: str, digest: str, seed: int) -> Path:
    """
    Create and return ``<root>/<prefix>-<digest>-s<seed>``.

    When that directory already exists a numeric suffix ``-1``, ``-2``, ...
    is appended so no earlier run is overwritten.
    """
    root = Path(root)
    base = f"{prefix}-{digest}-s{seed}"
    candidate = root / base
    counter = 0
    while candidate.exists():
        counter += 1
        candidate = root / f"{base}-{counter}"
    candidate.mkdir(parents=True)
    return candidate


def parse_values(text: str, cast: Callable[[str], T] = float) -> List[T]:
    """
    Parse a comma-separated list such as ``0.1,1,10``.

    :raises typer.BadParameter: On an empty list or an unparsable item.
    """
    items = [part.strip() for part in (text or "").split(",") if part.strip()]
    if not items:
        raise typer.BadParameter("Expected a comma-separated list of values")
    try:
        return [cast(item) for item in items]
    except ValueError:
        raise typer.BadParameter(f"Invalid value list: {text}") from None


def parse_seeds(text: str) -> List[int]:
    """
    Parse seeds given either as a list (``0,1,2``) or a count (``3`` → 0, 1, 2).
    """
    seeds = parse_values(text, int)
    if len(seeds) == 1 and "," not in text:
        return list(range(seeds[0]))
    return seeds


@contextmanager
def handle_errors() -> Iterator[None]:
    """
    Report toolkit and I/O errors to the user and exit non-zero.

    Configuration errors exit with code 2, everything else with 1.
    """
    try:
        yield
    except ConfigError as e:
        print(f"[red]Config error:[/red] {e}")
        raise typer.Exit(2)
    except TrainingAborted as e:
        print(f"[red]Training aborted:[/red] {e}")
        raise typer.Exit(1)
    except PvgaeError as e:
        print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1)
    except OSError as e:
        print(f"[red]I/O error:[/red] {e}")
        raise typer.Exit(1)
