"""
Shared command plumbing - exit codes, common options and output reporters
"""
import contextlib
import logging
import sys
from typing import Sequence

import click

from src.models import Units
from src.observers.record_observer import CsvReporter, JsonReporter, LogReporter, RecordPublisher

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_SEARCH_EXHAUSTED = 3

FORMATS = ("csv", "json")


class ValidationFailure(click.ClickException):
    """Input failed parsing or validation"""
    exit_code = EXIT_VALIDATION


def seed_option(func):
    return click.option(
        "--seed", type=int, envvar="COHERENCE_SEED", default=None,
        help="Master seed (falls back to COHERENCE_SEED, then the configured default).",
    )(func)


def format_option(func):
    return click.option(
        "--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True,
        help="Record output format.",
    )(func)


def out_option(func):
    return click.option(
        "--out", type=click.Path(dir_okay=False, writable=True), default=None,
        help="Write records to this file instead of standard output.",
    )(func)


def units_option(func):
    return click.option(
        "--units", type=click.Choice([units.value for units in Units]), default="nats", show_default=True,
        help="Units for entropic measures.",
    )(func)


def alpha_option(func):
    return click.option(
        "--alpha", "alphas", type=float, multiple=True,
        help="Entropic order in (0, 2]; repeatable.",
    )(func)


@contextlib.contextmanager
def record_output(out, fmt: str, columns: Sequence[str], kind: str, log_failures: bool = False):
    """
    Publisher writing rows to --out (or stdout) in the chosen format

    Yields:
        RecordPublisher whose reporters are closed on exit
    """
    stream = open(out, "w", encoding="utf-8", newline="") if out else sys.stdout
    publisher = RecordPublisher()
    if fmt == "json":
        publisher.attach(JsonReporter(stream, kind))
    else:
        publisher.attach(CsvReporter(stream, columns))
    if log_failures:
        publisher.attach(LogReporter())
    try:
        yield publisher
    finally:
        publisher.close()
        if out:
            stream.close()
            logger.info(f"Wrote {kind} records to {out}")
