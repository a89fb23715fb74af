"""
Command-line application for the coherence toolkit
"""
import logging
import os
import sys

import click

from src import __version__
from src.commands import COMMANDS
from src.config import config

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def create_cli(config_name='default'):
    """
    Application factory pattern

    Args:
        config_name: Configuration to use (development, testing, acceptance, default)

    Returns:
        Configured click command group
    """
    app_config = config[config_name]

    # Logs go to stderr; stdout carries records and summaries
    logging.basicConfig(
        level=getattr(logging, app_config.LOG_LEVEL.upper(), logging.WARNING),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )

    @click.group(help=f"{app_config.APP_NAME}: Tsallis-family coherence measures and their verification.")
    @click.version_option(__version__)
    @click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
    @click.pass_context
    def cli(ctx, verbose):
        ctx.obj = app_config
        if verbose:
            logging.getLogger().setLevel(logging.DEBUG)

    # Register commands
    for command in COMMANDS:
        cli.add_command(command)

    logger.debug(f"CLI created with config: {config_name}")
    return cli


cli = create_cli(os.getenv('COHERENCE_CONFIG', 'default'))


if __name__ == '__main__':
    cli()
