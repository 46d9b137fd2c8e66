"""
Configuration management commands for the pvgae CLI.

This module provides commands for viewing, initializing, validating and
locating the pvgae configuration file.

Commands:
- show: Display current configuration with all settings
- init: Create a default configuration file
- validate: Check the current configuration without running anything
- path: Show the path to the configuration file
"""

import yaml
import typer
from rich import print

from pvgae.utils.config import default_config_file, get_config, init_config_file
from pvgae.utils.misc import handle_errors

# Create the config sub-application
# no_args_is_help=True ensures help is shown when no command is given
config_app = typer.Typer(no_args_is_help=True)


@config_app.command("show")
def config_show() -> None:
    """
    Show current configuration.

    Displays the effective configuration in YAML format: file values,
    environment overrides and global CLI options already applied.
    """
    config = get_config()
    print("[cyan]Current configuration:[/cyan]\n")
    print(yaml.safe_dump(config.to_dict(), default_flow_style=False, sort_keys=False))
    print(f"[dim]config hash: {config.config_hash()}[/dim]")


@config_app.command("init")
def config_init(force: bool = typer.Option(False, "--force", "-f", help="Overwrite existing config")) -> None:
    """
    Create default config file.

    Requires --force to replace an existing file so custom settings are not
    lost by accident.

    :param force: Overwrite an existing config file.
    """
    path = default_config_file()
    with handle_errors():
        written = init_config_file(path, force=force)
    if not written:
        print(f"[yellow]Config already exists:[/yellow] {path}")
        print("Use --force to overwrite")
        return
    print(f"[green]✓ Config created:[/green] {path}")


@config_app.command("validate")
def config_validate() -> None:
    """
    Validate the current configuration.

    Exits with code 2 and names the offending field when a value is invalid.
    """
    config = get_config()
    with handle_errors():
        config.validate()
    print("[green]✓ Configuration is valid[/green]")


@config_app.command("path")
def config_path() -> None:
    """
    Show config file path.

    Prints the location pvgae reads its configuration from by default.
    """
    print(default_config_file())
