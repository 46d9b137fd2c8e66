from pvgae.cmd.cli.config import config_app

__all__ = ["config_app"]
