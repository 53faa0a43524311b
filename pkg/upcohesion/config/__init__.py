import logging
import os
from dataclasses import dataclass

WORKSPACE_ENV = "UPCOHESION_WORKSPACE"
LOG_LEVEL_ENV = "UPCOHESION_LOG_LEVEL"
FRESH_PREFIX_ENV = "UPCOHESION_FRESH_PREFIX"
JOBS_ENV = "UPCOHESION_JOBS"

DEFAULT_WORKSPACE = ".upcohesion"
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_FRESH_PREFIX = "c"

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


@dataclass(frozen=True)
class Settings:
    """
    Process-level settings.

    Library calls take their options explicitly; Settings only feeds the CLI
    defaults.
    """

    workspace: str = DEFAULT_WORKSPACE
    log_level: str = DEFAULT_LOG_LEVEL
    fresh_prefix: str = DEFAULT_FRESH_PREFIX
    jobs: int = 1

    @classmethod
    def from_env(cls, environ=None) -> "Settings":
        """
        Read settings from environment variables.

        Arguments:
            environ (dict: None): Mapping to read instead of os.environ

        Returns:
            Settings: The settings, defaults filled in

        """
        env = os.environ if environ is None else environ
        try:
            jobs = int(env.get(JOBS_ENV, "1"))
        except ValueError:
            jobs = 1
        return cls(
            workspace=env.get(WORKSPACE_ENV, DEFAULT_WORKSPACE),
            log_level=env.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper(),
            fresh_prefix=env.get(FRESH_PREFIX_ENV, DEFAULT_FRESH_PREFIX),
            jobs=max(jobs, 1),
        )


def configure_logging(level="WARNING") -> logging.Logger:
    """
    Attach a single stderr handler to the package logger.

    Calling this twice replaces the level but never stacks handlers.

    Arguments:
        level (Union[str, int]): A logging level name or number

    Returns:
        logging.Logger: The `upcohesion` logger

    """
    logger = logging.getLogger("upcohesion")
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.WARNING)
    logger.setLevel(level)
    if not any(getattr(h, "_upcohesion", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._upcohesion = True
        logger.addHandler(handler)
    return logger
