"""Loggers under the `exoci` namespace"""

import logging

ROOT = "exoci"


def configure_logging(level: str = "WARNING"):
    """
    Attaches a single stderr handler to the `exoci` logger.
    Args:
        level (str): Logging level name, e.g. "INFO".
    """

    logger = logging.getLogger(ROOT)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        logger.addHandler(handler)
    logger.setLevel(level.upper())


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(f"{ROOT}.{name}")
