import logging
import sys
from pathlib import Path
from typing import Optional, Union

PACKAGE_LOGGER = "alphacirc"


def setup_logging(
    log_dir: Optional[Union[Path, str]] = None,
    level: Union[int, str] = logging.INFO,
    to_file: bool = False,
) -> logging.Logger:
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level)

    if not logger.handlers:
        # Console handler on stderr so stdout stays clean for data
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_fmt = logging.Formatter("[%(asctime)s] [%(levelname)-8s] %(message)s", datefmt="%H:%M:%S")
        console_handler.setFormatter(console_fmt)
        logger.addHandler(console_handler)

        if to_file:
            log_dir = Path(log_dir) if log_dir else Path.cwd() / "logs"
            log_dir.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_dir / "alphacirc.log", encoding="utf-8")
            file_handler.setLevel(level)
            file_fmt = logging.Formatter("[%(asctime)s] [%(levelname)-8s] %(name)s: %(message)s")
            file_handler.setFormatter(file_fmt)
            logger.addHandler(file_handler)
    else:
        for handler in logger.handlers:
            handler.setLevel(level)

    return logger


def get_logger(name: str = PACKAGE_LOGGER) -> logging.Logger:
    return logging.getLogger(name)
