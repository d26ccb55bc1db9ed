import logging
from logging import DEBUG as DEBUG
from logging import ERROR as ERROR
from logging import INFO as INFO
from logging import WARNING as WARNING
from logging import LogRecord

import colorlog
from colorlog import basicConfig as basicConfig


class PrettyColoredFormatter(colorlog.ColoredFormatter):  # type: ignore[misc]
    def format(self, record: LogRecord) -> str:
        if record.levelno == INFO:
            return record.getMessage()
        else:
            return super().format(record)  # type: ignore[no-any-return]


_FORMATTER = PrettyColoredFormatter(
    fmt="%(log_color)s%(levelname)s: %(message)s",
    log_colors={"ERROR": "red", "WARNING": "red"},
)

_HANDLER = logging.StreamHandler()
_HANDLER.setFormatter(_FORMATTER)

_ROOT_NAME = "climdyn"


def getLogger(name: str) -> logging.Logger:
    # All package loggers hang off one root, which owns the only handler.
    root = logging.getLogger(_ROOT_NAME)
    if _HANDLER not in root.handlers:
        root.propagate = False
        root.addHandler(_HANDLER)
    if name != _ROOT_NAME and not name.startswith(f"{_ROOT_NAME}."):
        name = f"{_ROOT_NAME}.{name}"
    return logging.getLogger(name)


def setLevel(level: int) -> None:
    logging.getLogger(_ROOT_NAME).setLevel(level)
