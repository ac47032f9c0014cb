import logging
import sys
from typing import Any, Union

from loguru import logger

from nematic_mf.settings import LogLevel, settings

# Third-party loggers routed into loguru.
CAPTURED_LOGGERS = ("numba", "scipy", "concurrent.futures")


class InterceptHandler(logging.Handler):
    """
    Forwards standard-library records to loguru.

    numba reports compilation and scipy reports solver trouble through
    ``logging``; their records keep the origin stored on the LogRecord.
    """

    def emit(self, record: logging.LogRecord) -> None:
        """
        Re-log the record with loguru.

        :param record: record to log.
        """
        level: Union[str, int]
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno
        logger.patch(
            lambda patched: patched.update(
                name=record.name,
                function=record.funcName,
                line=record.lineno,
            ),
        ).opt(exception=record.exc_info).log(level, record.getMessage())


def record_formatter(record: dict[str, Any]) -> str:  # pragma: no cover
    """
    Format string for one record.

    Runs bind ``command`` and ``run_id``; pool workers log their pid so
    interleaved chains can be told apart.

    :param record: record information.
    :return: format string.
    """
    extra = record["extra"]
    extra.setdefault("command", "-")
    extra.setdefault("run_id", "-")
    log_format = (
        "<green>{time:HH:mm:ss.SSS}</green> "
        "<level>{level: <8}</level> "
        "<magenta>{extra[command]}</magenta>:<blue>{extra[run_id]}</blue> "
        "pid={process} "
        "<cyan>{name}</cyan>:<cyan>{line}</cyan> "
        "<level>{message}</level>\n"
    )
    if record["exception"]:
        log_format += "{exception}"
    return log_format


def stdlib_level(level: LogLevel) -> int:
    """Numeric level of a loguru level name, on the logging module's scale."""
    return int(logger.level(level.value).no)


def configure_logging(level: LogLevel = settings.log_level) -> None:  # pragma: no cover
    """
    Configures logging.

    stdout carries JSON and CSV results, so the only sink is stderr.

    :param level: minimal level to emit.
    """
    handler = InterceptHandler()
    logging.basicConfig(handlers=[handler], level=logging.NOTSET, force=True)
    for name in CAPTURED_LOGGERS:
        captured = logging.getLogger(name)
        captured.handlers = [handler]
        captured.propagate = False
    # numba logs every compilation pass at DEBUG
    logging.getLogger("numba").setLevel(max(logging.WARNING, stdlib_level(level)))

    logger.remove()
    logger.add(
        sys.stderr,
        level=level.value,
        format=record_formatter,  # type: ignore[arg-type]
        colorize=sys.stderr.isatty(),
        backtrace=level is LogLevel.DEBUG,
        diagnose=False,
    )
