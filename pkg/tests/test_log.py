import logging

import pytest
from loguru import logger

from nematic_mf.log import InterceptHandler, stdlib_level
from nematic_mf.settings import LogLevel


def test_intercepted_record_keeps_its_origin() -> None:
    messages: list[str] = []
    sink = logger.add(messages.append, format="{level}|{name}|{function}|{line}|{message}")
    record = logging.LogRecord(
        name="scipy.optimize",
        level=logging.WARNING,
        pathname="minpack.py",
        lineno=42,
        msg="tolerance %s",
        args=("reached",),
        exc_info=None,
        func="brentq",
    )
    try:
        InterceptHandler().emit(record)
    finally:
        logger.remove(sink)
    assert [message.strip() for message in messages] == [
        "WARNING|scipy.optimize|brentq|42|tolerance reached",
    ]


def test_unknown_stdlib_level_is_forwarded_by_number() -> None:
    messages: list[str] = []
    sink = logger.add(messages.append, level=0, format="{level.no}|{message}")
    record = logging.LogRecord("numba", 25, "core.py", 1, "compiled", None, None)
    record.levelname = "NOTICE"
    try:
        InterceptHandler().emit(record)
    finally:
        logger.remove(sink)
    assert [message.strip() for message in messages] == ["25|compiled"]


@pytest.mark.parametrize(
    ("level", "number"),
    [
        (LogLevel.TRACE, 5),
        (LogLevel.DEBUG, logging.DEBUG),
        (LogLevel.INFO, logging.INFO),
        (LogLevel.WARNING, logging.WARNING),
        (LogLevel.ERROR, logging.ERROR),
        (LogLevel.CRITICAL, logging.CRITICAL),
    ],
)
def test_every_level_is_known_to_loguru(level: LogLevel, number: int) -> None:
    assert stdlib_level(level) == number
