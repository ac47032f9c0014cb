"""Machine-readable output: JSON through ujson, branch tables as CSV."""

import csv
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import ujson
from pydantic import BaseModel

CSV_FLOAT_FORMAT = "%.17g"


def jsonable(value: Any) -> Any:
    """
    Replace non-finite floats by None, recursively.

    :param value: JSON-like structure.
    :return: structure safe for strict JSON.
    """
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, Mapping):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    return value


def dumps(payload: Any) -> str:
    """Serialize with shortest round-trip floats."""
    return ujson.dumps(jsonable(payload), indent=2, escape_forward_slashes=False) + "\n"


def write_json(payload: Any, out: Optional[Path] = None) -> None:
    """
    Write JSON to a file, or to stdout when out is None.

    :param payload: JSON-like structure.
    :param out: target file.
    """
    text = dumps(payload)
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")


def _cell(value: Any) -> Any:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT % value
    return value


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
    """
    Write rows as CSV with a header line.

    :param path: target file.
    :param columns: column names, in order.
    :param rows: mappings keyed by column name.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[column]) for column in columns])


class CommandResult(BaseModel):
    """Base of command responses; written as one JSON document."""

    def write(self, out: Optional[Path] = None) -> None:
        """
        Emit the response.

        :param out: file to write, stdout when None.
        """
        write_json(self.model_dump(mode="json", by_alias=True), out)
