"""CSV reading/writing helpers.

All toolkit CSVs are UTF-8 with LF line endings and may carry leading `#`
comment lines (the CLI stamps a config hash there). Readers skip comments;
writers emit a fixed column order so identical data produces identical bytes.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, Iterator, Sequence

from .errors import ParseError


def write_csv(
    path: str,
    header: Sequence[str],
    rows: Iterable[Sequence],
    comment: str | None = None,
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def read_rows(path: str, expected_header: Sequence[str]) -> Iterator[tuple[int, list[str]]]:
    """Yield (line_number, fields) for each data row, checking the header."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lineno = 0
        header_seen = False
        for raw in fh:
            lineno += 1
            line = raw.rstrip("\n").rstrip("\r")
            if line.startswith("#"):
                continue
            if not line and not header_seen:
                continue
            fields = next(csv.reader(io.StringIO(line)))
            if not header_seen:
                if fields != list(expected_header):
                    raise ParseError(
                        path, lineno,
                        f"expected header {','.join(expected_header)!r}, got {line!r}",
                    )
                header_seen = True
                continue
            if not line:
                continue
            yield lineno, fields


def parse_int_fields(path: str, lineno: int, fields: Sequence[str], n: int) -> list[int]:
    if len(fields) != n:
        raise ParseError(path, lineno, f"expected {n} fields, got {len(fields)}")
    out = []
    for f in fields:
        try:
            out.append(int(f))
        except ValueError:
            raise ParseError(path, lineno, f"not an integer: {f!r}") from None
    return out
