"""CSV output in full double precision."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

__all__ = ["format_value", "write_csv", "csv_text"]


def format_value(x) -> str:
    """Render floats with 17 significant digits; other values via ``str``."""
    if isinstance(x, float):
        return format(x, ".17g")
    if hasattr(x, "dtype") and getattr(x.dtype, "kind", "") == "f":
        return format(float(x), ".17g")
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV document with ``\\n`` line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_value(x) for x in r])
    return buf.getvalue()


def write_csv(
    path: Optional[Union[str, Path]], header: Sequence[str], rows: Iterable[Sequence]
) -> str:
    """Write :func:`csv_text` to ``path`` (if given) and return the text."""
    text = csv_text(header, rows)
    if path is not None:
        Path(path).write_text(text)
    return text
