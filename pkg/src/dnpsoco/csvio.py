"""CSV read/write with a fixed float format and row-numbered errors."""

import csv
import math
from pathlib import Path

__all__ = ["CsvFormatError", "fmt", "write_rows", "read_table"]


class CsvFormatError(ValueError):
    def __init__(self, path, row: int, msg: str):
        super().__init__(f"{path}: row {row}: {msg}")
        self.path = str(path)
        self.row = row


def fmt(v) -> str:
    """17 significant digits, which round-trips every double."""
    if v is None:
        return ""
    if isinstance(v, (bool,)):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_table(path, required=None):
    """Read a headered numeric CSV.

    Returns ``(header, rows)`` where each row is a list of floats, with empty
    cells mapped to ``None``. Row numbers in errors are 1-based file lines.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(path, 1, "missing header row") from None
        header = [h.strip() for h in header]
        for col in required or ():
            if col not in header:
                raise CsvFormatError(path, 1, f"missing column {col!r}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(header):
                raise CsvFormatError(path, lineno, f"expected {len(header)} fields, got {len(raw)}")
            parsed = []
            for name, cell in zip(header, raw):
                cell = cell.strip()
                if cell == "":
                    parsed.append(None)
                    continue
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CsvFormatError(path, lineno, f"column {name!r}: not a number: {cell!r}") from None
            rows.append(parsed)
    return header, rows
