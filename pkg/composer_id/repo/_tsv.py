import csv
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO


def tsv_writer(fh: TextIO):
    """Tab-separated writer with ``\\n`` line ends; fields are quoted only when they hold a tab, quote or newline."""
    return csv.writer(fh, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)


def write_rows(path: Path, rows: Iterable[Sequence[object]], header: Optional[Sequence[str]] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = tsv_writer(fh)
        if header is not None:
            writer.writerow(header)
        writer.writerows(rows)


def read_rows(path: Path, n_fields: int) -> List[List[str]]:
    """
    Non-blank rows of a tab-separated file.

    Raises
    ------
    ValueError
        On a row with a field count other than ``n_fields``, naming the line.
    """
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        for fields in reader:
            if not any(f.strip() for f in fields):
                continue
            if len(fields) != n_fields:
                raise ValueError(
                    f"{path}:{reader.line_num}: expected {n_fields} tab-separated fields, got {len(fields)}"
                )
            rows.append(fields)
    return rows
