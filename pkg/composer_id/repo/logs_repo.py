import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List

from composer_id.repo._tsv import read_rows, tsv_writer

LOG_FIELDS = ("epoch", "train_loss", "val_macro_acc")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_macro_acc: float

    def to_row(self) -> List[str]:
        return [str(self.epoch), f"{self.train_loss:.6f}", f"{self.val_macro_acc:.6f}"]


def render_train_log(records: Iterable[EpochRecord]) -> str:
    buf = io.StringIO()
    writer = tsv_writer(buf)
    writer.writerow(LOG_FIELDS)
    writer.writerows(r.to_row() for r in records)
    return buf.getvalue()


def write_train_log(path: Path, records: Iterable[EpochRecord]) -> None:
    """
    Write the training log: a header line then one line per epoch.

    Parameters
    ----------
    path : Path
        Target file.
    records : iterable of EpochRecord
        Per-epoch training loss and validation macro accuracy.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_train_log(records))


def read_train_log(path: Path) -> List[EpochRecord]:
    rows = read_rows(path, len(LOG_FIELDS))
    if not rows or tuple(rows[0]) != LOG_FIELDS:
        raise ValueError(f"{path}: missing training log header")
    return [EpochRecord(int(epoch), float(loss), float(acc)) for epoch, loss, acc in rows[1:]]
