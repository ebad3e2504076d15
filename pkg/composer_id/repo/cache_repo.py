import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from composer_id.constants import CACHE_MAGIC
from composer_id.dataset.clips import ClipSet
from composer_id.repo._binary import ByteReader, f32, text, u32

logger = logging.getLogger("composer_id.cache")


@dataclass(frozen=True)
class FeatureRecord:
    """One clip of the feature cache: ``channels`` is ``C x T x K`` float32."""

    source_id: str
    label: int
    channels: np.ndarray

    def encode(self) -> bytes:
        n_channels, n_frames, n_bins = self.channels.shape
        return text(self.source_id) + u32(self.label, n_channels, n_frames, n_bins) + f32(self.channels)


def write_cache(path: Path, records: Iterable[FeatureRecord]) -> int:
    """
    Write a CCF1 feature cache.

    The file is written next to ``path`` and renamed into place, so a
    failed write never leaves a partial cache behind.

    Parameters
    ----------
    path : Path
        Target cache file.
    records : iterable of FeatureRecord
        Records in their final order (manifest order, then clip start).

    Returns
    -------
    int
        Number of records written.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    count = 0
    try:
        with open(tmp, "wb") as fh:
            fh.write(CACHE_MAGIC)
            for record in records:
                fh.write(record.encode())
                count += 1
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()
    logger.info("Wrote %d feature records to %s", count, path)
    return count


def read_cache(path: Path) -> List[FeatureRecord]:
    """
    Read every record of a CCF1 feature cache.

    Raises
    ------
    ValueError
        On a wrong magic or a truncated record.
    """
    reader = ByteReader(Path(path).read_bytes(), str(path))
    if reader.take(len(CACHE_MAGIC)) != CACHE_MAGIC:
        raise ValueError(f"{path}: not a feature cache (bad magic)")
    records = []
    while not reader.at_end():
        source_id = reader.text()
        label, n_channels, n_frames, n_bins = reader.u32(4)
        records.append(FeatureRecord(source_id, label, reader.f32((n_channels, n_frames, n_bins))))
    return records


def to_clip_set(records: List[FeatureRecord], keep: Optional[set] = None) -> ClipSet:
    """
    Stack cache records into a ``ClipSet``.

    Parameters
    ----------
    records : list of FeatureRecord
        Records sharing one ``C x T x K`` shape.
    keep : set of str, optional
        Source ids to keep; all records when omitted.
    """
    chosen = [r for r in records if keep is None or r.source_id in keep]
    if not chosen:
        return ClipSet(np.zeros((0, 0, 0, 0), dtype=np.float32), np.zeros(0, dtype=np.int64), ())
    shapes = {r.channels.shape for r in chosen}
    if len(shapes) != 1:
        raise ValueError(f"feature records have mixed shapes: {sorted(shapes)}")
    return ClipSet(
        features=np.stack([r.channels for r in chosen]),
        labels=np.array([r.label for r in chosen], dtype=np.int64),
        source_ids=tuple(r.source_id for r in chosen),
    )
