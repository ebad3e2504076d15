import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from composer_id.constants import CLIP_SECONDS, MIN_SHORT_PIECE_SECONDS, MIN_TAIL_SECONDS
from composer_id.dataset.catalog import Catalog


@dataclass(frozen=True)
class Clip:
    """A fixed-length window of a piece; it inherits the piece's composer label."""

    source_id: str
    start: float
    label: int
    duration: float = CLIP_SECONDS


def segment(piece_duration: float, clip_len: float = CLIP_SECONDS) -> List[Tuple[float, float]]:
    """
    Cut a piece into non-overlapping windows tiling it from 0.

    Full windows are always kept. A trailing partial window is kept (and
    later zero-padded) when it lasts at least half a clip; a piece shorter
    than that yields one padded clip when it lasts at least 5 seconds.

    Parameters
    ----------
    piece_duration : float
        Piece length in seconds, >= 0.
    clip_len : float, optional
        Clip length in seconds, by default 30.

    Returns
    -------
    list of (start, end)
        Window bounds in seconds; ``end - start < clip_len`` for a padded tail.
    """
    if piece_duration < 0:
        raise ValueError(f"piece duration must be >= 0, got {piece_duration}")
    min_tail = MIN_TAIL_SECONDS * clip_len / CLIP_SECONDS
    if piece_duration < min_tail:
        return [(0.0, piece_duration)] if piece_duration >= MIN_SHORT_PIECE_SECONDS else []

    n_full = math.floor(piece_duration / clip_len)
    windows = [(i * clip_len, (i + 1) * clip_len) for i in range(n_full)]
    tail = piece_duration - n_full * clip_len
    if tail >= min_tail:
        windows.append((n_full * clip_len, piece_duration))
    return windows


def make_clips(catalog: Catalog, clip_len: float = CLIP_SECONDS) -> List[Clip]:
    """Clips of every catalog piece, in catalog order then start time."""
    return [
        Clip(entry.source_id, start, catalog.composer_index[entry.composer], clip_len)
        for entry in catalog.pieces
        for start, _ in segment(entry.duration, clip_len)
    ]


@dataclass
class ClipSet:
    """
    Feature tensors of a list of clips.

    Parameters
    ----------
    features : np.ndarray
        ``N x C x T x K`` float32 inputs.
    labels : np.ndarray
        ``N`` composer labels (int64).
    source_ids : sequence of str
        Parent piece of each clip.
    """

    features: np.ndarray
    labels: np.ndarray
    source_ids: Tuple[str, ...]

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.source_ids = tuple(self.source_ids)
        if not (len(self.features) == len(self.labels) == len(self.source_ids)):
            raise ValueError(
                f"clip set length mismatch: {len(self.features)} features, "
                f"{len(self.labels)} labels, {len(self.source_ids)} source ids"
            )

    def __len__(self) -> int:
        return len(self.labels)

    def select(self, indices: Sequence[int]) -> "ClipSet":
        idx = np.asarray(indices, dtype=np.int64)
        features = self.features[idx] if len(idx) else self.features[:0]
        return ClipSet(features, self.labels[idx], tuple(self.source_ids[i] for i in idx))


def batch_iterator(
    clips: ClipSet, batch_size: int, seed: int, epoch: int, shuffle: bool = True
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """
    Yield ``(inputs B x C x T x K, labels B)`` batches.

    The order is a permutation drawn from a generator seeded with
    ``(seed, epoch)``; the last batch may be short.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    n = len(clips)
    if n == 0:
        return
    order = np.random.default_rng([seed, epoch]).permutation(n) if shuffle else np.arange(n)
    for begin in range(0, n, batch_size):
        idx = order[begin : begin + batch_size]
        yield clips.features[idx], clips.labels[idx]
