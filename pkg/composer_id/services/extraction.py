import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from composer_id.constants import CLIP_SECONDS, DEFAULT_FPS, ROLL_VARIANTS, SAMPLE_RATE, VARIANT_LOGMEL
from composer_id.dataset.catalog import Catalog
from composer_id.dataset.clips import segment
from composer_id.features.audio import logmel_stack, mel_filterbank
from composer_id.features.rolls import extract_rolls, stack_channels
from composer_id.midi.notes import MidiPiece
from composer_id.repo.audio_repo import read_wav
from composer_id.repo.cache_repo import FeatureRecord
from composer_id.repo.midi_repo import find_midi_file, load_piece

logger = logging.getLogger("composer_id.extraction")

Window = Tuple[float, float]


def worker_count(n_jobs: int) -> int:
    """Pool size: CPU count capped by ``CID_THREADS`` and by the number of jobs."""
    cap = os.environ.get("CID_THREADS", "").strip()
    workers = os.cpu_count() or 1
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            logger.warning("Ignoring non-integer CID_THREADS=%r", cap)
    return max(1, min(workers, n_jobs))


def roll_features(
    piece: MidiPiece, windows: Sequence[Window], variant: str, fps: float, clip_seconds: float = CLIP_SECONDS
) -> List[np.ndarray]:
    """``C x T x 88`` inputs of each window; tails are zero-padded to the full clip length."""
    return [stack_channels(extract_rolls(piece, start, clip_seconds, fps), variant).channels for start, _ in windows]


def audio_features(samples: np.ndarray, windows: Sequence[Window], clip_seconds: float = CLIP_SECONDS) -> List[np.ndarray]:
    """``1 x T x 64`` log-mel inputs of each window, zero-padding past the end of the recording."""
    fb = mel_filterbank()
    clip_len = int(round(clip_seconds * SAMPLE_RATE))
    out = []
    for start, _ in windows:
        begin = int(round(start * SAMPLE_RATE))
        chunk = np.zeros(clip_len, dtype=np.float32)
        part = samples[begin : begin + clip_len]
        chunk[: part.size] = part
        out.append(logmel_stack(chunk, fb))
    return out


@dataclass(frozen=True)
class ExtractionJob:
    source_id: str
    label: int
    duration: float
    path: str
    variant: str
    fps: float
    clip_seconds: float
    sustain_pedal: bool


def run_job(job: ExtractionJob) -> List[FeatureRecord]:
    """Feature records of one piece, in clip start order."""
    windows = segment(job.duration, job.clip_seconds)
    if not windows:
        return []
    if job.variant == VARIANT_LOGMEL:
        channels = audio_features(read_wav(Path(job.path)), windows, job.clip_seconds)
    else:
        piece = load_piece(Path(job.path), job.source_id, sustain_pedal=job.sustain_pedal)
        channels = roll_features(piece, windows, job.variant, job.fps, job.clip_seconds)
    return [FeatureRecord(job.source_id, job.label, c) for c in channels]


def extract_corpus(
    catalog: Catalog,
    variant: str,
    midi_dir: Path,
    audio_dir: Optional[Path] = None,
    fps: float = DEFAULT_FPS,
    clip_seconds: float = CLIP_SECONDS,
    sustain_pedal: bool = False,
    workers: int = 0,
) -> List[FeatureRecord]:
    """
    Extract features of every catalog piece.

    Pieces are processed in parallel; the records come back in catalog
    order, then clip start, whatever the pool size.

    Parameters
    ----------
    catalog : Catalog
        Pieces and labels.
    variant : str
        Roll variant name or ``logmel``.
    midi_dir : Path
        Directory with ``<source_id>.mid`` files (roll variants).
    audio_dir : Path, optional
        Directory with ``<source_id>.wav`` files (``logmel``).
    fps : float, optional
        Roll frame rate.
    clip_seconds : float, optional
        Clip length.
    sustain_pedal : bool, optional
        Extend note offsets while the sustain pedal is held.
    workers : int, optional
        Pool size; 0 picks ``worker_count``.

    Returns
    -------
    list of FeatureRecord
    """
    if variant != VARIANT_LOGMEL and variant not in ROLL_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == VARIANT_LOGMEL and audio_dir is None:
        raise ValueError("logmel extraction needs audio_dir")

    jobs = []
    for entry in catalog.pieces:
        if variant == VARIANT_LOGMEL:
            path = Path(audio_dir) / f"{entry.source_id}.wav"
        else:
            path = find_midi_file(Path(midi_dir), entry.source_id)
        jobs.append(
            ExtractionJob(
                source_id=entry.source_id,
                label=catalog.composer_index[entry.composer],
                duration=entry.duration,
                path=str(path),
                variant=variant,
                fps=fps,
                clip_seconds=clip_seconds,
                sustain_pedal=sustain_pedal,
            )
        )

    n_workers = workers or worker_count(len(jobs))
    logger.info("Extracting %s features of %d pieces with %d worker(s)", variant, len(jobs), n_workers)
    if n_workers <= 1:
        per_piece = [run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            per_piece = list(pool.map(run_job, jobs, chunksize=4))
    return [record for records in per_piece for record in records]
