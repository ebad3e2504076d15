import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from composer_id.constants import SAMPLE_RATE, VARIANT_LOGMEL
from composer_id.dataset.clips import segment
from composer_id.nn.model import Model
from composer_id.repo.audio_repo import read_wav
from composer_id.repo.midi_repo import load_piece
from composer_id.services.extraction import audio_features, roll_features

logger = logging.getLogger("composer_id.prediction")

TOP_N = 5


@dataclass(frozen=True)
class Prediction:
    """Per-clip probabilities of one file and their piece-level average."""

    windows: Tuple[Tuple[float, float], ...]
    clip_probs: np.ndarray
    piece_probs: np.ndarray


def top_composers(probs: np.ndarray, composers: Sequence[str], n: int = TOP_N) -> List[Tuple[str, float]]:
    """The ``n`` most probable composers; equal probabilities keep label order."""
    order = np.argsort(-probs, kind="stable")[:n]
    return [(composers[i], float(probs[i])) for i in order]


def predict_file(
    model: Model,
    path: Path,
    variant: str,
    fps: float,
    clip_seconds: float,
    sustain_pedal: bool = False,
    batch_size: int = 16,
) -> Prediction:
    """
    Segment a MIDI (or, for ``logmel``, WAV) file into clips and score them.

    Raises
    ------
    ValueError
        If the file is too short to yield a clip.
    """
    path = Path(path)
    if variant == VARIANT_LOGMEL:
        samples = read_wav(path)
        windows = segment(samples.size / SAMPLE_RATE, clip_seconds)
        inputs = audio_features(samples, windows, clip_seconds)
    else:
        piece = load_piece(path, sustain_pedal=sustain_pedal)
        windows = segment(piece.duration, clip_seconds)
        inputs = roll_features(piece, windows, variant, fps, clip_seconds)
    if not windows:
        raise ValueError(f"{path} is too short to yield a clip")
    clip_probs = model.predict_proba(np.stack(inputs), batch_size=batch_size)
    logger.info("Scored %d clip(s) of %s", len(windows), path)
    return Prediction(tuple(windows), clip_probs, clip_probs.mean(axis=0))
