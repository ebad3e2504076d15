import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from composer_id.constants import LOWEST_PITCH, NUM_PITCHES, ROLL_VARIANTS
from composer_id.midi.notes import MidiPiece

# keeps decimal times such as 0.29 s at 100 fps on frame 29
FRAME_EPS = 1e-9


@dataclass(frozen=True)
class RollSet:
    """
    Frame, onset and velocity rolls of one clip, each ``T x 88``.
    """

    frame: np.ndarray
    onset: np.ndarray
    velocity: np.ndarray
    fps: float


@dataclass(frozen=True)
class InputStack:
    """
    Channels of one model input, all the same shape.

    ``channels`` is a ``C x T x K`` (or ``C x T x F``) float32 array.
    """

    channels: np.ndarray
    names: Tuple[str, ...]


def frame_index(seconds: float, fps: float) -> int:
    return math.floor(seconds * fps + FRAME_EPS)


def extract_rolls(piece: MidiPiece, start: float, duration: float, fps: float) -> RollSet:
    """
    Render the notes of ``piece`` inside ``[start, start + duration)`` as rolls.

    A note occupies frames ``[floor((onset - start) * fps), floor((offset - start) * fps))``
    clamped to the clip; a note shorter than one frame still occupies its
    onset frame. The onset roll marks only the onset frame and only when the
    onset lies inside the window. The velocity roll carries velocity / 127 on
    every active frame, the loudest note winning where notes overlap.

    Parameters
    ----------
    piece : MidiPiece
        Source piece.
    start : float
        Window start in seconds, >= 0.
    duration : float
        Window length in seconds, > 0.
    fps : float
        Frames per second, > 0.

    Returns
    -------
    RollSet
        Rolls with ``T = round(duration * fps)`` rows and 88 columns.
    """
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    if duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    if start < 0:
        raise ValueError(f"start must be >= 0, got {start}")

    n_frames = int(round(duration * fps))
    end = start + duration
    frame = np.zeros((n_frames, NUM_PITCHES), dtype=np.float32)
    onset = np.zeros_like(frame)
    velocity = np.zeros_like(frame)

    for note in piece.notes:
        sounding_until = note.offset if note.offset > note.onset else note.onset + 1.0 / fps
        if note.onset >= end or sounding_until <= start:
            continue
        col = note.pitch - LOWEST_PITCH
        raw_start = frame_index(note.onset - start, fps)
        raw_end = max(frame_index(note.offset - start, fps), raw_start + 1)
        lo = min(max(raw_start, 0), n_frames)
        hi = min(max(raw_end, 0), n_frames)
        if hi > lo:
            frame[lo:hi, col] = 1.0
            np.maximum(velocity[lo:hi, col], note.velocity / 127.0, out=velocity[lo:hi, col])
        if note.onset >= start and lo < n_frames:
            onset[lo, col] = 1.0

    return RollSet(frame=frame, onset=onset, velocity=velocity, fps=fps)


def stack_channels(rolls: RollSet, variant: str) -> InputStack:
    """
    Select roll channels for an input variant, in (frame, onset, velocity) order.
    """
    try:
        names = ROLL_VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown roll variant {variant!r}; expected one of {sorted(ROLL_VARIANTS)}") from None
    channels = np.stack([getattr(rolls, name) for name in names]).astype(np.float32, copy=False)
    return InputStack(channels=channels, names=names)
