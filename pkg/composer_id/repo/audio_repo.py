import logging
from pathlib import Path

import numpy as np
import soundfile as sf

from composer_id.constants import SAMPLE_RATE

logger = logging.getLogger("composer_id.audio")


def read_wav(path: Path) -> np.ndarray:
    """
    Read a 16 kHz mono 16-bit PCM WAV file.

    Parameters
    ----------
    path : Path
        WAV file.

    Returns
    -------
    np.ndarray
        float32 samples in [-1, 1).

    Raises
    ------
    ValueError
        If the file is not 16 kHz, mono, 16-bit PCM.
    """
    info = sf.info(str(path))
    if info.samplerate != SAMPLE_RATE or info.channels != 1 or info.subtype != "PCM_16":
        raise ValueError(
            f"{path}: expected {SAMPLE_RATE} Hz mono PCM_16, got {info.samplerate} Hz, "
            f"{info.channels} channel(s), {info.subtype}"
        )
    samples, _ = sf.read(str(path), dtype="float32", always_2d=False)
    logger.debug("Read %s: %d samples", path, samples.shape[0])
    return samples
