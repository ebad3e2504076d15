"""
Audio front end: STFT magnitude, triangular mel filterbank and log-mel.

Defaults follow the reference configuration: 16 kHz input, Hann window of
1024 samples, hop 160 (100 frames per second), 64 mel bins over 30-8000 Hz.
"""

from dataclasses import dataclass

import numpy as np

from composer_id.constants import HOP_SIZE, LOG_FLOOR, MEL_FMAX, MEL_FMIN, N_MELS, SAMPLE_RATE, WINDOW_SIZE


@dataclass(frozen=True)
class MelSpectrogram:
    """Natural-log mel magnitudes, ``T x F``."""

    values: np.ndarray
    frame_rate: float


def hz_to_mel(freq):
    return 2595.0 * np.log10(1.0 + np.asarray(freq, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_frequencies(n_mels: int, f_min: float, f_max: float) -> np.ndarray:
    """
    Boundary frequencies of ``n_mels`` triangular filters.

    Returns ``n_mels + 2`` frequencies in Hz, equally spaced on the mel scale
    ``mel(f) = 2595 * log10(1 + f / 700)``.
    """
    if n_mels < 1:
        raise ValueError(f"n_mels must be >= 1, got {n_mels}")
    if not 0 <= f_min < f_max:
        raise ValueError(f"invalid mel range: f_min={f_min}, f_max={f_max}")
    mels = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2)
    return mel_to_hz(mels)


def mel_filterbank(
    sample_rate: int = SAMPLE_RATE,
    n_fft: int = WINDOW_SIZE,
    n_mels: int = N_MELS,
    f_min: float = MEL_FMIN,
    f_max: float = MEL_FMAX,
) -> np.ndarray:
    """
    Triangular filters with unit peak, shape ``n_mels x (n_fft // 2 + 1)``.
    """
    bounds = mel_frequencies(n_mels, f_min, f_max)
    bin_freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    lower = bounds[:-2, None]
    center = bounds[1:-1, None]
    upper = bounds[2:, None]
    rising = (bin_freqs[None, :] - lower) / (center - lower)
    falling = (upper - bin_freqs[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def hann_window(size: int) -> np.ndarray:
    """Symmetric Hann window ``0.5 - 0.5 cos(2 pi n / (N - 1))``."""
    n = np.arange(size)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / (size - 1))


def stft_magnitude(
    samples: np.ndarray,
    sample_rate: int = SAMPLE_RATE,
    window_size: int = WINDOW_SIZE,
    hop: int = HOP_SIZE,
) -> np.ndarray:
    """
    One-sided STFT magnitude of a mono waveform.

    Frames are centered on ``t * hop`` with reflection padding, giving
    ``floor(len / hop) + 1`` frames of ``window_size // 2 + 1`` bins.
    ``sample_rate`` is accepted for symmetry with the mel stage.
    """
    if window_size < 2 or window_size & (window_size - 1):
        raise ValueError(f"window_size must be a power of two, got {window_size}")
    if hop < 1:
        raise ValueError(f"hop must be >= 1, got {hop}")
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise ValueError(f"expected a mono waveform, got shape {samples.shape}")
    n_bins = window_size // 2 + 1
    if samples.size == 0:
        return np.zeros((0, n_bins))

    n_frames = samples.size // hop + 1
    padded = np.pad(samples, window_size // 2, mode="reflect")
    frames = np.lib.stride_tricks.sliding_window_view(padded, window_size)[::hop][:n_frames]
    return np.abs(np.fft.rfft(frames * hann_window(window_size), axis=1))


def log_mel(spec: np.ndarray, filterbank: np.ndarray, frame_rate: float = SAMPLE_RATE / HOP_SIZE) -> MelSpectrogram:
    """
    Project an STFT magnitude through a filterbank and take ``ln(max(x, 1e-10))``.
    """
    if spec.ndim != 2 or filterbank.ndim != 2 or spec.shape[1] != filterbank.shape[1]:
        raise ValueError(f"shape mismatch: spectrogram {spec.shape} vs filterbank {filterbank.shape}")
    values = np.log(np.maximum(spec @ filterbank.T, LOG_FLOOR))
    return MelSpectrogram(values=values, frame_rate=frame_rate)


def logmel_stack(samples: np.ndarray, filterbank: np.ndarray) -> np.ndarray:
    """Log-mel of a waveform clip as a single-channel ``1 x T x F`` float32 input."""
    mel = log_mel(stft_magnitude(samples), filterbank)
    return mel.values[None].astype(np.float32)
