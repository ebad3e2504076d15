from composer_id.features.audio import (
    MelSpectrogram,
    log_mel,
    logmel_stack,
    mel_filterbank,
    mel_frequencies,
    stft_magnitude,
)
from composer_id.features.rolls import InputStack, RollSet, extract_rolls, stack_channels

__all__ = [
    "InputStack",
    "MelSpectrogram",
    "RollSet",
    "extract_rolls",
    "log_mel",
    "logmel_stack",
    "mel_filterbank",
    "mel_frequencies",
    "stack_channels",
    "stft_magnitude",
]
