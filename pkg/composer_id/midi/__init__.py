from composer_id.midi.notes import MidiPiece, NoteEvent, TempoMap
from composer_id.midi.smf import MidiFormatError, parse_midi, read_varlen, ticks_to_seconds

__all__ = [
    "MidiFormatError",
    "MidiPiece",
    "NoteEvent",
    "TempoMap",
    "parse_midi",
    "read_varlen",
    "ticks_to_seconds",
]
