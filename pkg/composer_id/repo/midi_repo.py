from pathlib import Path

from composer_id.midi.notes import MidiPiece
from composer_id.midi.smf import parse_midi

MIDI_SUFFIXES = (".mid", ".midi")


def load_piece(path: Path, source_id: str = "", composer: str = "", sustain_pedal: bool = False) -> MidiPiece:
    """Read and parse one MIDI file; ``source_id`` defaults to the file stem."""
    path = Path(path)
    return parse_midi(path.read_bytes(), source_id=source_id or path.stem, composer=composer, sustain_pedal=sustain_pedal)


def find_midi_file(midi_dir: Path, source_id: str) -> Path:
    """Locate ``<source_id>.mid`` (or ``.midi``) under ``midi_dir``."""
    for suffix in MIDI_SUFFIXES:
        candidate = Path(midi_dir) / f"{source_id}{suffix}"
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"no MIDI file for {source_id!r} in {midi_dir}")
