"""
Standard MIDI File writer and synthetic composer styles for tests.
"""

import struct
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from composer_id.midi.notes import MidiPiece, NoteEvent

TPQ = 480
TEMPO = 500000  # 120 BPM: 960 ticks per second

# (pitch, on_tick, off_tick, velocity)
TickNote = Tuple[int, int, int, int]


def varlen(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def tempo_event(tick: int, tempo: int) -> Tuple[int, int, bytes]:
    return tick, 0, b"\xff\x51\x03" + tempo.to_bytes(3, "big")


def note_events(notes: Iterable[TickNote], channel: int = 0, zero_velocity_off: bool = False):
    """Timed events of notes; at equal ticks note-offs come before note-ons."""
    events = []
    for pitch, on_tick, off_tick, velocity in notes:
        events.append((on_tick, 2, bytes([0x90 | channel, pitch, velocity])))
        if zero_velocity_off:
            events.append((off_tick, 1, bytes([0x90 | channel, pitch, 0])))
        else:
            events.append((off_tick, 1, bytes([0x80 | channel, pitch, 64])))
    return events


def track_chunk(events: Sequence[Tuple[int, int, bytes]]) -> bytes:
    body = b""
    tick = 0
    for at, _, payload in sorted(events, key=lambda e: (e[0], e[1])):
        body += varlen(at - tick) + payload
        tick = at
    body += b"\x00\xff\x2f\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + body


def smf_bytes(tracks: Sequence[Sequence[Tuple[int, int, bytes]]], tpq: int = TPQ, fmt: int = None) -> bytes:
    if fmt is None:
        fmt = 0 if len(tracks) == 1 else 1
    header = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), tpq)
    return header + b"".join(track_chunk(t) for t in tracks)


def midi_from_notes(notes: Iterable[TickNote], tpq: int = TPQ, tempo: int = TEMPO, **kwargs) -> bytes:
    return smf_bytes([[tempo_event(0, tempo), *note_events(notes, **kwargs)]], tpq=tpq)


def seconds(tick: int, tpq: int = TPQ, tempo: int = TEMPO) -> float:
    return tick * tempo / (tpq * 1e6)


def random_tick_notes(rng: np.random.Generator, n: int, max_tick: int = 20000) -> List[TickNote]:
    """Non-overlapping-per-pitch random notes (FIFO order is then unambiguous)."""
    notes = []
    busy = {}
    for _ in range(n):
        pitch = int(rng.integers(21, 109))
        start = int(rng.integers(busy.get(pitch, 0), busy.get(pitch, 0) + max_tick // 10 + 1))
        end = start + int(rng.integers(1, 2000))
        busy[pitch] = end
        notes.append((pitch, start, end, int(rng.integers(1, 128))))
    return notes


def styled_notes(style: str, rng: np.random.Generator, duration: float) -> List[NoteEvent]:
    """
    Notes of a synthetic composer.

    ``"diatonic"``: one mid-register C-major line, soft. ``"clusters"``:
    loud chromatic three-note clusters in the low register.
    """
    notes = []
    t = 0.0
    if style == "diatonic":
        scale = [60, 62, 64, 65, 67, 69, 71, 72, 74, 76, 77, 79]
        while t < duration:
            length = float(rng.choice([0.25, 0.5]))
            pitch = int(rng.choice(scale))
            notes.append(NoteEvent(pitch, t, min(t + length, duration), int(rng.integers(40, 71))))
            t += length
    elif style == "clusters":
        while t < duration:
            root = int(rng.integers(28, 46))
            end = min(t + 0.5, duration)
            velocity = int(rng.integers(90, 121))
            notes.extend(NoteEvent(root + i, t, end, velocity) for i in range(3))
            t += 0.75
    else:
        raise ValueError(style)
    return notes


def write_piece(path: Path, notes: Iterable[NoteEvent]) -> None:
    """Write notes (times rounded to ticks at 120 BPM) as a format-0 file."""
    ticks = [
        (n.pitch, round(n.onset * 960), max(round(n.offset * 960), round(n.onset * 960) + 1), n.velocity) for n in notes
    ]
    path.write_bytes(midi_from_notes(ticks))


def styled_piece(style: str, rng: np.random.Generator, duration: float, source_id: str = "") -> MidiPiece:
    return MidiPiece.from_notes(styled_notes(style, rng, duration), source_id=source_id)
