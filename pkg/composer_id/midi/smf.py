"""
Standard MIDI File reader.

Reads format 0/1 files with metrical division into a ``MidiPiece`` of
absolute-time notes. Only tempo and end-of-track meta events are
interpreted; every other meta or SysEx event is skipped.
"""

import bisect
import logging
import struct
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Tuple

from composer_id.constants import HIGHEST_PITCH, LOWEST_PITCH
from composer_id.midi.notes import MidiPiece, NoteEvent, TempoMap

logger = logging.getLogger("composer_id.midi")

MAX_VARLEN_BYTES = 4
SUSTAIN_CONTROLLER = 64

unpack_chunk_length = struct.Struct(">I").unpack_from
unpack_header = struct.Struct(">HHH").unpack_from


class MidiFormatError(ValueError):
    """Malformed Standard MIDI File, with the byte offset of the problem."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


@dataclass
class _TrackNotes:
    notes: List[Tuple[int, int, int, int]] = field(default_factory=list)  # on_tick, off_tick, pitch, velocity
    tempos: List[Tuple[int, int]] = field(default_factory=list)


def read_varlen(data: bytes, pos: int) -> Tuple[int, int]:
    """
    Read a variable-length quantity.

    Parameters
    ----------
    data : bytes
        Raw file bytes.
    pos : int
        Index of the first byte of the quantity.

    Returns
    -------
    value : int
        Decoded big-endian 7-bit-per-byte value.
    next_pos : int
        Index just past the last byte (the one with the high bit clear).

    Raises
    ------
    MidiFormatError
        On truncated input or more than four bytes.
    """
    value = 0
    for i in range(MAX_VARLEN_BYTES):
        if pos + i >= len(data):
            raise MidiFormatError("truncated variable-length quantity", pos + i)
        byte = data[pos + i]
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos + i + 1
    raise MidiFormatError("variable-length quantity longer than 4 bytes", pos)


def ticks_to_seconds(tick: int, tempo_map: TempoMap) -> float:
    """
    Convert an absolute tick to seconds by accumulating tempo segments.

    Parameters
    ----------
    tick : int
        Absolute tick, >= 0.
    tempo_map : TempoMap
        Tempo map of the file.

    Returns
    -------
    float
        Seconds from the start of the file.
    """
    if tick < 0:
        raise ValueError(f"tick must be >= 0, got {tick}")
    i = bisect.bisect_right(tempo_map._starts, tick) - 1
    seg_tick, tempo = tempo_map.entries[i]
    return tempo_map._segment_seconds[i] + (tick - seg_tick) * tempo / (tempo_map.ticks_per_quarter * 1e6)


def parse_midi(data: bytes, source_id: str = "", composer: str = "", sustain_pedal: bool = False) -> MidiPiece:
    """
    Parse Standard MIDI File bytes into a piece of absolute-time notes.

    Note-on/note-off pairs are matched first-in first-out per (channel,
    pitch) within each track; a note-on with velocity 0 is a note-off.
    Notes still open at end-of-track are closed there. Notes outside the
    piano keyboard (21..108) are dropped.

    Parameters
    ----------
    data : bytes
        Whole file contents.
    source_id : str, optional
        Identifier carried into the piece.
    composer : str, optional
        Composer label carried into the piece.
    sustain_pedal : bool, optional
        When True, note-offs received while CC64 >= 64 are held until the
        pedal is released (or the key is struck again). Default False.

    Returns
    -------
    MidiPiece

    Raises
    ------
    MidiFormatError
        Missing header, bad chunk length, unsupported format, SMPTE
        division, or a data byte without running status.
    """
    data = bytes(data)
    if data[:4] != b"MThd":
        raise MidiFormatError("missing MThd header", 0)
    if len(data) < 14:
        raise MidiFormatError("truncated header chunk", len(data))

    (header_len,) = unpack_chunk_length(data, 4)
    if header_len < 6 or 8 + header_len > len(data):
        raise MidiFormatError(f"bad header chunk length {header_len}", 4)
    fmt, n_tracks, division = unpack_header(data, 8)
    if fmt not in (0, 1):
        raise MidiFormatError(f"unsupported SMF format {fmt}", 8)
    if division & 0x8000:
        raise MidiFormatError("SMPTE time division is not supported", 12)
    if division == 0:
        raise MidiFormatError("ticks per quarter must be > 0", 12)

    tracks: List[_TrackNotes] = []
    pos = 8 + header_len
    while pos < len(data):
        if pos + 8 > len(data):
            raise MidiFormatError("truncated chunk header", pos)
        chunk_type = data[pos : pos + 4]
        (chunk_len,) = unpack_chunk_length(data, pos + 4)
        end = pos + 8 + chunk_len
        if end > len(data):
            raise MidiFormatError(f"bad chunk length {chunk_len}", pos + 4)
        if chunk_type == b"MTrk":
            tracks.append(_parse_track(data, pos + 8, end, sustain_pedal))
        else:
            logger.debug("Skipping unknown chunk %r at byte %d", chunk_type, pos)
        pos = end

    if len(tracks) != n_tracks:
        logger.warning("Header declares %d tracks, found %d (source=%s)", n_tracks, len(tracks), source_id)

    tempo_map = TempoMap.from_events(division, (t for track in tracks for t in track.tempos))

    notes: List[NoteEvent] = []
    dropped = 0
    for track in tracks:
        for on_tick, off_tick, pitch, velocity in track.notes:
            if not LOWEST_PITCH <= pitch <= HIGHEST_PITCH:
                dropped += 1
                continue
            notes.append(
                NoteEvent(
                    pitch=pitch,
                    onset=ticks_to_seconds(on_tick, tempo_map),
                    offset=ticks_to_seconds(off_tick, tempo_map),
                    velocity=velocity,
                )
            )
    if dropped:
        logger.debug("Dropped %d notes outside the keyboard (source=%s)", dropped, source_id)

    return MidiPiece.from_notes(notes, source_id=source_id, composer=composer)


def _parse_track(data: bytes, start: int, end: int, sustain_pedal: bool) -> _TrackNotes:
    out = _TrackNotes()
    open_notes: Dict[Tuple[int, int], Deque[Tuple[int, int]]] = defaultdict(deque)
    pedal_down: Dict[int, bool] = defaultdict(bool)
    held: Dict[Tuple[int, int], List[Tuple[int, int]]] = defaultdict(list)

    def release_held(channel: int, tick: int) -> None:
        for key in [k for k in held if k[0] == channel]:
            for on_tick, velocity in held.pop(key):
                out.notes.append((on_tick, tick, key[1], velocity))

    tick = 0
    running = None
    pos = start
    while pos < end:
        delta, pos = read_varlen(data, pos)
        tick += delta
        if pos >= end:
            raise MidiFormatError("truncated event", pos)
        status = data[pos]

        if status == 0xFF:
            if pos + 2 > end:
                raise MidiFormatError("truncated meta event", pos)
            meta_type = data[pos + 1]
            length, payload_pos = read_varlen(data, pos + 2)
            if payload_pos + length > end:
                raise MidiFormatError("meta event overruns track", pos)
            running = None
            if meta_type == 0x51:
                if length != 3:
                    raise MidiFormatError(f"tempo event with length {length}", pos)
                tempo = int.from_bytes(data[payload_pos : payload_pos + 3], "big")
                if tempo == 0:
                    raise MidiFormatError("tempo must be > 0", pos)
                out.tempos.append((tick, tempo))
            elif meta_type == 0x2F:
                pos = payload_pos + length
                break
            pos = payload_pos + length
            continue

        if status in (0xF0, 0xF7):
            length, payload_pos = read_varlen(data, pos + 1)
            if payload_pos + length > end:
                raise MidiFormatError("SysEx event overruns track", pos)
            running = None
            pos = payload_pos + length
            continue

        if status >= 0xF0:
            raise MidiFormatError(f"unsupported status byte 0x{status:02X}", pos)
        if status & 0x80:
            running = status
            pos += 1
        elif running is None:
            raise MidiFormatError("data byte without running status", pos)

        kind = running & 0xF0
        channel = running & 0x0F
        n_data = 1 if kind in (0xC0, 0xD0) else 2
        if pos + n_data > end:
            raise MidiFormatError("truncated channel event", pos)
        d1 = data[pos]
        d2 = data[pos + 1] if n_data == 2 else 0
        event_pos = pos
        pos += n_data

        if kind == 0x90 and d2 > 0:
            key = (channel, d1)
            if key in held:
                # re-struck while the pedal still holds the previous note
                for on_tick, velocity in held.pop(key):
                    out.notes.append((on_tick, tick, d1, velocity))
            open_notes[key].append((tick, d2))
        elif kind == 0x80 or kind == 0x90:
            key = (channel, d1)
            if not open_notes[key]:
                logger.debug("Note-off without note-on (pitch %d) at byte %d", d1, event_pos)
                continue
            on_tick, velocity = open_notes[key].popleft()
            if sustain_pedal and pedal_down[channel]:
                held[key].append((on_tick, velocity))
            else:
                out.notes.append((on_tick, tick, d1, velocity))
        elif kind == 0xB0 and d1 == SUSTAIN_CONTROLLER and sustain_pedal:
            down = d2 >= 64
            if pedal_down[channel] and not down:
                release_held(channel, tick)
            pedal_down[channel] = down

    for channel in list(pedal_down):
        release_held(channel, tick)
    for (channel, pitch), pending in open_notes.items():
        for on_tick, velocity in pending:
            out.notes.append((on_tick, tick, pitch, velocity))
    return out
