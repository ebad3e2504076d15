from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Tuple

DEFAULT_TEMPO = 500000


@dataclass(frozen=True, slots=True)
class NoteEvent:
    """
    One note with absolute times.

    Parameters
    ----------
    pitch : int
        MIDI note number, 21..108 after keyboard filtering.
    onset : float
        Onset in seconds, >= 0.
    offset : float
        Offset in seconds. Equal to ``onset`` only for zero-length notes
        found in the file; feature extraction gives those one frame.
    velocity : int
        MIDI velocity 0..127.
    """

    pitch: int
    onset: float
    offset: float
    velocity: int

    def __post_init__(self) -> None:
        if self.onset < 0:
            raise ValueError(f"note onset must be >= 0, got {self.onset}")
        if self.offset < self.onset:
            raise ValueError(f"note offset {self.offset} precedes onset {self.onset}")
        if not 0 <= self.velocity <= 127:
            raise ValueError(f"velocity out of range: {self.velocity}")


@dataclass(frozen=True)
class MidiPiece:
    """
    A parsed piece: notes sorted by (onset, pitch) plus catalog identity.
    """

    notes: Tuple[NoteEvent, ...]
    source_id: str = ""
    composer: str = ""

    @classmethod
    def from_notes(cls, notes: Iterable[NoteEvent], source_id: str = "", composer: str = "") -> "MidiPiece":
        ordered = sorted(notes, key=lambda n: (n.onset, n.pitch))
        return cls(tuple(ordered), source_id, composer)

    @property
    def duration(self) -> float:
        return max((n.offset for n in self.notes), default=0.0)


@dataclass(frozen=True)
class TempoMap:
    """
    Tempo changes of a file in ticks.

    ``entries`` are ``(tick, microseconds_per_quarter)`` pairs strictly
    increasing in tick and always starting at tick 0.
    """

    ticks_per_quarter: int
    entries: Tuple[Tuple[int, int], ...] = ((0, DEFAULT_TEMPO),)

    def __post_init__(self) -> None:
        if self.ticks_per_quarter <= 0:
            raise ValueError(f"ticks_per_quarter must be > 0, got {self.ticks_per_quarter}")
        if not self.entries or self.entries[0][0] != 0:
            raise ValueError("tempo map must start at tick 0")
        for (prev, _), (tick, _) in zip(self.entries, self.entries[1:]):
            if tick <= prev:
                raise ValueError(f"tempo entries not strictly increasing at tick {tick}")
        for _, tempo in self.entries:
            if tempo <= 0:
                raise ValueError(f"tempo must be > 0, got {tempo}")

    @classmethod
    def from_events(cls, ticks_per_quarter: int, events: Iterable[Tuple[int, int]]) -> "TempoMap":
        """
        Build a map from raw (tick, tempo) events in file order.

        Events sharing a tick keep the last one; an implicit (0, 500000)
        entry is added when nothing sets the tempo at tick 0.
        """
        by_tick = {}
        for tick, tempo in sorted(events, key=lambda e: e[0]):
            by_tick[tick] = tempo
        by_tick.setdefault(0, DEFAULT_TEMPO)
        return cls(ticks_per_quarter, tuple(sorted(by_tick.items())))

    @cached_property
    def _segment_seconds(self) -> Tuple[float, ...]:
        scale = self.ticks_per_quarter * 1e6
        acc = [0.0]
        for (tick, tempo), (next_tick, _) in zip(self.entries, self.entries[1:]):
            acc.append(acc[-1] + (next_tick - tick) * tempo / scale)
        return tuple(acc)

    @cached_property
    def _starts(self) -> Tuple[int, ...]:
        return tuple(tick for tick, _ in self.entries)
