import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

from composer_id.dataset.catalog import Catalog, CatalogEntry
from composer_id.repo.midi_repo import MIDI_SUFFIXES, load_piece

logger = logging.getLogger("composer_id.ingest")


def composer_from_filename(file_name: str) -> Optional[str]:
    """
    Composer of a ``"<Surname>, <First names>, <Title>.mid"`` file name.

    Returns
    -------
    str or None
        ``"<Surname>, <First names>"``, or None when the name has fewer than
        three comma-separated fields.
    """
    parts = [p.strip() for p in Path(file_name).stem.split(",")]
    if len(parts) < 3 or not parts[0] or not parts[1]:
        return None
    return f"{parts[0]}, {parts[1]}"


def ingest_directory(
    midi_dir: Path, metadata: Optional[Dict[str, str]] = None, sustain_pedal: bool = False
) -> Tuple[Catalog, int]:
    """
    Parse every MIDI file of a directory into a catalog.

    The source id of a piece is its file stem; the composer comes from
    ``metadata`` (file name -> composer) when given, else from the file
    name. Unreadable files and files without a composer are skipped.

    Parameters
    ----------
    midi_dir : Path
        Directory with ``.mid`` / ``.midi`` files (not searched recursively).
    metadata : dict, optional
        Composer per file name.
    sustain_pedal : bool, optional
        Measure durations with pedal-extended offsets.

    Returns
    -------
    tuple
        ``(catalog, skipped_count)``.

    Raises
    ------
    ValueError
        On a duplicate source id or when no file could be parsed.
    """
    midi_dir = Path(midi_dir)
    if not midi_dir.is_dir():
        raise FileNotFoundError(f"MIDI directory not found: {midi_dir}")
    files = sorted(p for p in midi_dir.iterdir() if p.is_file() and p.suffix.lower() in MIDI_SUFFIXES)

    entries = []
    seen: Dict[str, Path] = {}
    skipped = 0
    for path in files:
        source_id = path.stem
        if source_id in seen:
            raise ValueError(f"duplicate source_id {source_id!r}: {seen[source_id].name} and {path.name}")
        seen[source_id] = path

        composer = metadata.get(path.name) if metadata is not None else composer_from_filename(path.name)
        if not composer:
            logger.warning("Skipping %s: no composer", path.name)
            skipped += 1
            continue
        try:
            piece = load_piece(path, source_id, composer, sustain_pedal=sustain_pedal)
        except ValueError as exc:
            logger.warning("Skipping %s: %s", path.name, exc)
            skipped += 1
            continue
        entries.append(CatalogEntry(source_id, composer, piece.duration))

    if skipped:
        logger.warning("skipped %d", skipped)
    if not entries:
        raise ValueError(f"no parseable MIDI files in {midi_dir} (skipped {skipped})")
    logger.info("Ingested %d pieces by %d composers", len(entries), len({e.composer for e in entries}))
    return Catalog.build(entries), skipped
