from pathlib import Path
from typing import Dict

from composer_id.constants import SUBSETS
from composer_id.dataset.catalog import Catalog, CatalogEntry
from composer_id.dataset.split import SplitAssignment
from composer_id.repo._tsv import read_rows, write_rows


def write_catalog(path: Path, catalog: Catalog) -> None:
    """
    Write the catalog manifest.

    Parameters
    ----------
    path : Path
        Target file; one ``source_id<TAB>composer<TAB>duration_seconds`` line per piece.
    catalog : Catalog
        Catalog to write, in piece order.
    """
    write_rows(path, ((e.source_id, e.composer, f"{e.duration:.6f}") for e in catalog.pieces))


def read_catalog(path: Path) -> Catalog:
    """
    Read a catalog manifest written by ``write_catalog``.

    Returns
    -------
    Catalog
        Pieces in file order with freshly ranked composer labels.

    Raises
    ------
    ValueError
        On malformed lines, negative durations or duplicate source ids.
    """
    entries = []
    for source_id, composer, duration in read_rows(path, 3):
        seconds = float(duration)
        if seconds < 0:
            raise ValueError(f"{path}: negative duration for {source_id!r}")
        entries.append(CatalogEntry(source_id, composer, seconds))
    return Catalog.build(entries)


def write_split(path: Path, split: SplitAssignment) -> None:
    """Write ``source_id<TAB>subset`` lines in assignment order."""
    write_rows(path, split.subsets.items())


def read_split(path: Path) -> SplitAssignment:
    subsets: Dict[str, str] = {}
    for source_id, subset in read_rows(path, 2):
        if subset not in SUBSETS:
            raise ValueError(f"{path}: unknown subset {subset!r} for {source_id!r}")
        if source_id in subsets:
            raise ValueError(f"{path}: duplicate source_id {source_id!r}")
        subsets[source_id] = subset
    return SplitAssignment(subsets)


def read_metadata(path: Path) -> Dict[str, str]:
    """
    Read an ingest metadata manifest: ``file_name<TAB>composer`` lines.

    Returns
    -------
    dict
        File name (as listed) -> composer.
    """
    return {file_name: composer for file_name, composer in read_rows(path, 2)}
