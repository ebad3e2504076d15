from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple


@dataclass(frozen=True)
class CatalogEntry:
    source_id: str
    composer: str
    duration: float


@dataclass(frozen=True)
class Catalog:
    """
    Pieces of the corpus with composer labels.

    ``composer_index`` maps composers to labels ``0..C-1`` in descending
    order of piece count, ties broken lexicographically.
    """

    pieces: Tuple[CatalogEntry, ...]
    composer_index: Dict[str, int]

    @classmethod
    def build(cls, pieces: Iterable[CatalogEntry]) -> "Catalog":
        pieces = tuple(pieces)
        seen = set()
        for entry in pieces:
            if entry.source_id in seen:
                raise ValueError(f"duplicate source_id in catalog: {entry.source_id!r}")
            seen.add(entry.source_id)
        counts = Counter(entry.composer for entry in pieces)
        ranked = sorted(counts, key=lambda name: (-counts[name], name))
        return cls(pieces=pieces, composer_index={name: i for i, name in enumerate(ranked)})

    @property
    def composers(self) -> List[str]:
        """Composer names ordered by label."""
        return sorted(self.composer_index, key=self.composer_index.__getitem__)

    def labels_by_source(self) -> Dict[str, int]:
        return {entry.source_id: self.composer_index[entry.composer] for entry in self.pieces}


def select_top_k(catalog: Catalog, k: int) -> Catalog:
    """
    Keep the pieces of the ``k`` composers with the most pieces.

    Parameters
    ----------
    catalog : Catalog
        Full catalog.
    k : int
        Number of composers to keep.

    Returns
    -------
    Catalog
        Restricted catalog with labels ``0..k-1`` by descending piece count.

    Raises
    ------
    ValueError
        If ``k`` is below 1 or exceeds the number of distinct composers.
    """
    n_composers = len(catalog.composer_index)
    if k < 1 or k > n_composers:
        raise ValueError(f"k={k} outside 1..{n_composers} (distinct composers in catalog)")
    keep = {name for name, label in catalog.composer_index.items() if label < k}
    return Catalog.build(entry for entry in catalog.pieces if entry.composer in keep)
