import logging
import math
import zlib
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from composer_id.constants import SPLIT_RATIOS, SUBSETS
from composer_id.dataset.catalog import Catalog

logger = logging.getLogger("composer_id.split")


@dataclass(frozen=True)
class SplitAssignment:
    """Piece-level subset membership, ``source_id -> subset``, in catalog order."""

    subsets: Dict[str, str]

    def subset_of(self, source_id: str) -> str:
        return self.subsets[source_id]

    def ids(self, subset: str) -> List[str]:
        return [sid for sid, name in self.subsets.items() if name == subset]


def apportion(n: int, ratios: Tuple[float, ...] = SPLIT_RATIOS) -> Tuple[int, ...]:
    """
    Largest-remainder apportionment of ``n`` items to train/validation/test.

    Validation and test get at least one item each when ``n >= 3``, taken
    from the largest share.
    """
    quotas = [n * r for r in ratios]
    counts = [math.floor(q) for q in quotas]
    remainder = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    if n >= 3:
        for i in range(1, len(counts)):
            if counts[i] == 0:
                donor = max(range(len(counts)), key=lambda j: (counts[j], -j))
                counts[donor] -= 1
                counts[i] += 1
    return tuple(counts)


def composer_rng(seed: int, composer: str) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    return np.random.default_rng([seed, zlib.crc32(composer.encode("utf-8"))])


def stratified_split(catalog: Catalog, seed: int) -> SplitAssignment:
    """
    Split pieces 8:1:1 per composer.

    Each composer's pieces (sorted by source_id) are shuffled by a generator
    seeded with ``(seed, composer)`` and cut into train/validation/test by
    ``apportion``. All clips of a piece share its subset.

    Parameters
    ----------
    catalog : Catalog
        Catalog to split.
    seed : int
        Non-negative split seed.

    Returns
    -------
    SplitAssignment
    """
    by_composer: Dict[str, List[str]] = {}
    for entry in catalog.pieces:
        by_composer.setdefault(entry.composer, []).append(entry.source_id)

    assigned: Dict[str, str] = {}
    for composer in catalog.composers:
        ids = sorted(by_composer[composer])
        order = composer_rng(seed, composer).permutation(len(ids))
        counts = apportion(len(ids))
        names = [subset for subset, count in zip(SUBSETS, counts) for _ in range(count)]
        for idx, subset in zip(order, names):
            assigned[ids[idx]] = subset
        logger.debug("Composer %r split %s", composer, counts)

    return SplitAssignment({entry.source_id: assigned[entry.source_id] for entry in catalog.pieces})
