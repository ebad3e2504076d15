import numpy as np
import pytest

from composer_id.constants import SUBSET_TEST, SUBSET_TRAIN, SUBSET_VALIDATION, SUBSETS
from composer_id.dataset import (
    Catalog,
    CatalogEntry,
    Clip,
    ClipSet,
    apportion,
    batch_iterator,
    make_clips,
    segment,
    select_top_k,
    stratified_split,
)


def catalog_of(counts, duration=60.0):
    return Catalog.build(
        CatalogEntry(f"{name}-{i:03d}", name, duration) for name, n in counts.items() for i in range(n)
    )


def test_catalog_labels_by_count_then_name():
    catalog = catalog_of({"C": 1, "B": 3, "A": 5})
    assert catalog.composer_index == {"A": 0, "B": 1, "C": 2}
    assert catalog.composers == ["A", "B", "C"]
    assert catalog.labels_by_source()["B-002"] == 1


def test_catalog_rejects_duplicate_source_ids():
    with pytest.raises(ValueError, match="duplicate"):
        Catalog.build([CatalogEntry("x", "A", 1.0), CatalogEntry("x", "B", 2.0)])


def test_select_top_k_drops_smaller_composers():
    top = select_top_k(catalog_of({"A": 5, "B": 3, "C": 1}), 2)
    assert top.composer_index == {"A": 0, "B": 1}
    assert {e.composer for e in top.pieces} == {"A", "B"}
    assert len(top.pieces) == 8


def test_select_top_k_all_composers_is_identity():
    catalog = catalog_of({"A": 5, "B": 3, "C": 1})
    assert select_top_k(catalog, 3).pieces == catalog.pieces


def test_select_top_k_breaks_ties_by_name():
    assert select_top_k(catalog_of({"B": 3, "A": 3}), 1).composer_index == {"A": 0}


@pytest.mark.parametrize("k", [0, 4])
def test_select_top_k_rejects_out_of_range(k):
    with pytest.raises(ValueError):
        select_top_k(catalog_of({"A": 5, "B": 3, "C": 1}), k)


@pytest.mark.parametrize(
    "n, expected",
    [
        (0, (0, 0, 0)),
        (1, (1, 0, 0)),
        (2, (2, 0, 0)),
        (3, (1, 1, 1)),
        (5, (3, 1, 1)),
        (7, (5, 1, 1)),
        (10, (8, 1, 1)),
        (14, (11, 2, 1)),
        (20, (16, 2, 2)),
        (40, (32, 4, 4)),
    ],
)
def test_apportion(n, expected):
    assert apportion(n) == expected


def test_apportion_preserves_total():
    for n in range(200):
        counts = apportion(n)
        assert sum(counts) == n
        if n >= 3:
            assert min(counts) >= 1


@pytest.mark.parametrize("n, expected", [(10, (8, 1, 1)), (3, (1, 1, 1)), (20, (16, 2, 2))])
def test_stratified_split_counts(n, expected):
    split = stratified_split(catalog_of({"A": n}), seed=0)
    assert tuple(len(split.ids(subset)) for subset in SUBSETS) == expected


def test_stratified_split_on_many_composers():
    rng = np.random.default_rng(3)
    counts = {f"Composer {i:03d}": int(rng.integers(3, 41)) for i in range(100)}
    catalog = catalog_of(counts)
    split = stratified_split(catalog, seed=0)

    assert set(split.subsets) == {e.source_id for e in catalog.pieces}
    for name, n in counts.items():
        mine = [split.subset_of(f"{name}-{i:03d}") for i in range(n)]
        assert {SUBSET_TRAIN, SUBSET_VALIDATION, SUBSET_TEST} <= set(mine)
        if n >= 7:
            assert 0.7 <= mine.count(SUBSET_TRAIN) / n <= 0.9


def test_stratified_split_is_deterministic():
    catalog = select_top_k(catalog_of({"A": 12, "B": 9, "C": 4}), 2)
    assert stratified_split(catalog, 7) == stratified_split(catalog, 7)
    assert list(stratified_split(catalog, 7).subsets) == [e.source_id for e in catalog.pieces]


def test_stratified_split_depends_on_seed():
    catalog = catalog_of({"A": 40})
    assert any(stratified_split(catalog, 0) != stratified_split(catalog, s) for s in range(1, 5))


def test_stratified_split_is_independent_per_composer():
    alone = stratified_split(catalog_of({"A": 20}), 1)
    together = stratified_split(catalog_of({"A": 20, "B": 30}), 1)
    assert alone.subsets == {sid: s for sid, s in together.subsets.items() if sid.startswith("A-")}


def test_stratified_split_rejects_negative_seed():
    with pytest.raises(ValueError):
        stratified_split(catalog_of({"A": 3}), -1)


@pytest.mark.parametrize(
    "duration, expected",
    [
        (95.0, [(0.0, 30.0), (30.0, 60.0), (60.0, 90.0)]),
        (60.0, [(0.0, 30.0), (30.0, 60.0)]),
        (50.0, [(0.0, 30.0), (30.0, 50.0)]),
        (45.0, [(0.0, 30.0), (30.0, 45.0)]),
        (44.9, [(0.0, 30.0)]),
        (15.0, [(0.0, 15.0)]),
        (14.9, [(0.0, 14.9)]),
        (5.0, [(0.0, 5.0)]),
        (4.9, []),
        (0.0, []),
    ],
)
def test_segment(duration, expected):
    assert segment(duration) == expected


def test_segment_rejects_negative_duration():
    with pytest.raises(ValueError):
        segment(-1.0)


def test_make_clips_inherit_labels():
    catalog = Catalog.build([CatalogEntry("a", "X", 95.0), CatalogEntry("b", "Y", 50.0), CatalogEntry("c", "X", 3.0)])
    clips = make_clips(catalog)
    assert clips == [
        Clip("a", 0.0, 0),
        Clip("a", 30.0, 0),
        Clip("a", 60.0, 0),
        Clip("b", 0.0, 1),
        Clip("b", 30.0, 1),
    ]


def test_split_partitions_clips():
    catalog = catalog_of({"A": 12, "B": 7}, duration=95.0)
    split = stratified_split(catalog, 2)
    clips = make_clips(catalog)
    per_subset = {s: [c for c in clips if split.subset_of(c.source_id) == s] for s in SUBSETS}
    assert sum(len(v) for v in per_subset.values()) == len(clips)
    pieces = [{c.source_id for c in v} for v in per_subset.values()]
    assert not (pieces[0] & pieces[1] or pieces[0] & pieces[2] or pieces[1] & pieces[2])


def clip_set(n):
    features = np.arange(n, dtype=np.float32).reshape(n, 1, 1, 1)
    return ClipSet(features, np.arange(n) % 3, tuple(f"p{i}" for i in range(n)))


def test_batch_sizes():
    batches = list(batch_iterator(clip_set(33), 16, seed=0, epoch=0))
    assert [len(labels) for _, labels in batches] == [16, 16, 1]
    assert batches[0][0].shape == (16, 1, 1, 1)
    seen = np.concatenate([x.ravel() for x, _ in batches])
    assert sorted(seen.tolist()) == list(range(33))


def test_batches_pair_features_with_labels():
    for inputs, labels in batch_iterator(clip_set(20), 6, seed=4, epoch=2):
        np.testing.assert_array_equal(inputs.ravel().astype(np.int64) % 3, labels)


def order_of(clips, seed, epoch):
    return np.concatenate([x.ravel() for x, _ in batch_iterator(clips, 16, seed, epoch)])


def test_batch_order_is_deterministic_per_epoch():
    clips = clip_set(33)
    np.testing.assert_array_equal(order_of(clips, 0, 0), order_of(clips, 0, 0))
    assert not np.array_equal(order_of(clips, 0, 0), order_of(clips, 0, 1))


def test_batch_iterator_unshuffled_and_empty():
    inputs, _ = next(batch_iterator(clip_set(5), 10, seed=0, epoch=0, shuffle=False))
    assert inputs.ravel().tolist() == [0, 1, 2, 3, 4]
    assert list(batch_iterator(clip_set(0), 16, 0, 0)) == []
    with pytest.raises(ValueError):
        list(batch_iterator(clip_set(3), 0, 0, 0))


def test_clip_set_select_and_length_check():
    clips = clip_set(6)
    picked = clips.select([4, 1])
    assert picked.source_ids == ("p4", "p1")
    assert picked.labels.tolist() == [1, 1]
    assert len(clips.select([])) == 0
    with pytest.raises(ValueError):
        ClipSet(np.zeros((2, 1, 1, 1)), [0], ("a", "b"))
