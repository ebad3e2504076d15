from composer_id.dataset.catalog import Catalog, CatalogEntry, select_top_k
from composer_id.dataset.clips import Clip, ClipSet, batch_iterator, make_clips, segment
from composer_id.dataset.split import SplitAssignment, apportion, stratified_split

__all__ = [
    "Catalog",
    "CatalogEntry",
    "Clip",
    "ClipSet",
    "SplitAssignment",
    "apportion",
    "batch_iterator",
    "make_clips",
    "segment",
    "select_top_k",
    "stratified_split",
]
