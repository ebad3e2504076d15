import csv
import io
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from composer_id.constants import CLIP_SECONDS, SUBSETS
from composer_id.dataset.catalog import Catalog
from composer_id.dataset.clips import make_clips
from composer_id.dataset.split import SplitAssignment
from composer_id.repo._tsv import tsv_writer, write_rows
from composer_id.services.evaluation import EvalReport

logger = logging.getLogger("composer_id.reports")

ACCURACY_FIELDS = ["composer", "accuracy", "correct", "total"]
CONFUSION_TITLE = "confusion (rows: true composer, columns: predicted composer)"
SPLIT_SUMMARY_FIELDS = ["composer", *SUBSETS, "total"]
GRID_FIELDS = ["arch", "variant", "k", "clip_macro", "piece_macro"]


def render_report(report: EvalReport) -> str:
    """
    Text form of a report: title, per-composer accuracy table, summary
    lines, then the confusion matrix with row sums.
    """
    index = {name: i for i, name in enumerate(report.composers)}
    buf = io.StringIO()
    writer = tsv_writer(buf)
    writer.writerow([f"composer classification report ({report.granularity}-wise)"])
    writer.writerow(ACCURACY_FIELDS)
    for name, accuracy in report.per_composer_accuracy:
        row = report.confusion[index[name]]
        writer.writerow([name, f"{accuracy:.6f}", int(row[index[name]]), int(row.sum())])
    writer.writerow(["macro_accuracy", f"{report.macro_accuracy:.6f}"])
    writer.writerow(["micro_accuracy", f"{report.micro_accuracy:.6f}"])
    if report.piece_macro_accuracy is not None:
        writer.writerow(["piece_macro_accuracy", f"{report.piece_macro_accuracy:.6f}"])
    writer.writerow(["clip_count", report.clip_count])
    writer.writerow(["piece_count", report.piece_count])
    writer.writerow([])
    writer.writerow([CONFUSION_TITLE])
    writer.writerow(["composer", *report.composers, "row_sum"])
    for name, row in zip(report.composers, report.confusion):
        writer.writerow([name, *(int(v) for v in row), int(row.sum())])
    return buf.getvalue()


def emit_report(report: EvalReport, path: Path) -> None:
    """
    Write a report file.

    Raises
    ------
    ValueError
        If the report covers no items.
    OSError
        If ``path`` cannot be written.
    """
    if report.item_count == 0:
        raise ValueError(f"refusing to write an empty {report.granularity}-wise report to {path}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_report(report))
    logger.info("Wrote %s-wise report to %s (macro %.4f)", report.granularity, path, report.macro_accuracy)


def read_report_metrics(path: Path) -> Tuple[Dict[str, float], Dict[str, float]]:
    """
    Summary metrics and per-composer accuracies of a report file.

    Returns
    -------
    tuple of dict
        ``({"macro_accuracy": ..., ...}, {composer: accuracy})``.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    if len(rows) < 2 or rows[1] != ACCURACY_FIELDS:
        raise ValueError(f"{path}: not a composer classification report")
    metrics: Dict[str, float] = {}
    per_composer: Dict[str, float] = {}
    in_table = True
    for fields in rows[2:]:
        if not fields:
            break
        if fields[0] == "macro_accuracy":
            in_table = False
        if in_table:
            per_composer[fields[0]] = float(fields[1])
        else:
            metrics[fields[0]] = float(fields[1])
    return metrics, per_composer


def split_summary(
    catalog: Catalog, split: SplitAssignment, clip_seconds: float = CLIP_SECONDS
) -> List[Tuple[str, int, int, int]]:
    """Per-composer clip counts of each subset, composers in label order."""
    counts = {name: {subset: 0 for subset in SUBSETS} for name in catalog.composers}
    composers = catalog.composers
    for clip in make_clips(catalog, clip_seconds):
        counts[composers[clip.label]][split.subset_of(clip.source_id)] += 1
    return [(name, *(counts[name][subset] for subset in SUBSETS)) for name in composers]


def write_split_summary(path: Path, rows: Sequence[Tuple[str, int, int, int]]) -> None:
    write_rows(path, ((name, *counts, sum(counts)) for name, *counts in rows), header=SPLIT_SUMMARY_FIELDS)


def render_grid(runs: Sequence[Dict[str, object]]) -> str:
    """
    Two tables over experiment runs: macro accuracies per run, then the
    clip-wise accuracy of every composer per run.

    Parameters
    ----------
    runs : sequence of dict
        Each with ``arch``, ``variant``, ``k``, ``clip_macro``,
        ``piece_macro`` and ``per_composer`` (composer -> accuracy).
    """
    buf = io.StringIO()
    writer = tsv_writer(buf)
    writer.writerow(GRID_FIELDS)
    for run in runs:
        writer.writerow([run["arch"], run["variant"], run["k"], f"{run['clip_macro']:.6f}", f"{run['piece_macro']:.6f}"])

    composers: List[str] = []
    for run in runs:
        composers.extend(name for name in run["per_composer"] if name not in composers)
    writer.writerow([])
    writer.writerow(["arch", "variant", "k", *composers])
    for run in runs:
        cells = [f"{run['per_composer'][name]:.6f}" if name in run["per_composer"] else "-" for name in composers]
        writer.writerow([run["arch"], run["variant"], run["k"], *cells])
    return buf.getvalue()
