"""
Pipeline stages shared by the ``split``, ``train``, ``eval`` and
``experiment`` commands.
"""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Tuple

import numpy as np

from composer_id.config import RunConfig, dump_config
from composer_id.constants import (
    CLIP_REPORT_FILE,
    CONFIG_FILE,
    HOP_SIZE,
    N_MELS,
    NUM_PITCHES,
    PIECE_REPORT_FILE,
    SAMPLE_RATE,
    SPLIT_FILE,
    SPLIT_SUMMARY_FILE,
    SUBSET_TEST,
    SUBSET_TRAIN,
    SUBSET_VALIDATION,
    TRAIN_LOG_FILE,
    VARIANT_LOGMEL,
)
from composer_id.dataset.catalog import Catalog, select_top_k
from composer_id.dataset.clips import ClipSet, segment
from composer_id.dataset.split import SplitAssignment, stratified_split
from composer_id.nn.model import Model, ModelConfig, build_model
from composer_id.repo.cache_repo import FeatureRecord, read_cache, to_clip_set, write_cache
from composer_id.repo.checkpoint_repo import load_checkpoint, save_checkpoint
from composer_id.repo.logs_repo import write_train_log
from composer_id.repo.manifest_repo import read_catalog, read_split, write_split
from composer_id.services.evaluation import EvalReport, clip_report, piece_report
from composer_id.services.extraction import extract_corpus
from composer_id.services.reports import emit_report, split_summary, write_split_summary
from composer_id.services.training import TrainResult, TrainRunConfig, train

logger = logging.getLogger("composer_id.experiment")


@dataclass
class ExperimentResult:
    train_result: TrainResult
    clip_report: EvalReport
    piece_report: EvalReport


def model_config_for(config: RunConfig, num_classes: int) -> ModelConfig:
    return ModelConfig(
        architecture=config.arch,
        in_channels=config.in_channels,
        num_classes=num_classes,
        gru_hidden=config.gru_hidden,
        fc_hidden=config.fc_hidden,
        crnn_summary=config.crnn_summary,
        channel_divisor=config.channel_divisor,
        seed=config.seed,
    )


def train_config_for(config: RunConfig) -> TrainRunConfig:
    return TrainRunConfig(
        max_epochs=config.max_epochs,
        batch_size=config.batch_size,
        lr=config.lr,
        seed=config.seed,
        early_stop_patience=config.patience,
        input_variant=config.variant,
        architecture=config.arch,
        eval_batch_size=config.eval_batch_size,
    )


def load_catalog(config: RunConfig) -> Catalog:
    """The manifest restricted to the ``k`` composers with most pieces."""
    catalog = read_catalog(Path(config.manifest))
    return select_top_k(catalog, config.k)


def write_split_files(config: RunConfig, catalog: Catalog, split: SplitAssignment) -> None:
    config.out_path.mkdir(parents=True, exist_ok=True)
    write_split(config.out_path / SPLIT_FILE, split)
    write_split_summary(config.out_path / SPLIT_SUMMARY_FILE, split_summary(catalog, split, config.clip_seconds))


def make_split(config: RunConfig, catalog: Catalog) -> SplitAssignment:
    """Split the catalog with ``config.seed`` and write the split and its summary."""
    split = stratified_split(catalog, config.seed)
    write_split_files(config, catalog, split)
    return split


def resolve_split(config: RunConfig, catalog: Catalog) -> SplitAssignment:
    """Reuse ``split.tsv`` of the output directory when present, else split afresh."""
    path = config.out_path / SPLIT_FILE
    if not path.exists():
        return make_split(config, catalog)
    split = read_split(path)
    missing = [entry.source_id for entry in catalog.pieces if entry.source_id not in split.subsets]
    if missing:
        raise ValueError(f"{path} does not cover {len(missing)} catalog piece(s), e.g. {missing[0]!r}")
    return split


def load_features(config: RunConfig, catalog: Catalog) -> List[FeatureRecord]:
    """
    Feature records for ``config.variant``.

    A missing roll cache is extracted and written; a missing audio cache is
    an error since audio needs a separate ``extract`` run over WAV files.
    """
    path = config.features_path
    if not path.exists():
        if config.variant == VARIANT_LOGMEL:
            raise RuntimeError(f"no audio cache at {path}; run extract with variant logmel first")
        records = extract_corpus(
            catalog,
            config.variant,
            Path(config.midi_dir),
            fps=config.fps,
            clip_seconds=config.clip_seconds,
            sustain_pedal=config.sustain_pedal,
        )
        config.out_path.mkdir(parents=True, exist_ok=True)
        write_cache(path, records)
        return records

    records = read_cache(path)
    check_cache(path, records, config, catalog)
    return records


def clip_shape(config: RunConfig) -> Tuple[int, int, int]:
    """``C x T x K`` of one clip under ``config``."""
    if config.variant == VARIANT_LOGMEL:
        return 1, int(round(config.clip_seconds * SAMPLE_RATE)) // HOP_SIZE + 1, N_MELS
    return config.in_channels, int(round(config.clip_seconds * config.fps)), NUM_PITCHES


def check_cache(path: Path, records: List[FeatureRecord], config: RunConfig, catalog: Catalog) -> None:
    """
    Reject a cache written under other settings or for another catalog.

    Raises
    ------
    ValueError
        On a channel count, clip shape or per-piece clip count that the
        config and catalog do not produce.
    """
    wrong = {r.channels.shape[0] for r in records} - {config.in_channels}
    if wrong:
        raise ValueError(
            f"{path} holds {sorted(wrong)}-channel features, variant {config.variant!r} needs {config.in_channels}"
        )
    expected = clip_shape(config)
    shapes = {r.channels.shape for r in records} - {expected}
    if shapes:
        raise ValueError(
            f"{path} holds clips of shape {sorted(shapes)}, fps={config.fps:g} and "
            f"clip_seconds={config.clip_seconds:g} give {expected}; re-run extract"
        )
    counts = Counter(r.source_id for r in records)
    for entry in catalog.pieces:
        n_clips = len(segment(entry.duration, config.clip_seconds))
        if counts[entry.source_id] != n_clips:
            raise ValueError(
                f"{path} has {counts[entry.source_id]} clips of {entry.source_id!r}, the catalog gives {n_clips}; "
                "re-run extract"
            )


def subset_clips(records: List[FeatureRecord], catalog: Catalog, split: SplitAssignment, subset: str) -> ClipSet:
    """Clips of one subset, relabelled with the catalog's composer index."""
    ids = set(split.ids(subset)) & {entry.source_id for entry in catalog.pieces}
    clips = to_clip_set(records, keep=ids)
    labels = catalog.labels_by_source()
    return ClipSet(clips.features, np.array([labels[s] for s in clips.source_ids], dtype=np.int64), clips.source_ids)


def run_training(
    config: RunConfig, catalog: Catalog, split: SplitAssignment, records: List[FeatureRecord]
) -> TrainResult:
    """Train a fresh model; write the best-validation checkpoint and the training log."""
    composers = catalog.composers
    model = build_model(model_config_for(config, len(composers)))
    result = train(
        train_config_for(config),
        model,
        subset_clips(records, catalog, split, SUBSET_TRAIN),
        subset_clips(records, catalog, split, SUBSET_VALIDATION),
        composers,
    )
    config.out_path.mkdir(parents=True, exist_ok=True)
    config.checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(config.checkpoint_path, result.model, result.state)
    write_train_log(config.out_path / TRAIN_LOG_FILE, result.log)
    (config.out_path / CONFIG_FILE).write_text(dump_config(config), encoding="utf-8")
    return result


def load_trained_model(config: RunConfig, num_classes: int) -> Model:
    model = build_model(model_config_for(config, num_classes))
    load_checkpoint(config.checkpoint_path, model)
    return model


def run_evaluation(
    config: RunConfig, catalog: Catalog, split: SplitAssignment, records: List[FeatureRecord], model: Model
) -> Tuple[EvalReport, EvalReport]:
    """Score the test subset clip-wise and piece-wise and write both reports."""
    composers = catalog.composers
    clips = subset_clips(records, catalog, split, SUBSET_TEST)
    if len(clips) == 0:
        raise ValueError("test subset has no clips")
    probs = model.predict_proba(clips.features, batch_size=config.eval_batch_size)
    pieces = piece_report(probs, clips, composers)
    clips_report = clip_report(probs, clips, composers)
    clips_report = replace(clips_report, piece_macro_accuracy=pieces.macro_accuracy)
    emit_report(clips_report, config.out_path / CLIP_REPORT_FILE)
    emit_report(pieces, config.out_path / PIECE_REPORT_FILE)
    return clips_report, pieces


def run_experiment(config: RunConfig) -> ExperimentResult:
    """
    Split, extract (when no cache exists), train and evaluate one grid cell.

    Outputs in ``config.out_dir``: split and split summary, training log,
    checkpoint, clip-wise and piece-wise reports and the effective config.
    """
    logger.info("Experiment arch=%s variant=%s k=%d seed=%d", config.arch, config.variant, config.k, config.seed)
    catalog = load_catalog(config)
    records = load_features(config, catalog)
    split = make_split(config, catalog)
    result = run_training(config, catalog, split, records)
    clips_report, pieces = run_evaluation(config, catalog, split, records, result.model)
    logger.info("Test clip macro %.4f, piece macro %.4f", clips_report.macro_accuracy, pieces.macro_accuracy)
    return ExperimentResult(result, clips_report, pieces)
