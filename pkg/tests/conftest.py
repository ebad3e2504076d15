from pathlib import Path

import numpy as np
import pytest

from midi_factory import styled_notes, write_piece

COMPOSERS = {"Alpha, Anna": "diatonic", "Beta, Bruno": "clusters"}


def write_corpus(midi_dir: Path, pieces_per_composer: int = 6, seed: int = 0) -> Path:
    """Two synthetic composers, files named ``<Surname>, <First names>, <Title>.mid``, 35-50 s each."""
    midi_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for composer, style in COMPOSERS.items():
        for i in range(pieces_per_composer):
            duration = float(rng.uniform(35.0, 50.0))
            write_piece(midi_dir / f"{composer}, Opus {i + 1}.mid", styled_notes(style, rng, duration))
    return midi_dir


def tiny_settings(out_dir: Path, manifest: Path, midi_dir: Path) -> str:
    """Config text for a CPU-sized run of the full pipeline."""
    return (
        "# tiny pipeline run\n"
        f"manifest = {manifest}\n"
        f"midi_dir = {midi_dir}\n"
        f"out_dir = {out_dir}\n"
        "k = 2\n"
        "fps = 5\n"
        "arch = cnn\n"
        "variant = frame+onset+velocity\n"
        "max_epochs = 2\n"
        "patience = 2\n"
        "batch_size = 4\n"
        "channel_divisor = 16\n"
        "gru_hidden = 4\n"
        "fc_hidden = 8\n"
    )


@pytest.fixture
def corpus_dir(tmp_path: Path) -> Path:
    return write_corpus(tmp_path / "midi")


@pytest.fixture
def tiny_config(tmp_path: Path, corpus_dir: Path) -> Path:
    path = tmp_path / "run.conf"
    path.write_text(tiny_settings(tmp_path / "out", tmp_path / "catalog.tsv", corpus_dir), encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("CID_THREADS", "1")
