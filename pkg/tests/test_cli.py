import pytest
from click.testing import CliRunner

from composer_id.__main__ import build_dispatcher, cli
from composer_id.config import RunSpec
from composer_id.dispatcher import Dispatcher
from composer_id.handler import Handler

ARTIFACTS = (
    "split.tsv",
    "split_summary.tsv",
    "features.ccf",
    "train_log.tsv",
    "model.cckp",
    "report_clip.txt",
    "report_piece.txt",
)


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)


def ingest(runner, tiny_config):
    result = invoke(runner, "ingest", "--config", tiny_config)
    assert result.exit_code == 0, result.output
    return result


def test_ingest_writes_manifest(runner, tmp_path, corpus_dir):
    midi_dir = corpus_dir
    (midi_dir / "Gamma, Gina, Etude.mid").write_bytes((midi_dir / "Alpha, Anna, Opus 1.mid").read_bytes())
    manifest = tmp_path / "catalog.tsv"
    result = invoke(runner, "ingest", "--set", f"midi_dir={midi_dir}", "--set", f"manifest={manifest}")
    assert result.exit_code == 0
    assert "Wrote 13 pieces by 3 composers" in result.stdout
    lines = manifest.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 13
    assert ["Gamma, Gina, Etude", "Gamma, Gina"] in [line.split("\t")[:2] for line in lines]


def test_ingest_reports_skipped_file(runner, tmp_path, corpus_dir):
    midi_dir = corpus_dir
    (midi_dir / "Gamma, Gina, Broken.mid").write_bytes(b"RIFF0000")
    manifest = tmp_path / "catalog.tsv"
    result = invoke(runner, "ingest", "--set", f"midi_dir={midi_dir}", "--set", f"manifest={manifest}")
    assert result.exit_code == 0
    assert "Wrote 12 pieces by 2 composers" in result.stdout
    assert "(skipped 1)" in result.stdout
    assert len(manifest.read_text(encoding="utf-8").splitlines()) == 12


def test_ingest_duplicate_source_id_fails(runner, tmp_path, corpus_dir):
    midi_dir = corpus_dir
    original = midi_dir / "Alpha, Anna, Opus 1.mid"
    (midi_dir / "Alpha, Anna, Opus 1.midi").write_bytes(original.read_bytes())
    result = invoke(runner, "ingest", "--set", f"midi_dir={midi_dir}", "--set", f"manifest={tmp_path / 'c.tsv'}")
    assert result.exit_code == 1
    assert "duplicate source_id 'Alpha, Anna, Opus 1'" in result.output


def test_unknown_config_key_fails(runner, tmp_path):
    result = invoke(runner, "split", "--set", "colour=blue")
    assert result.exit_code == 1
    assert "unknown config key 'colour'" in result.output


def test_invalid_choice_is_rejected_by_click(runner):
    result = runner.invoke(cli, ["experiment", "--arch", "transformer"])
    assert result.exit_code == 2


def test_seed_changes_split(runner, tiny_config, tmp_path):
    ingest(runner, tiny_config)
    splits = []
    for seed in (0, 1):
        out = tmp_path / f"split{seed}"
        result = invoke(runner, "split", "--config", tiny_config, "--seed", seed, "--out", out)
        assert result.exit_code == 0
        assert result.stdout.startswith("Split 12 pieces of 2 composers: train ")
        splits.append((out / "split.tsv").read_text(encoding="utf-8"))
    assert splits[0] != splits[1]


def test_experiment_writes_reports(runner, tiny_config, tmp_path):
    ingest(runner, tiny_config)
    result = invoke(runner, "experiment", "--config", tiny_config)
    assert result.exit_code == 0, result.output
    out = tmp_path / "out"
    for name in ARTIFACTS + ("config.txt",):
        assert (out / name).is_file(), name
    log = (out / "train_log.tsv").read_text(encoding="utf-8").splitlines()
    assert log[0] == "epoch\ttrain_loss\tval_macro_acc"
    assert 1 <= len(log) - 1 <= 2
    report = (out / "report_clip.txt").read_text(encoding="utf-8")
    assert report.startswith("composer classification report (clip-wise)\n")
    assert "piece_macro_accuracy\t" in report
    assert "Alpha, Anna\t" in report and "Beta, Bruno\t" in report


def test_experiment_is_byte_identical(runner, tiny_config, tmp_path):
    ingest(runner, tiny_config)
    for name in ("a", "b"):
        assert invoke(runner, "experiment", "--config", tiny_config, "--out", tmp_path / name).exit_code == 0
    for artifact in ARTIFACTS:
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes(), artifact


def test_logmel_without_audio_cache(runner, tiny_config):
    ingest(runner, tiny_config)
    result = invoke(runner, "experiment", "--config", tiny_config, "--variant", "logmel")
    assert result.exit_code == 1
    assert "no audio cache" in result.output


def test_step_by_step_commands(runner, tiny_config, tmp_path):
    ingest(runner, tiny_config)
    cache = tmp_path / "cache.ccf"
    result = invoke(runner, "extract", "--config", tiny_config, "--set", f"cache={cache}")
    assert result.exit_code == 0 and cache.is_file()
    assert "frame+onset+velocity records" in result.stdout

    common = ("--config", tiny_config, "--set", f"cache={cache}")
    assert invoke(runner, "split", *common).exit_code == 0
    result = invoke(runner, "train", *common)
    assert result.exit_code == 0 and "Best epoch" in result.stdout
    result = invoke(runner, "eval", *common)
    assert result.exit_code == 0 and "Clip macro" in result.stdout
    assert (tmp_path / "out" / "report_piece.txt").is_file()

    piece = next((tmp_path / "midi").glob("Beta*.mid"))
    result = invoke(runner, "predict", piece, *common)
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0].startswith("clip 0.0-30.0s\t")
    assert lines[-1].startswith("piece\t")
    assert {"Alpha, Anna", "Beta, Bruno"} == {cell.rsplit(":", 1)[0] for cell in lines[-1].split("\t")[1:]}


def test_predict_needs_input(runner, tiny_config):
    result = invoke(runner, "predict", "--config", tiny_config)
    assert result.exit_code == 1
    assert "needs an input file" in result.output


def test_summarize(runner, tiny_config, tmp_path):
    ingest(runner, tiny_config)
    invoke(runner, "experiment", "--config", tiny_config, "--out", tmp_path / "cnn")
    invoke(runner, "experiment", "--config", tiny_config, "--arch", "crnn", "--out", tmp_path / "crnn")
    result = invoke(runner, "summarize", tmp_path / "cnn", tmp_path / "crnn")
    assert result.exit_code == 0, result.output
    lines = result.stdout.splitlines()
    assert lines[0] == "arch\tvariant\tk\tclip_macro\tpiece_macro"
    assert lines[1].startswith("cnn\tframe+onset+velocity\t2\t")
    assert lines[2].startswith("crnn\tframe+onset+velocity\t2\t")


def test_summarize_needs_directories(runner):
    result = invoke(runner, "summarize")
    assert result.exit_code == 1


def test_dispatcher_without_handler():
    with pytest.raises(RuntimeError, match="no handler"):
        Dispatcher().dispatch(RunSpec("train"))
    assert len(build_dispatcher(print).handlers) == 8


class Recorder(Handler):
    def __init__(self, calls, name, consume):
        self.calls = calls
        self.name = name
        self.consume = consume

    def can_handle(self, spec):
        return spec.command == "split"

    def handle(self, spec):
        self.calls.append(self.name)
        return not self.consume


def test_dispatcher_stops_at_consuming_handler():
    calls = []
    dispatcher = Dispatcher()
    for name, consume in (("first", False), ("second", True), ("third", True)):
        dispatcher.add_handler(Recorder(calls, name, consume))
    dispatcher.dispatch(RunSpec("split"))
    assert calls == ["first", "second"]
