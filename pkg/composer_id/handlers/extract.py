from pathlib import Path

from composer_id.config import RunSpec
from composer_id.constants import CMD_EXTRACT
from composer_id.handler import Handler
from composer_id.repo.cache_repo import write_cache
from composer_id.repo.manifest_repo import read_catalog
from composer_id.services.extraction import extract_corpus


class ExtractHandler(Handler):
    """
    Write the feature cache of every manifest piece for the configured variant.

    Roll variants go to ``cache``, ``logmel`` to ``audio_cache``. Records
    follow manifest order, then clip start.
    """

    def __init__(self, echo):
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_EXTRACT

    def handle(self, spec: RunSpec) -> bool:
        config = spec.load()
        catalog = read_catalog(Path(config.manifest))
        records = extract_corpus(
            catalog,
            config.variant,
            Path(config.midi_dir),
            audio_dir=Path(config.audio_dir) if config.audio_dir else None,
            fps=config.fps,
            clip_seconds=config.clip_seconds,
            sustain_pedal=config.sustain_pedal,
        )
        path = config.features_path
        path.parent.mkdir(parents=True, exist_ok=True)
        count = write_cache(path, records)
        self.echo(f"Wrote {count} {config.variant} records to {path}")
        return False
