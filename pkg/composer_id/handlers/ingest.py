from pathlib import Path

from composer_id.config import RunSpec
from composer_id.constants import CMD_INGEST
from composer_id.handler import Handler
from composer_id.repo.manifest_repo import read_metadata, write_catalog
from composer_id.services.ingest import ingest_directory


class IngestHandler(Handler):
    """
    Build the catalog manifest from a directory of MIDI files.
    """

    def __init__(self, echo):
        """
        Parameters
        ----------
        echo : Callable[[str], None]
            Output sink for user-facing lines.
        """
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_INGEST

    def handle(self, spec: RunSpec) -> bool:
        config = spec.load()
        metadata = read_metadata(Path(config.metadata)) if config.metadata else None
        catalog, skipped = ingest_directory(Path(config.midi_dir), metadata, config.sustain_pedal)

        manifest = Path(config.manifest)
        manifest.parent.mkdir(parents=True, exist_ok=True)
        write_catalog(manifest, catalog)

        line = f"Wrote {len(catalog.pieces)} pieces by {len(catalog.composer_index)} composers to {manifest}"
        if skipped:
            line += f" (skipped {skipped})"
        self.echo(line)
        return False
