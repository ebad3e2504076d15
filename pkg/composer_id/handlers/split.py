from composer_id.config import RunSpec
from composer_id.constants import CMD_SPLIT, SUBSETS
from composer_id.handler import Handler
from composer_id.services.experiment import load_catalog, make_split


class SplitHandler(Handler):
    """Stratified train/validation/test split of the top-k catalog."""

    def __init__(self, echo):
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_SPLIT

    def handle(self, spec: RunSpec) -> bool:
        config = spec.load()
        catalog = load_catalog(config)
        split = make_split(config, catalog)
        counts = ", ".join(f"{subset} {len(split.ids(subset))}" for subset in SUBSETS)
        self.echo(f"Split {len(catalog.pieces)} pieces of {len(catalog.composer_index)} composers: {counts}")
        return False
