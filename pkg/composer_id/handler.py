from abc import ABC, abstractmethod

from composer_id.config import RunSpec


class Handler(ABC):
    """
    One CLI command. Handlers are tried in registration order.
    """

    @abstractmethod
    def can_handle(self, spec: RunSpec) -> bool:
        """True when ``spec.command`` belongs to this handler."""

    @abstractmethod
    def handle(self, spec: RunSpec) -> bool:
        """
        Run the command.

        Returns
        -------
        bool
            False when the command is done and routing stops; True lets
            the next matching handler run as well.
        """
