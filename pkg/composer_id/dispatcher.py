import logging
import time
from typing import List

from composer_id.config import RunSpec
from composer_id.handler import Handler

logger = logging.getLogger("composer_id.dispatcher")


class Dispatcher:
    """
    Routes a run spec through the registered handlers.
    """

    def __init__(self) -> None:
        self.handlers: List[Handler] = []

    def add_handler(self, handler: Handler) -> None:
        """
        Register a new handler.

        Parameters
        ----------
        handler : Handler
            Handler instance to register.
        """
        self.handlers.append(handler)
        logger.debug("Handler registered: %s", handler.__class__.__name__)

    def dispatch(self, spec: RunSpec) -> None:
        """
        Pass the spec through the handler chain until one consumes it.

        Parameters
        ----------
        spec : RunSpec
            Parsed command invocation.

        Raises
        ------
        RuntimeError
            If no handler consumed the spec.
        """
        for handler in self.handlers:
            if not handler.can_handle(spec):
                continue

            name = handler.__class__.__name__
            logger.debug("Command %s routed to handler: %s", spec.command, name)

            started = time.perf_counter()
            consumed = handler.handle(spec)
            logger.info("Command %s done in %.1f s", spec.command, time.perf_counter() - started)
            logger.debug("Handler %s consumed=%s", name, consumed)

            if consumed is False:
                return
        raise RuntimeError(f"no handler for command {spec.command!r}")
