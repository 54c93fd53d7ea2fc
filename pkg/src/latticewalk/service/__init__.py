"""HTTP service wrapping the library; the CLI calls the same handlers in-process."""

from . import handlers, models

__all__ = ["handlers", "models"]
