"""Kelly betting with many simultaneous games, insider information and finite memory."""

__version__ = "0.1.0"

from . import bayes_memory, insider_outsider, kelly_core, multi_game, simulator  # noqa: E402

__all__ = [
    "__version__",
    "bayes_memory",
    "insider_outsider",
    "kelly_core",
    "multi_game",
    "simulator",
]
