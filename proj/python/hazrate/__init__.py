"""Rates, hazards and causal contrasts in the illness-death model with time-varying treatment."""

from ._hazrate import *  # noqa: F401,F403
from ._hazrate import ConvergenceError, __version__

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
