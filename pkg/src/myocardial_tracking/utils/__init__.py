"""Utility functions for myocardial tracking."""

from .logging import LOG_FORMAT, configure_logging
from .threads import THREADS_ENV, num_workers, ordered_map

__all__ = ["LOG_FORMAT", "THREADS_ENV", "configure_logging", "num_workers", "ordered_map"]
