"""Worker-pool sizing and ordered parallel map."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from ..autograd import is_deterministic
from ..errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "MYOTRACK_NUM_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def num_workers(requested: Optional[int] = None) -> int:
    """
    Resolve the worker count.

    Deterministic mode always uses one worker. Otherwise an explicit request wins,
    then MYOTRACK_NUM_THREADS, then the CPU count.
    """
    if is_deterministic():
        return 1
    if requested is not None:
        if requested < 1:
            raise ConfigError(f"worker count must be >= 1, got {requested}")
        return requested
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'") from None
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply `fn` to every item, possibly in parallel; results keep input order."""
    items = list(items)
    n_workers = min(num_workers(workers), max(len(items), 1))
    if n_workers == 1:
        return [fn(item) for item in items]
    logger.debug("mapping %d items over %d threads", len(items), n_workers)
    with ThreadPoolExecutor(max_workers=n_workers) as executor:
        return list(executor.map(fn, items))
