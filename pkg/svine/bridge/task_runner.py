"""
Thread-pool runner for independent work items (the per-family runs of the
convergence experiment). The pool size is capped by SVINE_THREADS.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from svine.core.config import get_thread_cap
from svine.core.logging_utils import get_logger

T = TypeVar("T")
R = TypeVar("R")


class TaskRunner:
    """
    Runs a function over work items on a bounded thread pool.

    Results come back in input order; the first exception raised by any item
    is re-raised after all items finish.
    """

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max(1, max_workers or get_thread_cap())
        self.logger = get_logger("tasks", "tasks.log")
        self.is_processing = False
        self._lock = threading.Lock()

    def map(self, func: Callable[[T], R], items: Iterable[T], label: str = "task") -> List[R]:
        items = list(items)
        with self._lock:
            if self.is_processing:
                raise RuntimeError("Task runner is already processing a batch.")
            self.is_processing = True
        try:
            self.logger.info("Running %d %s item(s) on %d worker(s)", len(items), label, self.max_workers)
            if self.max_workers == 1 or len(items) <= 1:
                return [func(item) for item in items]
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                futures = [pool.submit(func, item) for item in items]
                errors = [f.exception() for f in futures]
            for item, err in zip(items, errors):
                if err is not None:
                    self.logger.error("%s item %r failed: %s", label, item, err)
                    raise err
            return [f.result() for f in futures]
        finally:
            with self._lock:
                self.is_processing = False

    def is_busy(self) -> bool:
        """Check if the runner is currently processing a batch."""
        with self._lock:
            return self.is_processing
