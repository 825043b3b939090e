"""Allocation accounting for the matrix-free engine.

Engine code reports each work buffer it allocates via :func:`record`. Inside an
:func:`accounting` scope the active :class:`AllocationAccountant` keeps the
largest single allocation and the allocation count, and the scope measures the
peak of traced memory with ``tracemalloc``. Outside a scope ``record`` is a
no-op.
"""

import threading
import tracemalloc
from contextlib import contextmanager
from contextvars import ContextVar
from math import prod
from typing import Dict, Iterator, Optional, Tuple

_active: ContextVar[Optional["AllocationAccountant"]] = ContextVar("accountant", default=None)


class AllocationAccountant:
    def __init__(self):
        self.count = 0
        self.largest_elements = 0
        self.largest_label: Optional[str] = None
        self.by_label: Dict[str, int] = {}
        self.peak_bytes = 0
        self._lock = threading.Lock()

    def record(self, label: str, shape: Tuple[int, ...]) -> None:
        elements = prod(shape)
        with self._lock:
            self.count += 1
            if elements > self.by_label.get(label, 0):
                self.by_label[label] = elements
            if elements > self.largest_elements:
                self.largest_elements = elements
                self.largest_label = label

    @property
    def peak_megabytes(self) -> float:
        return self.peak_bytes / 2**20

    def summary(self) -> dict:
        return {
            "peak_bytes": self.peak_bytes,
            "largest_allocation_elements": self.largest_elements,
            "largest_allocation_label": self.largest_label,
            "allocations": self.count,
        }


def record(label: str, shape: Tuple[int, ...]) -> None:
    accountant = _active.get()
    if accountant is not None:
        accountant.record(label, shape)


@contextmanager
def accounting() -> Iterator[AllocationAccountant]:
    accountant = AllocationAccountant()
    token = _active.set(accountant)
    started = not tracemalloc.is_tracing()
    if started:
        tracemalloc.start()
    tracemalloc.reset_peak()
    baseline, _ = tracemalloc.get_traced_memory()
    try:
        yield accountant
    finally:
        _, peak = tracemalloc.get_traced_memory()
        accountant.peak_bytes = max(peak - baseline, 0)
        if started:
            tracemalloc.stop()
        _active.reset(token)
