import threading

import numpy as np

from tensorsmooth.core.accounting import accounting, record
from tensorsmooth.core.config import settings
from tensorsmooth.core.parallel import ordered_map, resolve_threads


def test_record_outside_scope_is_ignored():
    record("anything", (10, 10))
    with accounting() as accountant:
        pass
    assert accountant.count == 0
    assert accountant.largest_elements == 0


def test_largest_allocation_is_tracked():
    with accounting() as accountant:
        record("probes", (5, 100))
        record("chunk", (64, 16))
        record("probes", (2, 10))
        buffer = np.ones(200_000)
    assert accountant.count == 3
    assert accountant.largest_elements == 1024
    assert accountant.largest_label == "chunk"
    assert accountant.by_label == {"probes": 500, "chunk": 1024}
    assert accountant.peak_bytes >= buffer.nbytes
    assert accountant.summary()["allocations"] == 3


def test_scopes_do_not_leak():
    with accounting() as outer:
        with accounting() as inner:
            record("inner", (3,))
        record("outer", (7,))
    assert inner.by_label == {"inner": 3}
    assert outer.by_label == {"outer": 7}


def test_workers_report_to_callers_scope():
    with accounting() as accountant:
        ordered_map(lambda k: record("work", (k,)), [4, 9, 2], threads=3)
    assert accountant.count == 3
    assert accountant.largest_elements == 9


def test_ordered_map_keeps_input_order():
    def slow_first(k):
        if k == 0:
            threading.Event().wait(0.05)
        return k * k

    assert ordered_map(slow_first, range(8), threads=4) == [k * k for k in range(8)]
    assert ordered_map(slow_first, [], threads=4) == []


def test_thread_count_falls_back_to_settings():
    settings.THREADS = 3
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
