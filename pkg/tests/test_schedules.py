import math

import pytest

from sleepmis import ELL, ceil_log2, fast_depth, fast_schedule, sleeping_depth, t_schedule


def test_t_schedule_values():
    assert t_schedule(0) == 0
    assert t_schedule(1) == 3
    assert t_schedule(5) == 93


def test_t_schedule_recurrence():
    for k in range(1, 21):
        assert t_schedule(k) == 2 * t_schedule(k - 1) + 3


def test_fast_schedule_base_and_example():
    for n in (2, 17, 256, 4096):
        assert fast_schedule(0, n, 6) == 6 * ceil_log2(n)
    assert fast_schedule(1, 256, 6) == 99  # 2*(48+3)-3, recurrence unrolled once


def test_fast_schedule_recurrence():
    for n in (2, 100, 1024):
        for c in (1, 6):
            for k in range(1, 21):
                assert fast_schedule(k, n, c) == 2 * fast_schedule(k - 1, n, c) + 3


def test_depths():
    assert sleeping_depth(1) == 0
    assert sleeping_depth(2) == 3
    assert sleeping_depth(64) == 18
    assert sleeping_depth(1024) == 30
    assert sleeping_depth(255) == math.ceil(3 * math.log2(255))
    assert fast_depth(65536) == 10  # ceil(ELL * 4)
    assert fast_depth(2) == 1 and fast_depth(3) == 1  # clamp below n=4
    assert fast_depth(4) == math.ceil(ELL)


def test_errors():
    with pytest.raises(ValueError):
        t_schedule(-1)
    with pytest.raises(ValueError):
        fast_schedule(1, 0, 6)
    with pytest.raises(ValueError):
        sleeping_depth(0)


def test_ell_value():
    assert abs(ELL - 1.0 / math.log2(4.0 / 3.0)) < 1e-15
    assert abs(ELL - 2.4094) < 1e-4
