from datetime import datetime, timedelta

import pytest

from rampcast import SampleRecord


@pytest.fixture
def make_records():
    """Build a 10-minute record series from a list of power values."""

    def build(powers, temps=None, start=None, step_minutes=10):
        t0 = start or datetime(2015, 1, 1)
        step = timedelta(minutes=step_minutes)
        if temps is None:
            temps = [10.0] * len(powers)
        return [
            SampleRecord(t0 + i * step, float(p), float(c))
            for i, (p, c) in enumerate(zip(powers, temps))
        ]

    return build
