"""Shared fixtures and the acceptance-summary hook."""

import datetime as dt

import numpy as np
import pytest

from voltgrid import TimeSeries, align_hourly, kernel_from_config

# One line per acceptance criterion, echoed after the normal pytest summary
# so the pass/fail verdicts are visible without -s.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


START = dt.datetime(2019, 1, 1)


def hourly(values, name="load", start=START):
    return TimeSeries(start, np.asarray(values, dtype=float), name=name)


def synthetic_load(n_hours, noise=500.0, seed=42, start=START):
    """Daily + weekly sinusoids on a 50 GW base with a working-day bump."""
    t = np.arange(n_hours)
    days = (np.datetime64(start, "s") + (t * 3600).astype("timedelta64[s]"))
    dow = (days.astype("datetime64[D]").astype(np.int64) + 3) % 7
    working = (dow < 5).astype(float)
    rng = np.random.default_rng(seed)
    values = (50000.0
              + 8000.0 * np.sin(2 * np.pi * t / 24)
              + 4000.0 * np.sin(2 * np.pi * t / 168)
              + 3000.0 * working
              + rng.normal(0.0, noise, n_hours))
    return TimeSeries(start, values, name="load")


@pytest.fixture
def load_frame():
    """Six weeks of synthetic hourly load, enough for all default lags."""
    return align_hourly([synthetic_load(6 * 168)])


def identity_kernel(value=1.0):
    return kernel_from_config({
        "n": 1,
        "K": [{"type": "const", "value": value}],
        "G": [{"type": "linear"}],
    })


def two_band_kernel(c1=0.5, k1=1.0, k2=2.0):
    return kernel_from_config({
        "n": 2,
        "alphas": {"type": "proportional", "c": [c1]},
        "K": [{"type": "const", "value": k1}, {"type": "const", "value": k2}],
        "G": [{"type": "linear"}, {"type": "linear"}],
    })
