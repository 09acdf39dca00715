"""Shared fixtures."""

import pytest

from roisar import RadarConfig


@pytest.fixture
def cfg() -> RadarConfig:
    """Short-range 77 GHz configuration (the package defaults)."""
    return RadarConfig()
