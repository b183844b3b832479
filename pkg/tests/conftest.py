"""Shared helpers for the test suite."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest


def write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    """Write a small CSV file and return its path."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return Path(path)


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator for tests that sample their own inputs."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(20260816)))
