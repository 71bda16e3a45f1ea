import sys

import numpy as np
import pytest

from zsner.embeddings import EmbeddingTable


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    status = "PASS" if report.passed else "FAIL"
    name = report.nodeid.split("::")[-1]
    print(f"[acceptance] {status} {name}", file=sys.__stderr__)


@pytest.fixture
def tiny_table() -> EmbeddingTable:
    return EmbeddingTable(
        2,
        {
            "music": np.array([1.0, 0.0]),
            "natural": np.array([0.0, 2.0]),
            "science": np.array([2.0, 0.0]),
            "person": np.array([0.5, 0.5]),
            "location": np.array([-1.0, 1.0]),
        },
    )
