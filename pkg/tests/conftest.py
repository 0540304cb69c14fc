import numpy as np
import pytest

from gdba import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dataset(features, labels=None) -> Dataset:
    """Shorthand for building raw (unstandardized) datasets in tests."""
    return Dataset.from_features(np.asarray(features, dtype=float), labels=labels)
