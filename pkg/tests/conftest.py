from pathlib import Path

import numpy as np
import pytest

from ncsvm.dataset import Dataset

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="d.csv"):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


def blobs(n, seed, sep=3.0, dim=2):
    """Two Gaussian blobs centred at -sep/2 and +sep/2 on every axis."""
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    X = rng.normal(size=(n, dim)) + (sep / 2) * y[:, None]
    return Dataset(X, y)
