"""Shared fixtures: synthetic streams and benchmark dataset discovery.

The benchmark datasets (mushrooms, magic04, w8a) are not redistributable
with the package; tests that need them look under ``OKL_DATA_DIR`` (default
``<repo>/data``) and skip loudly when a file is absent. See
``scripts/fetch_datasets.py`` for obtaining them.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from okl.data import Dataset

REPO_ROOT = Path(__file__).resolve().parent.parent

DATASET_CANDIDATES = {
    "mushrooms": ["mushrooms.libsvm", "mushrooms.txt", "mushrooms",
                  "mushrooms.libsvm.gz", "mushrooms.txt.gz"],
    "magic04": ["magic04.libsvm", "magic04.txt", "magic04",
                "magic04.libsvm.gz", "magic04.txt.gz"],
    "w8a": ["w8a.libsvm", "w8a.txt", "w8a", "w8a.libsvm.gz", "w8a.txt.gz"],
}


def data_dir() -> Path:
    return Path(os.environ.get("OKL_DATA_DIR", REPO_ROOT / "data"))


def dataset_path(name: str) -> Path | None:
    base = data_dir()
    for candidate in DATASET_CANDIDATES[name]:
        path = base / candidate
        if path.exists():
            return path
    return None


def require_dataset(name: str) -> Path:
    path = dataset_path(name)
    if path is None:
        pytest.skip(
            f"benchmark dataset {name!r} not found under {data_dir()} "
            f"(set OKL_DATA_DIR or run scripts/fetch_datasets.py where "
            f"network is available)")
    return path


def synthetic_stream(seed: int, n: int = 200, dim: int = 5,
                     separation: float = 1.0) -> Dataset:
    """Two seeded Gaussian blobs with labels by blob membership."""
    rng = np.random.default_rng(seed)
    half = n // 2
    pos = rng.normal(loc=separation, scale=1.0, size=(half, dim))
    neg = rng.normal(loc=-separation, scale=1.0, size=(n - half, dim))
    X = np.vstack([pos, neg])
    y = np.concatenate([np.ones(half, dtype=np.int64),
                        -np.ones(n - half, dtype=np.int64)])
    order = rng.permutation(n)
    return Dataset(X[order], y[order], name=f"synthetic{seed}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
