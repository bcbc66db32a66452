"""
Shared fixtures: small synthetic splits written to tmp_path.
"""

import pytest

from app.dataset import PRESETS, load_split
from app.dataset.synthetic import make_synthetic_split


@pytest.fixture
def split_root(tmp_path):
    """3 sequences x 10 frames, tnl2k layout, target always visible."""
    return make_synthetic_split(tmp_path / "split", n_sequences=3, n_frames=10)


@pytest.fixture
def sequences(split_root):
    return load_split(split_root, PRESETS["tnl2k"]).sequences


@pytest.fixture
def lt_split_root(tmp_path):
    """2 sequences x 12 frames, tnllt layout, target flagged absent on frames 5-6."""
    return make_synthetic_split(
        tmp_path / "split_lt", n_sequences=2, n_frames=12, layout="tnllt", seed=1, absent_span=(5, 6)
    )
