import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

PACKAGE_DATA = Path(__file__).resolve().parents[1] / "src" / "repsel" / "data"
TEST_DATA = Path(__file__).resolve().parent / "data"


def data_path(name: str) -> Path:
    """Path of a bundled sample grid."""
    return PACKAGE_DATA / name


def asset_path(name: str) -> Path:
    return TEST_DATA / name


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """Tiny two-family synthetic ensemble written to disk with its oracle."""
    from repsel.ensemble import (ChannelFamily, SyntheticSpec,
                                 generate_synthetic_ensemble, write_ensemble)
    spec = SyntheticSpec(
        dims=(10, 10, 2), realizations_per_family=4, seed=5,
        families=(ChannelFamily(0.0, 3.0, 2.0),
                  ChannelFamily(90.0, 3.0, 4.0)))
    result = generate_synthetic_ensemble(spec)
    directory = tmp_path_factory.mktemp("dataset")
    manifest = write_ensemble(result.ensemble, directory)
    return {"manifest": manifest, "result": result,
            "voi": [int(c) for c in result.channel_cells]}
