import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from floorgraph.dataset import ScanRecord, split  # noqa: E402
from floorgraph.eline import TrainConfig  # noqa: E402
from floorgraph.pipeline import fit  # noqa: E402
from floorgraph.synthgen import BuildingSpec, generate  # noqa: E402


@pytest.fixture(scope="session")
def small_building():
    return generate(BuildingSpec(floors=3, aps_per_floor=15, records_per_floor=80, seed=11))


@pytest.fixture(scope="session")
def small_split(small_building):
    return split(small_building, 0.7, 4, seed=3)


@pytest.fixture(scope="session")
def small_model(small_split):
    model, report = fit(small_split[0], train_config=TrainConfig(seed=5))
    return model, report


def rec(record_id, pairs, floor=None):
    return ScanRecord.from_pairs(record_id, pairs, floor)
