import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _suite import suite_models  # noqa: E402


@pytest.fixture(scope="session")
def suite():
    """(dataset, split, map, attribute model, general classifier) for the standard suite."""
    return suite_models()


@pytest.fixture(scope="session")
def suite_dataset(suite):
    return suite[0]


@pytest.fixture(scope="session")
def suite_split(suite):
    return suite[1]


@pytest.fixture(scope="session")
def suite_map(suite):
    return suite[2]


@pytest.fixture(scope="session")
def suite_model(suite):
    return suite[3]


@pytest.fixture(scope="session")
def suite_general(suite):
    return suite[4]
