from pathlib import Path

import pytest

from thin_spectra import random_utils, validate

DATA_DIRECTORY = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def seed():
    random_utils.set_seed(20240501)
    return 20240501


@pytest.fixture(autouse=True)
def strict_validation():
    validate.set_validate(True)
    validate.set_strict_validation(True)
    yield
    validate.set_validate(True)
    validate.set_strict_validation(True)


@pytest.fixture
def data_directory():
    return DATA_DIRECTORY
