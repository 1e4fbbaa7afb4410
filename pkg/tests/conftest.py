import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                        os.pardir, "src", "evsim", "data")


@pytest.fixture(scope="session")
def data_dir():
    return os.path.abspath(DATA_DIR)


@pytest.fixture(scope="session")
def reference_config(data_dir):
    return os.path.join(data_dir, "reference_scenario.toml")


@pytest.fixture(scope="session")
def cruise_config(data_dir):
    return os.path.join(data_dir, "cruise_scenario.toml")
