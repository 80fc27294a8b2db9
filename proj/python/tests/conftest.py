import os
import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "python"))


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("CONECALC_CLI")
    if not exe or not os.path.exists(exe):
        pytest.skip("CONECALC_CLI not set")
    return exe


@pytest.fixture(scope="session")
def schemas():
    return pathlib.Path(os.environ.get("CONECALC_SCHEMAS", ROOT / "schemas"))


@pytest.fixture(scope="session")
def examples():
    return ROOT / "examples_cfg"
