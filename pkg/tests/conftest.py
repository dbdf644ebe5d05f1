import pathlib

import pytest

from tlt_synth.systems import load_system

ASSETS = pathlib.Path(__file__).resolve().parents[1] / "assets"


@pytest.fixture(scope="session")
def traffic_light():
    """Five-state cyclic light with a failure state; ids are zero-based, so
    state i here is state i+1 in hand calculations over the original model."""
    return load_system(str(ASSETS / "traffic_light.json"))


@pytest.fixture(scope="session")
def four_state_cts():
    return load_system(str(ASSETS / "four_state_cts.json"))


@pytest.fixture(scope="session")
def assets_dir():
    return ASSETS
