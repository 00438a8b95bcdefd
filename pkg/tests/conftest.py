import pytest

from ntnplan.config import scenario_from_config


@pytest.fixture(scope="session")
def default_scenario():
    """Bundled default scenario, layout drawn with seed 0."""
    return scenario_from_config({}, seed=0)
