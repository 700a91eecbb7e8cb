import pytest

from cotrap import core


@pytest.fixture(scope="session")
def cfg():
    """Bundled default configuration (dual-frequency, angular file numbers)."""
    return core.load_config("default.cfg")


@pytest.fixture(scope="session")
def cfg_ordinary():
    """Same trap written with ordinary (Hz) file numbers."""
    return core.load_config("default_ordinary.cfg")
