import sys
from pathlib import Path

import numpy as np
import pytest

_ROOT = Path(__file__).resolve().parents[1]
_APP = _ROOT / "app"
if str(_APP) not in sys.path:
    sys.path.insert(0, str(_APP))

from circbody.geometry import ShapeSpec, make_body  # noqa: E402
from circbody.potential import make_mass_model  # noqa: E402

# rounded foil: the circle encloses both critical points strictly
FOIL = ShapeSpec.joukowski(1.15, (-0.1, 0.05), 1.0)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long conservation runs (deselect with -m 'not slow')")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def circle_256():
    return make_body(ShapeSpec.circle(1.0), 256)


@pytest.fixture(scope="session")
def ellipse_256():
    return make_body(ShapeSpec.ellipse(2.0, 1.0), 256)


@pytest.fixture(scope="session")
def foil_1024():
    return make_body(FOIL, 1024)


@pytest.fixture
def iso_mass():
    # I = 1, m = 1
    return make_mass_model(np.eye(3))


@pytest.fixture
def aniso_mass():
    return make_mass_model(np.array([
        [0.7, 0.1, 0.0],
        [0.1, 1.5, 0.2],
        [0.0, 0.2, 3.0],
    ]))


@pytest.fixture
def scenario_file(tmp_path):
    """Write a scenario text to tmp_path and return its path."""
    def write(text: str, name: str = "scenario.ini") -> Path:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return write
