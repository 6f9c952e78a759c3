import subprocess

import pytest

from . import utils
from .settings import SETTINGS


@pytest.fixture(scope="module")
def synthesized(tmp_path_factory):
    """Datasets of the small ensemble, synthesized once per module."""
    out = tmp_path_factory.mktemp("synth")
    cmd = utils.Command("synth", config=utils.SMALL_CONFIG, out=out)
    result = subprocess.run(
        cmd, timeout=SETTINGS["synth_timeout"], capture_output=True
    )
    assert result.returncode == 0, result.stderr
    return out / "datasets"
