"""
Module with tests for the report command
"""

import logging
import subprocess

import pytest
from pytest_check import check

from noise_spectroscopy.validators import Validate

from . import utils
from .settings import SETTINGS

LOGGER = logging.getLogger(__name__)
DEFAULT_CMD_TIMEOUT = SETTINGS["cmd_timeout"]


def _report(synthesized, out, **kwargs) -> subprocess.CompletedProcess:
    cmd = utils.Command(
        "report",
        inputs=[synthesized],
        config=utils.SMALL_CONFIG,
        out=out,
        **kwargs,
    )
    LOGGER.info(f"Running command: {cmd}")
    return subprocess.run(
        cmd, timeout=DEFAULT_CMD_TIMEOUT, capture_output=True, text=True
    )


@pytest.mark.e2e
def test_report(synthesized, tmp_path):
    result = _report(synthesized, tmp_path)

    assert result.returncode in (0, 2), result.stderr
    data = utils.read_json(tmp_path / "report.json")
    Validate.report(data)
    assert [d["id"] for d in data["datasets"]] == ["NV3", "NV4", "NV6"]
    assert "report" in result.stdout
    with check:
        assert data["ensemble"]["global_fit"] is not None
    with check:
        assert data["ensemble"]["depth_scaling"] is not None
    plots = sorted(path.name for path in (tmp_path / "plots").iterdir())
    assert "NV4_spectrum.svg" in plots
    assert "NV4_spectrum_points.csv" in plots


@pytest.mark.e2e
def test_report_is_reproducible(synthesized, tmp_path):
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"

    first = _report(synthesized, serial, workers=1)
    second = _report(synthesized, parallel, workers=3)

    assert first.returncode == second.returncode
    for name in ("report.json", "plots/NV4_spectrum.svg"):
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()


@pytest.mark.e2e
def test_report_stamp(synthesized, tmp_path):
    result = _report(synthesized, tmp_path, stamp=True)

    assert result.returncode in (0, 2), result.stderr
    data = utils.read_json(tmp_path / "report.json")
    assert all("run_at" in stage for stage in data["stages"])


@pytest.mark.e2e
def test_report_skips_unreadable_dataset(synthesized, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"id": "broken",\n  "curves": [\n')
    cmd = utils.Command(
        "report",
        inputs=[synthesized / "NV4.json", bad],
        out=tmp_path / "out",
        verbosity=1,
    )

    result = subprocess.run(
        cmd, timeout=DEFAULT_CMD_TIMEOUT, capture_output=True, text=True
    )

    assert result.returncode in (0, 2), result.stderr
    assert "Skipping dataset" in result.stdout + result.stderr
    data = utils.read_json(tmp_path / "out/report.json")
    assert [d["id"] for d in data["datasets"]] == ["NV4"]
