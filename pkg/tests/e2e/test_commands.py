"""
Module with tests for the single-step commands chained by hand
"""

import logging
import subprocess

import pytest
from pytest_check import check

from . import utils
from .settings import SETTINGS

LOGGER = logging.getLogger(__name__)
DEFAULT_CMD_TIMEOUT = SETTINGS["cmd_timeout"]
SENSORS = ("NV3", "NV4", "NV6")


def _run(cmd: utils.Command) -> subprocess.CompletedProcess:
    LOGGER.info(f"Running command: {cmd}")
    return subprocess.run(
        cmd, timeout=DEFAULT_CMD_TIMEOUT, capture_output=True, text=True
    )


@pytest.fixture(scope="module")
def spectra(synthesized, tmp_path_factory):
    out = tmp_path_factory.mktemp("spectra")
    cmd = utils.Command(
        "spectrum", inputs=[synthesized], config=utils.SMALL_CONFIG, out=out
    )
    result = _run(cmd)
    assert result.returncode == 0, result.stderr
    return out


@pytest.mark.e2e
def test_synth_writes_one_dataset_per_depth(synthesized):
    names = sorted(path.name for path in synthesized.iterdir())

    assert names == [f"{sensor}.json" for sensor in SENSORS]
    data = utils.read_json(synthesized / "NV4.json")
    sequences = {curve["sequence"] for curve in data["curves"]}
    assert sequences == {"CPMG", "XY8"}
    assert data["t1"] is not None


@pytest.mark.e2e
def test_fit_decay(synthesized, tmp_path):
    cmd = utils.Command(
        "fit-decay", inputs=[synthesized / "NV4.json"], out=tmp_path
    )

    result = _run(cmd)

    assert result.returncode == 0, result.stderr
    assert "fit-decay NV4" in result.stdout
    data = utils.read_json(tmp_path / "NV4_decay.json")
    assert [row["n_pulses"] for row in data["decay_fits"]] == [1, 2, 4, 8, 16]
    with check:
        assert 0.2 < data["scaling"]["k"]["value"] < 1.0


@pytest.mark.e2e
def test_spectrum_files(spectra):
    for sensor in SENSORS:
        data = utils.read_json(spectra / f"{sensor}_spectrum.json")
        assert data["dataset_id"] == sensor
        assert data["field_gauss"] == 454.0
        assert len(data["frequency_mhz"]) == len(data["s_rad2_per_us"])
        assert (spectra / f"{sensor}_sweep_spectrum.json").is_file()


@pytest.mark.e2e
def test_fit_spectrum(spectra, tmp_path):
    cmd = utils.Command(
        "fit-spectrum",
        inputs=[spectra / "NV4_spectrum.json"],
        out=tmp_path,
        extra=["--model", "double"],
    )

    result = _run(cmd)

    assert result.returncode == 0, result.stderr
    data = utils.read_json(tmp_path / "NV4_models.json")
    assert data["ranking"] == ["double"]
    params = data["fits"]["double"]["params"]
    assert sorted(params) == ["delta1", "delta2", "tau_c1", "tau_c2"]


@pytest.mark.e2e
def test_depth_from_sweep(spectra, tmp_path):
    cmd = utils.Command(
        "depth", inputs=[spectra / "NV4_sweep_spectrum.json"], out=tmp_path
    )

    result = _run(cmd)

    assert result.returncode == 0, result.stderr
    data = utils.read_json(tmp_path / "NV4_depth.json")
    with check:
        assert data["nmr"]["center"]["value"] == pytest.approx(
            1.933, rel=0.05
        )
    with check:
        assert data["depth"]["depth"]["value"] == pytest.approx(4.0, rel=0.5)


@pytest.mark.e2e
def test_depth_at_zero_field(spectra, tmp_path):
    cmd = utils.Command(
        "depth",
        inputs=[spectra / "NV4_sweep_spectrum.json"],
        out=tmp_path,
        extra=["--field", "0"],
    )

    result = _run(cmd)

    assert result.returncode == 2, result.stderr
    assert "failed: window-uncovered" in result.stdout
    assert not (tmp_path / "NV4_depth.json").exists()


@pytest.mark.e2e
def test_global_fit_and_depth_scaling(spectra, tmp_path):
    cmd = utils.Command(
        "global-fit",
        inputs=[spectra / f"{sensor}_spectrum.json" for sensor in SENSORS],
        out=tmp_path,
    )
    result = _run(cmd)
    assert result.returncode == 0, result.stderr
    data = utils.read_json(tmp_path / "global_fit.json")
    assert sorted(data["couplings"]) == list(SENSORS)
    assert data["depths_nm"] == {"NV3": 3.0, "NV4": 4.0, "NV6": 6.0}

    cmd = utils.Command(
        "depth-scaling", inputs=[tmp_path / "global_fit.json"], out=tmp_path
    )
    result = _run(cmd)
    assert result.returncode == 0, result.stderr
    data = utils.read_json(tmp_path / "depth_scaling.json")
    assert sorted(data) == ["delta1", "delta2"]
    with check:
        assert data["delta1"]["n"]["value"] > data["delta2"]["n"]["value"]
