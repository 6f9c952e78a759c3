import sys
from unittest.mock import AsyncMock, patch

import pytest

from noise_spectroscopy.cli import get_parser, main, update_settings
from noise_spectroscopy.conf import settings


@pytest.fixture(autouse=True)
def restore_settings():
    saved = dict(vars(settings))
    yield
    vars(settings).update(saved)


def test_main_no_args(capsys):
    with patch.object(sys, "argv", ["noise-spectroscopy"]):
        assert main() == 1
    assert "usage: noise-spectroscopy" in capsys.readouterr().out


def test_main_no_command():
    assert main([]) == 1


def test_main_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("noise-spectroscopy [")


test_data = [
    (None, 0, 0, ["report", "a.json"], True),
    (None, 2, 2, ["report", "a.json", "b.json", "-v"], True),
    (KeyboardInterrupt("Bail"), 0, 1, ["fit-decay", "a.json"], True),
    (Exception("Kaboom"), 0, 1, ["spectrum", "a.json", "-vv"], True),
    (None, 0, 0, ["synth", "--mc-oracle", "--seed", "3"], True),
    (None, 0, 1, ["report", "a.json", "--seed", "-1"], False),
    (None, 0, 1, ["report", "a.json", "--workers", "0"], False),
    (None, 0, 1, ["depth", "s.json", "--density", "0"], False),
    (None, 0, 1, ["depth", "s.json", "--field", "-5"], False),
    (None, 0, 0, ["depth", "s.json", "--field", "0"], True),
    (None, 0, 1, ["report", "a.json", "--set", "analysis.nope=1"], False),
    (None, 0, 1, ["report", "a.json", "--set", "sigma_c"], False),
]


@pytest.mark.parametrize("ex, returned, expected_rc, args, called", test_data)
@patch("noise_spectroscopy.cli.app.run", new_callable=AsyncMock)
def test_main_exit_codes(mock, ex, returned, expected_rc, args, called):
    mock.return_value = returned
    if ex:
        mock.side_effect = ex
    rc = main(args)
    assert mock.called == called
    assert rc == expected_rc


@pytest.mark.parametrize(
    "args",
    [
        pytest.param(["fit-spectrum", "s.json", "--model", "x"], id="model"),
        pytest.param(["report"], id="no_datasets"),
        pytest.param(["bogus"], id="command"),
    ],
)
def test_main_parser_errors(args):
    with pytest.raises(SystemExit) as excinfo:
        main(args)
    assert excinfo.value.code == 2


def test_update_settings():
    args = get_parser().parse_args(
        [
            "report",
            "a.json",
            "--seed",
            "5",
            "--workers",
            "3",
            "--bootstrap",
            "--stamp",
            "-o",
            "results",
            "--set",
            "analysis.sigma_c=0.01",
            "--set",
            "analysis.coherence_window=[0.1, 0.9]",
        ]
    )

    update_settings(args)

    config = settings.config
    assert config.seed == 5
    assert config.workers == 3
    assert config.bootstrap is True
    assert config.output_dir == "results"
    assert config.sigma_c == 0.01
    assert config.coherence_window == (0.1, 0.9)
    assert settings.workers == 3
    assert settings.stamp is True
    assert settings.mc_oracle is False


def test_update_settings_from_file(tmp_path):
    path = tmp_path / "config.yml"
    path.write_text(
        "analysis:\n"
        "  nmr_window: 0.2\n"
        "  seed: 9\n"
        "plan:\n"
        "  n_values: [1, 2, 4, 8]\n"
    )
    args = get_parser().parse_args(
        ["synth", "-c", str(path), "--mc-oracle", "--seed", "4"]
    )

    update_settings(args)

    assert settings.config.nmr_window == 0.2
    # the command line wins over the file
    assert settings.config.seed == 4
    assert settings.plan == {"n_values": [1, 2, 4, 8]}
    assert settings.synthetic is None
    assert settings.mc_oracle is True


@patch("noise_spectroscopy.cli.app.run", new_callable=AsyncMock)
def test_main_invalid_config_file(mock, tmp_path):
    path = tmp_path / "config.yml"
    path.write_text("analysis:\n  workers: 0\n")

    assert main(["report", "a.json", "-c", str(path)]) == 1
    assert not mock.called
