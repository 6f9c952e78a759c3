#  Copyright 2024 Red Hat, Inc.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

import argparse
import asyncio
import logging
import sys
from typing import List

import noise_spectroscopy.util as util
from noise_spectroscopy import app, terminal
from noise_spectroscopy.conf import (
    apply_overrides,
    config_from_dict,
    load_config_file,
    settings,
)
from noise_spectroscopy.fitting import ModelKind

display = terminal.Display()

DEFAULT_VERBOSITY = 0

logger = logging.getLogger(__name__)


def _dataset_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "datasets",
        nargs="+",
        help="Dataset JSON files, CSV dataset directories or directories "
        "of dataset JSON files",
    )


def _spectrum_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "spectra",
        nargs="+",
        help="Spectrum JSON files written by the spectrum command",
    )


def get_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config",
        help="YAML file with analysis, synthetic and plan sections",
    )
    common.add_argument(
        "--seed",
        type=int,
        help="Seed of every random stream, default 0",
    )
    common.add_argument(
        "-o",
        "--out",
        help="Output directory, default ./out",
    )
    common.add_argument(
        "-v",
        "--verbose",
        dest="verbosity",
        default=DEFAULT_VERBOSITY,
        action="count",
        help="Causes noise-spectroscopy to print more debug messages. "
        "Adding multiple -v will increase the verbosity, "
        "the default value is 0. The maximum value is 2.",
    )
    common.add_argument(
        "--workers",
        type=int,
        help="Threads used for datasets and Monte-Carlo blocks, "
        "results do not depend on it",
    )
    common.add_argument(
        "--stamp",
        action="store_true",
        default=False,
        help="Add wall-clock timestamps to banners, stage statuses "
        "and SVG metadata",
    )
    common.add_argument(
        "--bootstrap",
        action="store_true",
        default=False,
        help="Residual bootstrap confidence bands instead of "
        "linear propagation",
    )
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config value, e.g. --set analysis.sigma_c=0.01",
    )

    parser = argparse.ArgumentParser(
        prog="noise-spectroscopy",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    parser.add_argument(
        "--version",
        action="version",
        help="Show the version and exit",
        version=util.get_version(),
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")

    synth = commands.add_parser(
        "synth", parents=[common], help="Synthesize an NV ensemble"
    )
    synth.add_argument(
        "--mc-oracle",
        action="store_true",
        default=False,
        help="Use Monte-Carlo trajectories instead of quadrature",
    )

    fit_decay = commands.add_parser(
        "fit-decay",
        parents=[common],
        help="Fit coherence decays and the T2(N) scaling",
    )
    _dataset_arguments(fit_decay)

    spectrum = commands.add_parser(
        "spectrum",
        parents=[common],
        help="Reconstruct noise spectra from coherence curves",
    )
    _dataset_arguments(spectrum)

    fit_spectrum = commands.add_parser(
        "fit-spectrum",
        parents=[common],
        help="Fit spectral models to reconstructed spectra",
    )
    _spectrum_arguments(fit_spectrum)
    fit_spectrum.add_argument(
        "--model",
        default="all",
        choices=[kind.value for kind in ModelKind] + ["all"],
        help="Model to fit, default all three ranked by reduced chi2",
    )

    global_fit = commands.add_parser(
        "global-fit",
        parents=[common],
        help="Double Lorentzian fit with correlation times shared "
        "across spectra",
    )
    _spectrum_arguments(global_fit)

    depth = commands.add_parser(
        "depth",
        parents=[common],
        help="Sensor depth from the proton line of a sweep spectrum",
    )
    depth.add_argument("spectrum", help="Sweep spectrum JSON file")
    depth.add_argument(
        "--field",
        type=float,
        help="Bias field in gauss, default the field of the spectrum",
    )
    depth.add_argument(
        "--density",
        type=float,
        help="Proton density in m^-3, default from the config",
    )

    depth_scaling = commands.add_parser(
        "depth-scaling",
        parents=[common],
        help="Fit a/d^n to the couplings of a global fit",
    )
    depth_scaling.add_argument(
        "global_fit", help="JSON file written by global-fit"
    )

    report = commands.add_parser(
        "report",
        parents=[common],
        help="Run the whole analysis and write report.json and plots",
    )
    _dataset_arguments(report)
    return parser


def validate_args(args: argparse.Namespace) -> None:
    if not args.command:
        raise ValueError("A command must be specified")
    if args.seed is not None and args.seed < 0:
        raise ValueError("Seed must be >= 0")
    if args.workers is not None and args.workers < 1:
        raise ValueError("Workers must be >= 1")
    if getattr(args, "density", None) is not None and args.density <= 0:
        raise ValueError("Proton density must be > 0")
    if getattr(args, "field", None) is not None and args.field < 0:
        raise ValueError("Field must be >= 0")


def setup_logging_and_display(args: argparse.Namespace) -> None:
    LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    stream = sys.stderr
    level = logging.WARNING

    if args.verbosity >= 2:
        level = logging.DEBUG
        stream = sys.stdout
    elif args.verbosity == 1:
        level = logging.INFO
        stream = sys.stdout

    logging.basicConfig(stream=stream, level=level, format=LOG_FORMAT)
    logging.getLogger("matplotlib").setLevel(max(level, logging.WARNING))

    # As Display is a singleton if it was created elsewhere we may need to
    # adjust the level. Summaries are always shown.
    if display.level > logging.WARNING:
        display.level = logging.WARNING
    display.stamp = args.stamp


def update_settings(args: argparse.Namespace) -> None:
    data = load_config_file(args.config) if args.config else {}
    apply_overrides(data, args.overrides)
    analysis = dict(data.get("analysis") or {})
    if args.seed is not None:
        analysis["seed"] = args.seed
    if args.out:
        analysis["output_dir"] = args.out
    if args.workers is not None:
        analysis["workers"] = args.workers
    if args.bootstrap:
        analysis["bootstrap"] = True

    settings.config = config_from_dict(analysis)
    settings.synthetic = data.get("synthetic")
    settings.plan = data.get("plan")
    settings.workers = settings.config.workers
    settings.bootstrap = settings.config.bootstrap
    settings.stamp = args.stamp
    settings.mc_oracle = getattr(args, "mc_oracle", False)


def main(args: List[str] = None) -> int:
    parser = get_parser()
    if args is None and len(sys.argv) == 1:
        parser.print_help()
        return 1

    args = parser.parse_args(args)
    try:
        validate_args(args)
        setup_logging_and_display(args)
        update_settings(args)
        return asyncio.run(app.run(args))
    except KeyboardInterrupt:
        return 1
    except Exception as err:
        logger.error("Terminating %s", str(err))
        return 1


if __name__ == "__main__":
    sys.exit(main())
