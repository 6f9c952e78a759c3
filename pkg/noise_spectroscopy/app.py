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
import json
import logging
import os
import sys
import traceback
from typing import Dict, List, Tuple

from noise_spectroscopy import terminal
from noise_spectroscopy.bath_simulator import (
    env_spec_from_dict,
    plan_from_dict,
    synthesize_dataset,
)
from noise_spectroscopy.conf import settings
from noise_spectroscopy.dataset_io import (
    ingest_datasets,
    read_spectrum,
    spectrum_to_dict,
    write_dataset,
    write_json,
)
from noise_spectroscopy.dataset_types import SpectrumEstimate
from noise_spectroscopy.decomposition import exclude_window
from noise_spectroscopy.depth_calibration import (
    depth_from_brms,
    detect_nmr_feature,
    proton_larmor,
)
from noise_spectroscopy.exception import (
    DatasetNotFoundException,
    NmrNotFoundException,
    WindowUncoveredException,
    error_tag,
)
from noise_spectroscopy.fitting import (
    ModelKind,
    compare_models,
    fit_depth_scaling,
    global_fit,
)
from noise_spectroscopy.pipeline import run_pipeline, run_stages
from noise_spectroscopy.plots import emit_plots
from noise_spectroscopy.report import (
    decay_rows_to_json,
    depth_scaling_fit_to_json,
    depth_to_json,
    global_fit_to_json,
    models_to_json,
    nmr_to_json,
    report_to_json,
    scaling_to_json,
    summary_rows,
)
from noise_spectroscopy.stage import (
    DecayStage,
    ModelResults,
    ScalingStage,
    SpectrumStage,
    model_bands,
    sweep_spectrum,
)
from noise_spectroscopy.units import TWO_PI
from noise_spectroscopy.util import startup_logging

logger = logging.getLogger(__name__)

display = terminal.Display()

REPORT_FILE = "report.json"
PLOTS_DIR = "plots"
DATASETS_DIR = "datasets"
GLOBAL_FIT_FILE = "global_fit.json"
DEPTH_SCALING_FILE = "depth_scaling.json"


def log_exception_without_data(exc_type, exc_value, exc_traceback):
    logger.error(exc_type.__name__ + ": " + str(exc_value))
    if exc_traceback is not None:
        for frame in traceback.extract_tb(exc_traceback)[::-1]:
            logger.error(
                frame.filename + ":" + str(frame.lineno) + " " + frame.name
            )


sys.excepthook = log_exception_without_data


def _out(name: str) -> str:
    return os.path.join(settings.config.output_dir, name)


def _failed(statuses: List[Dict]) -> List[Dict]:
    return [s for s in statuses if s["status"] == "failed"]


async def synth(parsed_args: argparse.Namespace) -> int:
    config = settings.config
    spec = env_spec_from_dict(settings.synthetic)
    plan = plan_from_dict(settings.plan, settings.mc_oracle)
    datasets = await asyncio.to_thread(
        synthesize_dataset,
        spec,
        plan,
        config.seed,
        config.workers,
        config.quad_rtol,
    )
    rows = []
    for dataset in datasets:
        path = _out(os.path.join(DATASETS_DIR, f"{dataset.id}.json"))
        write_dataset(dataset, path)
        rows.append(
            {
                "id": dataset.id,
                "depth_nm": f"{dataset.nominal_depth_nm:g}",
                "curves": str(len(dataset.curves)),
                "t1": "yes" if dataset.t1 is not None else "no",
                "file": path,
            }
        )
    display.banner("synth", display.table(rows))
    return 0


async def fit_decay(parsed_args: argparse.Namespace) -> int:
    failed = []
    for dataset in ingest_datasets(
        parsed_args.datasets, settings.config.sigma_c
    ):
        results, statuses = await run_stages(
            dataset, settings.config, (DecayStage, ScalingStage)
        )
        failed.extend(_failed(statuses))
        scaling = results.get("scaling")
        write_json(
            _out(f"{dataset.id}_decay.json"),
            {
                "dataset_id": dataset.id,
                "decay_fits": decay_rows_to_json(results.get("decay", ())),
                "scaling": scaling_to_json(scaling) if scaling else None,
                "stages": statuses,
            },
        )
        rows = [
            {
                "N": str(row.n_pulses),
                "status": row.status,
                "T2 (us)": f"{row.fit.t2:.4g}" if row.fit else "-",
                "p": f"{row.fit.stretch:.3g}" if row.fit else "-",
            }
            for row in results.get("decay", ())
        ]
        display.banner(f"fit-decay {dataset.id}", display.table(rows))
    return 2 if failed else 0


async def spectrum(parsed_args: argparse.Namespace) -> int:
    failed = []
    for dataset in ingest_datasets(
        parsed_args.datasets, settings.config.sigma_c
    ):
        results, statuses = await run_stages(
            dataset, settings.config, (DecayStage, SpectrumStage)
        )
        failed.extend(_failed(statuses))
        depth = dataset.depth[0]
        result = results.get("spectrum")
        if result is not None:
            write_json(
                _out(f"{dataset.id}_spectrum.json"),
                spectrum_to_dict(
                    result.estimate, dataset.id, depth, dataset.field_gauss
                ),
            )
        curves = dataset.sweep_curves()
        if curves:
            write_json(
                _out(f"{dataset.id}_sweep_spectrum.json"),
                spectrum_to_dict(
                    sweep_spectrum(curves, settings.config),
                    dataset.id,
                    depth,
                    dataset.field_gauss,
                ),
            )
        display.banner(
            f"spectrum {dataset.id}",
            f"{len(result.estimate) if result else 0} points",
        )
    return 2 if failed else 0


def _broadband(estimate: SpectrumEstimate, meta: Dict) -> SpectrumEstimate:
    field = meta.get("field_gauss")
    if not field:
        return estimate
    larmor = TWO_PI * proton_larmor(field)
    return exclude_window(estimate, larmor, settings.config.nmr_window)


def _read_spectra(paths: List[str]) -> List[Tuple[SpectrumEstimate, Dict]]:
    spectra = []
    for path in paths:
        estimate, meta = read_spectrum(path)
        spectra.append((_broadband(estimate, meta), meta))
    return spectra


async def fit_spectrum(parsed_args: argparse.Namespace) -> int:
    config = settings.config
    if parsed_args.model == "all":
        kinds = tuple(ModelKind)
    else:
        kinds = (ModelKind(parsed_args.model),)
    failed = False
    for estimate, meta in _read_spectra(parsed_args.spectra):
        dataset_id = meta["dataset_id"]
        comparison = await asyncio.to_thread(
            compare_models, estimate, kinds, config.sigma_floor
        )
        bands = model_bands(comparison, estimate, config, dataset_id)
        failed = failed or bool(comparison.failures)
        write_json(
            _out(f"{dataset_id}_models.json"),
            dict(
                models_to_json(ModelResults(comparison, bands)),
                dataset_id=dataset_id,
            ),
        )
        rows = [
            {
                "model": r.kind.value,
                "reduced chi2": f"{r.reduced_chi2:.4g}",
                "parameters": ", ".join(
                    f"{k}={v:.4g}" for k, v in r.outcome.as_dict().items()
                ),
            }
            for r in comparison.ranked
        ]
        rows.extend(
            {"model": kind, "reduced chi2": "-", "parameters": reason}
            for kind, reason in sorted(comparison.failures.items())
        )
        display.banner(f"fit-spectrum {dataset_id}", display.table(rows))
    return 2 if failed else 0


async def global_fit_command(parsed_args: argparse.Namespace) -> int:
    spectra = _read_spectra(parsed_args.spectra)
    estimates = [(meta["dataset_id"], est) for est, meta in spectra]
    result = await asyncio.to_thread(
        global_fit, estimates, settings.config.sigma_floor
    )
    data = global_fit_to_json(result)
    data["depths_nm"] = {
        meta["dataset_id"]: meta.get("depth_nm") for _, meta in spectra
    }
    write_json(_out(GLOBAL_FIT_FILE), data)
    display.banner(
        "global-fit",
        f"tau_c1 = {result.tau_c1:.4g} +- {result.tau_c1_err:.2g} us\n"
        f"tau_c2 = {result.tau_c2:.4g} +- {result.tau_c2_err:.2g} us\n"
        f"reduced chi2 = {result.reduced_chi2:.4g}",
    )
    return 0


async def depth(parsed_args: argparse.Namespace) -> int:
    config = settings.config
    estimate, meta = read_spectrum(parsed_args.spectrum)
    field = parsed_args.field
    if field is None:
        field = meta.get("field_gauss")
    if field is None:
        raise ValueError("the spectrum has no field, pass --field")
    density = parsed_args.density or config.proton_density
    dataset_id = meta["dataset_id"]
    try:
        feature = await asyncio.to_thread(
            detect_nmr_feature,
            estimate,
            field,
            config.nmr_window,
            config.nmr_significance,
            config.sigma_floor,
        )
    except (NmrNotFoundException, WindowUncoveredException) as err:
        logger.warning("%s: no depth: %s", dataset_id, err)
        display.banner(f"depth {dataset_id}", f"failed: {error_tag(err)}")
        return 2
    result = depth_from_brms(feature, density, config.density_rel_err)
    write_json(
        _out(f"{dataset_id}_depth.json"),
        {
            "dataset_id": dataset_id,
            "nmr": nmr_to_json(feature),
            "depth": depth_to_json(result),
        },
    )
    display.banner(
        f"depth {dataset_id}",
        f"B_rms = {feature.b_rms:.4g} T, "
        f"depth = {result.depth_nm:.3g} +- {result.depth_err_nm:.2g} nm",
    )
    return 0


def _depth_points(data: Dict, name: str) -> List[Tuple[float, ...]]:
    points = []
    depths = data.get("depths_nm", {})
    for dataset_id, couplings in sorted(data["couplings"].items()):
        depth_nm = depths.get(dataset_id)
        if depth_nm is None:
            raise ValueError(f"no depth for dataset {dataset_id}")
        delta = couplings[name]
        points.append((depth_nm, 0.0, delta["value"], delta["error"] or 0.0))
    return points


async def depth_scaling(parsed_args: argparse.Namespace) -> int:
    path = parsed_args.global_fit
    if not os.path.isfile(path):
        raise DatasetNotFoundException(f"Global fit {path} not found")
    with open(path) as f:
        data = json.load(f)
    fits = {}
    for name in ("delta1", "delta2"):
        fits[name] = fit_depth_scaling(
            _depth_points(data, name),
            settings.config.depth_exponent_bounds,
            settings.config.sigma_floor,
        )
    write_json(
        _out(DEPTH_SCALING_FILE),
        {name: depth_scaling_fit_to_json(fit) for name, fit in fits.items()},
    )
    display.banner(
        "depth-scaling",
        "\n".join(
            f"{name}: n = {fit.n:.3g} +- {fit.n_err:.2g}"
            for name, fit in fits.items()
        ),
    )
    return 0


async def report(parsed_args: argparse.Namespace) -> int:
    datasets = ingest_datasets(
        parsed_args.datasets, settings.config.sigma_c, strict=False
    )
    result = await run_pipeline(datasets, settings.config)
    data = report_to_json(result)
    write_json(_out(REPORT_FILE), data)
    emit_plots(result, _out(PLOTS_DIR), settings.stamp)
    display.banner("report", display.table(summary_rows(result)))
    for status in result.failed_stages:
        display.output(
            f"{status['dataset_id']}: {status['stage']} failed "
            f"({status['reason']})"
        )
    logger.info("Report fingerprint %s", data["fingerprint"])
    return result.exit_code


COMMANDS = {
    "synth": synth,
    "fit-decay": fit_decay,
    "spectrum": spectrum,
    "fit-spectrum": fit_spectrum,
    "global-fit": global_fit_command,
    "depth": depth,
    "depth-scaling": depth_scaling,
    "report": report,
}


async def run(parsed_args: argparse.Namespace) -> int:
    """Run one subcommand; returns the process exit code."""
    startup_logging(logger)
    logger.info("Running %s", parsed_args.command)
    return await COMMANDS[parsed_args.command](parsed_args)
