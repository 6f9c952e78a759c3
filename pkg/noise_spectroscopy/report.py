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

"""Report assembly and its JSON form.

Every number is written as ``{"value", "error", "unit"}``; a value
that is not finite is written as null and, when infinite, flagged with
``"infinite": true`` so the JSON stays strict and byte-stable.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from noise_spectroscopy.conf import AnalysisConfig
from noise_spectroscopy.dataset_types import NvDataset, SpectrumEstimate
from noise_spectroscopy.decomposition import (
    SaturationDiagnostics,
    ScalingFit,
    T1Fit,
)
from noise_spectroscopy.depth_calibration import DepthEstimate, NmrFeature
from noise_spectroscopy.fitting import (
    DepthScalingFit,
    GlobalFitResult,
    SpectralFitResult,
)
from noise_spectroscopy.stage import (
    FAILED_STATUS,
    DecayRow,
    DepthScalingResult,
    ModelResults,
    NmrResult,
    SpectrumResult,
)
from noise_spectroscopy.units import TWO_PI, to_float
from noise_spectroscopy.util import fingerprint
from noise_spectroscopy.validators import Validate

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

PARAMETER_UNITS = {
    "delta": "rad/us",
    "delta1": "rad/us",
    "delta2": "rad/us",
    "tau_c": "us",
    "tau_c1": "us",
    "tau_c2": "us",
    "amplitude": "rad^2/us^(1-exponent)",
    "exponent": "",
}

# run-to-run invariant settings only; workers must not change the report
_UNREPORTED_CONFIG = ("output_dir", "workers")


@dataclass(frozen=True)
class Report:
    """Outcome of run_pipeline.

    ``results`` maps dataset id to the stage results of that dataset,
    ``ensemble`` holds the global fit and depth scaling results.
    """

    config: AnalysisConfig
    datasets: Tuple[NvDataset, ...]
    results: Dict[str, Dict[str, Any]]
    ensemble: Dict[str, Any]
    statuses: Tuple[Dict, ...]

    @property
    def failed_stages(self) -> List[Dict]:
        return [s for s in self.statuses if s["status"] == FAILED_STATUS]

    @property
    def exit_code(self) -> int:
        return 2 if self.failed_stages else 0

    def dataset(self, dataset_id: str) -> NvDataset:
        for dataset in self.datasets:
            if dataset.id == dataset_id:
                return dataset
        raise KeyError(dataset_id)


def _number(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def quantity(
    value: Optional[float], error: Optional[float] = None, unit: str = ""
) -> Dict[str, Any]:
    result = {"value": _number(value), "error": _number(error), "unit": unit}
    if value is not None and math.isinf(float(value)):
        result["infinite"] = True
    return result


def decay_rows_to_json(rows: Sequence[DecayRow]) -> List[Dict]:
    table = []
    for row in rows:
        entry = {
            "n_pulses": row.n_pulses,
            "sequence": row.curve.sequence,
            "status": row.status,
            "reason": row.reason,
            "amplitude": None,
            "t2": None,
            "stretch": None,
            "reduced_chi2": None,
            "dof": None,
            "lower_bound": (
                quantity(row.lower_bound, None, "us")
                if row.lower_bound is not None
                else None
            ),
        }
        if row.fit is not None:
            amplitude_err, t2_err, stretch_err = row.fit.errors
            entry.update(
                amplitude=quantity(row.fit.amplitude, amplitude_err),
                t2=quantity(row.fit.t2, t2_err, "us"),
                stretch=quantity(row.fit.stretch, stretch_err),
                reduced_chi2=_number(row.fit.reduced_chi2),
                dof=row.fit.dof,
            )
        table.append(entry)
    return table


def scaling_to_json(fit: ScalingFit) -> Dict:
    return {
        "t2_1": quantity(fit.t2_1, fit.t2_1_err, "us"),
        "k": quantity(fit.k, fit.k_err),
        "t2_sat": quantity(fit.t2_sat, fit.t2_sat_err, "us"),
        "t2_max": quantity(fit.t2_max, None, "us"),
        "saturates": fit.saturates,
        "at_bound": sorted(fit.at_bound),
        "reduced_chi2": _number(fit.reduced_chi2),
        "dof": fit.dof,
    }


def spectrum_points_to_json(estimate: SpectrumEstimate) -> Dict:
    omega, s, sigma = estimate.arrays()
    return {
        "frequency_mhz": to_float(omega / TWO_PI),
        "s_rad2_per_us": to_float(s),
        "sigma_rad2_per_us": to_float(sigma),
        "n_pulses": [n for n, _ in estimate.provenance],
        "times_us": [t for _, t in estimate.provenance],
        "harmonic_corrected": estimate.harmonic_corrected,
    }


def spectral_fit_to_json(result: SpectralFitResult) -> Dict:
    return {
        "kind": result.kind.value,
        "params": {
            name: quantity(value, error, PARAMETER_UNITS[name])
            for name, value, error in zip(
                result.names, result.params, result.errors
            )
        },
        "reduced_chi2": _number(result.reduced_chi2),
        "dof": result.dof,
        "at_bound": sorted(result.at_bound),
    }


def models_to_json(models: ModelResults) -> Dict:
    comparison = models.comparison
    return {
        "ranking": [r.kind.value for r in comparison.ranked],
        "best": comparison.best.kind.value if comparison.best else None,
        "fits": {
            r.kind.value: dict(
                spectral_fit_to_json(r),
                band=(
                    models.bands[r.kind.value].mode
                    if r.kind.value in models.bands
                    else None
                ),
            )
            for r in comparison.ranked
        },
        "failures": dict(sorted(comparison.failures.items())),
    }


def t1_to_json(fit: T1Fit) -> Dict:
    return {
        "t1": quantity(fit.t1, fit.t1_err, "us"),
        "p0": quantity(fit.p0),
        "p_inf": quantity(fit.p_inf),
        "reduced_chi2": _number(fit.reduced_chi2),
        "dof": fit.dof,
    }


def saturation_to_json(diagnostics: SaturationDiagnostics) -> Dict:
    return {
        "ratio": quantity(diagnostics.ratio, diagnostics.ratio_err),
        "lower_bound_only": diagnostics.lower_bound_only,
        "classification": diagnostics.classification,
    }


def nmr_to_json(feature: NmrFeature) -> Dict:
    return {
        "center": quantity(feature.center_mhz, None, "MHz"),
        "width": quantity(feature.width_mhz, None, "MHz"),
        "b_rms": quantity(feature.b_rms, feature.b_rms_err, "T"),
        "significance": _number(feature.significance),
        "reduced_chi2": _number(feature.reduced_chi2),
    }


def depth_to_json(depth: DepthEstimate) -> Dict:
    return {
        "depth": quantity(depth.depth_nm, depth.depth_err_nm, "nm"),
        "proton_density": quantity(depth.proton_density, None, "m^-3"),
    }


def global_fit_to_json(result: GlobalFitResult) -> Dict:
    return {
        "tau_c1": quantity(result.tau_c1, result.tau_c1_err, "us"),
        "tau_c2": quantity(result.tau_c2, result.tau_c2_err, "us"),
        "couplings": {
            dataset_id: {
                "delta1": quantity(abs(d1), e1, "rad/us"),
                "delta2": quantity(abs(d2), e2, "rad/us"),
            }
            for dataset_id, (d1, e1, d2, e2) in sorted(
                result.couplings.items()
            )
        },
        "reduced_chi2": _number(result.reduced_chi2),
        "dof": result.dof,
        "independent_reduced_chi2": _number(result.independent_reduced_chi2),
    }


def depth_scaling_fit_to_json(fit: DepthScalingFit) -> Dict:
    return {
        "a": quantity(fit.a, fit.a_err, "rad/us nm^n"),
        "n": quantity(fit.n, fit.n_err),
        "reduced_chi2": _number(fit.reduced_chi2),
        "dof": fit.dof,
    }


def depth_scaling_to_json(result: DepthScalingResult) -> Dict:
    return {
        "fits": {
            name: depth_scaling_fit_to_json(fit)
            for name, fit in sorted(result.fits.items())
        },
        "points": {
            name: [
                {
                    "dataset_id": dataset_id,
                    "depth": quantity(depth, depth_err, "nm"),
                    "delta": quantity(delta, delta_err, "rad/us"),
                }
                for dataset_id, depth, depth_err, delta, delta_err in points
            ]
            for name, points in sorted(result.points.items())
        },
        "depth_source": dict(sorted(result.depth_source.items())),
        "failures": dict(sorted(result.failures.items())),
    }


def _optional(results: Dict, key: str, encode) -> Optional[Dict]:
    value = results.get(key)
    return encode(value) if value is not None else None


def _spectrum_section(spectrum: Optional[SpectrumResult]) -> Optional[Dict]:
    if spectrum is None:
        return None
    return {
        "larmor": quantity(spectrum.larmor_mhz, None, "MHz"),
        "points": spectrum_points_to_json(spectrum.estimate),
        "broadband_points": len(spectrum.broadband),
    }


def _nmr_section(nmr: Optional[NmrResult]) -> Optional[Dict]:
    if nmr is None:
        return None
    return dict(
        nmr_to_json(nmr.feature),
        sweep_points=spectrum_points_to_json(nmr.estimate),
    )


def dataset_to_json(dataset: NvDataset, results: Dict[str, Any]) -> Dict:
    nmr = results.get("nmr")
    return {
        "id": dataset.id,
        "nominal_depth": quantity(dataset.nominal_depth_nm, None, "nm"),
        "field": quantity(dataset.field_gauss, None, "G"),
        "temperature": (
            quantity(dataset.temperature_k, None, "K")
            if dataset.temperature_k is not None
            else None
        ),
        "coating": dataset.coating,
        "decay_fits": decay_rows_to_json(results.get("decay", ())),
        "scaling": _optional(results, "scaling", scaling_to_json),
        "spectrum": _spectrum_section(results.get("spectrum")),
        "models": _optional(results, "models", models_to_json),
        "t1": _optional(results, "t1", t1_to_json),
        "saturation": _optional(results, "saturation", saturation_to_json),
        "nmr": _nmr_section(nmr),
        "depth": depth_to_json(nmr.depth) if nmr is not None else None,
    }


def config_to_json(config: AnalysisConfig) -> Dict:
    data = dataclasses.asdict(config)
    for name in _UNREPORTED_CONFIG:
        data.pop(name)
    return {
        key: list(value) if isinstance(value, tuple) else value
        for key, value in data.items()
    }


def _status_to_json(status: Dict) -> Dict:
    return {k: v for k, v in status.items() if k not in ("type", "order")}


def report_to_json(report: Report) -> Dict:
    """Schema-valid, NaN-free dict of the report with its fingerprint."""
    data = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config_to_json(report.config),
        "datasets": [
            dataset_to_json(dataset, report.results[dataset.id])
            for dataset in report.datasets
        ],
        "ensemble": {
            "global_fit": _optional(
                report.ensemble, "global_fit", global_fit_to_json
            ),
            "depth_scaling": _optional(
                report.ensemble, "depth_scaling", depth_scaling_to_json
            ),
        },
        "stages": [_status_to_json(s) for s in report.statuses],
    }
    data["fingerprint"] = fingerprint(data)
    Validate.report(data)
    return data


def summary_rows(report: Report) -> List[Dict[str, str]]:
    """One row per dataset for the terminal summary table."""

    def fmt(value, error=None, digits=3):
        if value is None or not math.isfinite(value):
            return "inf" if value is not None and value > 0 else "-"
        if error is None or not math.isfinite(error):
            return f"{value:.{digits}g}"
        return f"{value:.{digits}g}({error:.1g})"

    rows = []
    for dataset in report.datasets:
        results = report.results[dataset.id]
        scaling = results.get("scaling")
        models = results.get("models")
        saturation = results.get("saturation")
        nmr = results.get("nmr")
        best = models.comparison.best if models is not None else None
        rows.append(
            {
                "id": dataset.id,
                "depth": fmt(dataset.nominal_depth_nm),
                "k": fmt(scaling.k, scaling.k_err) if scaling else "-",
                "t2_sat": (
                    fmt(scaling.t2_sat, scaling.t2_sat_err) if scaling else "-"
                ),
                "model": best.kind.value if best is not None else "-",
                "chi2": fmt(best.reduced_chi2) if best is not None else "-",
                "saturation": (
                    saturation.classification if saturation else "-"
                ),
                "nmr_depth": (
                    fmt(nmr.depth.depth_nm, nmr.depth.depth_err_nm)
                    if nmr
                    else "-"
                ),
            }
        )
    return rows


def band_arrays(models: ModelResults, kind: str):
    band = models.bands.get(kind)
    if band is None:
        return None
    return (
        np.asarray(band.omega) / TWO_PI,
        np.asarray(band.value),
        np.asarray(band.lower),
        np.asarray(band.upper),
    )
