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

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from noise_spectroscopy.dataset_types import SpectrumEstimate
from noise_spectroscopy.decomposition import (
    exclude_window,
    reconstruct_spectrum,
)
from noise_spectroscopy.depth_calibration import proton_larmor
from noise_spectroscopy.exception import (
    CovarianceInvalidException,
    DegenerateFitException,
    EmptySpectrumException,
    FitFailedException,
    SpectrumUnderdeterminedException,
)
from noise_spectroscopy.fitting import (
    ConfidenceBand,
    ModelComparison,
    ModelKind,
    compare_models,
    confidence_band,
    fit_spectrum_model,
)
from noise_spectroscopy.units import TWO_PI
from noise_spectroscopy.util import derive_seed

from .base import Stage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectrumResult:
    """``estimate`` holds every point, ``broadband`` the points outside
    the proton line window that the spectral models are fitted to."""

    estimate: SpectrumEstimate
    broadband: SpectrumEstimate
    larmor_mhz: float


@dataclass(frozen=True)
class ModelResults:
    comparison: ModelComparison
    bands: Dict[str, ConfidenceBand] = field(default_factory=dict)


class SpectrumStage(Stage):
    """Inverts the CPMG curves to S(omega).

    With harmonic correction on, a double Lorentzian fitted to the raw
    estimate predicts the odd-harmonic leakage that is then subtracted.
    """

    name = "spectrum"
    requires = ("decay",)

    def _broadband(self, estimate: SpectrumEstimate, larmor: float):
        if not larmor > 0:
            return estimate
        broadband = exclude_window(estimate, larmor, self.config.nmr_window)
        if not len(broadband):
            raise EmptySpectrumException(
                "every spectrum point lies in the proton line window"
            )
        return broadband

    def compute(self) -> SpectrumResult:
        dataset = self.control.dataset
        curves = dataset.decay_curves()
        amplitudes = {
            row.n_pulses: row.fit.amplitude
            for row in self.control.results["decay"]
            if row.fit is not None
        }
        estimate = reconstruct_spectrum(
            curves,
            amplitudes,
            self.config.coherence_window,
            sigma_floor=self.config.sigma_floor,
        )
        larmor_mhz = proton_larmor(dataset.field_gauss)
        larmor = TWO_PI * larmor_mhz
        broadband = self._broadband(estimate, larmor)
        if self.config.harmonic_correction:
            try:
                first = fit_spectrum_model(
                    broadband, ModelKind.DOUBLE, self.config.sigma_floor
                )
            except (
                DegenerateFitException,
                FitFailedException,
                SpectrumUnderdeterminedException,
            ) as err:
                logger.warning(
                    "%s: harmonic correction skipped: %s", dataset.id, err
                )
            else:
                estimate = reconstruct_spectrum(
                    curves,
                    amplitudes,
                    self.config.coherence_window,
                    correction_model=first.model(),
                    sigma_floor=self.config.sigma_floor,
                )
                broadband = self._broadband(estimate, larmor)
        logger.info(
            "%s: %d spectrum points, %d broadband",
            dataset.id,
            len(estimate),
            len(broadband),
        )
        return SpectrumResult(estimate, broadband, larmor_mhz)


def model_bands(
    comparison: ModelComparison,
    estimate: SpectrumEstimate,
    config,
    label: str,
) -> Dict[str, ConfidenceBand]:
    """1-sigma bands of every ranked model on a log grid over the data.

    A model whose covariance cannot be propagated, or whose bootstrap
    refits fail, gets no band.
    """
    mode = "bootstrap" if config.bootstrap else "linear"
    omega = np.asarray(estimate.omega)
    grid = np.geomspace(omega.min(), omega.max(), config.band_points)
    bands = {}
    for result in comparison.ranked:
        kind = result.kind.value
        try:
            bands[kind] = confidence_band(
                result,
                grid,
                mode,
                estimate,
                config.bootstrap_replicas,
                derive_seed(config.seed, label, kind, "bootstrap"),
                config.sigma_floor,
            )
        except (CovarianceInvalidException, FitFailedException) as err:
            logger.warning(
                "%s: no %s band for the %s model: %s", label, mode, kind, err
            )
    return bands


class ModelStage(Stage):
    """Fits the three spectral models and their 1-sigma bands."""

    name = "models"
    requires = ("spectrum",)

    def compute(self) -> ModelResults:
        estimate = self.control.results["spectrum"].broadband
        comparison = compare_models(
            estimate, sigma_floor=self.config.sigma_floor
        )
        if comparison.best is None:
            failures = ", ".join(
                f"{k}: {v}" for k, v in sorted(comparison.failures.items())
            )
            raise FitFailedException(
                f"no spectral model converged ({failures})"
            )
        bands = model_bands(
            comparison, estimate, self.config, self.control.dataset.id
        )
        return ModelResults(comparison, bands)
