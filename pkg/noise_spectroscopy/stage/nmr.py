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
from dataclasses import dataclass

from noise_spectroscopy.dataset_types import COHERENCE_RANGE, SpectrumEstimate
from noise_spectroscopy.decomposition import reconstruct_spectrum
from noise_spectroscopy.depth_calibration import (
    DepthEstimate,
    NmrFeature,
    depth_from_brms,
    detect_nmr_feature,
)

from .base import Stage, StageSkipped

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NmrResult:
    estimate: SpectrumEstimate
    feature: NmrFeature
    depth: DepthEstimate


def sweep_spectrum(curves, config) -> SpectrumEstimate:
    """Spectrum of XY8 sweep curves.

    Sweep points close to C = 1 carry the baseline, so the upper edge
    of the coherence window is relaxed to the largest accepted value.
    """
    return reconstruct_spectrum(
        curves,
        {curve.n_pulses: 1.0 for curve in curves},
        (config.coherence_window[0], COHERENCE_RANGE[1]),
        sigma_floor=config.sigma_floor,
        min_pulse_numbers=1,
    )


class NmrStage(Stage):
    """Proton line of the XY8 sweep and the depth it implies."""

    name = "nmr"

    def compute(self) -> NmrResult:
        dataset = self.control.dataset
        curves = dataset.sweep_curves()
        if not curves:
            raise StageSkipped("no-nmr-sweep")
        estimate = sweep_spectrum(curves, self.config)
        feature = detect_nmr_feature(
            estimate,
            dataset.field_gauss,
            self.config.nmr_window,
            self.config.nmr_significance,
            self.config.sigma_floor,
        )
        depth = depth_from_brms(
            feature, self.config.proton_density, self.config.density_rel_err
        )
        logger.info(
            "%s: NMR depth %.3g +- %.2g nm",
            dataset.id,
            depth.depth_nm,
            depth.depth_err_nm,
        )
        return NmrResult(estimate, feature, depth)
