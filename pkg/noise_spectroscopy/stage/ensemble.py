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
from typing import Dict, List, Tuple

from noise_spectroscopy.exception import (
    DegenerateFitException,
    FitFailedException,
    NotGlobalException,
    ScalingUnderdeterminedException,
    error_tag,
)
from noise_spectroscopy.fitting import (
    DepthScalingFit,
    GlobalFitResult,
    fit_depth_scaling,
    global_fit,
)

from .base import Stage, StageSkipped

logger = logging.getLogger(__name__)

ENSEMBLE_ID = "ensemble"
COMPONENTS = ("delta1", "delta2")


@dataclass(frozen=True)
class DepthScalingResult:
    """Per coupling component: the a/d^n fit or the reason it failed.

    ``points`` holds (dataset id, depth, depth err, delta, delta err)
    and ``depth_source`` tells whether each depth came from the proton
    line or from the dataset metadata.
    """

    fits: Dict[str, DepthScalingFit]
    points: Dict[str, List[Tuple[str, float, float, float, float]]]
    depth_source: Dict[str, str]
    failures: Dict[str, str] = field(default_factory=dict)


class GlobalFitStage(Stage):
    name = "global_fit"

    def compute(self) -> GlobalFitResult:
        estimates = [
            (dataset_id, control.results["spectrum"].broadband)
            for dataset_id, control in sorted(self.control.ensemble.items())
            if "spectrum" in control.results
        ]
        if len(estimates) < 2:
            raise NotGlobalException(
                f"{len(estimates)} dataset(s) with a spectrum"
            )
        return global_fit(estimates, self.config.sigma_floor)


class DepthScalingStage(Stage):
    name = "depth_scaling"

    def _depth(self, dataset_id: str) -> Tuple[float, float, str]:
        control = self.control.ensemble[dataset_id]
        nmr = control.results.get("nmr")
        if nmr is not None:
            return nmr.depth.depth_nm, nmr.depth.depth_err_nm, "nmr"
        depth, error = control.dataset.depth
        return depth, error, "metadata"

    def compute(self) -> DepthScalingResult:
        result = self.control.results.get("global_fit")
        if result is None:
            if len(self.control.ensemble) < 2:
                raise NotGlobalException("single dataset")
            raise StageSkipped("needs-global_fit")
        points = {name: [] for name in COMPONENTS}
        sources = {}
        for dataset_id in sorted(result.couplings):
            depth, depth_err, sources[dataset_id] = self._depth(dataset_id)
            delta1, err1, delta2, err2 = result.couplings[dataset_id]
            points["delta1"].append(
                (dataset_id, depth, depth_err, abs(delta1), err1)
            )
            points["delta2"].append(
                (dataset_id, depth, depth_err, abs(delta2), err2)
            )
        fits, failures = {}, {}
        for name in COMPONENTS:
            try:
                fits[name] = fit_depth_scaling(
                    [p[1:] for p in points[name]],
                    self.config.depth_exponent_bounds,
                    self.config.sigma_floor,
                )
            except (
                ValueError,
                DegenerateFitException,
                FitFailedException,
                ScalingUnderdeterminedException,
            ) as err:
                logger.warning("%s depth scaling failed: %s", name, err)
                failures[name] = error_tag(err)
                last = err
        if not fits:
            raise last
        return DepthScalingResult(fits, points, sources, failures)
