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

from noise_spectroscopy.decomposition import (
    SaturationDiagnostics,
    T1Fit,
    fit_t1,
    saturation_diagnostics,
)

from .base import Stage, StageSkipped


class T1Stage(Stage):
    name = "t1"

    def compute(self) -> T1Fit:
        curve = self.control.dataset.t1
        if curve is None:
            raise StageSkipped("no-t1-data")
        return fit_t1(curve, self.config.sigma_floor)


class SaturationStage(Stage):
    """T2sat/T1 ratio and its surface/bulk label."""

    name = "saturation"
    requires = ("scaling", "t1")

    def compute(self) -> SaturationDiagnostics:
        t1 = self.control.results["t1"]
        return saturation_diagnostics(
            self.control.results["scaling"], t1.t1, t1.t1_err
        )
