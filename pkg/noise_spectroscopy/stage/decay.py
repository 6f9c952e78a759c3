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
from typing import Optional, Tuple

from noise_spectroscopy.dataset_types import CoherenceCurve
from noise_spectroscopy.decomposition import (
    DecayFit,
    ScalingFit,
    extract_scaling,
    fit_decay,
)
from noise_spectroscopy.exception import (
    DecayFitFailedException,
    UndecayedException,
    error_tag,
)

from .base import Stage, StageSkipped

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayRow:
    """Outcome of fitting one curve; ``fit`` is None when it failed."""

    curve: CoherenceCurve
    fit: Optional[DecayFit]
    status: str
    reason: Optional[str] = None
    lower_bound: Optional[float] = None

    @property
    def n_pulses(self) -> int:
        return self.curve.n_pulses


def decay_table(
    curves: Tuple[CoherenceCurve, ...], config
) -> Tuple[DecayRow, ...]:
    rows = []
    for curve in curves:
        try:
            fit = fit_decay(
                curve,
                config.coherence_window,
                config.decay_amplitude_bounds,
                config.decay_stretch_bounds,
                config.sigma_floor,
            )
        except UndecayedException as err:
            rows.append(
                DecayRow(
                    curve,
                    None,
                    "undecayed",
                    error_tag(err),
                    err.lower_bound,
                )
            )
            continue
        except DecayFitFailedException as err:
            logger.info("%s", err)
            rows.append(DecayRow(curve, None, "failed", error_tag(err)))
            continue
        rows.append(DecayRow(curve, fit, "successful"))
    return tuple(rows)


class DecayStage(Stage):
    """Stretched-exponential fit of every CPMG curve."""

    name = "decay"

    def compute(self):
        curves = self.control.dataset.decay_curves()
        if not curves:
            raise StageSkipped("no-decay-curves")
        table = decay_table(curves, self.config)
        # the table is reported even when no curve could be fitted
        self.control.results[self.name] = table
        if not any(row.fit is not None for row in table):
            reasons = sorted({row.reason for row in table})
            raise DecayFitFailedException(
                f"no curve could be fitted ({', '.join(reasons)})"
            )
        return table


class ScalingStage(Stage):
    name = "scaling"
    requires = ("decay",)

    def compute(self) -> ScalingFit:
        fits = [
            (row.n_pulses, row.fit)
            for row in self.control.results["decay"]
            if row.fit is not None
        ]
        return extract_scaling(
            fits, self.config.scaling_k_bounds, self.config.sigma_floor
        )
