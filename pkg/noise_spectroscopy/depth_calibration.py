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

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from noise_spectroscopy.bath_simulator import (
    expected_line_power,
    proton_larmor,
)
from noise_spectroscopy.dataset_types import SpectrumEstimate
from noise_spectroscopy.exception import (
    DegenerateFitException,
    FitFailedException,
    NmrNotFoundException,
    WindowUncoveredException,
)
from noise_spectroscopy.fitting import nls_fit
from noise_spectroscopy.units import (
    GAMMA_E_RAD_PER_US_T,
    GAMMA_H_RAD_PER_S_T,
    HALF_SPACE_FACTOR,
    HBAR,
    MU0_OVER_4PI,
    TWO_PI,
)

__all__ = [
    "DepthEstimate",
    "NmrFeature",
    "depth_from_brms",
    "detect_nmr_feature",
    "expected_line_power",
    "proton_larmor",
]

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 0.15
DEFAULT_SIGNIFICANCE = 2.0
DEFAULT_DENSITY_REL_ERR = 0.10
MIN_WINDOW_POINTS = 7
WIDTH_FRACTIONS = (0.003, 0.01, 0.03)


@dataclass(frozen=True)
class NmrFeature:
    """Gaussian excess over a linear baseline near the proton Larmor line.

    Frequencies in MHz, field in tesla; ``significance`` is the fitted
    amplitude over its standard error.
    """

    center_mhz: float
    width_mhz: float
    b_rms: float
    b_rms_err: float
    significance: float
    reduced_chi2: float


@dataclass(frozen=True)
class DepthEstimate:
    depth_nm: float
    depth_err_nm: float
    proton_density: float


def _bump(theta, offset, omega):
    baseline = theta[0] + theta[1] * offset
    return baseline + theta[2] * np.exp(
        -0.5 * ((omega - theta[3]) / theta[4]) ** 2
    )


def detect_nmr_feature(
    estimate: SpectrumEstimate,
    field_gauss: float,
    window: float = DEFAULT_WINDOW,
    significance: float = DEFAULT_SIGNIFICANCE,
    sigma_floor: float = 1.0e-12,
) -> NmrFeature:
    """Fit baseline + Gaussian inside +-window around the Larmor line.

    The line area over positive frequencies is half the two-sided variance
    (gamma_e B_rms)^2, which gives B_rms.
    """
    larmor = TWO_PI * proton_larmor(field_gauss)
    if not larmor > 0:
        raise WindowUncoveredException("no proton line at zero field")
    low, high = larmor * (1.0 - window), larmor * (1.0 + window)
    omega, s, sigma = estimate.arrays()
    if not len(omega) or omega.min() > low or omega.max() < high:
        raise WindowUncoveredException(
            f"spectrum does not cover {low / TWO_PI:.4g}.."
            f"{high / TWO_PI:.4g} MHz"
        )
    inside = (omega >= low) & (omega <= high)
    if inside.sum() < MIN_WINDOW_POINTS:
        raise WindowUncoveredException(
            f"only {inside.sum()} spectrum points near the proton line"
        )
    omega, s, sigma = omega[inside], s[inside], sigma[inside]
    slope, intercept = np.polyfit(omega - larmor, s, 1)
    excess = s - (intercept + slope * (omega - larmor))
    peak = float(omega[np.argmax(excess)])
    height = max(float(excess.max()), sigma_floor)
    spacing = float(np.min(np.diff(omega)))
    width_low = 0.5 * spacing
    width_high = 0.5 * window * larmor
    starts = [
        [
            intercept,
            slope,
            height,
            center,
            float(np.clip(f * larmor, width_low, width_high)),
        ]
        for center, f in itertools.product((peak, larmor), WIDTH_FRACTIONS)
    ]
    lower = (-np.inf, -np.inf, 0.0, low, width_low)
    upper = (np.inf, np.inf, np.inf, high, width_high)

    def model(theta, x):
        return _bump(theta, x - larmor, x)

    try:
        outcome = nls_fit(
            model,
            omega,
            s,
            sigma,
            starts,
            (lower, upper),
            ("b0", "b1", "amplitude", "center", "width"),
            sigma_floor,
        )
    except (DegenerateFitException, FitFailedException) as err:
        raise NmrNotFoundException(f"no proton line fitted: {err}") from err
    _, _, amplitude, center, width = outcome.params
    errors = outcome.errors
    score = amplitude / errors[2] if errors[2] > 0 else math.inf
    if not score >= significance:
        raise NmrNotFoundException(
            f"proton line amplitude only {score:.2f} sigma"
        )
    area = amplitude * width * math.sqrt(TWO_PI)
    gradient = np.zeros(len(outcome.params))
    gradient[2] = width * math.sqrt(TWO_PI)
    gradient[4] = amplitude * math.sqrt(TWO_PI)
    area_err = float(np.sqrt(gradient @ outcome.covariance @ gradient))
    b_rms = math.sqrt(2.0 * area) / GAMMA_E_RAD_PER_US_T
    b_rms_err = b_rms * 0.5 * area_err / area
    logger.info(
        "proton line at %.4f MHz, B_rms %.3g T (%.1f sigma)",
        center / TWO_PI,
        b_rms,
        score,
    )
    return NmrFeature(
        center_mhz=float(center / TWO_PI),
        width_mhz=float(width / TWO_PI),
        b_rms=b_rms,
        b_rms_err=b_rms_err,
        significance=float(score),
        reduced_chi2=outcome.reduced_chi2,
    )


def depth_from_brms(
    feature: Union[NmrFeature, float],
    proton_density: float,
    density_rel_err: float = DEFAULT_DENSITY_REL_ERR,
) -> DepthEstimate:
    """Invert the half-space law B_rms^2 ~ rho / d^3 for d."""
    if isinstance(feature, NmrFeature):
        b_rms, b_rms_err = feature.b_rms, feature.b_rms_err
    else:
        b_rms, b_rms_err = float(feature), 0.0
    if not b_rms > 0:
        raise ValueError("B_rms must be > 0")
    if not proton_density > 0:
        raise ValueError("proton density must be > 0")
    moment = MU0_OVER_4PI * HBAR * GAMMA_H_RAD_PER_S_T
    cube = proton_density * moment**2 * HALF_SPACE_FACTOR / b_rms**2
    depth = np.cbrt(cube) * 1.0e9
    relative = math.hypot(2.0 * b_rms_err / b_rms, density_rel_err) / 3.0
    return DepthEstimate(
        depth_nm=float(depth),
        depth_err_nm=float(depth * relative),
        proton_density=proton_density,
    )
