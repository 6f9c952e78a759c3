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

"""From coherence curves to T2(N) scaling and a sampled noise spectrum."""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from noise_spectroscopy.dataset_types import (
    CoherenceCurve,
    SpectrumEstimate,
    T1Curve,
)
from noise_spectroscopy.exception import (
    DecayFitFailedException,
    DegenerateFitException,
    EmptySpectrumException,
    FitFailedException,
    ScalingUnderdeterminedException,
    SpectrumUnderdeterminedException,
    T1FitFailedException,
    UndecayedException,
)
from noise_spectroscopy.fitting import nls_fit
from noise_spectroscopy.noise_model import (
    NoiseSpectrumModel,
    evaluate_spectrum,
)

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (0.05, 0.95)
DEFAULT_AMPLITUDE_BOUNDS = (0.8, 1.05)
DEFAULT_STRETCH_BOUNDS = (0.5, 3.5)
DEFAULT_SCALING_BOUNDS = (0.0, 1.0)
DEFAULT_SIGMA_FLOOR = 1.0e-6

DECAY_TIME_FACTORS = (0.25, 0.5, 1.0, 2.0)
STRETCH_LATTICE = (1.0, 2.0, 3.0)
SCALING_K_LATTICE = (0.3, 0.5, 2.0 / 3.0, 0.9)
SCALING_U_LATTICE = (0.0, 0.01, 0.1, 0.5)
T1_TIME_FACTORS = (0.1, 0.3, 1.0, 3.0)
MIN_PULSE_NUMBERS = 4
MAX_HARMONIC = 201
# probe frequencies equal to this many significant digits are merged
MERGE_DIGITS = 12

BULK_LIKE = 0.3
SURFACE_LIKE = 0.2


@dataclass(frozen=True)
class DecayFit:
    """C(t) = amplitude * exp(-(t / t2)^stretch)."""

    n_pulses: int
    amplitude: float
    t2: float
    stretch: float
    covariance: np.ndarray
    reduced_chi2: float
    dof: int

    @property
    def errors(self) -> Tuple[float, float, float]:
        diagonal = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return tuple(float(v) for v in diagonal)

    @property
    def t2_err(self) -> float:
        return self.errors[1]


def decay_model(theta, t):
    return theta[0] * np.exp(-((t / theta[1]) ** theta[2]))


def _crossing_time(times: np.ndarray, values: np.ndarray) -> Optional[float]:
    """First time the data drop below 1/e, by linear interpolation."""
    below = np.nonzero(values < math.exp(-1.0))[0]
    if not len(below) or below[0] == 0:
        return None
    i = below[0]
    t0, t1 = times[i - 1], times[i]
    c0, c1 = values[i - 1], values[i]
    return float(t0 + (c0 - math.exp(-1.0)) * (t1 - t0) / (c0 - c1))


def fit_decay(
    curve: CoherenceCurve,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    amplitude_bounds: Tuple[float, float] = DEFAULT_AMPLITUDE_BOUNDS,
    stretch_bounds: Tuple[float, float] = DEFAULT_STRETCH_BOUNDS,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> DecayFit:
    times, values, sigma = curve.arrays()
    t_max = float(times.max())
    if np.all(values + 2.0 * sigma >= window[1]):
        bound = t_max * (-math.log(window[1])) ** (-1.0 / stretch_bounds[1])
        raise UndecayedException(
            f"{curve.sequence}-{curve.n_pulses} curve does not decay "
            f"below {window[1]}",
            lower_bound=bound,
        )
    scales = [t_max * f for f in DECAY_TIME_FACTORS]
    crossing = _crossing_time(times, values)
    if crossing is not None:
        scales.insert(0, crossing)
    starts = [
        [1.0, scale, float(np.clip(p, *stretch_bounds))]
        for scale, p in itertools.product(scales, STRETCH_LATTICE)
    ]
    lower = (amplitude_bounds[0], 1.0e-3 * t_max, stretch_bounds[0])
    upper = (amplitude_bounds[1], 1.0e3 * t_max, stretch_bounds[1])
    try:
        outcome = nls_fit(
            decay_model,
            times,
            values,
            sigma,
            starts,
            (lower, upper),
            ("amplitude", "t2", "stretch"),
            sigma_floor,
        )
    except (FitFailedException, DegenerateFitException) as err:
        raise DecayFitFailedException(
            f"{curve.sequence}-{curve.n_pulses} decay fit failed: {err}"
        ) from err
    amplitude, t2, stretch = (float(v) for v in outcome.params)
    logger.debug(
        "N=%d: A=%.4g T2=%.4g us p=%.3g",
        curve.n_pulses,
        amplitude,
        t2,
        stretch,
    )
    return DecayFit(
        n_pulses=curve.n_pulses,
        amplitude=amplitude,
        t2=t2,
        stretch=stretch,
        covariance=outcome.covariance,
        reduced_chi2=outcome.reduced_chi2,
        dof=outcome.dof,
    )


@dataclass(frozen=True)
class ScalingFit:
    """1/T2(N) = 1/(t2_1 N^k) + 1/t2_sat.

    ``t2_sat`` is infinite when no saturation is resolved (u at its lower
    bound 0); ``t2_max`` is the longest measured T2, a lower bound of
    t2_sat in every case. ``at_bound`` names the parameters pinned at a
    fit bound; with ``u`` there t2_sat = t2_1 is the strongest saturation
    the law allows.
    """

    t2_1: float
    t2_1_err: float
    k: float
    k_err: float
    t2_sat: float
    t2_sat_err: float
    t2_max: float
    covariance: np.ndarray
    reduced_chi2: float
    dof: int
    at_bound: Tuple[str, ...] = ()

    @property
    def saturates(self) -> bool:
        return math.isfinite(self.t2_sat)

    def t2_at(self, n_pulses) -> np.ndarray:
        n = np.asarray(n_pulses, dtype=float)
        rate = 1.0 / (self.t2_1 * n**self.k)
        if self.saturates:
            rate = rate + 1.0 / self.t2_sat
        return 1.0 / rate


def _scaling_model(theta, n):
    return theta[0] - np.log(n ** (-theta[1]) + theta[2])


def extract_scaling(
    fits: Sequence[Tuple[int, DecayFit]],
    k_bounds: Tuple[float, float] = DEFAULT_SCALING_BOUNDS,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> ScalingFit:
    """Fit log T2(N) with the saturation law; u = t2_1/t2_sat in [0, 1]."""
    pulses = sorted({int(n) for n, _ in fits})
    if len(pulses) < MIN_PULSE_NUMBERS or 1 not in pulses:
        raise ScalingUnderdeterminedException(
            f"scaling needs {MIN_PULSE_NUMBERS} pulse numbers including "
            f"N=1, got {pulses}"
        )
    n = np.array([float(p) for p, _ in fits])
    t2 = np.array([f.t2 for _, f in fits])
    log_sigma = np.array([f.t2_err for _, f in fits]) / t2
    first = float(np.log(np.mean(t2[n == 1])))
    starts = [
        [first, k, u]
        for k, u in itertools.product(SCALING_K_LATTICE, SCALING_U_LATTICE)
    ]
    lower = (-np.inf, k_bounds[0], 0.0)
    upper = (np.inf, k_bounds[1], 1.0)
    try:
        outcome = nls_fit(
            _scaling_model,
            n,
            np.log(t2),
            log_sigma,
            starts,
            (lower, upper),
            ("log_t2_1", "k", "u"),
            sigma_floor,
        )
    except DegenerateFitException as err:
        raise ScalingUnderdeterminedException(str(err)) from err
    log_t2_1, k, u = (float(v) for v in outcome.params)
    errors = outcome.errors
    t2_1 = math.exp(log_t2_1)
    t2_sat, t2_sat_err = math.inf, math.nan
    u_at_zero = u <= 0.0 or ("u" in outcome.at_bound and u < 0.5)
    if not u_at_zero:
        t2_sat = t2_1 / u
        covariance = outcome.covariance
        # d(t2_sat) = t2_sat (d log_t2_1 - du / u)
        gradient = np.array([t2_sat, 0.0, -t2_sat / u])
        variance = float(gradient @ covariance @ gradient)
        t2_sat_err = math.sqrt(max(variance, 0.0))
    logger.debug(
        "scaling: T2(1)=%.4g us k=%.3g T2sat=%.4g us", t2_1, k, t2_sat
    )
    return ScalingFit(
        t2_1=t2_1,
        t2_1_err=t2_1 * float(errors[0]),
        k=k,
        k_err=float(errors[1]),
        t2_sat=t2_sat,
        t2_sat_err=t2_sat_err,
        t2_max=float(t2.max()),
        covariance=outcome.covariance,
        reduced_chi2=outcome.reduced_chi2,
        dof=outcome.dof,
        at_bound=outcome.at_bound,
    )


def harmonic_leakage(
    model: NoiseSpectrumModel, omega: float, max_harmonic: int = MAX_HARMONIC
) -> float:
    """Sum of S(k omega)/k^2 over odd k >= 3 picked up by the inversion."""
    k = np.arange(3, max_harmonic + 1, 2, dtype=float)
    return float(np.sum(evaluate_spectrum(model, k * omega) / k**2))


def _amplitudes(
    curves: Sequence[CoherenceCurve], window: Tuple[float, float]
) -> Dict[int, float]:
    result = {}
    for curve in curves:
        try:
            result[curve.n_pulses] = fit_decay(curve, window).amplitude
        except (UndecayedException, DecayFitFailedException) as err:
            logger.debug(
                "amplitude of N=%d taken as 1: %s", curve.n_pulses, err
            )
            result[curve.n_pulses] = 1.0
    return result


def _merge(points: List[Tuple[float, float, float, Tuple[int, float]]]):
    groups = defaultdict(list)
    for point in points:
        groups[float(f"{point[0]:.{MERGE_DIGITS}g}")].append(point)
    merged = []
    for key in sorted(groups):
        group = groups[key]
        if len(group) == 1:
            merged.append(group[0])
            continue
        weights = np.array([1.0 / p[2] ** 2 for p in group])
        values = np.array([p[1] for p in group])
        value = float(np.sum(weights * values) / np.sum(weights))
        sigma = float(1.0 / math.sqrt(np.sum(weights)))
        provenance = min(p[3] for p in group)
        merged.append((group[0][0], value, sigma, provenance))
    return merged


def reconstruct_spectrum(
    curves: Sequence[CoherenceCurve],
    amplitudes: Optional[Mapping[int, float]] = None,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    correction_model: Optional[NoiseSpectrumModel] = None,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    min_pulse_numbers: int = MIN_PULSE_NUMBERS,
) -> SpectrumEstimate:
    """Invert every usable coherence point to S at its probe frequency.

    S(pi N / t) = -pi/(8t) ln(C/A_N), sigma_S = pi/(8t) sigma_C / C.
    With ``correction_model`` the odd-harmonic leakage predicted by that
    model is subtracted from every point.
    """
    probed = [c for c in curves if c.n_pulses > 0]
    pulses = sorted({c.n_pulses for c in probed})
    if len(pulses) < min_pulse_numbers:
        raise SpectrumUnderdeterminedException(
            f"reconstruction needs {min_pulse_numbers} pulse numbers, "
            f"got {pulses}"
        )
    if amplitudes is None:
        amplitudes = _amplitudes(probed, window)
    low, high = window
    points = []
    for curve in probed:
        scale = amplitudes.get(curve.n_pulses, 1.0)
        times, values, sigma = curve.arrays()
        for t, c, e in zip(times, values, sigma):
            if not low <= c <= high or c / scale <= 0:
                continue
            factor = math.pi / (8.0 * t)
            omega = math.pi * curve.n_pulses / t
            s = -factor * math.log(c / scale)
            if correction_model is not None:
                s -= harmonic_leakage(correction_model, omega)
            error = factor * max(e, sigma_floor) / c
            points.append((omega, s, error, (curve.n_pulses, float(t))))
    if not points:
        raise EmptySpectrumException(
            f"no coherence point inside the window [{low}, {high}]"
        )
    merged = _merge(points)
    return SpectrumEstimate(
        omega=[p[0] for p in merged],
        s=[p[1] for p in merged],
        sigma=[p[2] for p in merged],
        provenance=[p[3] for p in merged],
        harmonic_corrected=correction_model is not None,
    )


def exclude_window(
    estimate: SpectrumEstimate, center: float, rel: float
) -> SpectrumEstimate:
    """Drop points with |omega - center| <= rel * center."""
    omega = np.asarray(estimate.omega)
    return estimate.subset(np.abs(omega - center) > rel * center)


@dataclass(frozen=True)
class T1Fit:
    t1: float
    t1_err: float
    p0: float
    p_inf: float
    reduced_chi2: float
    dof: int


def _relaxation(theta, t):
    return theta[1] + (theta[0] - theta[1]) * np.exp(-t / theta[2])


def fit_t1(
    curve: T1Curve, sigma_floor: float = DEFAULT_SIGMA_FLOOR
) -> T1Fit:
    """P(t) = P_inf + (P0 - P_inf) exp(-t/T1)."""
    times, population, sigma = curve.arrays()
    t_max = float(times.max())
    noise = max(float(np.median(sigma)), sigma_floor)
    if np.ptp(population) <= 2.0 * noise:
        raise UndecayedException(
            "population does not relax within the measured window",
            lower_bound=t_max,
        )
    starts = [
        [float(population[0]), float(population[-1]), t_max * f]
        for f in T1_TIME_FACTORS
    ]
    span = max(float(np.max(np.abs(population))), 1.0)
    lower = (-2.0 * span, -2.0 * span, 1.0e-3 * t_max)
    upper = (2.0 * span, 2.0 * span, 1.0e3 * t_max)
    try:
        outcome = nls_fit(
            _relaxation,
            times,
            population,
            sigma,
            starts,
            (lower, upper),
            ("p0", "p_inf", "t1"),
            sigma_floor,
        )
    except (FitFailedException, DegenerateFitException) as err:
        raise T1FitFailedException(f"T1 fit failed: {err}") from err
    p0, p_inf, t1 = (float(v) for v in outcome.params)
    if "t1" in outcome.at_bound:
        raise T1FitFailedException(f"T1 pinned at its bound ({t1:.4g} us)")
    return T1Fit(
        t1=t1,
        t1_err=float(outcome.errors[2]),
        p0=p0,
        p_inf=p_inf,
        reduced_chi2=outcome.reduced_chi2,
        dof=outcome.dof,
    )


@dataclass(frozen=True)
class SaturationDiagnostics:
    ratio: float
    ratio_err: float
    lower_bound_only: bool
    classification: str


def classify_saturation(ratio: float, lower_bound_only: bool = False) -> str:
    """Heuristic label of T2sat/T1."""
    if ratio >= BULK_LIKE:
        return "bulk-like"
    if lower_bound_only:
        return "indeterminate"
    if ratio <= SURFACE_LIKE:
        return "surface-like"
    return "intermediate"


def saturation_diagnostics(
    scaling: ScalingFit, t1: float, t1_err: float = 0.0
) -> SaturationDiagnostics:
    if not t1 > 0:
        raise ValueError("T1 must be > 0")
    if not scaling.saturates:
        ratio = scaling.t2_max / t1
        return SaturationDiagnostics(
            ratio=ratio,
            ratio_err=math.nan,
            lower_bound_only=True,
            classification=classify_saturation(ratio, True),
        )
    ratio = scaling.t2_sat / t1
    relative = math.hypot(
        scaling.t2_sat_err / scaling.t2_sat
        if math.isfinite(scaling.t2_sat_err)
        else 0.0,
        t1_err / t1,
    )
    return SaturationDiagnostics(
        ratio=ratio,
        ratio_err=ratio * relative,
        lower_bound_only=False,
        classification=classify_saturation(ratio),
    )
