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

import math

import numpy as np
import pytest

from noise_spectroscopy.dataset_types import CoherenceCurve, T1Curve
from noise_spectroscopy.decomposition import (
    DecayFit,
    classify_saturation,
    decay_model,
    exclude_window,
    extract_scaling,
    fit_decay,
    fit_t1,
    harmonic_leakage,
    reconstruct_spectrum,
    saturation_diagnostics,
)
from noise_spectroscopy.exception import (
    EmptySpectrumException,
    ScalingUnderdeterminedException,
    SpectrumUnderdeterminedException,
    UndecayedException,
)
from noise_spectroscopy.noise_model import PowerLaw, evaluate_spectrum

WHITE_LEVEL = 0.02


def decay_curve(t2, stretch, amplitude=1.0, n_pulses=1, sigma=1e-6, noise=0):
    times = t2 * np.linspace(0.1, 2.5, 20)
    values = decay_model((amplitude, t2, stretch), times)
    if noise:
        values = values + np.random.default_rng(noise).normal(
            0.0, sigma, len(times)
        )
    return CoherenceCurve(
        n_pulses=n_pulses,
        sequence="CPMG",
        times=times,
        coherence=values,
        sigma=np.full(len(times), sigma),
    )


def decay_fit(n_pulses, t2, rel_err=0.01):
    covariance = np.diag([1e-4, (rel_err * t2) ** 2, 1e-2])
    return DecayFit(
        n_pulses=n_pulses,
        amplitude=1.0,
        t2=t2,
        stretch=2.0,
        covariance=covariance,
        reduced_chi2=1.0,
        dof=17,
    )


def white_curve(n_pulses, level=WHITE_LEVEL):
    # chi = pi t S0 for white noise, whatever the sequence
    times = np.linspace(1.0, 40.0, 12)
    return CoherenceCurve(
        n_pulses=n_pulses,
        sequence="CPMG",
        times=times,
        coherence=np.exp(-np.pi * times * level),
        sigma=np.full(len(times), 1e-4),
    )


@pytest.mark.parametrize(
    "stretch, tolerance",
    [
        pytest.param(1.0, 1e-6, id="exponential"),
        pytest.param(3.0, 1e-3, id="cubic"),
    ],
)
def test_fit_decay_noiseless(stretch, tolerance):
    fit = fit_decay(decay_curve(10.0, stretch))
    assert fit.t2 == pytest.approx(10.0, rel=tolerance)
    assert fit.stretch == pytest.approx(stretch, rel=tolerance)
    assert fit.amplitude == pytest.approx(1.0, rel=tolerance)


def test_fit_decay_noisy_amplitude():
    curve = decay_curve(
        25.0, 2.0, amplitude=0.93, n_pulses=8, sigma=0.01, noise=4
    )
    fit = fit_decay(curve)
    assert fit.n_pulses == 8
    assert fit.t2 == pytest.approx(25.0, abs=4.0 * fit.t2_err + 0.5)
    assert fit.amplitude == pytest.approx(0.93, abs=0.03)
    assert fit.dof == 17
    assert len(fit.errors) == 3


def test_fit_decay_covariance_is_calibrated():
    estimates, reported = [], []
    for seed in range(1, 101):
        curve = decay_curve(10.0, 1.5, sigma=0.01, noise=seed)
        fit = fit_decay(curve)
        estimates.append(fit.t2)
        reported.append(fit.t2_err)
    ratio = np.std(estimates) / np.median(reported)
    assert 0.5 < ratio < 2.0


def test_fit_decay_undecayed():
    times = np.linspace(1.0, 10.0, 8)
    curve = CoherenceCurve(
        n_pulses=4,
        sequence="CPMG",
        times=times,
        coherence=np.full(8, 0.99),
        sigma=np.full(8, 0.01),
    )
    with pytest.raises(UndecayedException) as info:
        fit_decay(curve)
    assert info.value.lower_bound > times.max()


def test_extract_scaling_with_saturation():
    n = np.array([1, 2, 4, 8, 16, 32, 64])
    t2 = 1.0 / (1.0 / (20.0 * n**0.6) + 1.0 / 300.0)
    fits = [(int(p), decay_fit(int(p), float(v))) for p, v in zip(n, t2)]
    scaling = extract_scaling(fits)
    assert scaling.k == pytest.approx(0.6, rel=1e-3)
    assert scaling.t2_1 == pytest.approx(20.0, rel=1e-3)
    assert scaling.saturates
    assert scaling.t2_sat == pytest.approx(300.0, rel=1e-2)
    assert scaling.t2_max == pytest.approx(t2.max())
    assert np.allclose(scaling.t2_at(n), t2, rtol=1e-3)


def test_extract_scaling_without_saturation():
    n = np.array([1, 2, 4, 8, 16])
    t2 = 15.0 * n ** (2.0 / 3.0)
    fits = [(int(p), decay_fit(int(p), float(v))) for p, v in zip(n, t2)]
    scaling = extract_scaling(fits)
    assert scaling.k == pytest.approx(2.0 / 3.0, rel=1e-3)
    assert not scaling.saturates
    assert math.isinf(scaling.t2_sat)
    assert scaling.t2_max == pytest.approx(t2.max())


@pytest.mark.parametrize(
    "t2",
    [
        pytest.param(
            {
                n: 1.0 / (1.0 / (10.0 * n**0.3) + 0.2)
                for n in (1, 4, 16, 64)
            },
            id="over-saturated",
        ),
        pytest.param(
            {1: 5.0, 2: 5.6, 4: 5.8, 8: 5.9, 16: 5.95, 32: 5.97},
            id="flat-plateau",
        ),
    ],
)
def test_extract_scaling_saturation_at_bound(t2):
    fits = [(n, decay_fit(n, v)) for n, v in sorted(t2.items())]
    scaling = extract_scaling(fits)
    assert "u" in scaling.at_bound
    assert scaling.saturates
    assert scaling.t2_sat == pytest.approx(scaling.t2_1, rel=1e-3)
    assert np.isfinite(scaling.t2_at(64.0))


@pytest.mark.parametrize(
    "pulses",
    [
        pytest.param((1, 2, 4), id="three"),
        pytest.param((2, 4, 8, 16), id="no-hahn"),
    ],
)
def test_extract_scaling_underdetermined(pulses):
    fits = [(p, decay_fit(p, 10.0 * p**0.5)) for p in pulses]
    with pytest.raises(ScalingUnderdeterminedException):
        extract_scaling(fits)


def test_raw_inversion_overestimates_white_noise():
    curves = [white_curve(n) for n in (1, 2, 4, 8)]
    estimate = reconstruct_spectrum(curves, {n: 1.0 for n in (1, 2, 4, 8)})
    assert not estimate.harmonic_corrected
    ratio = np.asarray(estimate.s) / WHITE_LEVEL
    assert np.allclose(ratio, np.pi**2 / 8.0, rtol=1e-9)


def test_corrected_inversion_recovers_white_noise():
    curves = [white_curve(n) for n in (1, 2, 4, 8)]
    white = PowerLaw(WHITE_LEVEL, 1.0e-9)
    estimate = reconstruct_spectrum(
        curves, {n: 1.0 for n in (1, 2, 4, 8)}, correction_model=white
    )
    assert estimate.harmonic_corrected
    truth = evaluate_spectrum(white, np.asarray(estimate.omega))
    assert np.allclose(estimate.s, truth, rtol=0.05)


def test_harmonic_leakage_of_white_noise():
    leakage = harmonic_leakage(PowerLaw(1.0, 1.0e-9), 1.0)
    # sum over odd k >= 3 of 1/k^2, truncated at k = 201
    assert leakage == pytest.approx(np.pi**2 / 8.0 - 1.0, abs=3e-3)


def test_lorentzian_round_trip(bath, create_curve):
    pulses = (8, 16, 32, 64)
    curves = [create_curve(n_pulses=n, sigma_c=0.0) for n in pulses]
    amplitudes = {n: 1.0 for n in pulses}
    raw = reconstruct_spectrum(curves, amplitudes)
    corrected = reconstruct_spectrum(
        curves, amplitudes, correction_model=bath
    )
    omega = np.asarray(corrected.omega)
    truth = evaluate_spectrum(bath, omega)
    error = (np.asarray(corrected.s) - truth) / truth
    assert np.sqrt(np.mean(error**2)) < 0.1
    assert np.all(np.asarray(raw.s) >= np.asarray(corrected.s))
    assert corrected.distinct_pulse_numbers() == pulses


def test_reconstruction_uses_window_only(create_curve):
    curves = [create_curve(n_pulses=n, sigma_c=0.0) for n in (1, 2, 4, 8)]
    estimate = reconstruct_spectrum(curves, {n: 1.0 for n in (1, 2, 4, 8)})
    for n_pulses, time in estimate.provenance:
        curve = next(c for c in curves if c.n_pulses == n_pulses)
        value = curve.coherence[curve.times.index(time)]
        assert 0.05 <= value <= 0.95
    assert np.all(np.diff(estimate.omega) > 0)
    assert np.all(np.asarray(estimate.sigma) > 0)


def test_reconstruction_merges_coincident_frequencies():
    # N=1 at t and N=2 at 2t probe the same frequency
    times = np.array([2.0, 4.0, 6.0, 8.0])
    curves = [
        CoherenceCurve(
            n_pulses=n,
            sequence="CPMG",
            times=times * n,
            coherence=np.full(4, 0.5),
            sigma=np.full(4, 0.01),
        )
        for n in (1, 2, 4, 8)
    ]
    estimate = reconstruct_spectrum(curves, {n: 1.0 for n in (1, 2, 4, 8)})
    assert len(estimate) == 4
    assert all(n == 1 for n, _ in estimate.provenance)


def test_reconstruction_underdetermined(create_curve):
    curves = [create_curve(n_pulses=n) for n in (1, 2, 4)]
    with pytest.raises(SpectrumUnderdeterminedException):
        reconstruct_spectrum(curves)


def test_reconstruction_empty_window():
    times = np.linspace(1.0, 4.0, 4)
    curves = [
        CoherenceCurve(
            n_pulses=n,
            sequence="CPMG",
            times=times,
            coherence=np.full(4, 0.99),
            sigma=np.full(4, 0.01),
        )
        for n in (1, 2, 4, 8)
    ]
    with pytest.raises(EmptySpectrumException):
        reconstruct_spectrum(curves, {n: 1.0 for n in (1, 2, 4, 8)})


def test_exclude_window(create_spectrum):
    estimate = create_spectrum(omega=np.linspace(1.0, 20.0, 20))
    kept = exclude_window(estimate, 12.0, 0.15)
    omega = np.asarray(kept.omega)
    assert np.all(np.abs(omega - 12.0) > 1.8)
    assert len(kept) == len(estimate) - 3


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_fit_t1(create_t1_curve, seed):
    curve = create_t1_curve(t1=860.0, sigma=0.03, seed=seed)
    fit = fit_t1(curve)
    assert fit.t1 == pytest.approx(860.0, rel=0.15)
    assert fit.t1_err > 0
    assert fit.p0 == pytest.approx(1.0, abs=0.1)


def test_fit_t1_flat_population():
    times = np.linspace(0.0, 100.0, 8)
    curve = T1Curve(times=times, population=np.full(8, 0.5), sigma=[0.05] * 8)
    with pytest.raises(UndecayedException):
        fit_t1(curve)


@pytest.mark.parametrize(
    "ratio, lower_bound_only, expected",
    [
        pytest.param(0.5, False, "bulk-like", id="bulk"),
        pytest.param(0.3, False, "bulk-like", id="bulk-edge"),
        pytest.param(0.25, False, "intermediate", id="intermediate"),
        pytest.param(0.1, False, "surface-like", id="surface"),
        pytest.param(0.1, True, "indeterminate", id="bound"),
        pytest.param(0.4, True, "bulk-like", id="bound-bulk"),
    ],
)
def test_classify_saturation(ratio, lower_bound_only, expected):
    assert classify_saturation(ratio, lower_bound_only) == expected


def test_saturation_diagnostics():
    n = np.array([1, 2, 4, 8, 16, 32, 64])
    t2 = 1.0 / (1.0 / (20.0 * n**0.6) + 1.0 / 300.0)
    fits = [(int(p), decay_fit(int(p), float(v))) for p, v in zip(n, t2)]
    scaling = extract_scaling(fits)
    result = saturation_diagnostics(scaling, 2000.0, 200.0)
    assert result.ratio == pytest.approx(0.15, rel=0.02)
    assert not result.lower_bound_only
    assert result.classification == "surface-like"
    assert result.ratio_err > 0.09 * result.ratio


def test_saturation_lower_bound_only():
    n = np.array([1, 2, 4, 8, 16])
    t2 = 15.0 * n ** (2.0 / 3.0)
    fits = [(int(p), decay_fit(int(p), float(v))) for p, v in zip(n, t2)]
    result = saturation_diagnostics(extract_scaling(fits), 1000.0)
    assert result.lower_bound_only
    assert result.ratio == pytest.approx(t2.max() / 1000.0)
    assert math.isnan(result.ratio_err)
    with pytest.raises(ValueError):
        saturation_diagnostics(extract_scaling(fits), 0.0)
