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

import asyncio

import numpy as np
import pytest

from noise_spectroscopy.bath_simulator import auto_time_grid
from noise_spectroscopy.conf import AnalysisConfig
from noise_spectroscopy.dataset_types import (
    CoherenceCurve,
    NvDataset,
    SpectrumEstimate,
    T1Curve,
)
from noise_spectroscopy.filter_functions import (
    PulseSequence,
    chi_time_domain,
)
from noise_spectroscopy.noise_model import (
    DoubleLorentzian,
    LorentzianComponent,
    evaluate_spectrum,
)
from noise_spectroscopy.pipeline import run_pipeline

# reference bath seen by a 4 nm sensor
SLOW = LorentzianComponent(delta=0.375, tau_c=11.0)
FAST = LorentzianComponent(delta=0.287, tau_c=0.146)
PULSE_NUMBERS = (1, 2, 4, 8, 16, 32)
# shallow sensor: slow knee inside the CPMG window, white fast floor
SHALLOW_SLOW = LorentzianComponent(delta=0.5, tau_c=1.0)
SHALLOW_FAST = LorentzianComponent(delta=2.5, tau_c=0.01)


@pytest.fixture
def bath():
    return DoubleLorentzian(SLOW, FAST)


@pytest.fixture
def bath_at():
    """Double Lorentzian bath of a sensor at the given depth, nm."""

    def _bath(depth):
        return DoubleLorentzian(
            LorentzianComponent(4.24 / depth**1.75, 11.0),
            LorentzianComponent(1.0 / depth**0.9, 0.146),
        )

    return _bath


@pytest.fixture
def shallow_bath():
    return DoubleLorentzian(SHALLOW_SLOW, SHALLOW_FAST)


@pytest.fixture
def analysis_config():
    return AnalysisConfig(bootstrap=False, band_points=16)


@pytest.fixture
def create_curve(bath, **kwargs):
    def _curve(**kwargs):
        model = kwargs.pop("model", bath)
        n_pulses = kwargs.pop("n_pulses", 4)
        sequence = kwargs.pop("sequence", "CPMG")
        points = kwargs.pop("points", 16)
        sigma_c = kwargs.pop("sigma_c", 0.005)
        seed = kwargs.pop("seed", n_pulses)
        times = kwargs.pop("times", None)
        if times is None:
            times = auto_time_grid(model, n_pulses, points)
        seqs = [
            PulseSequence.for_curve(sequence, n_pulses, t) for t in times
        ]
        coherence = np.exp([-chi_time_domain(model, s) for s in seqs])
        if sigma_c > 0:
            rng = np.random.default_rng(seed)
            coherence = coherence + rng.normal(0.0, sigma_c, len(times))
        return CoherenceCurve(
            n_pulses=n_pulses,
            sequence=sequence,
            times=times,
            coherence=np.clip(coherence, -0.2, 1.2),
            sigma=np.full(len(times), max(sigma_c, 1.0e-4)),
        )

    return _curve


@pytest.fixture
def create_t1_curve(**kwargs):
    def _t1_curve(**kwargs):
        t1 = kwargs.pop("t1", 960.0)
        points = kwargs.pop("points", 16)
        sigma = kwargs.pop("sigma", 0.01)
        times = t1 * np.linspace(0.0, 3.0, points)
        rng = np.random.default_rng(kwargs.pop("seed", 7))
        population = np.exp(-times / t1) + rng.normal(0.0, sigma, points)
        return T1Curve(
            times=times,
            population=population,
            sigma=np.full(points, sigma),
        )

    return _t1_curve


@pytest.fixture
def create_dataset(create_curve, create_t1_curve, **kwargs):
    def _dataset(**kwargs):
        pulses = kwargs.pop("pulse_numbers", PULSE_NUMBERS)
        model = kwargs.pop("model", None)
        extra = {} if model is None else {"model": model}
        if "sigma_c" in kwargs:
            extra["sigma_c"] = kwargs.pop("sigma_c")
        seed = kwargs.pop("seed", 0)
        curves = [
            create_curve(n_pulses=n, seed=1000 * seed + n, **extra)
            for n in pulses
        ]
        t1 = kwargs.pop("t1", create_t1_curve())
        return NvDataset(
            id=kwargs.pop("id", "NV4"),
            nominal_depth_nm=kwargs.pop("depth", 4.0),
            field_gauss=kwargs.pop("field", 454.0),
            curves=tuple(curves) + tuple(kwargs.pop("extra_curves", ())),
            temperature_k=kwargs.pop("temperature", None),
            coating=kwargs.pop("coating", None),
            t1=t1,
        )

    return _dataset


@pytest.fixture
def create_spectrum(bath, **kwargs):
    def _spectrum(**kwargs):
        model = kwargs.pop("model", bath)
        omega = kwargs.pop("omega", np.geomspace(0.05, 50.0, 40))
        rel = kwargs.pop("rel", 0.03)
        seed = kwargs.pop("seed", 3)
        clean = evaluate_spectrum(model, omega)
        sigma = rel * clean
        rng = np.random.default_rng(seed)
        noisy = clean
        if kwargs.pop("noise", True):
            noisy = clean + rng.normal(0.0, 1.0, len(omega)) * sigma
        return SpectrumEstimate(
            omega=omega,
            s=noisy,
            sigma=sigma,
            provenance=[(1, float(np.pi / w)) for w in omega],
        )

    return _spectrum


@pytest.fixture
def create_report(create_dataset, analysis_config):
    def _report(datasets=None, config=None):
        if datasets is None:
            datasets = [create_dataset()]
        return asyncio.run(run_pipeline(datasets, config or analysis_config))

    return _report
