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

"""End-to-end checks of the analysis chain on synthetic ensembles.

These exercise quadrature synthesis, Monte-Carlo trajectories and the
full pipeline at realistic sizes and take minutes; they run with
``pytest -m long_run``.
"""

import asyncio
import math

import numpy as np
import pytest

from noise_spectroscopy.bath_simulator import (
    MeasurementPlan,
    OuParams,
    mc_coherence,
    reference_env_spec,
    synthesize_sensor,
)
from noise_spectroscopy.exception import (
    DegenerateFitException,
    FitFailedException,
)
from noise_spectroscopy.filter_functions import (
    PulseSequence,
    chi_exact,
    ou_hahn_chi,
    ou_ramsey_chi,
)
from noise_spectroscopy.fitting import (
    ModelKind,
    compare_models,
    fit_spectrum_model,
    global_fit,
)
from noise_spectroscopy.noise_model import (
    LorentzianComponent,
    SingleLorentzian,
)
from noise_spectroscopy.pipeline import run_pipeline, run_stages
from noise_spectroscopy.stage import (
    DecayStage,
    NmrStage,
    ScalingStage,
    SpectrumStage,
)

MC_SEEDS = (11, 23, 47)
REFERENCE_DEPTHS = (2.0, 3.0, 4.0, 20.0)


def _taus(result):
    names = dict(zip(result.names, result.params))
    return sorted((names["tau_c1"], names["tau_c2"]), reverse=True)


@pytest.mark.long_run
@pytest.mark.parametrize(
    "seq, chi",
    [
        pytest.param(
            PulseSequence.ramsey(1.5),
            ou_ramsey_chi(1.0, 2.0, 1.5),
            id="ramsey",
        ),
        pytest.param(
            PulseSequence.hahn(3.0), ou_hahn_chi(1.0, 2.0, 3.0), id="hahn"
        ),
    ],
)
def test_mc_matches_ou_closed_forms(seq, chi):
    model = SingleLorentzian(LorentzianComponent(1.0, 2.0))
    exact = math.exp(-chi_exact(model, seq))
    assert exact == pytest.approx(math.exp(-chi), rel=1e-4)
    passed = 0
    for seed in MC_SEEDS:
        params = OuParams(delta=1.0, tau_c=2.0, dt=0.005, seed=seed)
        value, error = mc_coherence([params], seq, 10000, seed=seed)
        passed += abs(value - math.exp(-chi)) < 3.0 * error
    assert passed >= 2


@pytest.mark.long_run
def test_slow_bath_scaling_limit(create_dataset, analysis_config):
    slow = SingleLorentzian(LorentzianComponent(0.375, 100.0))
    dataset = create_dataset(model=slow, t1=None)

    results, _ = asyncio.run(
        run_stages(dataset, analysis_config, (DecayStage, ScalingStage))
    )

    assert 0.60 <= results["scaling"].k <= 0.73


@pytest.mark.long_run
def test_shallow_bath_scaling(create_dataset, analysis_config, shallow_bath):
    dataset = create_dataset(model=shallow_bath, t1=None)

    results, _ = asyncio.run(
        run_stages(dataset, analysis_config, (DecayStage, ScalingStage))
    )

    scaling = results["scaling"]
    assert 0.3 <= scaling.k <= 0.5
    assert scaling.saturates
    assert 20.0 < scaling.t2_sat < 150.0


@pytest.mark.long_run
def test_reference_law_at_two_nm_keeps_slow_tail(
    create_dataset, analysis_config, bath_at
):
    # pulse frequencies all sit on the omega^-2 tail of the 11 us bath
    dataset = create_dataset(model=bath_at(2.0), t1=None)

    results, _ = asyncio.run(
        run_stages(dataset, analysis_config, (DecayStage, ScalingStage))
    )

    assert 0.55 <= results["scaling"].k <= 0.70


@pytest.mark.long_run
def test_spectral_round_trip(create_dataset, analysis_config, bath_at):
    # the 11 us knee is only inside the coherence window of deep sensors
    # and the 146 ns knee only of shallow ones, so the double Lorentzian
    # is fitted jointly over the reference depths
    datasets = [
        create_dataset(
            id=f"NV{d:g}",
            depth=d,
            model=bath_at(d),
            pulse_numbers=(1, 2, 4, 8, 16, 32, 64),
            sigma_c=0.02,
            field=0.0,
            t1=None,
        )
        for d in REFERENCE_DEPTHS
    ]
    config = analysis_config.replace(harmonic_correction=True)

    report = asyncio.run(run_pipeline(datasets, config))

    result = report.ensemble["global_fit"]
    assert [result.tau_c1, result.tau_c2] == pytest.approx(
        [11.0, 0.146], rel=0.15
    )
    model = result.model_for("NV4")
    expected = bath_at(4.0)
    assert [model.c1.delta, model.c2.delta] == pytest.approx(
        [expected.c1.delta, expected.c2.delta], rel=0.15
    )


@pytest.mark.long_run
def test_double_lorentzian_wins_model_selection(create_spectrum, bath_at):
    wins = 0
    for seed in range(10):
        estimate = create_spectrum(model=bath_at(3.0), seed=seed)
        best = compare_models(estimate).best
        wins += best is not None and best.kind is ModelKind.DOUBLE
    assert wins >= 9


@pytest.mark.long_run
def test_global_fit_beats_independent_fits(create_spectrum, bath_at):
    global_taus, independent_taus = [], {d: [] for d in REFERENCE_DEPTHS}
    for seed in range(5):
        estimates = [
            (f"NV{d:g}", create_spectrum(model=bath_at(d), seed=seed + i))
            for i, d in enumerate(REFERENCE_DEPTHS)
        ]
        result = global_fit(estimates)
        global_taus.append(result.tau_c1)
        assert result.tau_c1 == pytest.approx(11.0, rel=0.15)
        assert result.tau_c2 == pytest.approx(0.146, rel=0.15)
        for depth, (_, estimate) in zip(REFERENCE_DEPTHS, estimates):
            fit = fit_spectrum_model(estimate, ModelKind.DOUBLE)
            independent_taus[depth].append(_taus(fit)[0])
    independent = np.mean([np.var(v) for v in independent_taus.values()])
    assert np.var(global_taus) <= independent



def _reconstructed(dataset, config):
    results, _ = asyncio.run(
        run_stages(dataset, config, (DecayStage, SpectrumStage))
    )
    return results["spectrum"].broadband


@pytest.mark.long_run
def test_model_selection_on_reconstructed_spectra(
    create_dataset, analysis_config, bath_at
):
    config = analysis_config.replace(harmonic_correction=True)
    wins = 0
    for seed in range(10):
        dataset = create_dataset(
            id="NV3", depth=3.0, model=bath_at(3.0), t1=None, seed=seed
        )
        best = compare_models(_reconstructed(dataset, config)).best
        wins += best is not None and best.kind is ModelKind.DOUBLE
    assert wins >= 9


@pytest.mark.long_run
def test_global_fit_on_reconstructed_spectra(
    create_dataset, analysis_config, bath_at
):
    config = analysis_config.replace(harmonic_correction=True)
    global_taus, independent_taus = [], {d: [] for d in REFERENCE_DEPTHS}
    for seed in range(4):
        estimates = [
            (
                f"NV{d:g}",
                _reconstructed(
                    create_dataset(
                        id=f"NV{d:g}",
                        depth=d,
                        model=bath_at(d),
                        sigma_c=0.02,
                        t1=None,
                        seed=seed,
                    ),
                    config,
                ),
            )
            for d in REFERENCE_DEPTHS
        ]
        result = global_fit(estimates)
        global_taus.append(result.tau_c1)
        assert result.tau_c1 == pytest.approx(11.0, rel=0.15)
        assert result.tau_c2 == pytest.approx(0.146, rel=0.15)
        for depth, (_, estimate) in zip(REFERENCE_DEPTHS, estimates):
            try:
                fit = fit_spectrum_model(estimate, ModelKind.DOUBLE)
            except (DegenerateFitException, FitFailedException):
                continue
            independent_taus[depth].append(_taus(fit)[0])
    spread = [np.var(v) for v in independent_taus.values() if len(v) > 1]
    assert np.var(global_taus) <= np.mean(spread)

@pytest.mark.long_run
def test_reference_ensemble_depth_scaling(
    create_dataset, analysis_config, bath_at
):
    datasets = [
        create_dataset(
            id=f"NV{d:g}", depth=d, model=bath_at(d), sigma_c=0.02, t1=None
        )
        for d in REFERENCE_DEPTHS
    ]
    config = analysis_config.replace(harmonic_correction=True)

    report = asyncio.run(run_pipeline(datasets, config))

    result = report.ensemble["global_fit"]
    assert result.tau_c1 == pytest.approx(11.0, rel=0.15)
    assert result.tau_c2 == pytest.approx(0.146, rel=0.15)
    fits = report.ensemble["depth_scaling"].fits
    assert 1.55 <= fits["delta1"].n <= 1.95
    assert 0.6 <= fits["delta2"].n <= 1.2


@pytest.mark.long_run
@pytest.mark.parametrize("depth", [2.0, 3.0, 4.0])
def test_depth_from_proton_line(analysis_config, depth):
    plan = MeasurementPlan(n_values=(1, 2, 4, 8), points_per_curve=12)
    dataset = synthesize_sensor(reference_env_spec(), plan, depth, seed=1)

    results, statuses = asyncio.run(
        run_stages(dataset, analysis_config, (NmrStage,))
    )

    assert statuses[0]["status"] == "successful"
    estimate = results["nmr"].depth
    assert estimate.depth_nm == pytest.approx(depth, rel=0.1)
    assert abs(estimate.depth_nm - depth) < 1.0


@pytest.mark.long_run
def test_deep_sensor_proton_line(analysis_config):
    plan = MeasurementPlan(n_values=(1, 2, 4, 8), points_per_curve=12)
    dataset = synthesize_sensor(reference_env_spec(), plan, 20.0, seed=1)

    results, statuses = asyncio.run(
        run_stages(dataset, analysis_config, (NmrStage,))
    )

    # the 20 nm line sits close to the coherence noise floor
    if statuses[0]["status"] == "successful":
        assert results["nmr"].depth.depth_nm == pytest.approx(20.0, rel=0.1)
    else:
        assert statuses[0]["reason"] == "nmr-not-found"
