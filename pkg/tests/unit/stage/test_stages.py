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

import numpy as np
import pytest

from noise_spectroscopy.dataset_types import CoherenceCurve
from noise_spectroscopy.stage import (
    DecayStage,
    DepthScalingStage,
    GlobalFitStage,
    Metadata,
    ModelStage,
    NmrStage,
    SaturationStage,
    ScalingStage,
    SpectrumStage,
    Stage,
    T1Stage,
)


def _flat_curve(n_pulses, sequence="CPMG", value=0.99):
    return CoherenceCurve(
        n_pulses=n_pulses,
        sequence=sequence,
        times=[1.0, 2.0, 4.0, 8.0],
        coherence=[value] * 4,
        sigma=[0.005] * 4,
    )


async def _run(control, *stages, dataset_id="NV4"):
    for order, stage in enumerate(stages):
        await stage(Metadata(dataset_id, stage.name, order), control)()
    statuses = []
    while not control.queue.empty():
        statuses.append(control.queue.get_nowait())
    return statuses


def _outcome(statuses):
    return {s["stage"]: (s["status"], s["reason"]) for s in statuses}


@pytest.mark.asyncio
async def test_decay_stage(create_control):
    control = create_control()

    statuses = await _run(control, DecayStage)

    assert _outcome(statuses) == {"decay": ("successful", None)}
    table = control.results["decay"]
    assert [row.n_pulses for row in table] == [1, 2, 4, 8, 16, 32]
    assert all(row.status == "successful" for row in table)


@pytest.mark.asyncio
async def test_decay_stage_without_cpmg_curves(create_control, create_dataset):
    dataset = create_dataset(
        pulse_numbers=(), extra_curves=[_flat_curve(8, "XY8")]
    )
    control = create_control(dataset=dataset)

    statuses = await _run(control, DecayStage, ScalingStage)

    assert _outcome(statuses) == {
        "decay": ("skipped", "no-decay-curves"),
        "scaling": ("skipped", "needs-decay"),
    }
    assert control.results == {}


@pytest.mark.asyncio
async def test_decay_stage_undecayed_curves(create_control, create_dataset):
    dataset = create_dataset(
        pulse_numbers=(), extra_curves=[_flat_curve(1), _flat_curve(2)]
    )
    control = create_control(dataset=dataset)

    statuses = await _run(control, DecayStage)

    status = statuses[0]
    assert status["status"] == "failed"
    assert status["reason"] == "decay-fit-failed"
    assert "undecayed" in status["message"]
    rows = control.results["decay"]
    assert [row.status for row in rows] == ["undecayed", "undecayed"]
    assert all(row.lower_bound > 8.0 for row in rows)


@pytest.mark.asyncio
async def test_scaling_stage_missing_decay(create_control):
    control = create_control()

    statuses = await _run(control, ScalingStage)

    assert _outcome(statuses) == {"scaling": ("skipped", "needs-decay")}


@pytest.mark.asyncio
async def test_scaling_stage_underdetermined(create_control, create_dataset):
    control = create_control(dataset=create_dataset(pulse_numbers=(1, 2)))

    statuses = await _run(control, DecayStage, ScalingStage)

    assert _outcome(statuses)["scaling"] == (
        "failed",
        "scaling-underdetermined",
    )
    assert "scaling" not in control.results


@pytest.mark.asyncio
async def test_relaxation_stages(create_control):
    control = create_control()

    statuses = await _run(
        control, DecayStage, ScalingStage, T1Stage, SaturationStage
    )

    assert all(s["status"] == "successful" for s in statuses)
    assert control.results["t1"].t1 == pytest.approx(960.0, rel=0.1)
    assert control.results["saturation"].classification in (
        "surface-like",
        "intermediate",
        "bulk-like",
        "indeterminate",
    )


@pytest.mark.asyncio
async def test_t1_stage_without_data(create_control, create_dataset):
    control = create_control(dataset=create_dataset(t1=None))

    statuses = await _run(control, T1Stage)

    assert _outcome(statuses) == {"t1": ("skipped", "no-t1-data")}


@pytest.mark.asyncio
async def test_spectrum_stage_excludes_proton_window(create_control):
    control = create_control()

    statuses = await _run(control, DecayStage, SpectrumStage)

    assert _outcome(statuses)["spectrum"] == ("successful", None)
    result = control.results["spectrum"]
    assert result.larmor_mhz == pytest.approx(1.933, abs=5e-4)
    larmor = 2.0 * np.pi * result.larmor_mhz
    omega = np.asarray(result.broadband.omega)
    assert np.all(np.abs(omega - larmor) > 0.15 * larmor)
    assert len(result.broadband) <= len(result.estimate)
    assert not result.estimate.harmonic_corrected


@pytest.mark.asyncio
async def test_spectrum_stage_zero_field(create_control, create_dataset):
    control = create_control(dataset=create_dataset(field=0.0))

    await _run(control, DecayStage, SpectrumStage)

    result = control.results["spectrum"]
    assert result.broadband == result.estimate


@pytest.mark.asyncio
async def test_spectrum_stage_harmonic_correction(
    create_control, analysis_config
):
    control = create_control(
        config=analysis_config.replace(harmonic_correction=True)
    )

    await _run(control, DecayStage, SpectrumStage)

    assert control.results["spectrum"].estimate.harmonic_corrected


@pytest.mark.asyncio
async def test_model_stage(create_control):
    control = create_control()

    statuses = await _run(control, DecayStage, SpectrumStage, ModelStage)

    assert _outcome(statuses)["models"] == ("successful", None)
    models = control.results["models"]
    assert models.comparison.best is not None
    ranked = {r.kind.value for r in models.comparison.ranked}
    assert set(models.bands) <= ranked
    for band in models.bands.values():
        assert band.mode == "linear"
        assert len(band.omega) == 16


@pytest.mark.asyncio
async def test_nmr_stage_without_sweep(create_control):
    control = create_control()

    statuses = await _run(control, NmrStage)

    assert _outcome(statuses) == {"nmr": ("skipped", "no-nmr-sweep")}


@pytest.mark.asyncio
async def test_global_fit_stage_single_dataset(create_control):
    ensemble = {"NV4": create_control()}
    control = create_control(ensemble=ensemble)

    statuses = await _run(
        control, GlobalFitStage, DepthScalingStage, dataset_id="ensemble"
    )

    assert _outcome(statuses) == {
        "global_fit": ("skipped", "not-global"),
        "depth_scaling": ("skipped", "not-global"),
    }


@pytest.mark.asyncio
async def test_depth_scaling_stage_needs_global_fit(
    create_control, create_dataset
):
    ensemble = {
        "NV4": create_control(),
        "NV8": create_control(dataset=create_dataset(id="NV8", depth=8.0)),
    }
    control = create_control(ensemble=ensemble)

    statuses = await _run(control, DepthScalingStage, dataset_id="ensemble")

    assert _outcome(statuses) == {
        "depth_scaling": ("skipped", "needs-global_fit")
    }


class _SingularStage(Stage):
    name = "decay"

    def compute(self):
        raise RuntimeError("matrix is singular")


@pytest.mark.asyncio
async def test_stage_reports_unexpected_error(create_control, caplog):
    control = create_control()

    statuses = await _run(control, _SingularStage, ScalingStage)

    assert _outcome(statuses) == {
        "decay": ("failed", "internal-error"),
        "scaling": ("skipped", "needs-decay"),
    }
    assert statuses[0]["message"] == "matrix is singular"
    assert "decay" not in control.results
    assert "unexpected error in decay" in caplog.text
