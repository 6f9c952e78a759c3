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

"""Asynchronous orchestration of the analysis stages.

Datasets are analysed concurrently, at most ``config.workers`` at a
time; the stages of one dataset run in order. Every stage sends its
status on a shared queue, the statuses are sorted by dataset and stage
before the report is built, so the report does not depend on the
order in which datasets finished.
"""

import asyncio
import logging
from typing import Any, Dict, List, Sequence, Tuple

from noise_spectroscopy.conf import AnalysisConfig
from noise_spectroscopy.dataset_types import NvDataset
from noise_spectroscopy.report import Report
from noise_spectroscopy.stage import (
    DATASET_STAGES,
    ENSEMBLE_ID,
    ENSEMBLE_STAGES,
    STAGE_NAMES,
    Control,
    Metadata,
)

logger = logging.getLogger(__name__)


async def _run(stages, dataset_id: str, control: Control) -> None:
    for stage_class in stages:
        metadata = Metadata(
            dataset_id=dataset_id,
            stage=stage_class.name,
            order=STAGE_NAMES.index(stage_class.name),
        )
        await stage_class(metadata, control)()


async def analyse_dataset(
    dataset: NvDataset,
    control: Control,
    semaphore: asyncio.Semaphore,
) -> None:
    async with semaphore:
        logger.info("Analysing %s", dataset.id)
        await _run(DATASET_STAGES, dataset.id, control)


async def analyse_ensemble(control: Control) -> None:
    await _run(ENSEMBLE_STAGES, ENSEMBLE_ID, control)


async def run_stages(
    dataset: NvDataset, config: AnalysisConfig, stages: Sequence
) -> Tuple[Dict[str, Any], List[Dict]]:
    """Run a subset of the dataset stages, for the single-step commands."""
    queue = asyncio.Queue()
    control = Control(
        queue=queue,
        config=config,
        results={},
        dataset=dataset,
        ensemble=None,
    )
    await _run(stages, dataset.id, control)
    return control.results, _drain(queue)


def _drain(queue: asyncio.Queue) -> List[Dict]:
    statuses = []
    while not queue.empty():
        statuses.append(queue.get_nowait())
    statuses.sort(key=lambda s: (s["dataset_id"], s["order"]))
    return statuses


async def run_pipeline(
    datasets: Sequence[NvDataset], config: AnalysisConfig
) -> Report:
    """Run every stage on every dataset, then the ensemble stages."""
    if not datasets:
        raise ValueError("the pipeline needs at least one dataset")
    ids = [dataset.id for dataset in datasets]
    if len(set(ids)) != len(ids):
        raise ValueError(f"dataset ids must be unique, got {ids}")
    queue = asyncio.Queue()
    controls = {
        dataset.id: Control(
            queue=queue,
            config=config,
            results={},
            dataset=dataset,
            ensemble=None,
        )
        for dataset in datasets
    }
    semaphore = asyncio.Semaphore(config.workers)
    await asyncio.gather(
        *(
            analyse_dataset(dataset, controls[dataset.id], semaphore)
            for dataset in datasets
        )
    )
    ensemble = Control(
        queue=queue,
        config=config,
        results={},
        dataset=None,
        ensemble=controls,
    )
    await analyse_ensemble(ensemble)
    statuses = _drain(queue)
    failed = [s for s in statuses if s["status"] == "failed"]
    logger.info(
        "Pipeline finished: %d stages, %d failed", len(statuses), len(failed)
    )
    return Report(
        config=config,
        datasets=tuple(sorted(datasets, key=lambda d: d.id)),
        results={i: controls[i].results for i in sorted(controls)},
        ensemble=ensemble.results,
        statuses=tuple(statuses),
    )
