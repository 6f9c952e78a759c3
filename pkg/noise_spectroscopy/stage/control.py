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
from dataclasses import dataclass
from typing import Any, Dict, Optional

from noise_spectroscopy.conf import AnalysisConfig
from noise_spectroscopy.dataset_types import NvDataset


@dataclass(frozen=True)
class Control:
    """Control information when running a stage

    Attributes:
    queue: asyncio.Queue
       The queue on which the stage status is sent when it finishes
    config: AnalysisConfig
       The analysis tunables in effect for this run
    results: dict
       Stage name to result of the stages that already ran on this
       dataset; stages read their inputs from it and store their output
       under their own name
    dataset: NvDataset
       The dataset being analysed, None for ensemble stages
    ensemble: dict
       Dataset id to the Control of every dataset, only set for
       ensemble stages
    """

    __slots__ = [
        "queue",
        "config",
        "results",
        "dataset",
        "ensemble",
    ]
    queue: asyncio.Queue
    config: AnalysisConfig
    results: Dict[str, Any]
    dataset: Optional[NvDataset]
    ensemble: Optional[Dict[str, "Control"]]
