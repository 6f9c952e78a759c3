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

from .base import Stage, StageSkipped
from .control import Control
from .decay import DecayRow, DecayStage, ScalingStage, decay_table
from .ensemble import (
    ENSEMBLE_ID,
    DepthScalingResult,
    DepthScalingStage,
    GlobalFitStage,
)
from .helper import FAILED_STATUS, SKIPPED_STATUS, SUCCESSFUL_STATUS, Helper
from .metadata import Metadata
from .nmr import NmrResult, NmrStage, sweep_spectrum
from .relaxation import SaturationStage, T1Stage
from .spectrum import (
    ModelResults,
    ModelStage,
    SpectrumResult,
    SpectrumStage,
    model_bands,
)

# pipeline order; a stage runs once its requirements stored a result
DATASET_STAGES = (
    DecayStage,
    ScalingStage,
    SpectrumStage,
    ModelStage,
    T1Stage,
    SaturationStage,
    NmrStage,
)
ENSEMBLE_STAGES = (GlobalFitStage, DepthScalingStage)
STAGE_NAMES = tuple(s.name for s in DATASET_STAGES + ENSEMBLE_STAGES)

__all__ = [
    "Control",
    "DATASET_STAGES",
    "DecayRow",
    "DecayStage",
    "DepthScalingResult",
    "DepthScalingStage",
    "ENSEMBLE_ID",
    "ENSEMBLE_STAGES",
    "FAILED_STATUS",
    "GlobalFitStage",
    "Helper",
    "Metadata",
    "ModelResults",
    "ModelStage",
    "NmrResult",
    "NmrStage",
    "SKIPPED_STATUS",
    "STAGE_NAMES",
    "SUCCESSFUL_STATUS",
    "SaturationStage",
    "ScalingStage",
    "SpectrumResult",
    "SpectrumStage",
    "Stage",
    "StageSkipped",
    "T1Stage",
    "decay_table",
    "model_bands",
    "sweep_spectrum",
]
