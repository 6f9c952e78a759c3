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

from dataclasses import dataclass


@dataclass(frozen=True)
class Metadata:
    """Metadata class stores the stage specific information
    which is used when reporting the status of a stage

    Attributes
    ----------
    dataset_id: str
        Id of the dataset the stage runs on, "ensemble" for the
        stages that combine datasets
    stage: str
        Stage name
    order: int
        Position of the stage in the pipeline, used to sort statuses
    """

    __slots__ = [
        "dataset_id",
        "stage",
        "order",
    ]
    dataset_id: str
    stage: str
    order: int
