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

import pytest

from noise_spectroscopy.stage import Control, Metadata


@pytest.fixture
def base_metadata():
    return Metadata(dataset_id="NV4", stage="decay", order=0)


# the queue is created inside the test so it binds to the test's loop
@pytest.fixture
def create_control(analysis_config, create_dataset, **kwargs):
    def _control(**kwargs):
        dataset = kwargs.pop("dataset", None)
        if dataset is None and "ensemble" not in kwargs:
            dataset = create_dataset()
        return Control(
            queue=kwargs.pop("queue", asyncio.Queue()),
            config=kwargs.pop("config", analysis_config),
            results=kwargs.pop("results", {}),
            dataset=dataset,
            ensemble=kwargs.pop("ensemble", None),
        )

    return _control

