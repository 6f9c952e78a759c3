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
import logging
from typing import Any, Tuple

from noise_spectroscopy import exception

from .control import Control
from .helper import INTERNAL_ERROR, Helper
from .metadata import Metadata

logger = logging.getLogger(__name__)

# Errors a stage reports under their own tag; any other exception is
# reported as internal-error
STAGE_ERRORS = (
    ValueError,
    exception.QuadratureFailureException,
    exception.DecayFitFailedException,
    exception.UndecayedException,
    exception.ScalingUnderdeterminedException,
    exception.SpectrumUnderdeterminedException,
    exception.EmptySpectrumException,
    exception.T1FitFailedException,
    exception.FitFailedException,
    exception.DegenerateFitException,
    exception.CovarianceInvalidException,
    exception.NmrNotFoundException,
    exception.WindowUncoveredException,
    exception.InvalidModelException,
)


class StageSkipped(Exception):
    """Raised from compute() when the stage has nothing to work on."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class Stage:
    """One step of the analysis chain.

    Subclasses set ``name`` and ``requires`` and implement compute(),
    which runs in a worker thread and returns the stage result. The
    result is stored in ``control.results[name]`` and a status is sent
    on the control queue whatever happens.
    """

    name = ""
    requires: Tuple[str, ...] = ()

    def __init__(self, metadata: Metadata, control: Control):
        self.helper = Helper(metadata, control)
        self.control = control
        self.config = control.config

    def compute(self) -> Any:
        raise NotImplementedError

    async def __call__(self):
        missing = [r for r in self.requires if r not in self.control.results]
        if missing:
            await self.helper.send_skipped(f"needs-{missing[0]}")
            return
        try:
            result = await asyncio.to_thread(self.compute)
        except StageSkipped as err:
            await self.helper.send_skipped(err.reason)
            return
        except exception.NotGlobalException:
            await self.helper.send_skipped("not-global")
            return
        except STAGE_ERRORS as err:
            await self.helper.send_failure(err)
            return
        except Exception as err:
            logger.exception(
                "%s: unexpected error in %s",
                self.helper.metadata.dataset_id,
                self.name,
            )
            await self.helper.send_failure(err, INTERNAL_ERROR)
            return
        self.control.results[self.name] = result
        await self.helper.send_success()
