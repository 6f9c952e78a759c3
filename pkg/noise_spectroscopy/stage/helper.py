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

import logging
from typing import Dict, Optional

from noise_spectroscopy.conf import settings
from noise_spectroscopy.exception import error_tag
from noise_spectroscopy.util import run_at

from .control import Control
from .metadata import Metadata

logger = logging.getLogger(__name__)

SUCCESSFUL_STATUS = "successful"
FAILED_STATUS = "failed"
SKIPPED_STATUS = "skipped"
INTERNAL_ERROR = "internal-error"


class Helper:
    """
    Helper class stores the metadata, the control attributes and has
    methods to send stage statuses to the Queue.

    Attributes
    ----------
      metadata : Metadata
         a data class that stores stage specific data
      control : Control
         a control dataclass with the status queue, the config and
         the results of the stages that already ran

    Methods
    -------
       send_status(data={}, obj_type:"Stage")
          Sends the stage status information on the queue
       send_success()
          Sends the successful status
       send_failure(exc, reason=None)
          Sends the failed status, by default with the error tag of exc
          as reason
       send_skipped(reason)
          Sends the skipped status
    """

    def __init__(self, metadata: Metadata, control: Control):
        self.metadata = metadata
        self.control = control

    async def send_status(self, data: Dict, obj_type: str = "Stage") -> None:
        """Send stage status information on the queue"""
        payload = {
            "type": obj_type,
            "dataset_id": self.metadata.dataset_id,
            "stage": self.metadata.stage,
            "order": self.metadata.order,
            "reason": None,
        }
        # run_at only with --stamp, reports stay byte-identical otherwise
        if settings.stamp:
            payload["run_at"] = run_at()
        payload.update(data)
        await self.control.queue.put(payload)

    async def send_success(self) -> None:
        await self.send_status({"status": SUCCESSFUL_STATUS})

    async def send_failure(
        self, exc: BaseException, reason: Optional[str] = None
    ) -> None:
        logger.warning(
            "%s: %s failed: %s",
            self.metadata.dataset_id,
            self.metadata.stage,
            exc,
        )
        await self.send_status(
            {
                "status": FAILED_STATUS,
                "reason": reason or error_tag(exc),
                "message": str(exc),
            }
        )

    async def send_skipped(self, reason: str) -> None:
        logger.info(
            "%s: %s skipped (%s)",
            self.metadata.dataset_id,
            self.metadata.stage,
            reason,
        )
        await self.send_status({"status": SKIPPED_STATUS, "reason": reason})
