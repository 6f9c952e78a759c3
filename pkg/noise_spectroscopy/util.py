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

import importlib.metadata
import json
import logging
import platform
import sys
from datetime import datetime, timezone
from typing import Any

import xxhash

logger = logging.getLogger(__name__)

# keep derived seeds inside the range numpy's SeedSequence accepts cheaply
SEED_MASK = (1 << 63) - 1


def get_package_version(package_name: str) -> str:
    """Return version of the given package."""
    try:
        return importlib.metadata.version(package_name)
    except importlib.metadata.PackageNotFoundError:
        logger.error("Cannot read version from %s package", package_name)
        return "unknown"


def get_version() -> str:
    result = [
        f"noise-spectroscopy [{get_package_version('noise_spectroscopy')}]",
        f"  Executable location = {sys.argv[0]}",
        f"  Numpy version = {get_package_version('numpy')}",
        f"  Scipy version = {get_package_version('scipy')}",
        f"  Matplotlib version = {get_package_version('matplotlib')}",
        f"  Python version = {platform.python_version()}",
        f"  Python executable = {sys.executable}",
        f"  Platform = {platform.platform()}",
    ]
    return "\n".join(result)


def startup_logging(logger: logging.Logger):
    logger.info(get_version())


def derive_seed(seed: int, *labels: Any) -> int:
    """Stable 63-bit seed for a labelled sub-stream of ``seed``.

    The same (seed, labels) always maps to the same value, whatever
    process or thread asks for it.
    """
    key = "/".join([str(int(seed))] + [str(label) for label in labels])
    return xxhash.xxh64_intdigest(key.encode("utf-8")) & SEED_MASK


def canonical_json(data: Any) -> str:
    return json.dumps(
        data, sort_keys=True, allow_nan=False, separators=(",", ":")
    )


def fingerprint(data: Any) -> str:
    """xxh64 hex digest of the canonical JSON form of ``data``."""
    return xxhash.xxh64_hexdigest(canonical_json(data).encode("utf-8"))


def run_at() -> str:
    return f"{datetime.now(timezone.utc).isoformat()}".replace("+00:00", "Z")
