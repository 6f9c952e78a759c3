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

import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import dpath
import yaml

from noise_spectroscopy.exception import InvalidConfigException
from noise_spectroscopy.units import DEFAULT_PROTON_DENSITY
from noise_spectroscopy.validators import Validate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisConfig:
    """Tunables of the analysis chain.

    Attributes
    ----------
    coherence_window: (float, float)
        Coherence values inside this window are used for spectral
        reconstruction and mark a curve as decayed.
    decay_amplitude_bounds, decay_stretch_bounds: (float, float)
        Bounds of A and p in C(t) = A exp(-(t/T2)^p).
    scaling_k_bounds: (float, float)
        Bounds of the pulse-number scaling exponent.
    depth_exponent_bounds: (float, float)
        Bounds of n in delta(d) = a / d^n.
    quad_rtol: float
        Relative target of the coherence integral.
    quad_max_subdivisions: int
        Maximum bisection rounds before the integral is declared failed.
    mc_n_traj, mc_seeds, mc_block:
        Monte-Carlo defaults; trajectories are drawn in fixed blocks so
        results do not depend on the number of workers.
    sigma_c: float
        Coherence noise used when a dataset does not carry sigma.
    sigma_floor: float
        Lower bound of every sigma used as a fit weight.
    """

    coherence_window: Tuple[float, float] = (0.05, 0.95)
    decay_amplitude_bounds: Tuple[float, float] = (0.8, 1.05)
    decay_stretch_bounds: Tuple[float, float] = (0.5, 3.5)
    scaling_k_bounds: Tuple[float, float] = (0.0, 1.0)
    depth_exponent_bounds: Tuple[float, float] = (0.0, 3.0)
    quad_rtol: float = 1.0e-5
    quad_max_subdivisions: int = 40
    mc_n_traj: int = 10000
    mc_seeds: Tuple[int, ...] = (11, 23, 47)
    mc_block: int = 1000
    sigma_c: float = 0.02
    sigma_floor: float = 1.0e-6
    proton_density: float = DEFAULT_PROTON_DENSITY
    density_rel_err: float = 0.10
    nmr_window: float = 0.15
    nmr_significance: float = 2.0
    harmonic_correction: bool = False
    bootstrap: bool = False
    bootstrap_replicas: int = 200
    band_points: int = 200
    output_dir: str = "out"
    seed: int = 0
    frequency_unit: str = "MHz"
    workers: int = 1

    def __post_init__(self):
        for name in ("coherence_window",) + _BOUND_FIELDS:
            value = tuple(getattr(self, name))
            if len(value) != 2 or not value[0] < value[1]:
                raise InvalidConfigException(
                    f"{name} must be an increasing pair, got {value}"
                )
            object.__setattr__(self, name, value)
        low, high = self.coherence_window
        if not (0.0 < low and high < 1.0):
            raise InvalidConfigException(
                f"coherence_window must lie inside (0, 1), got {low}, {high}"
            )
        for name in _POSITIVE_FIELDS:
            if not getattr(self, name) > 0:
                raise InvalidConfigException(f"{name} must be positive")
        if self.sigma_c < 0:
            raise InvalidConfigException("sigma_c must not be negative")
        if self.frequency_unit != "MHz":
            raise InvalidConfigException("frequency_unit is fixed to MHz")
        object.__setattr__(self, "mc_seeds", tuple(self.mc_seeds))

    def replace(self, **changes) -> "AnalysisConfig":
        return dataclasses.replace(self, **changes)


_BOUND_FIELDS = (
    "decay_amplitude_bounds",
    "decay_stretch_bounds",
    "scaling_k_bounds",
    "depth_exponent_bounds",
)
_POSITIVE_FIELDS = (
    "quad_rtol",
    "quad_max_subdivisions",
    "mc_n_traj",
    "mc_block",
    "sigma_floor",
    "proton_density",
    "density_rel_err",
    "nmr_window",
    "nmr_significance",
    "bootstrap_replicas",
    "band_points",
    "workers",
)


def config_from_dict(data: Dict[str, Any]) -> AnalysisConfig:
    names = {f.name for f in dataclasses.fields(AnalysisConfig)}
    unknown = set(data) - names
    if unknown:
        raise InvalidConfigException(
            f"Unknown config keys: {', '.join(sorted(unknown))}"
        )
    try:
        return AnalysisConfig(**data)
    except TypeError as err:
        raise InvalidConfigException(str(err)) from err


def apply_overrides(data: Dict[str, Any], overrides: List[str]) -> Dict:
    """Apply ``key.sub=value`` overrides, values parsed as YAML scalars."""
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise InvalidConfigException(
                f"Override {item!r} is not of the form key=value"
            )
        dpath.new(data, key, yaml.safe_load(raw), separator=".")
    return data


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a YAML config file, validated against the config schema."""
    with open(path) as f:
        data = yaml.safe_load(f.read()) or {}
    if not isinstance(data, dict):
        raise InvalidConfigException(f"{path} must contain a mapping")
    Validate.config(data)
    return data


class _Settings:
    def __init__(self):
        self.config = AnalysisConfig()
        self.synthetic: Optional[Dict[str, Any]] = None
        self.plan: Optional[Dict[str, Any]] = None
        self.workers = 1
        self.stamp = False
        self.mc_oracle = False
        self.bootstrap = False


settings = _Settings()
