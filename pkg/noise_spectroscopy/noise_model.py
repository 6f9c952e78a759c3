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

"""Parametric noise spectral densities.

S is two-sided: the bath autocorrelation is the Fourier transform of S
over the whole frequency axis, and a Lorentzian component carries the total
variance delta**2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from scipy import special

from noise_spectroscopy.exception import (
    InvalidModelException,
    SingularFrequencyException,
)
from noise_spectroscopy.units import C_DIP_MHZ_NM3, TWO_PI

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LorentzianComponent:
    """One Ornstein-Uhlenbeck component.

    Attributes
    ----------
    delta: float
        Coupling strength, rad/us.
    tau_c: float
        Correlation time, us.
    """

    __slots__ = ["delta", "tau_c"]
    delta: float
    tau_c: float

    def __post_init__(self):
        if not np.isfinite(self.delta) or self.delta < 0:
            raise InvalidModelException(
                f"delta must be finite and >= 0, got {self.delta}"
            )
        if not np.isfinite(self.tau_c) or self.tau_c <= 0:
            raise InvalidModelException(
                f"tau_c must be finite and > 0, got {self.tau_c}"
            )

    @property
    def variance(self) -> float:
        return self.delta**2

    @property
    def knee(self) -> float:
        return 1.0 / self.tau_c


@dataclass(frozen=True)
class SingleLorentzian:
    c: LorentzianComponent


@dataclass(frozen=True)
class DoubleLorentzian:
    c1: LorentzianComponent
    c2: LorentzianComponent


@dataclass(frozen=True)
class PowerLaw:
    amplitude: float
    exponent: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.amplitude) or self.amplitude < 0:
            raise InvalidModelException(
                f"amplitude must be finite and >= 0, got {self.amplitude}"
            )
        if not 0.0 < self.exponent < 3.0:
            raise InvalidModelException(
                f"exponent must lie in (0, 3), got {self.exponent}"
            )


@dataclass(frozen=True)
class GaussianLine:
    """Narrow line pair at +-center carrying the total variance ``power``."""

    center: float
    width: float
    power: float

    def __post_init__(self):
        if not self.center > 0:
            raise InvalidModelException("line center must be > 0")
        if not self.width > 0:
            raise InvalidModelException("line width must be > 0")
        if not np.isfinite(self.power) or self.power < 0:
            raise InvalidModelException("line power must be >= 0")


@dataclass(frozen=True)
class SumModel:
    models: Tuple["NoiseSpectrumModel", ...]

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))


NoiseSpectrumModel = Union[
    SingleLorentzian, DoubleLorentzian, PowerLaw, GaussianLine, SumModel
]


def components(model: NoiseSpectrumModel) -> List[Any]:
    """Flatten a model into its elementary terms."""
    if isinstance(model, SingleLorentzian):
        return [model.c]
    if isinstance(model, DoubleLorentzian):
        return [model.c1, model.c2]
    if isinstance(model, (PowerLaw, GaussianLine)):
        return [model]
    if isinstance(model, SumModel):
        flat = []
        for item in model.models:
            flat.extend(components(item))
        return flat
    raise InvalidModelException(f"Unknown spectrum model {model!r}")


def _term(term, omega: np.ndarray) -> np.ndarray:
    if isinstance(term, LorentzianComponent):
        tau = term.tau_c
        return term.delta**2 * tau / np.pi / (1.0 + (omega * tau) ** 2)
    if isinstance(term, PowerLaw):
        if np.any(omega == 0):
            raise SingularFrequencyException(
                "PowerLaw spectrum is singular at omega = 0"
            )
        return term.amplitude / omega**term.exponent
    norm = term.power / (2.0 * term.width * np.sqrt(TWO_PI))
    upper = np.exp(-0.5 * ((omega - term.center) / term.width) ** 2)
    lower = np.exp(-0.5 * ((omega + term.center) / term.width) ** 2)
    return norm * (upper + lower)


def evaluate_spectrum(model: NoiseSpectrumModel, omega):
    """S(omega) in rad^2/us for omega >= 0 in rad/us."""
    values = np.asarray(omega, dtype=float)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise ValueError("omega must be >= 0")
    result = np.zeros_like(values)
    for term in components(model):
        result = result + _term(term, values)
    if result.ndim == 0:
        return float(result)
    return result


def autocorrelation(component: LorentzianComponent, lag):
    """Delta^2 exp(-|lag|/tau_c), rad^2/us^2."""
    value = component.delta**2 * np.exp(-np.abs(lag) / component.tau_c)
    if np.ndim(value) == 0:
        return float(value)
    return value


def spin_spacing_from_tau(tau_c: float) -> float:
    """Spacing (nm) at which the pair dipolar rate matches 1/tau_c.

    Single-pair estimate: C_dip / r^3 = 1 / tau_c with C_dip in MHz nm^3
    and tau_c in us.
    """
    if not tau_c > 0:
        raise ValueError("tau_c must be > 0")
    return float(np.cbrt(C_DIP_MHZ_NM3 * tau_c))


def total_variance(model: NoiseSpectrumModel) -> float:
    """Integral of S over the whole axis; infinite for a power law."""
    total = 0.0
    for term in components(model):
        if isinstance(term, LorentzianComponent):
            total += term.delta**2
        elif isinstance(term, GaussianLine):
            total += term.power
        elif term.amplitude > 0:
            return float("inf")
    return total


def _lorentzian_tail(term: LorentzianComponent, omega: float) -> float:
    scale = term.delta**2 * term.tau_c / np.pi
    x = omega * term.tau_c
    if x > 1.0e2:
        inv = 1.0 / (x * x)
        series = inv / 3.0 - inv**2 / 5.0 + inv**3 / 7.0
        return scale * series / omega
    return scale * (1.0 / omega - term.tau_c * np.arctan(1.0 / x))


def tail_moment(model: NoiseSpectrumModel, omega: float) -> float:
    """Integral of S(w)/w^2 from omega to infinity.

    Exact for Lorentzian and power-law terms; an upper bound for lines.
    """
    if not omega > 0:
        raise ValueError("tail start must be > 0")
    total = 0.0
    for term in components(model):
        if isinstance(term, LorentzianComponent):
            total += _lorentzian_tail(term, omega)
        elif isinstance(term, PowerLaw):
            alpha = term.exponent
            total += term.amplitude * omega ** (-alpha - 1.0) / (alpha + 1.0)
        else:
            scale = np.sqrt(2.0) * term.width
            mass = 0.25 * term.power * (
                special.erfc((omega - term.center) / scale)
                + special.erfc((omega + term.center) / scale)
            )
            total += mass / omega**2
    return float(total)


def bandwidth_hints(model: NoiseSpectrumModel) -> Dict[str, List[float]]:
    """Frequencies where the spectrum changes shape, for quadrature grids."""
    knees, lines = [], []
    for term in components(model):
        if isinstance(term, LorentzianComponent):
            knees.append(term.knee)
        elif isinstance(term, GaussianLine):
            lines.append((term.center, term.width))
    return {"knees": knees, "lines": lines}


def _component_params(c: LorentzianComponent) -> Dict[str, float]:
    return {"delta_mhz": c.delta / TWO_PI, "tau_c_us": c.tau_c}


def _component_from(params: Dict[str, float]) -> LorentzianComponent:
    return LorentzianComponent(
        delta=float(params["delta_mhz"]) * TWO_PI,
        tau_c=float(params["tau_c_us"]),
    )


def model_to_json(model: NoiseSpectrumModel) -> Dict[str, Any]:
    """Serialize with frequencies and couplings in MHz."""
    if isinstance(model, SingleLorentzian):
        return {
            "variant": "SingleLorentzian",
            "params": _component_params(model.c),
        }
    if isinstance(model, DoubleLorentzian):
        return {
            "variant": "DoubleLorentzian",
            "params": {
                "c1": _component_params(model.c1),
                "c2": _component_params(model.c2),
            },
        }
    if isinstance(model, PowerLaw):
        return {
            "variant": "PowerLaw",
            "params": {
                "amplitude": model.amplitude,
                "exponent": model.exponent,
            },
        }
    if isinstance(model, GaussianLine):
        return {
            "variant": "GaussianLine",
            "params": {
                "center_mhz": model.center / TWO_PI,
                "width_mhz": model.width / TWO_PI,
                "power_mhz2": model.power / TWO_PI**2,
            },
        }
    if isinstance(model, SumModel):
        return {
            "variant": "Sum",
            "params": {"models": [model_to_json(m) for m in model.models]},
        }
    raise InvalidModelException(f"Unknown spectrum model {model!r}")


def model_from_json(data: Dict[str, Any]) -> NoiseSpectrumModel:
    try:
        variant = data["variant"]
        params = data["params"]
        if variant == "SingleLorentzian":
            return SingleLorentzian(_component_from(params))
        if variant == "DoubleLorentzian":
            return DoubleLorentzian(
                _component_from(params["c1"]), _component_from(params["c2"])
            )
        if variant == "PowerLaw":
            return PowerLaw(
                float(params["amplitude"]), float(params.get("exponent", 1.0))
            )
        if variant == "GaussianLine":
            return GaussianLine(
                center=float(params["center_mhz"]) * TWO_PI,
                width=float(params["width_mhz"]) * TWO_PI,
                power=float(params["power_mhz2"]) * TWO_PI**2,
            )
        if variant == "Sum":
            return SumModel(
                tuple(model_from_json(m) for m in params["models"])
            )
    except (KeyError, TypeError) as err:
        raise InvalidModelException(f"Malformed model JSON: {err}") from err
    raise InvalidModelException(f"Unknown model variant {variant!r}")
