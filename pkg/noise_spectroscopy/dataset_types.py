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

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from noise_spectroscopy.exception import (
    OutOfRangeException,
    TimesNotIncreasingException,
    TooFewPointsException,
)
from noise_spectroscopy.filter_functions import PulseSequence, SequenceKind

MIN_CURVE_POINTS = 4
COHERENCE_RANGE = (-0.2, 1.2)


def _as_tuple(values: Sequence[float]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _check_series(
    what: str, times: Tuple[float, ...], values: Tuple[float, ...], sigma
) -> None:
    if len(times) < MIN_CURVE_POINTS:
        raise TooFewPointsException(
            f"{what} needs at least {MIN_CURVE_POINTS} points, "
            f"got {len(times)}"
        )
    if len(values) != len(times) or len(sigma) != len(times):
        raise ValueError(f"{what}: times, values and sigma differ in length")
    if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
        raise ValueError(f"{what}: non-finite entries")
    if np.any(np.diff(times) <= 0):
        raise TimesNotIncreasingException(
            f"{what}: times are not strictly increasing"
        )
    if np.any(np.asarray(sigma) < 0):
        raise ValueError(f"{what}: sigma must not be negative")


@dataclass(frozen=True)
class CoherenceCurve:
    """Coherence versus total sequence time for one pulse number.

    ``n_pulses`` is the effective pi-pulse count: 0 for Ramsey and 8m for
    an XY8-m sequence.
    """

    n_pulses: int
    sequence: str
    times: Tuple[float, ...]
    coherence: Tuple[float, ...]
    sigma: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", _as_tuple(self.times))
        object.__setattr__(self, "coherence", _as_tuple(self.coherence))
        object.__setattr__(self, "sigma", _as_tuple(self.sigma))
        kind = SequenceKind(self.sequence)
        if self.n_pulses < 0:
            raise ValueError("n_pulses must be >= 0")
        if (kind is SequenceKind.RAMSEY) != (self.n_pulses == 0):
            raise ValueError("n_pulses = 0 is reserved for Ramsey curves")
        what = f"{self.sequence}-{self.n_pulses} curve"
        _check_series(what, self.times, self.coherence, self.sigma)
        low, high = COHERENCE_RANGE
        values = np.asarray(self.coherence)
        if np.any(values < low) or np.any(values > high):
            raise OutOfRangeException(
                f"{what}: coherence outside [{low}, {high}]"
            )

    @property
    def kind(self) -> SequenceKind:
        return SequenceKind(self.sequence)

    def pulse_sequence(self, time: float) -> PulseSequence:
        return PulseSequence.for_curve(self.sequence, self.n_pulses, time)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self.times),
            np.asarray(self.coherence),
            np.asarray(self.sigma),
        )


@dataclass(frozen=True)
class T1Curve:
    times: Tuple[float, ...]
    population: Tuple[float, ...]
    sigma: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", _as_tuple(self.times))
        object.__setattr__(self, "population", _as_tuple(self.population))
        object.__setattr__(self, "sigma", _as_tuple(self.sigma))
        _check_series("T1 curve", self.times, self.population, self.sigma)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self.times),
            np.asarray(self.population),
            np.asarray(self.sigma),
        )


@dataclass(frozen=True)
class NvDataset:
    """One sensor: coherence curves, optional T1 data and metadata tags.

    Temperature and coating are carried as tags only.
    """

    id: str
    nominal_depth_nm: float
    field_gauss: float
    curves: Tuple[CoherenceCurve, ...]
    temperature_k: Optional[float] = None
    coating: Optional[str] = None
    t1: Optional[T1Curve] = None
    measured_depth_nm: Optional[float] = None
    measured_depth_err_nm: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        if not self.id:
            raise ValueError("dataset id must not be empty")
        if not self.nominal_depth_nm > 0:
            raise ValueError("nominal depth must be > 0")
        if self.field_gauss < 0:
            raise ValueError("field must be >= 0")

    @property
    def depth(self) -> Tuple[float, float]:
        """Best known depth and its error, nm."""
        if self.measured_depth_nm is not None:
            return self.measured_depth_nm, self.measured_depth_err_nm or 0.0
        return self.nominal_depth_nm, 0.0

    def decay_curves(self) -> Tuple[CoherenceCurve, ...]:
        """CPMG curves, the input of the decay and scaling analysis."""
        return tuple(c for c in self.curves if c.kind is SequenceKind.CPMG)

    def sweep_curves(self) -> Tuple[CoherenceCurve, ...]:
        return tuple(c for c in self.curves if c.kind is SequenceKind.XY8)


@dataclass(frozen=True)
class SpectrumEstimate:
    """Sampled noise spectrum.

    omega in rad/us (strictly increasing), s and sigma in rad^2/us.
    ``provenance`` holds the (N, t) pair each point was inverted from.
    S may be negative at the noise floor.
    """

    omega: Tuple[float, ...]
    s: Tuple[float, ...]
    sigma: Tuple[float, ...]
    provenance: Tuple[Tuple[int, float], ...]
    harmonic_corrected: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omega", _as_tuple(self.omega))
        object.__setattr__(self, "s", _as_tuple(self.s))
        object.__setattr__(self, "sigma", _as_tuple(self.sigma))
        object.__setattr__(
            self,
            "provenance",
            tuple((int(n), float(t)) for n, t in self.provenance),
        )
        sizes = {
            len(self.omega),
            len(self.s),
            len(self.sigma),
            len(self.provenance),
        }
        if len(sizes) != 1:
            raise ValueError("spectrum columns differ in length")
        if np.any(np.diff(self.omega) <= 0):
            raise ValueError("spectrum frequencies must be increasing")
        if np.any(np.asarray(self.sigma) <= 0):
            raise ValueError("spectrum sigma must be > 0")

    def __len__(self) -> int:
        return len(self.omega)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self.omega),
            np.asarray(self.s),
            np.asarray(self.sigma),
        )

    def distinct_pulse_numbers(self) -> Tuple[int, ...]:
        return tuple(sorted({n for n, _ in self.provenance}))

    def subset(self, mask) -> "SpectrumEstimate":
        mask = np.asarray(mask, dtype=bool)
        return SpectrumEstimate(
            omega=np.asarray(self.omega)[mask],
            s=np.asarray(self.s)[mask],
            sigma=np.asarray(self.sigma)[mask],
            provenance=[p for p, keep in zip(self.provenance, mask) if keep],
            harmonic_corrected=self.harmonic_corrected,
        )
